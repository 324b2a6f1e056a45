#include "pharmmt/sig_text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace pharmmt::sig {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

const std::unordered_map<std::string, double>& word_numbers() {
    static const std::unordered_map<std::string, double> table = {
        {"one", 1},    {"two", 2},       {"three", 3},    {"four", 4},
        {"five", 5},   {"six", 6},       {"seven", 7},    {"eight", 8},
        {"nine", 9},   {"ten", 10},      {"eleven", 11},  {"twelve", 12},
        {"thirteen", 13}, {"fourteen", 14}, {"fifteen", 15}, {"sixteen", 16},
        {"seventeen", 17}, {"eighteen", 18}, {"nineteen", 19}, {"twenty", 20},
        {"half", 0.5}, {"quarter", 0.25},
    };
    return table;
}

std::optional<double> parse_plain_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    bool dot = false;
    for (char c : s) {
        if (c == '.') {
            if (dot) return std::nullopt;
            dot = true;
        } else if (!is_digit(c)) {
            return std::nullopt;
        }
    }
    if (s.front() == '.' || s.back() == '.') return std::nullopt;
    return std::stod(std::string(s));
}

// "a/b" or "a b/c"
std::optional<double> parse_fraction_text(std::string_view s) {
    double whole = 0.0;
    auto space = s.find(' ');
    if (space != std::string_view::npos) {
        auto w = parse_plain_number(s.substr(0, space));
        if (!w) return std::nullopt;
        whole = *w;
        s = s.substr(space + 1);
    }
    auto slash = s.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto num = parse_plain_number(s.substr(0, slash));
    auto den = parse_plain_number(s.substr(slash + 1));
    if (!num || !den || *den == 0.0) return std::nullopt;
    return whole + *num / *den;
}

}  // namespace

std::string render_decimal(double value) {
    long long cents = std::llround(value * 100.0);
    long long whole = cents / 100;
    long long frac = cents % 100;
    std::string out = std::to_string(whole);
    if (frac != 0) {
        out += '.';
        if (frac % 10 == 0) {
            out += static_cast<char>('0' + frac / 10);
        } else {
            out += static_cast<char>('0' + frac / 10);
            out += static_cast<char>('0' + frac % 10);
        }
    }
    return out;
}

std::string Quantity::canonical() const { return render_decimal(value); }

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        if (is_digit(c)) {
            while (i < n && is_digit(text[i])) ++i;
            bool decimal = false;
            if (i + 1 < n && text[i] == '.' && is_digit(text[i + 1])) {
                decimal = true;
                ++i;
                while (i < n && is_digit(text[i])) ++i;
            }
            TokenKind kind = TokenKind::Number;
            if (!decimal && i + 1 < n && text[i] == '/' && is_digit(text[i + 1])) {
                kind = TokenKind::Fraction;
                ++i;
                while (i < n && is_digit(text[i])) ++i;
            }
            tokens.push_back({std::string(text.substr(begin, i - begin)), kind, begin, i});
        } else if (is_alpha(c)) {
            while (i < n && is_alpha(text[i])) ++i;
            std::string word(text.substr(begin, i - begin));
            std::transform(word.begin(), word.end(), word.begin(),
                           [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
            tokens.push_back({std::move(word), TokenKind::Word, begin, i});
        } else {
            ++i;
            tokens.push_back({std::string(1, c), TokenKind::Punctuation, begin, i});
        }
    }

    // Merge adjacent "N a/b" into a single mixed-number token. Adjacency means
    // only whitespace separates the two in the original text.
    std::vector<Token> merged;
    merged.reserve(tokens.size());
    for (std::size_t k = 0; k < tokens.size(); ++k) {
        if (k + 1 < tokens.size() && tokens[k].kind == TokenKind::Number &&
            tokens[k].text.find('.') == std::string::npos &&
            tokens[k + 1].kind == TokenKind::Fraction &&
            tokens[k + 1].text.find(' ') == std::string::npos) {
            bool whitespace_gap = true;
            for (std::size_t p = tokens[k].end; p < tokens[k + 1].begin; ++p) {
                if (!std::isspace(static_cast<unsigned char>(text[p]))) whitespace_gap = false;
            }
            if (whitespace_gap) {
                Token t;
                t.text = tokens[k].text + " " + tokens[k + 1].text;
                t.kind = TokenKind::Fraction;
                t.begin = tokens[k].begin;
                t.end = tokens[k + 1].end;
                merged.push_back(std::move(t));
                ++k;
                continue;
            }
        }
        merged.push_back(tokens[k]);
    }
    return merged;
}

std::optional<Quantity> parse_quantity(const std::vector<Token>& run) {
    auto make = [&](double v) {
        Quantity q;
        q.value = v;
        std::string surface;
        for (const auto& t : run) {
            if (!surface.empty()) surface += ' ';
            surface += t.text;
        }
        q.surface = std::move(surface);
        return q;
    };

    if (run.empty()) return std::nullopt;

    if (run.size() == 1) {
        const Token& t = run[0];
        if (t.kind == TokenKind::Number) {
            auto v = parse_plain_number(t.text);
            if (v) return make(*v);
            return std::nullopt;
        }
        if (t.kind == TokenKind::Fraction) {
            auto v = parse_fraction_text(t.text);
            if (v) return make(*v);
            return std::nullopt;
        }
        if (t.kind == TokenKind::Word) {
            auto it = word_numbers().find(t.text);
            if (it != word_numbers().end()) return make(it->second);
            return std::nullopt;
        }
        return std::nullopt;
    }

    // "<base> and [a] half|quarter"
    auto base_value = [](const Token& t) -> std::optional<double> {
        if (t.kind == TokenKind::Number) return parse_plain_number(t.text);
        if (t.kind == TokenKind::Word) {
            auto it = word_numbers().find(t.text);
            if (it != word_numbers().end()) return it->second;
        }
        return std::nullopt;
    };

    if (run.size() >= 3 && run[1].text == "and") {
        auto base = base_value(run[0]);
        std::size_t fi = 2;
        if (run.size() == 4 && run[2].text == "a") fi = 3;
        if (base && fi == run.size() - 1) {
            if (run[fi].text == "half") return make(*base + 0.5);
            if (run[fi].text == "quarter") return make(*base + 0.25);
        }
        return std::nullopt;
    }

    // "one ( 1 )"
    if (run.size() == 4 && run[1].text == "(" && run[3].text == ")" &&
        run[2].kind == TokenKind::Number) {
        if (base_value(run[0]) && parse_plain_number(run[2].text)) {
            return make(*parse_plain_number(run[2].text));
        }
    }

    return std::nullopt;
}

std::optional<Quantity> parse_quantity(std::string_view text) {
    return parse_quantity(tokenize(text));
}

std::vector<NumericRun> find_numeric_runs(const std::vector<Token>& tokens) {
    std::vector<NumericRun> runs;
    std::size_t i = 0;
    auto try_run = [&](std::size_t len) -> bool {
        if (i + len > tokens.size()) return false;
        std::vector<Token> slice(tokens.begin() + static_cast<long>(i),
                                 tokens.begin() + static_cast<long>(i + len));
        auto q = parse_quantity(slice);
        if (!q) return false;
        runs.push_back({i, len, *q});
        i += len;
        return true;
    };
    while (i < tokens.size()) {
        const Token& t = tokens[i];
        bool numeric_start =
            t.kind == TokenKind::Number || t.kind == TokenKind::Fraction ||
            (t.kind == TokenKind::Word && word_numbers().count(t.text) > 0);
        if (!numeric_start) {
            ++i;
            continue;
        }
        if (try_run(4)) continue;  // "one and a half", "one ( 1 )"
        if (try_run(3)) continue;  // "one and half"
        if (try_run(1)) continue;
        ++i;
    }
    return runs;
}

std::vector<Quantity> all_quantities(const std::vector<Token>& tokens) {
    std::vector<Quantity> out;
    for (const auto& run : find_numeric_runs(tokens)) out.push_back(run.quantity);
    return out;
}

std::vector<Quantity> all_quantities(std::string_view text) {
    return all_quantities(tokenize(text));
}

std::string_view tag_name(ComponentTag tag) {
    switch (tag) {
        case ComponentTag::Action: return "Action";
        case ComponentTag::Dosage: return "Dosage";
        case ComponentTag::Form: return "Form";
        case ComponentTag::Route: return "Route";
        case ComponentTag::Frequency: return "Frequency";
        case ComponentTag::Duration: return "Duration";
        case ComponentTag::Reason: return "Reason";
        case ComponentTag::Drug: return "Drug";
        case ComponentTag::Other: return "Other";
    }
    return "Other";
}

std::optional<ComponentTag> tag_from_name(std::string_view name) {
    static const std::unordered_map<std::string_view, ComponentTag> table = {
        {"Action", ComponentTag::Action},       {"Dosage", ComponentTag::Dosage},
        {"Form", ComponentTag::Form},           {"Route", ComponentTag::Route},
        {"Frequency", ComponentTag::Frequency}, {"Duration", ComponentTag::Duration},
        {"Reason", ComponentTag::Reason},       {"Drug", ComponentTag::Drug},
        {"Other", ComponentTag::Other},
    };
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

bool is_time_unit(std::string_view word) {
    static const std::unordered_set<std::string_view> units = {
        "h",    "hr",    "hrs",   "hour",  "hours",  "day",     "days",
        "dy",   "dys",   "week",  "weeks", "wk",     "wks",     "month",
        "months", "min", "mins",  "minute", "minutes", "dose",  "doses",
    };
    return units.count(word) > 0;
}

void Lexicon::add(std::vector<std::string> pattern, ComponentTag tag, int priority,
                  std::optional<double> implied) {
    if (pattern.empty()) throw std::invalid_argument("lexicon: empty pattern");
    if (implied.has_value()) {
        for (const auto& pat : pattern) {
            if (pat == "<n>") {
                throw std::invalid_argument(
                    "lexicon: implied value not allowed on patterns with <n> captures");
            }
        }
    }
    entries_.push_back(
        {std::move(pattern), tag, priority, static_cast<int>(entries_.size()), implied});
}

Lexicon Lexicon::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
    return parse(in, path);
}

Lexicon Lexicon::parse(std::istream& in, const std::string& name) {
    Lexicon lex;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            auto tab = line.find('\t', start);
            cols.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (cols.size() < 2) {
            throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                     ": expected phrase<TAB>tag[<TAB>priority]");
        }
        auto tag = tag_from_name(cols[1]);
        if (!tag) {
            throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                     ": unknown tag '" + cols[1] + "'");
        }
        int priority = 0;
        if (cols.size() >= 3 && !cols[2].empty()) priority = std::stoi(cols[2]);
        std::optional<double> implied;
        if (cols.size() >= 4 && !cols[3].empty()) {
            try {
                implied = std::stod(cols[3]);
            } catch (const std::exception&) {
                throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                         ": bad implied value '" + cols[3] + "'");
            }
        }
        std::vector<std::string> pattern;
        std::istringstream ps(cols[0]);
        std::string tok;
        while (ps >> tok) pattern.push_back(tok);
        if (pattern.empty()) {
            throw std::runtime_error(name + ":" + std::to_string(lineno) + ": empty phrase");
        }
        try {
            lex.add(std::move(pattern), *tag, priority, implied);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(name + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return lex;
}

namespace {

bool pattern_token_matches(const std::string& pat, const Token& tok) {
    if (pat == "<n>") {
        return tok.kind == TokenKind::Number || tok.kind == TokenKind::Fraction;
    }
    if (pat == "<unit>") {
        return tok.kind == TokenKind::Word && is_time_unit(tok.text);
    }
    return tok.text == pat;
}

}  // namespace

TaggedDirection tag_components(const std::vector<Token>& tokens, const Lexicon& lexicon) {
    TaggedDirection out;
    out.tokens = tokens;
    out.tags.assign(tokens.size(), ComponentTag::Other);

    std::size_t i = 0;
    while (i < tokens.size()) {
        const Lexicon::Entry* best = nullptr;
        for (const auto& entry : lexicon.entries()) {
            if (i + entry.pattern.size() > tokens.size()) continue;
            bool match = true;
            for (std::size_t k = 0; k < entry.pattern.size(); ++k) {
                if (!pattern_token_matches(entry.pattern[k], tokens[i + k])) {
                    match = false;
                    break;
                }
            }
            if (!match) continue;
            if (best == nullptr ||
                entry.pattern.size() > best->pattern.size() ||
                (entry.pattern.size() == best->pattern.size() &&
                 (entry.priority < best->priority ||
                  (entry.priority == best->priority && entry.order < best->order)))) {
                best = &entry;
            }
        }
        if (best != nullptr) {
            for (std::size_t k = 0; k < best->pattern.size(); ++k) {
                out.tags[i + k] = best->tag;
            }
            if (best->implied.has_value()) {
                std::string surface;
                for (std::size_t k = 0; k < best->pattern.size(); ++k) {
                    if (!surface.empty()) surface += ' ';
                    surface += tokens[i + k].text;
                }
                out.implied.emplace_back(i, Quantity{*best->implied, std::move(surface)});
            }
            i += best->pattern.size();
        } else {
            ++i;
        }
    }

    // A number directly preceding a Form word is a dosage.
    for (const auto& run : find_numeric_runs(tokens)) {
        bool all_other = true;
        for (std::size_t k = run.begin; k < run.begin + run.length; ++k) {
            if (out.tags[k] != ComponentTag::Other) all_other = false;
        }
        std::size_t next = run.begin + run.length;
        if (all_other && next < tokens.size() && out.tags[next] == ComponentTag::Form) {
            for (std::size_t k = run.begin; k < run.begin + run.length; ++k) {
                out.tags[k] = ComponentTag::Dosage;
            }
        }
    }

    out.numerics = extract_numerics(out);
    return out;
}

TaggedDirection tag_components(std::string_view text, const Lexicon& lexicon) {
    return tag_components(tokenize(text), lexicon);
}

std::map<ComponentTag, std::vector<Quantity>> extract_numerics(const TaggedDirection& tagged) {
    std::map<ComponentTag, std::vector<Quantity>> out;
    out[ComponentTag::Dosage];
    out[ComponentTag::Frequency];
    out[ComponentTag::Duration];
    // Written-out quantities and phrase-implied ones, merged in token order.
    std::vector<std::pair<std::size_t, Quantity>> located;
    for (const auto& run : find_numeric_runs(tagged.tokens)) {
        located.emplace_back(run.begin, run.quantity);
    }
    located.insert(located.end(), tagged.implied.begin(), tagged.implied.end());
    std::stable_sort(located.begin(), located.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [pos, quantity] : located) {
        ComponentTag tag = tagged.tags[pos];
        if (tag == ComponentTag::Dosage || tag == ComponentTag::Frequency ||
            tag == ComponentTag::Duration) {
            out[tag].push_back(quantity);
        }
    }
    return out;
}

std::vector<Quantity> untagged_quantities(const TaggedDirection& tagged) {
    std::vector<Quantity> out;
    for (const auto& run : find_numeric_runs(tagged.tokens)) {
        ComponentTag tag = tagged.tags[run.begin];
        if (tag != ComponentTag::Dosage && tag != ComponentTag::Frequency &&
            tag != ComponentTag::Duration) {
            out.push_back(run.quantity);
        }
    }
    return out;
}

}  // namespace pharmmt::sig
