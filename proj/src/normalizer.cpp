#include "pharmmt/normalizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace pharmmt::norm {

namespace {

using sig::ComponentTag;
using sig::TokenKind;

std::optional<RuleCategory> category_from_name(std::string_view name) {
    static const std::unordered_map<std::string_view, RuleCategory> table = {
        {"Action", RuleCategory::Action},       {"Dosage", RuleCategory::Dosage},
        {"Form", RuleCategory::Form},           {"Route", RuleCategory::Route},
        {"Frequency", RuleCategory::Frequency}, {"Duration", RuleCategory::Duration},
        {"Abbreviation", RuleCategory::Abbreviation},
    };
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

// Tag a non-Abbreviation rule requires on the first matched token.
std::optional<ComponentTag> gate_tag(RuleCategory category) {
    switch (category) {
        case RuleCategory::Dosage: return ComponentTag::Dosage;
        case RuleCategory::Form: return ComponentTag::Form;
        case RuleCategory::Route: return ComponentTag::Route;
        case RuleCategory::Frequency: return ComponentTag::Frequency;
        case RuleCategory::Duration: return ComponentTag::Duration;
        default: return std::nullopt;
    }
}

std::size_t count_slots(const std::vector<std::string>& pattern) {
    std::size_t n = 0;
    for (const auto& p : pattern) {
        if (p == "<n>") ++n;
    }
    return n;
}

std::size_t count_slots(const std::string& replacement) {
    std::size_t n = 0;
    std::size_t pos = 0;
    while ((pos = replacement.find("<n>", pos)) != std::string::npos) {
        ++n;
        pos += 3;
    }
    return n;
}

// Working unit of the normalizer. Rule replacements become opaque chunks;
// everything else keeps its token kind and tag.
struct Cell {
    std::string text;
    TokenKind kind = TokenKind::Word;
    ComponentTag tag = ComponentTag::Other;
    bool chunk = false;
    std::string original;  // first source token covered, for the verb map
    double value = 0.0;    // meaningful when kind is Number/Fraction
};

struct UnitForm {
    const char* singular;
    const char* plural;
};

const UnitForm* unit_form(const std::string& word) {
    static const std::unordered_map<std::string, UnitForm> table = {
        {"day", {"day", "days"}},       {"days", {"day", "days"}},
        {"dy", {"day", "days"}},        {"dys", {"day", "days"}},
        {"week", {"week", "weeks"}},    {"weeks", {"week", "weeks"}},
        {"wk", {"week", "weeks"}},      {"wks", {"week", "weeks"}},
        {"month", {"month", "months"}}, {"months", {"month", "months"}},
        {"hour", {"hour", "hours"}},    {"hours", {"hour", "hours"}},
        {"hr", {"hour", "hours"}},      {"hrs", {"hour", "hours"}},
        {"minute", {"minute", "minutes"}}, {"minutes", {"minute", "minutes"}},
        {"dose", {"dose", "doses"}},    {"doses", {"dose", "doses"}},
    };
    auto it = table.find(word);
    return it == table.end() ? nullptr : &it->second;
}

}  // namespace

std::string_view category_name(RuleCategory category) {
    switch (category) {
        case RuleCategory::Action: return "Action";
        case RuleCategory::Dosage: return "Dosage";
        case RuleCategory::Form: return "Form";
        case RuleCategory::Route: return "Route";
        case RuleCategory::Frequency: return "Frequency";
        case RuleCategory::Duration: return "Duration";
        case RuleCategory::Abbreviation: return "Abbreviation";
    }
    return "Abbreviation";
}

void RuleSet::add(RuleCategory category, std::vector<std::string> pattern,
                  std::string replacement, int priority) {
    if (pattern.empty()) throw std::invalid_argument("rule: empty pattern");
    if (count_slots(replacement) > count_slots(pattern)) {
        throw std::invalid_argument("rule: replacement slot without a pattern capture");
    }
    if (category == RuleCategory::Action) {
        if (pattern.size() != 1) {
            throw std::invalid_argument("Action rule: pattern must be a single form word");
        }
        if (!action_verbs_.emplace(pattern[0], replacement).second) {
            throw std::invalid_argument("duplicate Action rule for '" + pattern[0] + "'");
        }
        return;
    }
    for (const auto& r : rules_) {
        if (r.category == category && r.pattern == pattern) {
            throw std::invalid_argument("duplicate rule (category, pattern)");
        }
    }
    rules_.push_back({category, std::move(pattern), std::move(replacement), priority,
                      static_cast<int>(rules_.size())});
}

RuleSet RuleSet::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open rule file: " + path);
    return parse(in, path);
}

RuleSet RuleSet::parse(std::istream& in, const std::string& name) {
    RuleSet set;
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
        auto where = name + ":" + std::to_string(lineno);
        if (cols.size() < 3) {
            throw std::runtime_error(where + ": expected category<TAB>pattern<TAB>replacement");
        }
        auto category = category_from_name(cols[0]);
        if (!category) throw std::runtime_error(where + ": unknown category '" + cols[0] + "'");
        std::vector<std::string> pattern;
        std::istringstream ps(cols[1]);
        std::string tok;
        while (ps >> tok) pattern.push_back(tok);
        if (pattern.empty()) throw std::runtime_error(where + ": empty pattern");
        int priority = 0;
        if (cols.size() >= 4 && !cols[3].empty()) priority = std::stoi(cols[3]);
        try {
            set.add(*category, std::move(pattern), cols[2], priority);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
    }
    return set;
}

namespace {

std::vector<Cell> cells_from_tagged(const sig::TaggedDirection& tagged) {
    std::vector<Cell> cells;
    cells.reserve(tagged.tokens.size());
    for (std::size_t i = 0; i < tagged.tokens.size(); ++i) {
        Cell c;
        c.text = tagged.tokens[i].text;
        c.kind = tagged.tokens[i].kind;
        c.tag = tagged.tags[i];
        c.original = tagged.tokens[i].text;
        cells.push_back(std::move(c));
    }
    return cells;
}

bool rule_matches(const Rule& rule, const std::vector<Cell>& cells, std::size_t i,
                  std::vector<std::string>* captures) {
    if (i + rule.pattern.size() > cells.size()) return false;
    if (auto gate = gate_tag(rule.category); gate && cells[i].tag != *gate) return false;
    captures->clear();
    for (std::size_t k = 0; k < rule.pattern.size(); ++k) {
        const Cell& c = cells[i + k];
        if (c.chunk) return false;
        const std::string& p = rule.pattern[k];
        if (p == "<n>") {
            if (c.kind != TokenKind::Number && c.kind != TokenKind::Fraction) return false;
            auto q = sig::parse_quantity(c.text);
            if (!q) return false;
            captures->push_back(q->canonical());
        } else if (c.text != p) {
            return false;
        }
    }
    return true;
}

std::string fill_slots(const std::string& replacement, const std::vector<std::string>& captures) {
    std::string out;
    std::size_t pos = 0;
    std::size_t used = 0;
    while (true) {
        auto slot = replacement.find("<n>", pos);
        if (slot == std::string::npos) {
            out += replacement.substr(pos);
            break;
        }
        out += replacement.substr(pos, slot - pos);
        out += captures.at(used++);
        pos = slot + 3;
    }
    return out;
}

// Single left-to-right pass, longest match first, then priority, then order.
void apply_rules(std::vector<Cell>& cells, const RuleSet& rules) {
    std::vector<Cell> out;
    std::size_t i = 0;
    std::vector<std::string> captures;
    std::vector<std::string> best_captures;
    while (i < cells.size()) {
        const Rule* best = nullptr;
        for (const auto& rule : rules.rules()) {
            if (best != nullptr) {
                if (rule.pattern.size() < best->pattern.size()) continue;
                if (rule.pattern.size() == best->pattern.size() &&
                    (rule.priority > best->priority ||
                     (rule.priority == best->priority && rule.order > best->order))) {
                    continue;
                }
            }
            if (rule_matches(rule, cells, i, &captures)) {
                best = &rule;
                best_captures = captures;
            }
        }
        if (best == nullptr) {
            out.push_back(std::move(cells[i]));
            ++i;
            continue;
        }
        std::string text = fill_slots(best->replacement, best_captures);
        if (!text.empty()) {
            Cell c;
            c.text = std::move(text);
            c.kind = TokenKind::Word;
            c.tag = cells[i].tag;
            c.chunk = true;
            c.original = cells[i].original;
            out.push_back(std::move(c));
        }
        i += best->pattern.size();
    }
    cells = std::move(out);
}

// Collapse word numbers, fractions and mixed numbers into canonical digits.
void canonicalize_numbers(std::vector<Cell>& cells) {
    std::vector<Cell> out;
    std::size_t i = 0;
    while (i < cells.size()) {
        if (cells[i].chunk) {
            out.push_back(std::move(cells[i]));
            ++i;
            continue;
        }
        // segment of consecutive non-chunk cells
        std::size_t seg_end = i;
        while (seg_end < cells.size() && !cells[seg_end].chunk) ++seg_end;
        std::vector<sig::Token> seg;
        for (std::size_t k = i; k < seg_end; ++k) {
            seg.push_back({cells[k].text, cells[k].kind, 0, 0});
        }
        auto runs = sig::find_numeric_runs(seg);
        std::size_t r = 0;
        for (std::size_t k = 0; k < seg.size();) {
            if (r < runs.size() && runs[r].begin == k) {
                Cell c;
                c.text = runs[r].quantity.canonical();
                c.kind = TokenKind::Number;
                c.tag = cells[i + k].tag;
                c.original = cells[i + k].original;
                c.value = runs[r].quantity.value;
                out.push_back(std::move(c));
                k += runs[r].length;
                ++r;
            } else {
                out.push_back(std::move(cells[i + k]));
                ++k;
            }
        }
        i = seg_end;
    }
    cells = std::move(out);
}

// `x N unit` -> `for N unit(s)`; also fixes pluralization of `for N unit`.
void render_durations(std::vector<Cell>& cells) {
    for (std::size_t i = 0; i + 2 < cells.size(); ++i) {
        bool marker_x = !cells[i].chunk && cells[i].text == "x";
        bool marker_for = cells[i].text == "for";
        if (!marker_x && !marker_for) continue;
        Cell& num = cells[i + 1];
        if (num.chunk || (num.kind != TokenKind::Number && num.kind != TokenKind::Fraction)) {
            continue;
        }
        const UnitForm* unit = unit_form(cells[i + 2].text);
        if (unit == nullptr) continue;
        auto q = sig::parse_quantity(num.text);
        if (!q) continue;
        cells[i].text = "for";
        cells[i].chunk = false;
        cells[i + 2].text = (q->value == 1.0) ? unit->singular : unit->plural;
    }
}

// Insert "for" before the first Reason token unless one is already there.
void introduce_reason(std::vector<Cell>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].tag != ComponentTag::Reason) continue;
        if (i > 0 && (cells[i - 1].text == "for" || cells[i - 1].text == "as")) return;
        Cell c;
        c.text = "for";
        c.kind = TokenKind::Word;
        cells.insert(cells.begin() + static_cast<long>(i), std::move(c));
        return;
    }
}

void insert_action_verb(std::vector<Cell>& cells, const RuleSet& rules) {
    std::size_t first = 0;
    while (first < cells.size() && cells[first].kind == TokenKind::Punctuation) ++first;
    if (first >= cells.size()) return;
    if (cells[first].tag == ComponentTag::Action) return;
    for (const auto& [form, verb] : rules.action_verbs()) {
        if (cells[first].text == verb) return;  // already starts with a known action verb
    }
    for (const auto& cell : cells) {
        if (cell.tag != ComponentTag::Form) continue;
        auto it = rules.action_verbs().find(cell.text);
        if (it == rules.action_verbs().end()) it = rules.action_verbs().find(cell.original);
        if (it == rules.action_verbs().end()) return;
        Cell c;
        c.text = it->second;
        c.kind = TokenKind::Word;
        c.tag = ComponentTag::Action;
        cells.insert(cells.begin(), std::move(c));
        return;
    }
}

std::string render(const std::vector<Cell>& cells) {
    // drop trailing periods
    std::size_t end = cells.size();
    while (end > 0 && cells[end - 1].text == "." && !cells[end - 1].chunk) --end;

    std::string out;
    for (std::size_t i = 0; i < end; ++i) {
        const std::string& t = cells[i].text;
        if (t.empty()) continue;
        bool attach = !cells[i].chunk && (t == "," || t == ".");
        if (!out.empty() && !attach) out += ' ';
        out += t;
    }
    if (!out.empty()) {
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    }
    return out;
}

}  // namespace

std::string normalize(const sig::TaggedDirection& tagged, const RuleSet& rules) {
    std::vector<Cell> cells = cells_from_tagged(tagged);
    apply_rules(cells, rules);
    canonicalize_numbers(cells);
    render_durations(cells);
    introduce_reason(cells);
    insert_action_verb(cells, rules);
    return render(cells);
}

std::string normalize_text(std::string_view text, const sig::Lexicon& lexicon,
                           const RuleSet& rules) {
    return normalize(sig::tag_components(text, lexicon), rules);
}

namespace {

std::string fold_case(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

double normalization_ratio(std::span<const std::string> directions, const sig::Lexicon& lexicon,
                           const RuleSet& rules) {
    if (directions.empty()) return 0.0;
    std::size_t changed = 0;
    for (const auto& d : directions) {
        if (fold_case(normalize_text(d, lexicon, rules)) != fold_case(d)) ++changed;
    }
    return static_cast<double>(changed) / static_cast<double>(directions.size());
}

}  // namespace pharmmt::norm
