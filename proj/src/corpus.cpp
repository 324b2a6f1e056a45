#include "pharmmt/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace pharmmt::corpus {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
    std::uint64_t h = 1469598103934665603ull ^ (seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::string_view split_name(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
    }
    return "train";
}

std::optional<Split> split_from_name(std::string_view name) {
    if (name == "train") return Split::Train;
    if (name == "validation") return Split::Validation;
    if (name == "test") return Split::Test;
    return std::nullopt;
}

std::string_view label_name(ReviewLabel label) {
    switch (label) {
        case ReviewLabel::Correct: return "Correct";
        case ReviewLabel::Missing: return "Missing";
        case ReviewLabel::Wrong: return "Wrong";
        case ReviewLabel::Unlabeled: return "Unlabeled";
    }
    return "Unlabeled";
}

std::optional<ReviewLabel> label_from_name(std::string_view name) {
    if (name == "Correct") return ReviewLabel::Correct;
    if (name == "Missing") return ReviewLabel::Missing;
    if (name == "Wrong") return ReviewLabel::Wrong;
    if (name == "Unlabeled") return ReviewLabel::Unlabeled;
    return std::nullopt;
}

LoadResult load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    return load_corpus_stream(in, path);
}

LoadResult load_corpus_stream(std::istream& in, const std::string& name) {
    LoadResult result;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            result.errors.push_back({lineno, name + ": malformed JSON record"});
            continue;
        }
        if (!record.contains("source") || !record["source"].is_string() ||
            record["source"].get<std::string>().empty()) {
            result.errors.push_back({lineno, name + ": record missing source field"});
            continue;
        }
        PrescriptionPair pair;
        pair.id = record.value("id", std::string());
        if (pair.id.empty()) pair.id = "line-" + std::to_string(lineno);
        if (!seen_ids.insert(pair.id).second) {
            result.errors.push_back({lineno, name + ": duplicate id '" + pair.id + "'"});
            continue;
        }
        pair.source = record["source"].get<std::string>();
        pair.reference = record.value("reference", std::string());
        std::string drug_name = trim(record.value("drug_name", std::string()));
        if (!drug_name.empty()) {
            pair.drug = DrugInfo{drug_name, trim(record.value("drug_strength", std::string()))};
        }
        result.pairs.push_back(std::move(pair));
    }
    return result;
}

std::string canonical_key(std::string_view source) {
    std::string out;
    out.reserve(source.size());
    bool pending_space = false;
    for (char ch : source) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    return out;
}

std::string augment_auxiliary(const PrescriptionPair& pair, std::string_view separator) {
    if (!pair.drug) return pair.source;
    std::string out = pair.drug->name;
    if (!pair.drug->strength.empty()) {
        out += ' ';
        out += pair.drug->strength;
    }
    out += ' ';
    out += separator;
    out += ' ';
    out += pair.source;
    return out;
}

std::map<std::string, Split> group_split_by_key(std::span<const PrescriptionPair> pairs,
                                                const std::array<double, 3>& ratios,
                                                std::uint64_t seed) {
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0) {
        throw std::invalid_argument("split ratios must be non-negative and sum to 1");
    }
    if (pairs.empty()) throw std::invalid_argument("cannot split an empty corpus");

    std::vector<std::string> keys;
    {
        std::unordered_set<std::string> seen;
        for (const auto& pair : pairs) {
            std::string key = canonical_key(pair.source);
            if (seen.insert(key).second) keys.push_back(std::move(key));
        }
    }
    std::sort(keys.begin(), keys.end(), [&](const std::string& a, const std::string& b) {
        std::uint64_t ha = fnv1a(a, seed);
        std::uint64_t hb = fnv1a(b, seed);
        if (ha != hb) return ha < hb;
        return a < b;
    });

    // largest-remainder quotas over group counts
    const std::size_t total = keys.size();
    std::array<std::size_t, 3> quota{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        double exact = ratios[static_cast<std::size_t>(i)] * static_cast<double>(total);
        quota[static_cast<std::size_t>(i)] = static_cast<std::size_t>(std::floor(exact + 1e-12));
        remainder[static_cast<std::size_t>(i)] = exact - std::floor(exact + 1e-12);
        assigned += quota[static_cast<std::size_t>(i)];
    }
    while (assigned < total) {
        int best = 0;
        for (int i = 1; i < 3; ++i) {
            if (remainder[static_cast<std::size_t>(i)] > remainder[static_cast<std::size_t>(best)]) best = i;
        }
        ++quota[static_cast<std::size_t>(best)];
        remainder[static_cast<std::size_t>(best)] = -1.0;
        ++assigned;
    }

    std::map<std::string, Split> by_key;
    std::size_t idx = 0;
    for (const auto& key : keys) {
        Split split = Split::Test;
        if (idx < quota[0]) {
            split = Split::Train;
        } else if (idx < quota[0] + quota[1]) {
            split = Split::Validation;
        }
        by_key.emplace(key, split);
        ++idx;
    }
    return by_key;
}

std::map<std::string, Split> dedup_group_split(std::span<const PrescriptionPair> pairs,
                                               const std::array<double, 3>& ratios,
                                               std::uint64_t seed) {
    auto by_key = group_split_by_key(pairs, ratios, seed);
    std::map<std::string, Split> by_id;
    for (const auto& pair : pairs) {
        by_id.emplace(pair.id, by_key.at(canonical_key(pair.source)));
    }
    return by_id;
}

std::vector<ReviewItem> sample_for_review(std::span<const PrescriptionPair> pairs,
                                          std::span<const std::string> outputs, std::size_t n,
                                          std::uint64_t seed) {
    if (n > pairs.size()) {
        throw std::invalid_argument("sample size exceeds corpus size");
    }
    std::vector<std::size_t> indices(pairs.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, indices.size() - 1);
        std::swap(indices[i], indices[pick(rng)]);
    }
    std::vector<ReviewItem> items;
    items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ReviewItem item;
        item.pair_id = pairs[indices[i]].id;
        item.source = pairs[indices[i]].source;
        if (indices[i] < outputs.size()) item.system_output = outputs[indices[i]];
        items.push_back(std::move(item));
    }
    return items;
}

ReviewTally tally_review(std::span<const ReviewItem> items) {
    ReviewTally tally;
    for (auto label : {ReviewLabel::Correct, ReviewLabel::Missing, ReviewLabel::Wrong}) {
        tally.counts[label] = 0;
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].label == ReviewLabel::Unlabeled) {
            throw std::runtime_error("review item " + std::to_string(i + 1) + " (pair " +
                                     items[i].pair_id + ") is unlabeled");
        }
        ++tally.counts[items[i].label];
    }
    const double total = static_cast<double>(items.size());
    for (const auto& [label, count] : tally.counts) {
        double pct = total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / total;
        tally.percentages[label] = std::round(pct * 10.0) / 10.0;
    }
    return tally;
}

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

void write_review_csv(std::ostream& out, std::span<const ReviewItem> items) {
    out << "pair_id,source,system_output,label\n";
    for (const auto& item : items) {
        out << csv_escape(item.pair_id) << ',' << csv_escape(item.source) << ','
            << csv_escape(item.system_output) << ',' << label_name(item.label) << '\n';
    }
}

std::vector<ReviewItem> read_review_csv(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(name + ": empty review file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "pair_id,source,system_output,label") {
        throw std::runtime_error(name + ": unexpected review header '" + line + "'");
    }
    std::vector<ReviewItem> items;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = csv_split(line);
        if (fields.size() != 4) {
            throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                     ": expected 4 fields, got " + std::to_string(fields.size()));
        }
        auto label = label_from_name(fields[3]);
        if (!label) {
            throw std::runtime_error(name + ":" + std::to_string(lineno) + ": unknown label '" +
                                     fields[3] + "'");
        }
        items.push_back({fields[0], fields[1], fields[2], *label});
    }
    return items;
}

}  // namespace pharmmt::corpus
