#include "pharmmt/translation.hpp"

#include <algorithm>
#include <stdexcept>

namespace pharmmt::translation {

std::string_view kind_name(TranslatorKind kind) {
    switch (kind) {
        case TranslatorKind::RuleBaseline: return "rule-baseline";
        case TranslatorKind::Retrieval: return "retrieval";
        case TranslatorKind::External: return "external";
    }
    return "rule-baseline";
}

std::optional<TranslatorKind> kind_from_name(std::string_view name) {
    if (name == "rule-baseline" || name == "baseline") return TranslatorKind::RuleBaseline;
    if (name == "retrieval") return TranslatorKind::Retrieval;
    if (name == "external") return TranslatorKind::External;
    return std::nullopt;
}

std::string_view external_error_name(ExternalError error) {
    switch (error) {
        case ExternalError::Unreachable: return "unreachable";
        case ExternalError::Timeout: return "timeout";
        case ExternalError::Malformed: return "malformed";
    }
    return "unreachable";
}

namespace {

std::size_t edit_distance_at_most_one(std::string_view a, std::string_view b) {
    // returns 0 (equal), 1, or 2 meaning "more than one"
    if (a == b) return 0;
    std::size_t la = a.size();
    std::size_t lb = b.size();
    if (la > lb) {
        std::swap(a, b);
        std::swap(la, lb);
    }
    if (lb - la > 1) return 2;
    std::size_t i = 0;
    while (i < la && a[i] == b[i]) ++i;
    if (la == lb) {
        // one substitution allowed
        std::size_t j = la;
        while (j > i + 1 && a[j - 1] == b[j - 1]) --j;
        return j == i + 1 ? 1 : 2;
    }
    // one insertion into the shorter string
    std::size_t j = la;
    while (j > i && a[j - 1] == b[j]) --j;
    return j == i ? 1 : 2;
}

}  // namespace

RetrievalTable RetrievalTable::build(std::span<const corpus::PrescriptionPair> pairs,
                                     const std::map<std::string, corpus::Split>& assignment) {
    // key -> reference -> count
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    for (const auto& pair : pairs) {
        auto it = assignment.find(pair.id);
        if (it == assignment.end() || it->second != corpus::Split::Train) {
            throw std::invalid_argument("retrieval table: pair '" + pair.id +
                                        "' is not assigned to the training split");
        }
        if (pair.reference.empty()) continue;
        ++counts[corpus::canonical_key(pair.source)][pair.reference];
    }
    RetrievalTable table;
    for (const auto& [key, refs] : counts) {
        // most frequent reference; ties break to the lexicographically smaller
        const std::string* best = nullptr;
        std::size_t best_count = 0;
        for (const auto& [reference, count] : refs) {
            if (count > best_count) {
                best = &reference;
                best_count = count;
            }
        }
        table.table_.emplace(key, Entry{*best, best_count});
    }
    return table;
}

RetrievalTable RetrievalTable::build_all_train(std::span<const corpus::PrescriptionPair> pairs) {
    std::map<std::string, corpus::Split> assignment;
    for (const auto& pair : pairs) assignment.emplace(pair.id, corpus::Split::Train);
    return build(pairs, assignment);
}

std::optional<Candidate> RetrievalTable::lookup(std::string_view source, bool fuzzy) const {
    std::string key = corpus::canonical_key(source);
    auto it = table_.find(key);
    if (it != table_.end()) {
        return Candidate{it->second.reference, static_cast<double>(it->second.count)};
    }
    if (!fuzzy) return std::nullopt;
    for (const auto& [candidate_key, entry] : table_) {
        if (edit_distance_at_most_one(key, candidate_key) <= 1) {
            return Candidate{entry.reference, static_cast<double>(entry.count)};
        }
    }
    return std::nullopt;
}

Translator Translator::rule_baseline(const sig::Lexicon& lexicon, const norm::RuleSet& rules) {
    Translator t;
    t.kind_ = TranslatorKind::RuleBaseline;
    t.lexicon_ = &lexicon;
    t.rules_ = &rules;
    return t;
}

Translator Translator::retrieval(RetrievalTable table, bool fuzzy) {
    Translator t;
    t.kind_ = TranslatorKind::Retrieval;
    t.table_ = std::move(table);
    t.fuzzy_ = fuzzy;
    return t;
}

Translator Translator::external(std::shared_ptr<ExternalTranslator> process) {
    Translator t;
    t.kind_ = TranslatorKind::External;
    t.process_ = std::move(process);
    return t;
}

TranslateResult Translator::translate(std::string_view source, std::string_view id) const {
    TranslateResult result;
    switch (kind_) {
        case TranslatorKind::RuleBaseline: {
            std::string text = norm::normalize_text(source, *lexicon_, *rules_);
            if (!text.empty()) result.candidates.push_back({std::move(text), 1.0});
            break;
        }
        case TranslatorKind::Retrieval: {
            if (auto hit = table_->lookup(source, fuzzy_)) {
                result.candidates.push_back(std::move(*hit));
            }
            break;
        }
        case TranslatorKind::External: {
            auto reply = process_->translate(id, source);
            if (auto* candidates = std::get_if<std::vector<Candidate>>(&reply)) {
                for (auto& c : *candidates) {
                    if (!c.text.empty()) result.candidates.push_back(std::move(c));
                }
            } else {
                result.error = std::get<ExternalError>(reply);
            }
            break;
        }
    }
    return result;
}

}  // namespace pharmmt::translation
