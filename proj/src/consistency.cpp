#include "pharmmt/consistency.hpp"

#include <algorithm>
#include <set>

namespace pharmmt::consistency {

namespace {

using sig::ComponentTag;
using sig::Quantity;

std::vector<std::string> canonical_values(const std::vector<Quantity>& quantities) {
    std::vector<std::string> out;
    out.reserve(quantities.size());
    for (const auto& q : quantities) out.push_back(q.canonical());
    return out;
}

// Embeds `src` into `cand` in order; leftover candidate values must be
// consumable from the source's untagged pool.
bool component_lists_match(const std::vector<std::string>& src,
                           const std::vector<std::string>& cand,
                           std::multiset<std::string>& untagged_pool) {
    std::size_t j = 0;
    std::vector<std::string> extras;
    for (const auto& value : cand) {
        if (j < src.size() && value == src[j]) {
            ++j;
        } else {
            extras.push_back(value);
        }
    }
    if (j != src.size()) return false;
    for (const auto& value : extras) {
        auto it = untagged_pool.find(value);
        if (it == untagged_pool.end()) return false;
        untagged_pool.erase(it);
    }
    return true;
}

}  // namespace

std::string_view checker_name(CheckerMode mode) {
    return mode == CheckerMode::Token ? "token" : "component";
}

std::string_view provenance_name(Provenance p) {
    return p == Provenance::Candidate ? "Candidate" : "BackoffSource";
}

CheckReport token_numeric_check(std::string_view source, std::string_view candidate) {
    auto src = canonical_values(sig::all_quantities(source));
    auto cand = canonical_values(sig::all_quantities(candidate));
    auto src_sorted = src;
    auto cand_sorted = cand;
    std::sort(src_sorted.begin(), src_sorted.end());
    std::sort(cand_sorted.begin(), cand_sorted.end());

    CheckReport report;
    if (src_sorted != cand_sorted) {
        report.token_consistent = false;
        report.mismatches.push_back({"token", std::move(src), std::move(cand)});
    }
    return report;
}

CheckReport component_numeric_check(std::string_view source, std::string_view candidate,
                                    const sig::Lexicon& lexicon) {
    auto src_tagged = sig::tag_components(source, lexicon);
    auto cand_tagged = sig::tag_components(candidate, lexicon);

    // Candidate-only values may be justified by numerals the source left
    // untagged (e.g. a bare trailing duration the candidate contextualizes).
    std::multiset<std::string> untagged_pool;
    for (const auto& q : sig::untagged_quantities(src_tagged)) {
        untagged_pool.insert(q.canonical());
    }

    CheckReport report;
    for (auto tag : {ComponentTag::Dosage, ComponentTag::Frequency, ComponentTag::Duration}) {
        auto src = canonical_values(src_tagged.numerics.at(tag));
        auto cand = canonical_values(cand_tagged.numerics.at(tag));
        if (!component_lists_match(src, cand, untagged_pool)) {
            report.component_consistent = false;
            report.mismatches.push_back(
                {std::string(sig::tag_name(tag)), std::move(src), std::move(cand)});
        }
    }
    return report;
}

CheckReport check(std::string_view source, std::string_view candidate,
                  const sig::Lexicon& lexicon) {
    CheckReport token = token_numeric_check(source, candidate);
    CheckReport component = component_numeric_check(source, candidate, lexicon);
    CheckReport merged;
    merged.token_consistent = token.token_consistent;
    merged.component_consistent = component.component_consistent;
    merged.mismatches = std::move(token.mismatches);
    for (auto& m : component.mismatches) merged.mismatches.push_back(std::move(m));
    return merged;
}

FinalDirection resolve_backoff(std::string_view source, std::span<const Candidate> candidates,
                               CheckerMode mode, const sig::Lexicon& lexicon) {
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return candidates[a].score > candidates[b].score;
    });

    for (std::size_t idx : order) {
        const Candidate& c = candidates[idx];
        if (c.text.empty()) continue;
        CheckReport report = check(source, c.text, lexicon);
        if (report.consistent(mode)) {
            return {c.text, Provenance::Candidate, std::move(report)};
        }
    }
    FinalDirection out;
    out.text = std::string(source);
    out.provenance = Provenance::BackoffSource;
    out.report = check(source, source, lexicon);
    return out;
}

FlagCounts checker_flag_counts(std::span<const std::string> sources,
                               std::span<const std::string> candidates,
                               const sig::Lexicon& lexicon) {
    FlagCounts counts;
    const std::size_t n = std::min(sources.size(), candidates.size());
    counts.total = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!token_numeric_check(sources[i], candidates[i]).token_consistent) {
            ++counts.token_flagged;
        }
        CheckReport component = component_numeric_check(sources[i], candidates[i], lexicon);
        if (!component.component_consistent) ++counts.component_flagged;
        for (const auto& m : component.mismatches) {
            if (m.component == "Dosage") ++counts.dosage_flagged;
            if (m.component == "Frequency") ++counts.frequency_flagged;
            if (m.component == "Duration") ++counts.duration_flagged;
        }
    }
    return counts;
}

}  // namespace pharmmt::consistency
