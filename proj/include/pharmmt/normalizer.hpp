#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pharmmt/sig_text.hpp"

namespace pharmmt::norm {

enum class RuleCategory { Action, Dosage, Form, Route, Frequency, Duration, Abbreviation };

std::string_view category_name(RuleCategory category);

struct Rule {
    RuleCategory category;
    std::vector<std::string> pattern;  // token sequence, `<n>` captures a number
    std::string replacement;           // may be empty (deletion); `<n>` slots
    int priority;
    int order;  // file order, breaks priority ties
};

/// Ordered rewriting rules plus the action-verb map (category Action rows:
/// pattern = form word, replacement = verb to insert).
class RuleSet {
  public:
    static RuleSet load(const std::string& path);
    static RuleSet parse(std::istream& in, const std::string& name = "<rules>");

    void add(RuleCategory category, std::vector<std::string> pattern, std::string replacement,
             int priority);

    const std::vector<Rule>& rules() const { return rules_; }
    const std::map<std::string, std::string>& action_verbs() const { return action_verbs_; }
    bool empty() const { return rules_.empty() && action_verbs_.empty(); }
    std::size_t size() const { return rules_.size() + action_verbs_.size(); }

  private:
    std::vector<Rule> rules_;
    std::map<std::string, std::string> action_verbs_;
};

/// Rewrites a tagged direction into normalized patient-friendly text:
/// rule expansion (longest match, then priority), numeric canonicalization,
/// action-verb insertion keyed on the first Form word, `x N unit` duration
/// rendering, and sentence-initial capitalization. One trailing period is
/// stripped.
std::string normalize(const sig::TaggedDirection& tagged, const RuleSet& rules);

std::string normalize_text(std::string_view text, const sig::Lexicon& lexicon,
                           const RuleSet& rules);

/// Fraction of inputs the normalizer changes (case-insensitive compare).
double normalization_ratio(std::span<const std::string> directions, const sig::Lexicon& lexicon,
                           const RuleSet& rules);

}  // namespace pharmmt::norm
