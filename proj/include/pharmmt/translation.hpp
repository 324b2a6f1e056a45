#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pharmmt/consistency.hpp"
#include "pharmmt/corpus.hpp"
#include "pharmmt/normalizer.hpp"
#include "pharmmt/sig_text.hpp"

namespace pharmmt::translation {

using consistency::Candidate;

enum class TranslatorKind { RuleBaseline, Retrieval, External };

std::string_view kind_name(TranslatorKind kind);
std::optional<TranslatorKind> kind_from_name(std::string_view name);

/// Canonical-source -> most frequent reference lookup built from the training
/// split only; ties broken lexicographically.
class RetrievalTable {
  public:
    /// `assignment` maps pair ids to splits. Any pair assigned outside the
    /// training split is a leakage error.
    static RetrievalTable build(std::span<const corpus::PrescriptionPair> pairs,
                                const std::map<std::string, corpus::Split>& assignment);

    /// All pairs are treated as training data (separate train corpus).
    static RetrievalTable build_all_train(std::span<const corpus::PrescriptionPair> pairs);

    std::optional<Candidate> lookup(std::string_view source, bool fuzzy = false) const;
    std::size_t size() const { return table_.size(); }

  private:
    struct Entry {
        std::string reference;
        std::size_t count;  // how often the chosen reference was seen
    };
    std::map<std::string, Entry> table_;
};

enum class ExternalError { Unreachable, Timeout, Malformed };

std::string_view external_error_name(ExternalError error);

/// Child translator spoken to over stdin/stdout, one JSON object per line.
/// Responses may arrive out of order; `id` correlates.
class ExternalTranslator {
  public:
    explicit ExternalTranslator(std::vector<std::string> command,
                                std::chrono::milliseconds timeout = std::chrono::seconds(10));
    ~ExternalTranslator();

    ExternalTranslator(const ExternalTranslator&) = delete;
    ExternalTranslator& operator=(const ExternalTranslator&) = delete;

    std::variant<std::vector<Candidate>, ExternalError> translate(std::string_view id,
                                                                  std::string_view source);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct TranslateResult {
    std::vector<Candidate> candidates;
    std::optional<ExternalError> error;  // set when the external process failed
};

/// The pluggable translator stage. Exactly one backend is active.
class Translator {
  public:
    static Translator rule_baseline(const sig::Lexicon& lexicon, const norm::RuleSet& rules);
    static Translator retrieval(RetrievalTable table, bool fuzzy = false);
    static Translator external(std::shared_ptr<ExternalTranslator> process);

    TranslatorKind kind() const { return kind_; }

    TranslateResult translate(std::string_view source, std::string_view id = "") const;

  private:
    Translator() = default;

    TranslatorKind kind_ = TranslatorKind::RuleBaseline;
    const sig::Lexicon* lexicon_ = nullptr;
    const norm::RuleSet* rules_ = nullptr;
    std::optional<RetrievalTable> table_;
    bool fuzzy_ = false;
    std::shared_ptr<ExternalTranslator> process_;
};

}  // namespace pharmmt::translation
