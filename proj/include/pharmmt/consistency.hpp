#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pharmmt/sig_text.hpp"

namespace pharmmt::consistency {

enum class CheckerMode { Token, Component };

std::string_view checker_name(CheckerMode mode);

struct Mismatch {
    std::string component;  // "Dosage", "Frequency", "Duration" or "token"
    std::vector<std::string> source_values;
    std::vector<std::string> candidate_values;
};

struct CheckReport {
    bool token_consistent = true;
    bool component_consistent = true;
    std::vector<Mismatch> mismatches;

    bool consistent(CheckerMode mode) const {
        return mode == CheckerMode::Token ? token_consistent : component_consistent;
    }
};

/// Multiset comparison of every canonical numeric value found anywhere in the
/// two directions.
CheckReport token_numeric_check(std::string_view source, std::string_view candidate);

/// Per-component (Dosage/Frequency/Duration) ordered value comparison.
/// Candidate-only values that appear untagged in the source are tolerated.
CheckReport component_numeric_check(std::string_view source, std::string_view candidate,
                                    const sig::Lexicon& lexicon);

/// Runs both checks and merges the reports.
CheckReport check(std::string_view source, std::string_view candidate,
                  const sig::Lexicon& lexicon);

struct Candidate {
    std::string text;
    double score = 0.0;
};

enum class Provenance { Candidate, BackoffSource };

std::string_view provenance_name(Provenance p);

struct FinalDirection {
    std::string text;
    Provenance provenance = Provenance::BackoffSource;
    CheckReport report;  // check of text against the source
};

/// Highest-scoring candidate passing the selected check wins; otherwise the
/// source comes back verbatim.
FinalDirection resolve_backoff(std::string_view source, std::span<const Candidate> candidates,
                               CheckerMode mode, const sig::Lexicon& lexicon);

struct FlagCounts {
    std::size_t total = 0;
    std::size_t token_flagged = 0;
    std::size_t component_flagged = 0;
    std::size_t dosage_flagged = 0;
    std::size_t frequency_flagged = 0;
    std::size_t duration_flagged = 0;
};

FlagCounts checker_flag_counts(std::span<const std::string> sources,
                               std::span<const std::string> candidates,
                               const sig::Lexicon& lexicon);

}  // namespace pharmmt::consistency
