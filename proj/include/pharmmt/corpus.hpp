#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pharmmt::corpus {

struct DrugInfo {
    std::string name;      // as written, e.g. "TRAMADOL HCL TAB 50MG"
    std::string strength;  // may be empty
};

struct PrescriptionPair {
    std::string id;
    std::string source;     // physician direction
    std::string reference;  // pharmacist direction; may be empty for run-only corpora
    std::optional<DrugInfo> drug;
};

enum class Split { Train, Validation, Test };

std::string_view split_name(Split split);
std::optional<Split> split_from_name(std::string_view name);

enum class ReviewLabel { Correct, Missing, Wrong, Unlabeled };

std::string_view label_name(ReviewLabel label);
std::optional<ReviewLabel> label_from_name(std::string_view name);

struct ReviewItem {
    std::string pair_id;
    std::string source;
    std::string system_output;
    ReviewLabel label = ReviewLabel::Unlabeled;
};

struct LoadError {
    int line;
    std::string message;
};

struct LoadResult {
    std::vector<PrescriptionPair> pairs;
    std::vector<LoadError> errors;  // malformed lines are reported, not fatal
};

/// Reads a corpus file: UTF-8, one JSON object per line with fields `id`,
/// `source`, optional `reference`, `drug_name`, `drug_strength`.
LoadResult load_corpus(const std::string& path);
LoadResult load_corpus_stream(std::istream& in, const std::string& name = "<corpus>");

/// Lowercased, whitespace-collapsed grouping key. Punctuation is preserved.
std::string canonical_key(std::string_view source);

/// `<name> <strength> <separator> <source>`; pairs without drug info pass
/// through unchanged.
std::string augment_auxiliary(const PrescriptionPair& pair, std::string_view separator = "||");

/// Leakage-free split: pairs whose canonical source matches land in the same
/// split. Group order is randomized by seeded hash, then buckets fill to
/// quota, so the assignment is deterministic per seed.
std::map<std::string, Split> dedup_group_split(std::span<const PrescriptionPair> pairs,
                                               const std::array<double, 3>& ratios,
                                               std::uint64_t seed);

/// Same assignment keyed by group instead of pair id.
std::map<std::string, Split> group_split_by_key(std::span<const PrescriptionPair> pairs,
                                                const std::array<double, 3>& ratios,
                                                std::uint64_t seed);

/// Uniform sample without replacement of n (pair, output) items, labels
/// initialized Unlabeled. Deterministic per seed.
std::vector<ReviewItem> sample_for_review(std::span<const PrescriptionPair> pairs,
                                          std::span<const std::string> outputs, std::size_t n,
                                          std::uint64_t seed);

struct ReviewTally {
    std::map<ReviewLabel, std::size_t> counts;
    std::map<ReviewLabel, double> percentages;  // one decimal, sums to 100 +/- 0.1
};

/// Tallies labeled review items. Throws if any item is still Unlabeled.
ReviewTally tally_review(std::span<const ReviewItem> items);

void write_review_csv(std::ostream& out, std::span<const ReviewItem> items);
std::vector<ReviewItem> read_review_csv(std::istream& in, const std::string& name = "<review>");

}  // namespace pharmmt::corpus
