#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace pharmmt::metrics {

/// Clipped n-gram match statistics for n = 1..4, accumulated over a corpus.
struct NGramStats {
    std::array<std::size_t, 4> matched{};  // clipped matches per n
    std::array<std::size_t, 4> total{};    // candidate n-gram counts per n
    std::size_t candidate_length = 0;
    std::size_t reference_length = 0;

    void accumulate(std::span<const std::string> candidate, std::span<const std::string> reference);
    NGramStats& operator+=(const NGramStats& other);
};

/// BLEU-4 with brevity penalty on the 0..100 scale; 0 whenever any n-gram
/// precision is 0. No smoothing.
double bleu_from_stats(const NGramStats& stats);

double sentence_bleu(std::string_view candidate, std::string_view reference);

struct ScoredPair {
    std::string candidate;
    std::string reference;
};

/// Micro-averaged corpus BLEU: statistics summed before precisions.
double corpus_bleu(std::span<const ScoredPair> pairs);

/// Suffix-stripping stemmer (-s/-es, -ed, -ing) with a short exception list.
std::string stem(std::string_view word);

class SynonymTable {
  public:
    static SynonymTable load(const std::string& path);
    static SynonymTable parse(std::istream& in, const std::string& name = "<synonyms>");

    void add(std::string_view a, std::string_view b);  // symmetric
    bool related(std::string_view a, std::string_view b) const;
    std::size_t size() const { return pairs_.size(); }

  private:
    std::vector<std::pair<std::string, std::string>> pairs_;
};

enum class MatchStage { Exact, Stem, Synonym };

struct MeteorAlignment {
    std::size_t matches = 0;
    std::size_t chunks = 0;
    std::vector<std::tuple<std::size_t, std::size_t, MatchStage>> pairs;  // (cand, ref) positions
};

/// Unigram alignment maximizing matches (exact, then stem, then synonym) and,
/// among maximum alignments, minimizing chunks.
MeteorAlignment meteor_align(std::span<const std::string> candidate,
                             std::span<const std::string> reference,
                             const SynonymTable& synonyms);

/// METEOR score in [0,1]: Fmean = 10PR/(P+9R), penalty = 0.5 (chunks/matches)^3.
double meteor(std::string_view candidate, std::string_view reference,
              const SynonymTable& synonyms);

double corpus_meteor(std::span<const ScoredPair> pairs, const SynonymTable& synonyms);

struct Stratum {
    std::size_t size = 0;
    double bleu = 0.0;
};

struct LengthStratifiedReport {
    std::size_t threshold = 0;
    std::optional<Stratum> shorter;  // sources with fewer than `threshold` words
    std::optional<Stratum> longer;   // the complement; absent strata are omitted
};

LengthStratifiedReport length_stratified_report(std::span<const std::string> sources,
                                                std::span<const ScoredPair> pairs,
                                                std::size_t threshold);

}  // namespace pharmmt::metrics
