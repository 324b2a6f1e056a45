#include "pharmmt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "pharmmt/sig_text.hpp"

namespace pharmmt::metrics {

namespace {

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& tok : sig::tokenize(text)) out.push_back(tok.text);
    return out;
}

std::string join_ngram(std::span<const std::string> words, std::size_t start, std::size_t n) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) key += '\x1f';
        key += words[start + k];
    }
    return key;
}

}  // namespace

void NGramStats::accumulate(std::span<const std::string> candidate,
                            std::span<const std::string> reference) {
    candidate_length += candidate.size();
    reference_length += reference.size();
    for (std::size_t n = 1; n <= 4; ++n) {
        std::unordered_map<std::string, std::size_t> ref_counts;
        if (reference.size() + 1 > n) {
            for (std::size_t i = 0; i + n <= reference.size(); ++i) {
                ++ref_counts[join_ngram(reference, i, n)];
            }
        }
        std::unordered_map<std::string, std::size_t> cand_counts;
        if (candidate.size() + 1 > n) {
            for (std::size_t i = 0; i + n <= candidate.size(); ++i) {
                ++cand_counts[join_ngram(candidate, i, n)];
            }
        }
        std::size_t cand_total = 0;
        std::size_t clipped = 0;
        for (const auto& [gram, count] : cand_counts) {
            cand_total += count;
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) clipped += std::min(count, it->second);
        }
        total[n - 1] += cand_total;
        matched[n - 1] += clipped;
    }
}

NGramStats& NGramStats::operator+=(const NGramStats& other) {
    for (std::size_t n = 0; n < 4; ++n) {
        matched[n] += other.matched[n];
        total[n] += other.total[n];
    }
    candidate_length += other.candidate_length;
    reference_length += other.reference_length;
    return *this;
}

double bleu_from_stats(const NGramStats& stats) {
    if (stats.candidate_length == 0) return 0.0;
    double log_precision = 0.0;
    for (std::size_t n = 0; n < 4; ++n) {
        if (stats.matched[n] == 0 || stats.total[n] == 0) return 0.0;
        log_precision += std::log(static_cast<double>(stats.matched[n]) /
                                  static_cast<double>(stats.total[n]));
    }
    double brevity = 1.0;
    if (stats.candidate_length < stats.reference_length) {
        brevity = std::exp(1.0 - static_cast<double>(stats.reference_length) /
                                     static_cast<double>(stats.candidate_length));
    }
    return 100.0 * brevity * std::exp(log_precision / 4.0);
}

double sentence_bleu(std::string_view candidate, std::string_view reference) {
    NGramStats stats;
    stats.accumulate(words_of(candidate), words_of(reference));
    return bleu_from_stats(stats);
}

double corpus_bleu(std::span<const ScoredPair> pairs) {
    if (pairs.empty()) throw std::invalid_argument("corpus_bleu: empty corpus");
    NGramStats stats;
    for (const auto& pair : pairs) {
        stats.accumulate(words_of(pair.candidate), words_of(pair.reference));
    }
    return bleu_from_stats(stats);
}

std::string stem(std::string_view word) {
    static const std::unordered_set<std::string_view> exceptions = {
        "as",   "is",  "its",  "his", "this", "was",     "has",     "us",   "plus",
        "during", "thing", "bring", "morning", "evening", "nothing",
    };
    std::string w(word);
    if (exceptions.count(word) > 0 || w.size() < 3) return w;
    auto ends_with = [&](std::string_view suffix) {
        return w.size() >= suffix.size() &&
               std::string_view(w).substr(w.size() - suffix.size()) == suffix;
    };
    if (w.size() > 4 && ends_with("ing")) {
        return w.substr(0, w.size() - 3);
    }
    if (w.size() > 3 && ends_with("ed")) {
        return w.substr(0, w.size() - 2);
    }
    if (ends_with("sses") || ends_with("shes") || ends_with("ches") || ends_with("xes") ||
        ends_with("zes")) {
        return w.substr(0, w.size() - 2);
    }
    if (ends_with("s") && !ends_with("ss") && !ends_with("us")) {
        return w.substr(0, w.size() - 1);
    }
    return w;
}

SynonymTable SynonymTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open synonym file: " + path);
    return parse(in, path);
}

SynonymTable SynonymTable::parse(std::istream& in, const std::string& name) {
    SynonymTable table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                     ": expected word<TAB>word");
        }
        table.add(line.substr(0, tab), line.substr(tab + 1));
    }
    return table;
}

void SynonymTable::add(std::string_view a, std::string_view b) {
    pairs_.emplace_back(std::string(a), std::string(b));
}

bool SynonymTable::related(std::string_view a, std::string_view b) const {
    for (const auto& [x, y] : pairs_) {
        if ((x == a && y == b) || (x == b && y == a)) return true;
    }
    return false;
}

namespace {

// Kuhn augmenting-path maximum bipartite matching.
class MaxMatcher {
  public:
    explicit MaxMatcher(const std::vector<std::vector<int>>& adj, std::size_t ref_size)
        : adj_(adj), match_ref_(ref_size, -1) {}

    int solve() {
        int matched = 0;
        for (std::size_t i = 0; i < adj_.size(); ++i) {
            visited_.assign(match_ref_.size(), false);
            if (try_augment(static_cast<int>(i))) ++matched;
        }
        return matched;
    }

  private:
    bool try_augment(int i) {
        for (int j : adj_[static_cast<std::size_t>(i)]) {
            if (visited_[static_cast<std::size_t>(j)]) continue;
            visited_[static_cast<std::size_t>(j)] = true;
            if (match_ref_[static_cast<std::size_t>(j)] < 0 ||
                try_augment(match_ref_[static_cast<std::size_t>(j)])) {
                match_ref_[static_cast<std::size_t>(j)] = i;
                return true;
            }
        }
        return false;
    }

    const std::vector<std::vector<int>>& adj_;
    std::vector<int> match_ref_;
    std::vector<bool> visited_;
};

// Searches maximum alignments for the one with the fewest chunks. Bounded
// backtracking; falls back to the first maximum alignment found if the search
// budget runs out.
class ChunkMinimizer {
  public:
    ChunkMinimizer(const std::vector<std::vector<int>>& adj, std::size_t ref_size, int max_matches)
        : adj_(adj), ref_used_(ref_size, false), target_(max_matches) {}

    std::vector<std::pair<int, int>> solve() {
        dfs(0, 0, 0, -1, -1);
        return best_;
    }

    std::size_t best_chunks() const { return best_chunks_; }

  private:
    void dfs(std::size_t i, int matched, std::size_t chunks, int last_i, int last_j) {
        if (nodes_++ > 200000) return;
        if (chunks >= best_chunks_) return;
        if (matched + static_cast<int>(adj_.size() - i) < target_) return;
        if (i == adj_.size()) {
            if (matched == target_) {
                best_chunks_ = chunks;
                best_ = current_;
            }
            return;
        }
        for (int j : adj_[i]) {
            if (ref_used_[static_cast<std::size_t>(j)]) continue;
            bool continues =
                (last_i >= 0 && last_i == static_cast<int>(i) - 1 && last_j == j - 1);
            ref_used_[static_cast<std::size_t>(j)] = true;
            current_.emplace_back(static_cast<int>(i), j);
            dfs(i + 1, matched + 1, chunks + (continues ? 0 : 1), static_cast<int>(i), j);
            current_.pop_back();
            ref_used_[static_cast<std::size_t>(j)] = false;
        }
        dfs(i + 1, matched, chunks, last_i, last_j);
    }

    const std::vector<std::vector<int>>& adj_;
    std::vector<bool> ref_used_;
    int target_;
    std::size_t best_chunks_ = SIZE_MAX;
    std::vector<std::pair<int, int>> current_;
    std::vector<std::pair<int, int>> best_;
    long nodes_ = 0;
};

}  // namespace

MeteorAlignment meteor_align(std::span<const std::string> candidate,
                             std::span<const std::string> reference,
                             const SynonymTable& synonyms) {
    std::vector<std::vector<int>> adj(candidate.size());
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        for (std::size_t j = 0; j < reference.size(); ++j) {
            const std::string& c = candidate[i];
            const std::string& r = reference[j];
            if (c == r || stem(c) == stem(r) || synonyms.related(c, r)) {
                adj[i].push_back(static_cast<int>(j));
            }
        }
    }

    MeteorAlignment alignment;
    int max_matches = MaxMatcher(adj, reference.size()).solve();
    if (max_matches == 0) return alignment;

    ChunkMinimizer minimizer(adj, reference.size(), max_matches);
    auto pairs = minimizer.solve();
    alignment.matches = static_cast<std::size_t>(max_matches);
    alignment.chunks = minimizer.best_chunks();
    for (const auto& [i, j] : pairs) {
        const std::string& c = candidate[static_cast<std::size_t>(i)];
        const std::string& r = reference[static_cast<std::size_t>(j)];
        MatchStage stage = MatchStage::Synonym;
        if (c == r) {
            stage = MatchStage::Exact;
        } else if (stem(c) == stem(r)) {
            stage = MatchStage::Stem;
        }
        alignment.pairs.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                     stage);
    }
    return alignment;
}

double meteor(std::string_view candidate, std::string_view reference,
              const SynonymTable& synonyms) {
    auto cand = words_of(candidate);
    auto ref = words_of(reference);
    if (cand.empty() || ref.empty()) return 0.0;
    auto alignment = meteor_align(cand, ref, synonyms);
    if (alignment.matches == 0) return 0.0;
    double m = static_cast<double>(alignment.matches);
    double precision = m / static_cast<double>(cand.size());
    double recall = m / static_cast<double>(ref.size());
    double fmean = 10.0 * precision * recall / (precision + 9.0 * recall);
    double frag = static_cast<double>(alignment.chunks) / m;
    double penalty = 0.5 * frag * frag * frag;
    return fmean * (1.0 - penalty);
}

double corpus_meteor(std::span<const ScoredPair> pairs, const SynonymTable& synonyms) {
    if (pairs.empty()) throw std::invalid_argument("corpus_meteor: empty corpus");
    double sum = 0.0;
    for (const auto& pair : pairs) sum += meteor(pair.candidate, pair.reference, synonyms);
    return sum / static_cast<double>(pairs.size());
}

LengthStratifiedReport length_stratified_report(std::span<const std::string> sources,
                                                std::span<const ScoredPair> pairs,
                                                std::size_t threshold) {
    if (threshold < 1) throw std::invalid_argument("length threshold must be >= 1");
    if (sources.size() != pairs.size()) {
        throw std::invalid_argument("sources and pairs must align");
    }
    std::vector<ScoredPair> shorter;
    std::vector<ScoredPair> longer;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        std::istringstream ws{std::string(sources[i])};
        std::size_t word_count = 0;
        std::string w;
        while (ws >> w) ++word_count;
        (word_count < threshold ? shorter : longer).push_back(pairs[i]);
    }
    LengthStratifiedReport report;
    report.threshold = threshold;
    if (!shorter.empty()) report.shorter = Stratum{shorter.size(), corpus_bleu(shorter)};
    if (!longer.empty()) report.longer = Stratum{longer.size(), corpus_bleu(longer)};
    return report;
}

}  // namespace pharmmt::metrics
