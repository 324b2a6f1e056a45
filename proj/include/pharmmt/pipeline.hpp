#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pharmmt/consistency.hpp"
#include "pharmmt/corpus.hpp"
#include "pharmmt/metrics.hpp"
#include "pharmmt/normalizer.hpp"
#include "pharmmt/translation.hpp"

namespace pharmmt::pipeline {

struct PipelineConfig {
    translation::TranslatorKind translator = translation::TranslatorKind::RuleBaseline;
    consistency::CheckerMode checker = consistency::CheckerMode::Component;
    bool backoff = true;
    bool normalize = true;
    bool augment_aux = false;
    bool retrieval_fuzzy = false;
    std::string aux_separator = "||";
    std::uint64_t seed = 0;
    std::size_t length_threshold = 12;
};

struct Resources {
    sig::Lexicon lexicon;
    norm::RuleSet rules;
    metrics::SynonymTable synonyms;
    std::optional<translation::RetrievalTable> retrieval_table;
    std::shared_ptr<translation::ExternalTranslator> external;
};

struct PairResult {
    std::string id;
    std::string source;
    std::string translator_input;  // source, or augmented source
    std::string candidate;         // selected (or top) candidate before normalization
    std::string final_text;
    consistency::Provenance provenance = consistency::Provenance::BackoffSource;
    consistency::CheckReport report;
    std::optional<translation::ExternalError> translator_error;
};

/// translate -> numeric check -> graceful backoff -> normalize.
/// Output order matches input order.
std::vector<PairResult> run_pipeline(const PipelineConfig& config,
                                     std::span<const corpus::PrescriptionPair> pairs,
                                     const Resources& resources);

struct EvalReport {
    std::string label;
    std::size_t pair_count = 0;
    double bleu = 0.0;
    double meteor = 0.0;
    double normalization_ratio = 0.0;
    double backoff_rate = 0.0;
    consistency::FlagCounts flags;
    metrics::LengthStratifiedReport length_strata;
    std::vector<PairResult> per_pair;
};

struct EvalOptions {
    bool normalized_reference = false;  // score against normalize(reference)
    bool keep_per_pair = true;
};

/// Scores pipeline output against references; throws if any reference is
/// missing.
EvalReport evaluate(const PipelineConfig& config, std::span<const corpus::PrescriptionPair> pairs,
                    const Resources& resources, const EvalOptions& options = {});

/// The six ablation configurations: rule baseline alone, translator with and
/// without auxiliary input, translator+backoff, the full pipeline, and the
/// full pipeline without backoff.
std::vector<EvalReport> ablation_grid(const PipelineConfig& base,
                                      std::span<const corpus::PrescriptionPair> pairs,
                                      const Resources& resources,
                                      const EvalOptions& options = {});

nlohmann::json report_to_json(const EvalReport& report, bool include_per_pair = false);
nlohmann::json check_report_to_json(const std::string& id, const PairResult& result);

void export_review(const PipelineConfig& config,
                   std::span<const corpus::PrescriptionPair> pairs, const Resources& resources,
                   std::size_t n, std::uint64_t seed, const std::string& path);
corpus::ReviewTally import_review(const std::string& path);

}  // namespace pharmmt::pipeline
