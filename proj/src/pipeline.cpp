#include "pharmmt/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace pharmmt::pipeline {

namespace {

translation::Translator make_translator(const PipelineConfig& config, const Resources& resources) {
    switch (config.translator) {
        case translation::TranslatorKind::RuleBaseline:
            return translation::Translator::rule_baseline(resources.lexicon, resources.rules);
        case translation::TranslatorKind::Retrieval:
            if (!resources.retrieval_table) {
                throw std::runtime_error("retrieval translator configured but no table loaded");
            }
            return translation::Translator::retrieval(*resources.retrieval_table,
                                                      config.retrieval_fuzzy);
        case translation::TranslatorKind::External:
            if (!resources.external) {
                throw std::runtime_error("external translator configured but no process attached");
            }
            return translation::Translator::external(resources.external);
    }
    throw std::runtime_error("unknown translator kind");
}

}  // namespace

std::vector<PairResult> run_pipeline(const PipelineConfig& config,
                                     std::span<const corpus::PrescriptionPair> pairs,
                                     const Resources& resources) {
    translation::Translator translator = make_translator(config, resources);

    std::vector<PairResult> results;
    results.reserve(pairs.size());
    for (const auto& pair : pairs) {
        PairResult result;
        result.id = pair.id;
        result.source = pair.source;
        result.translator_input = config.augment_aux
                                      ? corpus::augment_auxiliary(pair, config.aux_separator)
                                      : pair.source;

        auto translated = translator.translate(result.translator_input, pair.id);
        result.translator_error = translated.error;

        if (config.backoff) {
            auto final = consistency::resolve_backoff(pair.source, translated.candidates,
                                                      config.checker, resources.lexicon);
            result.candidate = final.text;
            result.provenance = final.provenance;
            result.report = std::move(final.report);
        } else if (!translated.candidates.empty()) {
            auto best = std::max_element(
                translated.candidates.begin(), translated.candidates.end(),
                [](const auto& a, const auto& b) { return a.score < b.score; });
            result.candidate = best->text;
            result.provenance = consistency::Provenance::Candidate;
            result.report = consistency::check(pair.source, best->text, resources.lexicon);
        } else {
            result.candidate = pair.source;
            result.provenance = consistency::Provenance::BackoffSource;
            result.report = consistency::check(pair.source, pair.source, resources.lexicon);
        }

        result.final_text =
            config.normalize
                ? norm::normalize_text(result.candidate, resources.lexicon, resources.rules)
                : result.candidate;
        results.push_back(std::move(result));
    }
    return results;
}

EvalReport evaluate(const PipelineConfig& config, std::span<const corpus::PrescriptionPair> pairs,
                    const Resources& resources, const EvalOptions& options) {
    for (const auto& pair : pairs) {
        if (pair.reference.empty()) {
            throw std::runtime_error("pair '" + pair.id + "' has no reference to score against");
        }
    }

    auto results = run_pipeline(config, pairs, resources);

    EvalReport report;
    report.pair_count = pairs.size();

    std::vector<metrics::ScoredPair> scored;
    std::vector<std::string> sources;
    std::vector<std::string> raw_candidates;
    std::vector<std::string> finals;
    scored.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        std::string reference = pairs[i].reference;
        if (options.normalized_reference) {
            reference = norm::normalize_text(reference, resources.lexicon, resources.rules);
        }
        scored.push_back({results[i].final_text, std::move(reference)});
        sources.push_back(pairs[i].source);
        raw_candidates.push_back(results[i].candidate);
        finals.push_back(results[i].final_text);
    }

    report.bleu = metrics::corpus_bleu(scored);
    report.meteor = metrics::corpus_meteor(scored, resources.synonyms);
    report.normalization_ratio =
        norm::normalization_ratio(finals, resources.lexicon, resources.rules);

    std::size_t backed_off = 0;
    for (const auto& r : results) {
        if (r.provenance == consistency::Provenance::BackoffSource) ++backed_off;
    }
    report.backoff_rate =
        pairs.empty() ? 0.0 : static_cast<double>(backed_off) / static_cast<double>(pairs.size());

    report.flags = consistency::checker_flag_counts(sources, raw_candidates, resources.lexicon);
    report.length_strata =
        metrics::length_stratified_report(sources, scored, config.length_threshold);

    if (options.keep_per_pair) report.per_pair = std::move(results);
    return report;
}

std::vector<EvalReport> ablation_grid(const PipelineConfig& base,
                                      std::span<const corpus::PrescriptionPair> pairs,
                                      const Resources& resources, const EvalOptions& options) {
    struct Row {
        const char* label;
        translation::TranslatorKind translator;
        bool augment;
        bool backoff;
        bool normalize;
    };
    const Row rows[] = {
        {"(1) rule-baseline", translation::TranslatorKind::RuleBaseline, false, false, false},
        {"(2) translator", base.translator, true, false, false},
        {"(3) translator-no-aux", base.translator, false, false, false},
        {"(4) translator+backoff", base.translator, true, true, false},
        {"(5) full", base.translator, true, true, true},
        {"(6) full-no-backoff", base.translator, true, false, true},
    };

    std::vector<EvalReport> reports;
    for (const Row& row : rows) {
        PipelineConfig config = base;
        config.translator = row.translator;
        config.augment_aux = row.augment;
        config.backoff = row.backoff;
        config.normalize = row.normalize;
        EvalReport report = evaluate(config, pairs, resources, options);
        report.label = row.label;
        reports.push_back(std::move(report));
    }
    return reports;
}

nlohmann::json check_report_to_json(const std::string& id, const PairResult& result) {
    nlohmann::json mismatches = nlohmann::json::array();
    for (const auto& m : result.report.mismatches) {
        mismatches.push_back({{"component", m.component},
                              {"source_values", m.source_values},
                              {"candidate_values", m.candidate_values}});
    }
    return {{"id", id},
            {"token_consistent", result.report.token_consistent},
            {"component_consistent", result.report.component_consistent},
            {"mismatches", mismatches},
            {"provenance", std::string(consistency::provenance_name(result.provenance))}};
}

nlohmann::json report_to_json(const EvalReport& report, bool include_per_pair) {
    nlohmann::json strata = nlohmann::json::object();
    strata["threshold"] = report.length_strata.threshold;
    if (report.length_strata.shorter) {
        strata["shorter"] = {{"size", report.length_strata.shorter->size},
                             {"bleu", report.length_strata.shorter->bleu}};
    }
    if (report.length_strata.longer) {
        strata["longer"] = {{"size", report.length_strata.longer->size},
                            {"bleu", report.length_strata.longer->bleu}};
    }
    nlohmann::json out = {
        {"label", report.label},
        {"pairs", report.pair_count},
        {"bleu", report.bleu},
        {"meteor", report.meteor},
        {"normalization_ratio", report.normalization_ratio},
        {"backoff_rate", report.backoff_rate},
        {"flags",
         {{"total", report.flags.total},
          {"token", report.flags.token_flagged},
          {"component", report.flags.component_flagged},
          {"dosage", report.flags.dosage_flagged},
          {"frequency", report.flags.frequency_flagged},
          {"duration", report.flags.duration_flagged}}},
        {"length_strata", strata},
    };
    if (include_per_pair) {
        nlohmann::json per_pair = nlohmann::json::array();
        for (const auto& r : report.per_pair) {
            per_pair.push_back({{"id", r.id},
                                {"source", r.source},
                                {"translator_input", r.translator_input},
                                {"candidate", r.candidate},
                                {"final", r.final_text},
                                {"provenance",
                                 std::string(consistency::provenance_name(r.provenance))}});
        }
        out["per_pair"] = std::move(per_pair);
    }
    return out;
}

void export_review(const PipelineConfig& config,
                   std::span<const corpus::PrescriptionPair> pairs, const Resources& resources,
                   std::size_t n, std::uint64_t seed, const std::string& path) {
    auto results = run_pipeline(config, pairs, resources);
    std::vector<std::string> outputs;
    outputs.reserve(results.size());
    for (const auto& r : results) outputs.push_back(r.final_text);
    auto items = corpus::sample_for_review(pairs, outputs, n, seed);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write review file: " + path);
    corpus::write_review_csv(out, items);
}

corpus::ReviewTally import_review(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open review file: " + path);
    auto items = corpus::read_review_csv(in, path);
    return corpus::tally_review(items);
}

}  // namespace pharmmt::pipeline
