// Command-line front end for the prescription-direction simplification
// pipeline: corpus ingestion, leakage-free splitting, pipeline runs,
// evaluation (including the ablation grid), consistency checks, rule-based
// normalization, and reviewer sampling/tallying.
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pharmmt/pipeline.hpp"

namespace {

namespace pm = pharmmt;
using nlohmann::json;

#ifndef PHARMMT_DATA_DIR
#define PHARMMT_DATA_DIR "data"
#endif

struct CommonOptions {
    std::string lexicon_path = std::string(PHARMMT_DATA_DIR) + "/lexicon.tsv";
    std::string rules_path = std::string(PHARMMT_DATA_DIR) + "/rules.tsv";
    std::string synonyms_path = std::string(PHARMMT_DATA_DIR) + "/synonyms.tsv";
    std::string translator = "rule-baseline";
    std::string checker = "component";
    std::string train_path;         // corpus used to build the retrieval table
    std::string external_command;   // whitespace-split argv for the child process
    bool no_backoff = false;
    bool no_normalize = false;
    bool augment_aux = false;
    bool fuzzy = false;
    std::string aux_separator = "||";
    std::uint64_t seed = 0;
    std::size_t length_threshold = 12;
};

void add_common_flags(CLI::App* cmd, CommonOptions* opt) {
    cmd->add_option("--lexicon", opt->lexicon_path, "Tagging lexicon TSV");
    cmd->add_option("--rules", opt->rules_path, "Normalization rules TSV");
    cmd->add_option("--synonyms", opt->synonyms_path, "Synonym pairs TSV");
    cmd->add_option("--translator", opt->translator,
                    "Translator backend: rule-baseline, retrieval, external")
        ->check(CLI::IsMember({"rule-baseline", "retrieval", "external"}));
    cmd->add_option("--checker", opt->checker, "Numeric checker: token or component")
        ->check(CLI::IsMember({"token", "component"}));
    cmd->add_option("--train", opt->train_path,
                    "Training corpus for the retrieval translator");
    cmd->add_option("--external-cmd", opt->external_command,
                    "Command line of the external translator process");
    cmd->add_flag("--no-backoff", opt->no_backoff, "Keep the top candidate even if it fails");
    cmd->add_flag("--no-normalize", opt->no_normalize, "Skip the normalization stage");
    cmd->add_flag("--augment-aux", opt->augment_aux,
                  "Prefix drug name and strength onto the translator input");
    cmd->add_flag("--fuzzy", opt->fuzzy, "Edit-distance-1 retrieval lookup");
    cmd->add_option("--aux-separator", opt->aux_separator, "Auxiliary-info separator");
    cmd->add_option("--seed", opt->seed, "Random seed");
    cmd->add_option("--length-threshold", opt->length_threshold,
                    "Word-count boundary for length-stratified scores");
    cmd->set_config("--config", "", "TOML config file with the same option names");
}

std::vector<std::string> split_command(const std::string& command) {
    std::vector<std::string> argv;
    std::istringstream in(command);
    std::string word;
    while (in >> word) argv.push_back(word);
    return argv;
}

pm::pipeline::PipelineConfig make_config(const CommonOptions& opt) {
    pm::pipeline::PipelineConfig config;
    config.translator = *pm::translation::kind_from_name(opt.translator);
    config.checker = opt.checker == "token" ? pm::consistency::CheckerMode::Token
                                            : pm::consistency::CheckerMode::Component;
    config.backoff = !opt.no_backoff;
    config.normalize = !opt.no_normalize;
    config.augment_aux = opt.augment_aux;
    config.retrieval_fuzzy = opt.fuzzy;
    config.aux_separator = opt.aux_separator;
    config.seed = opt.seed;
    config.length_threshold = opt.length_threshold;
    return config;
}

pm::pipeline::Resources make_resources(const CommonOptions& opt,
                                       pm::translation::TranslatorKind kind) {
    pm::pipeline::Resources resources;
    resources.lexicon = pm::sig::Lexicon::load(opt.lexicon_path);
    resources.rules = pm::norm::RuleSet::load(opt.rules_path);
    resources.synonyms = pm::metrics::SynonymTable::load(opt.synonyms_path);
    if (kind == pm::translation::TranslatorKind::Retrieval) {
        if (opt.train_path.empty()) {
            throw std::runtime_error("--translator retrieval requires --train <corpus>");
        }
        auto train = pm::corpus::load_corpus(opt.train_path);
        resources.retrieval_table =
            pm::translation::RetrievalTable::build_all_train(train.pairs);
    } else if (kind == pm::translation::TranslatorKind::External) {
        if (opt.external_command.empty()) {
            throw std::runtime_error("--translator external requires --external-cmd");
        }
        resources.external = std::make_shared<pm::translation::ExternalTranslator>(
            split_command(opt.external_command));
    }
    return resources;
}

std::vector<pm::corpus::PrescriptionPair> load_or_die(const std::string& path) {
    auto loaded = pm::corpus::load_corpus(path);
    for (const auto& err : loaded.errors) {
        std::cerr << path << ":" << err.line << ": " << err.message << "\n";
    }
    return loaded.pairs;
}

void write_json(const json& value, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << value.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << value.dump(2) << "\n";
}

void print_report_row(const pm::pipeline::EvalReport& report) {
    std::cout << std::left << std::setw(26) << report.label << std::right << std::fixed
              << std::setprecision(2) << std::setw(8) << report.bleu << std::setw(9)
              << std::setprecision(4) << report.meteor << std::setw(9) << std::setprecision(3)
              << report.backoff_rate << std::setw(9) << report.normalization_ratio << std::setw(7)
              << report.flags.total << "\n";
}

void print_report_table(const std::vector<pm::pipeline::EvalReport>& reports) {
    std::cout << std::left << std::setw(26) << "configuration" << std::right << std::setw(8)
              << "BLEU" << std::setw(9) << "METEOR" << std::setw(9) << "backoff" << std::setw(9)
              << "norm" << std::setw(7) << "flags" << "\n";
    for (const auto& report : reports) print_report_row(report);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prescription direction simplification pipeline"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::string corpus_path;
    std::string out_path;
    std::string report_path;
    std::vector<double> ratios{0.8, 0.1, 0.1};
    bool ablation = false;
    bool normalized_reference = false;
    std::size_t sample_n = 300;
    std::string text;

    auto* ingest = app.add_subcommand("ingest", "Validate and summarize a corpus file");
    ingest->add_option("corpus", corpus_path, "JSONL corpus")->required();

    auto* split = app.add_subcommand("split", "Leakage-free train/validation/test split");
    split->add_option("corpus", corpus_path, "JSONL corpus")->required();
    split->add_option("--ratios", ratios, "Train/validation/test ratios")->expected(3);
    split->add_option("--seed", opt.seed, "Random seed");
    split->add_option("--out", out_path, "Output JSON (id -> split)");

    auto* run = app.add_subcommand("run", "Run the pipeline over a corpus");
    run->add_option("corpus", corpus_path, "JSONL corpus")->required();
    run->add_option("--out", out_path, "Per-pair results JSON");
    add_common_flags(run, &opt);

    auto* evaluate = app.add_subcommand("evaluate", "Score pipeline output against references");
    evaluate->add_option("corpus", corpus_path, "JSONL corpus with references")->required();
    evaluate->add_flag("--ablation", ablation, "Score all six pipeline configurations");
    evaluate->add_flag("--normalized-reference", normalized_reference,
                       "Normalize references before scoring");
    evaluate->add_option("--report", report_path, "Write the JSON report here");
    add_common_flags(evaluate, &opt);

    auto* check = app.add_subcommand("check", "Numeric consistency check of one pair");
    check->add_option("source", text, "Prescriber direction")->required();
    std::string candidate_text;
    check->add_option("candidate", candidate_text, "Simplified direction")->required();
    check->add_option("--lexicon", opt.lexicon_path, "Tagging lexicon TSV");

    auto* normalize = app.add_subcommand("normalize", "Normalize direction text");
    normalize->add_option("text", text, "Direction text (omit to read stdin lines)");
    normalize->add_option("--lexicon", opt.lexicon_path, "Tagging lexicon TSV");
    normalize->add_option("--rules", opt.rules_path, "Normalization rules TSV");

    auto* sample = app.add_subcommand("sample-review", "Sample pipeline outputs for review");
    sample->add_option("corpus", corpus_path, "JSONL corpus")->required();
    sample->add_option("--n", sample_n, "Sample size");
    sample->add_option("--out", out_path, "Review CSV")->required();
    add_common_flags(sample, &opt);

    auto* tally = app.add_subcommand("tally-review", "Tally a labeled review CSV");
    tally->add_option("review", corpus_path, "Labeled review CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) {
            auto loaded = pm::corpus::load_corpus(corpus_path);
            for (const auto& err : loaded.errors) {
                std::cerr << corpus_path << ":" << err.line << ": " << err.message << "\n";
            }
            std::size_t with_reference = 0, with_drug = 0;
            for (const auto& pair : loaded.pairs) {
                if (!pair.reference.empty()) ++with_reference;
                if (pair.drug) ++with_drug;
            }
            std::cout << "pairs: " << loaded.pairs.size() << "\nwith reference: " << with_reference
                      << "\nwith drug info: " << with_drug
                      << "\nerrors: " << loaded.errors.size() << "\n";
            return loaded.errors.empty() ? 0 : 1;
        }

        if (split->parsed()) {
            auto pairs = load_or_die(corpus_path);
            auto assignment = pm::corpus::dedup_group_split(
                pairs, {ratios[0], ratios[1], ratios[2]}, opt.seed);
            json out = json::object();
            std::array<std::size_t, 3> counts{};
            for (const auto& [id, s] : assignment) {
                out[id] = std::string(pm::corpus::split_name(s));
                ++counts[static_cast<std::size_t>(s)];
            }
            write_json(out, out_path);
            std::cerr << "train=" << counts[0] << " validation=" << counts[1]
                      << " test=" << counts[2] << "\n";
            return 0;
        }

        if (run->parsed()) {
            auto pairs = load_or_die(corpus_path);
            auto config = make_config(opt);
            auto resources = make_resources(opt, config.translator);
            auto results = pm::pipeline::run_pipeline(config, pairs, resources);
            json out = json::array();
            for (const auto& result : results) {
                json row = pm::pipeline::check_report_to_json(result.id, result);
                row["final"] = result.final_text;
                row["candidate"] = result.candidate;
                row["translator_input"] = result.translator_input;
                if (result.translator_error) {
                    row["translator_error"] = std::string(
                        pm::translation::external_error_name(*result.translator_error));
                }
                out.push_back(std::move(row));
            }
            write_json(out, out_path);
            return 0;
        }

        if (evaluate->parsed()) {
            auto pairs = load_or_die(corpus_path);
            auto config = make_config(opt);
            auto resources = make_resources(opt, config.translator);
            pm::pipeline::EvalOptions options;
            options.normalized_reference = normalized_reference;
            options.keep_per_pair = false;
            std::vector<pm::pipeline::EvalReport> reports;
            if (ablation) {
                reports = pm::pipeline::ablation_grid(config, pairs, resources, options);
            } else {
                auto report = pm::pipeline::evaluate(config, pairs, resources, options);
                report.label = opt.translator;
                reports.push_back(std::move(report));
            }
            print_report_table(reports);
            if (!report_path.empty()) {
                json out = json::array();
                for (const auto& report : reports) {
                    out.push_back(pm::pipeline::report_to_json(report));
                }
                write_json(out, report_path);
            }
            return 0;
        }

        if (check->parsed()) {
            auto lexicon = pm::sig::Lexicon::load(opt.lexicon_path);
            auto report = pm::consistency::check(text, candidate_text, lexicon);
            pm::pipeline::PairResult result;
            result.report = report;
            result.candidate = candidate_text;
            result.provenance = pm::consistency::Provenance::Candidate;
            write_json(pm::pipeline::check_report_to_json("cli", result), "");
            return report.component_consistent ? 0 : 1;
        }

        if (normalize->parsed()) {
            auto lexicon = pm::sig::Lexicon::load(opt.lexicon_path);
            auto rules = pm::norm::RuleSet::load(opt.rules_path);
            if (!text.empty()) {
                std::cout << pm::norm::normalize_text(text, lexicon, rules) << "\n";
            } else {
                std::string line;
                while (std::getline(std::cin, line)) {
                    std::cout << pm::norm::normalize_text(line, lexicon, rules) << "\n";
                }
            }
            return 0;
        }

        if (sample->parsed()) {
            auto pairs = load_or_die(corpus_path);
            auto config = make_config(opt);
            auto resources = make_resources(opt, config.translator);
            pm::pipeline::export_review(config, pairs, resources, sample_n, opt.seed, out_path);
            std::cout << "wrote " << out_path << "\n";
            return 0;
        }

        if (tally->parsed()) {
            auto result = pm::pipeline::import_review(corpus_path);
            for (const auto& [label, count] : result.counts) {
                std::cout << std::left << std::setw(10) << pm::corpus::label_name(label)
                          << std::right << std::setw(6) << count << std::setw(8) << std::fixed
                          << std::setprecision(1) << result.percentages.at(label) << "%\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
