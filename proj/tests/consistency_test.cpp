#include <doctest.h>

#include <fstream>

#include "pharmmt/consistency.hpp"

using namespace pharmmt;

namespace {

const sig::Lexicon& lexicon() {
    static sig::Lexicon lex = sig::Lexicon::load(std::string(PHARMMT_DATA_DIR) + "/lexicon.tsv");
    return lex;
}

struct SwapCase {
    std::string source;
    std::string candidate;
};

std::vector<SwapCase> load_swap_suite() {
    std::ifstream in(std::string(PHARMMT_DATA_DIR) + "/swap_suite.tsv");
    REQUIRE(in.good());
    std::vector<SwapCase> cases;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        REQUIRE(tab != std::string::npos);
        cases.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return cases;
}

}  // namespace

TEST_CASE("token check compares the full numeric multiset") {
    CHECK(consistency::token_numeric_check("take 2 tablets", "take 2 tablets daily")
              .token_consistent);
    CHECK(consistency::token_numeric_check("1/2 tab", "take 0.5 tablet").token_consistent);
    CHECK_FALSE(consistency::token_numeric_check("take 1 tablet", "take 10 tablets")
                    .token_consistent);
    auto report = consistency::token_numeric_check("take 1 tablet", "take 2 tablets");
    REQUIRE(report.mismatches.size() == 1);
    CHECK(report.mismatches[0].component == "token");
    CHECK(report.mismatches[0].source_values == std::vector<std::string>{"1"});
    CHECK(report.mismatches[0].candidate_values == std::vector<std::string>{"2"});
}

TEST_CASE("dosage/frequency swap: token passes, component catches it") {
    auto source = "take 2 tablets every 4 hours";
    auto candidate = "take 4 tablets every 2 hours";
    CHECK(consistency::token_numeric_check(source, candidate).token_consistent);
    auto report = consistency::component_numeric_check(source, candidate, lexicon());
    CHECK_FALSE(report.component_consistent);
}

TEST_CASE("dropped untagged numeral: token fails, component tolerates") {
    auto source = "1 tab po qd disp 30";
    auto candidate = "take 1 tablet by mouth every day";
    CHECK_FALSE(consistency::token_numeric_check(source, candidate).token_consistent);
    CHECK(consistency::component_numeric_check(source, candidate, lexicon())
              .component_consistent);
}

TEST_CASE("untagged pool is consumed at most once") {
    auto source = "1 tab po 30";
    auto candidate = "take 1 tablet by mouth for 30 days every 30 hours";
    // only one untagged 30 in the source; the candidate claims two tagged ones
    CHECK_FALSE(consistency::component_numeric_check(source, candidate, lexicon())
                    .component_consistent);
}

TEST_CASE("dropping a dosage is always flagged") {
    auto source = "take 2 tablets daily";
    auto candidate = "take tablets daily";
    CHECK_FALSE(consistency::token_numeric_check(source, candidate).token_consistent);
    CHECK_FALSE(consistency::component_numeric_check(source, candidate, lexicon())
                    .component_consistent);
}

TEST_CASE("metric-limitation examples: token-equivalent and dosage-error rewrites") {
    auto reference = "take 1 tablet by mouth every morning and every evening.";
    auto amp = "take 1 tablet by mouth every morning & every evening.";
    auto wrong_dose = "take 10 tablets by mouth every morning and every evening.";

    auto amp_report = consistency::check(reference, amp, lexicon());
    CHECK(amp_report.token_consistent);
    CHECK(amp_report.component_consistent);

    auto dose_report = consistency::check(reference, wrong_dose, lexicon());
    CHECK_FALSE(dose_report.token_consistent);
    CHECK_FALSE(dose_report.component_consistent);
}

TEST_CASE("bundled swap suite: component flags all, token flags none") {
    auto cases = load_swap_suite();
    REQUIRE(cases.size() == 10);
    for (const auto& c : cases) {
        CAPTURE(c.source);
        CHECK(consistency::token_numeric_check(c.source, c.candidate).token_consistent);
        CHECK_FALSE(consistency::component_numeric_check(c.source, c.candidate, lexicon())
                        .component_consistent);
    }
}

TEST_CASE("backoff picks the best passing candidate") {
    std::vector<consistency::Candidate> candidates = {
        {"take 9 tablets by mouth every day", 0.9},
        {"take 1 tablet by mouth every day", 0.8},
        {"take 1 tablet daily", 0.7},
    };
    auto final_direction = consistency::resolve_backoff(
        "1 tab po qd", candidates, consistency::CheckerMode::Component, lexicon());
    CHECK(final_direction.text == "take 1 tablet by mouth every day");
    CHECK(final_direction.provenance == consistency::Provenance::Candidate);
    CHECK(final_direction.report.component_consistent);
}

TEST_CASE("backoff falls back to the verbatim source") {
    std::vector<consistency::Candidate> candidates = {
        {"take 9 tablets", 1.0},
        {"", 0.9},
    };
    auto final_direction = consistency::resolve_backoff(
        "1 tab po qd", candidates, consistency::CheckerMode::Component, lexicon());
    CHECK(final_direction.text == "1 tab po qd");
    CHECK(final_direction.provenance == consistency::Provenance::BackoffSource);
    // the reflexive report always passes
    CHECK(final_direction.report.token_consistent);
    CHECK(final_direction.report.component_consistent);
}

TEST_CASE("backoff respects the configured checker mode") {
    // token-consistent but component-swapped candidate
    std::vector<consistency::Candidate> candidates = {
        {"take 4 tablets every 2 hours", 1.0},
    };
    auto token_mode = consistency::resolve_backoff(
        "take 2 tablets every 4 hours", candidates, consistency::CheckerMode::Token, lexicon());
    CHECK(token_mode.provenance == consistency::Provenance::Candidate);
    auto component_mode = consistency::resolve_backoff(
        "take 2 tablets every 4 hours", candidates, consistency::CheckerMode::Component,
        lexicon());
    CHECK(component_mode.provenance == consistency::Provenance::BackoffSource);
}

TEST_CASE("flag counts aggregate per component") {
    std::vector<std::string> sources = {
        "take 2 tablets every 4 hours",
        "take 1 tablet daily",
        "1 tab po qd",
    };
    std::vector<std::string> candidates = {
        "take 4 tablets every 2 hours",  // component swap
        "take 10 tablets daily",         // dosage error
        "take 1 tablet by mouth every day",
    };
    auto counts = consistency::checker_flag_counts(sources, candidates, lexicon());
    CHECK(counts.total == 3);
    CHECK(counts.token_flagged == 1);
    CHECK(counts.component_flagged == 2);
    CHECK(counts.dosage_flagged == 2);
    CHECK(counts.frequency_flagged == 1);
    CHECK(counts.duration_flagged == 0);
}
