#include <doctest.h>

#include <set>
#include <sstream>

#include "pharmmt/corpus.hpp"

using namespace pharmmt;

TEST_CASE("corpus loader reads well-formed records") {
    std::istringstream in(
        R"({"id":"a","source":"1 tab po qd","reference":"Take 1 tablet by mouth every day","drug_name":"traMADol 50 mg tablet","drug_strength":"50 mg"})"
        "\n"
        R"({"id":"b","source":"2 caps bid"})"
        "\n");
    auto result = corpus::load_corpus_stream(in);
    REQUIRE(result.errors.empty());
    REQUIRE(result.pairs.size() == 2);
    CHECK(result.pairs[0].id == "a");
    CHECK(result.pairs[0].reference == "Take 1 tablet by mouth every day");
    REQUIRE(result.pairs[0].drug.has_value());
    CHECK(result.pairs[0].drug->name == "traMADol 50 mg tablet");
    CHECK(result.pairs[1].reference.empty());
    CHECK_FALSE(result.pairs[1].drug.has_value());
}

TEST_CASE("corpus loader reports malformed lines with numbers, keeps the rest") {
    std::istringstream in(
        "{\"id\":\"a\",\"source\":\"1 tab po qd\"}\n"
        "this is not json\n"
        "{\"id\":\"c\"}\n"
        "{\"id\":\"a\",\"source\":\"duplicate id\"}\n"
        "{\"source\":\"no id at all\"}\n");
    auto result = corpus::load_corpus_stream(in, "test.jsonl");
    REQUIRE(result.pairs.size() == 2);
    REQUIRE(result.errors.size() == 3);
    CHECK(result.errors[0].line == 2);
    CHECK(result.errors[1].line == 3);
    CHECK(result.errors[2].line == 4);
    CHECK(result.pairs[1].id == "line-5");  // synthesized id for the id-less record
}

TEST_CASE("canonical key folds case and whitespace, keeps punctuation") {
    CHECK(corpus::canonical_key("  Take 1   Tablet  ") == "take 1 tablet");
    CHECK(corpus::canonical_key("1 tab; po") == "1 tab; po");
    CHECK(corpus::canonical_key("A\tB\nC") == "a b c");
}

TEST_CASE("auxiliary augmentation prepends drug info") {
    corpus::PrescriptionPair pair;
    pair.source = "1 tab po qd";
    pair.drug = corpus::DrugInfo{"TRAMADOL HCL TAB 50MG", "50 mg"};
    CHECK(corpus::augment_auxiliary(pair) == "TRAMADOL HCL TAB 50MG 50 mg || 1 tab po qd");
    CHECK(corpus::augment_auxiliary(pair, "##") == "TRAMADOL HCL TAB 50MG 50 mg ## 1 tab po qd");
    pair.drug.reset();
    CHECK(corpus::augment_auxiliary(pair) == "1 tab po qd");
}

namespace {

std::vector<corpus::PrescriptionPair> synthetic_pairs(std::size_t n) {
    std::vector<corpus::PrescriptionPair> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        corpus::PrescriptionPair p;
        p.id = "p" + std::to_string(i);
        p.source = "take " + std::to_string(i % (n / 2)) + " tablets";  // ~50% duplicate sources
        pairs.push_back(std::move(p));
    }
    return pairs;
}

}  // namespace

TEST_CASE("dedup split keeps duplicate sources together") {
    auto pairs = synthetic_pairs(40);
    auto assignment = corpus::dedup_group_split(pairs, {0.6, 0.2, 0.2}, 7);
    REQUIRE(assignment.size() == 40);
    std::map<std::string, corpus::Split> by_key;
    for (const auto& pair : pairs) {
        auto key = corpus::canonical_key(pair.source);
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            by_key.emplace(key, assignment.at(pair.id));
        } else {
            CHECK(it->second == assignment.at(pair.id));
        }
    }
}

TEST_CASE("dedup split is deterministic per seed and sensitive to it") {
    auto pairs = synthetic_pairs(60);
    auto a = corpus::dedup_group_split(pairs, {0.6, 0.2, 0.2}, 1);
    auto b = corpus::dedup_group_split(pairs, {0.6, 0.2, 0.2}, 1);
    CHECK(a == b);
    auto c = corpus::dedup_group_split(pairs, {0.6, 0.2, 0.2}, 2);
    CHECK(a != c);  // 30 groups; astronomically unlikely to coincide
}

TEST_CASE("group quotas follow largest remainder") {
    auto pairs = synthetic_pairs(20);  // 10 distinct groups
    auto by_key = corpus::group_split_by_key(pairs, {0.6, 0.15, 0.25}, 3);
    std::array<std::size_t, 3> counts{};
    for (const auto& [key, split] : by_key) ++counts[static_cast<std::size_t>(split)];
    CHECK(counts[0] == 6);
    // 1.5 and 2.5 exact; one of the two gets the leftover group
    CHECK(counts[1] + counts[2] == 4);
    CHECK(counts[1] >= 1);
    CHECK(counts[2] >= 2);
}

TEST_CASE("split rejects bad ratios and empty corpora") {
    auto pairs = synthetic_pairs(4);
    CHECK_THROWS(corpus::dedup_group_split(pairs, {0.5, 0.2, 0.2}, 0));
    CHECK_THROWS(corpus::dedup_group_split({}, {0.8, 0.1, 0.1}, 0));
}

TEST_CASE("review sampling is deterministic and without replacement") {
    auto pairs = synthetic_pairs(30);
    std::vector<std::string> outputs;
    for (const auto& p : pairs) outputs.push_back("out " + p.id);
    auto a = corpus::sample_for_review(pairs, outputs, 10, 42);
    auto b = corpus::sample_for_review(pairs, outputs, 10, 42);
    REQUIRE(a.size() == 10);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pair_id == b[i].pair_id);
        CHECK(a[i].system_output == "out " + a[i].pair_id);
        CHECK(a[i].label == corpus::ReviewLabel::Unlabeled);
        ids.insert(a[i].pair_id);
    }
    CHECK(ids.size() == 10);
    CHECK_THROWS(corpus::sample_for_review(pairs, outputs, 31, 42));
}

TEST_CASE("review tally percentages use one decimal, half away from zero") {
    std::vector<corpus::ReviewItem> items;
    auto push = [&](corpus::ReviewLabel label, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            items.push_back({"id", "src", "out", label});
        }
    };
    push(corpus::ReviewLabel::Correct, 260);
    push(corpus::ReviewLabel::Missing, 23);
    push(corpus::ReviewLabel::Wrong, 17);
    auto tally = corpus::tally_review(items);
    CHECK(tally.counts.at(corpus::ReviewLabel::Correct) == 260);
    CHECK(tally.percentages.at(corpus::ReviewLabel::Correct) == doctest::Approx(86.7));
    CHECK(tally.percentages.at(corpus::ReviewLabel::Missing) == doctest::Approx(7.7));
    CHECK(tally.percentages.at(corpus::ReviewLabel::Wrong) == doctest::Approx(5.7));
}

TEST_CASE("tally refuses unlabeled items, naming the offender") {
    std::vector<corpus::ReviewItem> items = {
        {"ok", "src", "out", corpus::ReviewLabel::Correct},
        {"missing-label", "src", "out", corpus::ReviewLabel::Unlabeled},
    };
    CHECK_THROWS_WITH(corpus::tally_review(items), doctest::Contains("missing-label"));
}

TEST_CASE("review csv round-trips commas, quotes and newlines-free fields") {
    std::vector<corpus::ReviewItem> items = {
        {"a", "take 1, then stop", "he said \"ok\"", corpus::ReviewLabel::Correct},
        {"b", "plain", "also plain", corpus::ReviewLabel::Wrong},
    };
    std::ostringstream out;
    corpus::write_review_csv(out, items);
    std::istringstream in(out.str());
    auto back = corpus::read_review_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].source == "take 1, then stop");
    CHECK(back[0].system_output == "he said \"ok\"");
    CHECK(back[0].label == corpus::ReviewLabel::Correct);
    CHECK(back[1].label == corpus::ReviewLabel::Wrong);
}

TEST_CASE("review csv rejects bad headers and labels") {
    std::istringstream bad_header("id,source\n");
    CHECK_THROWS(corpus::read_review_csv(bad_header));
    std::istringstream bad_label("pair_id,source,system_output,label\na,b,c,Perfect\n");
    CHECK_THROWS(corpus::read_review_csv(bad_label));
}

TEST_CASE("bundled mini corpus loads cleanly with at least 100 pairs") {
    auto result = corpus::load_corpus(std::string(PHARMMT_DATA_DIR) + "/mini_corpus.jsonl");
    CHECK(result.errors.empty());
    CHECK(result.pairs.size() >= 100);
    for (const auto& pair : result.pairs) {
        CHECK_FALSE(pair.source.empty());
        CHECK_FALSE(pair.reference.empty());
    }
}
