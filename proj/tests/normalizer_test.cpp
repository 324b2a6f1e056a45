#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "pharmmt/corpus.hpp"
#include "pharmmt/normalizer.hpp"

using namespace pharmmt;

namespace {

const sig::Lexicon& lexicon() {
    static sig::Lexicon lex = sig::Lexicon::load(std::string(PHARMMT_DATA_DIR) + "/lexicon.tsv");
    return lex;
}

const norm::RuleSet& rules() {
    static norm::RuleSet set = norm::RuleSet::load(std::string(PHARMMT_DATA_DIR) + "/rules.tsv");
    return set;
}

std::string normalized(std::string_view text) {
    return norm::normalize_text(text, lexicon(), rules());
}

std::vector<std::string> quantity_multiset(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& q : sig::all_quantities(text)) out.push_back(q.canonical());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("rule file loads and validates") {
    std::istringstream one_rule("Frequency\tqd\tevery day\t0\n");
    auto set = norm::RuleSet::parse(one_rule);
    REQUIRE(set.rules().size() == 1);
    CHECK(set.rules()[0].pattern == std::vector<std::string>{"qd"});
    CHECK(set.rules()[0].replacement == "every day");
}

TEST_CASE("empty rule set leaves text alone apart from casing") {
    norm::RuleSet empty;
    CHECK(norm::normalize_text("take 1 tablet", lexicon(), empty) == "Take 1 tablet");
}

TEST_CASE("duplicate rules are rejected") {
    std::istringstream dup("Frequency\tqd\tevery day\t0\nFrequency\tqd\tdaily\t0\n");
    CHECK_THROWS(norm::RuleSet::parse(dup));
}

TEST_CASE("replacement slots must be bound by pattern captures") {
    std::istringstream bad("Frequency\tqd\tevery <n> days\t0\n");
    CHECK_THROWS(norm::RuleSet::parse(bad));
}

TEST_CASE("action rules build the verb map") {
    std::istringstream rows("Action\tpuff\tinhale\t0\n");
    auto set = norm::RuleSet::parse(rows);
    CHECK(set.rules().empty());
    CHECK(set.action_verbs().at("puff") == "inhale");
}

TEST_CASE("unknown category and short rows fail with location") {
    std::istringstream bad_cat("Widget\tqd\tevery day\t0\n");
    CHECK_THROWS_WITH(norm::RuleSet::parse(bad_cat, "rules.tsv"),
                      doctest::Contains("rules.tsv:1"));
    std::istringstream short_row("Frequency\tqd\n");
    CHECK_THROWS(norm::RuleSet::parse(short_row));
}

TEST_CASE("baseline golden directions") {
    CHECK(normalized("1/2 tab bid orally 90.") == "Take 0.5 tablet by mouth twice a day 90");
    CHECK(normalized("tablets by mouth daily; 3.5 tab 7 mg.") ==
          "Take tablets by mouth daily ; 3.5 tablet 7 mg");
    CHECK(normalized("one tablet by mouth oce daily .") == "Take 1 tablet by mouth oce daily");
    CHECK(normalized("1 puff aero pow br act bid.") ==
          "Inhale 1 puff aero pow br act twice a day");
    CHECK(normalized("spray 1 spray(s) 4 times a day by intranasal route as needed for 90 days .") ==
          "Use spray 1 spray 4 times a day in the nose route as needed for 90 days");
}

TEST_CASE("worked pipeline examples normalize fully") {
    CHECK(normalized("2 puffs orally q 4 hrs x90 dys wheeze") ==
          "Inhale 2 puffs by mouth every 4 hours for 90 days for wheeze");
    CHECK(normalized("1 g vaginal mon/tu/th/fr") ==
          "Insert 1 gram vaginally monday, tuesday, thursday and friday");
}

TEST_CASE("duration rendering pluralizes by value") {
    CHECK(normalized("1 tab po qd x 1 dy") == "Take 1 tablet by mouth every day for 1 day");
    CHECK(normalized("1 tab po qd x 2 wks") == "Take 1 tablet by mouth every day for 2 weeks");
}

TEST_CASE("the ambiguous abbreviation 'in' fires only as a form") {
    // Untagged preposition "in" stays; the Form-tagged "in" expands.
    CHECK(normalized("dissolve 1 tablet in water daily") ==
          "Take dissolve 1 tablet in water daily");
}

TEST_CASE("no action verb inserted when one is present") {
    CHECK(normalized("take 1 tablet po daily") == "Take 1 tablet by mouth daily");
    CHECK(normalized("inhale 2 puffs bid") == "Inhale 2 puffs twice a day");
}

TEST_CASE("action verb chosen by the first form word") {
    CHECK(normalized("1 spray in the nose daily") == "Use 1 spray in the nose daily");
    CHECK(normalized("2 drops sl daily") == "Instill 2 drops under the tongue daily");
}

TEST_CASE("single trailing period is stripped, interior ones kept") {
    CHECK(normalized("1 tab po qd.") == "Take 1 tablet by mouth every day");
    CHECK(normalized("1 tab po. then stop") == "Take 1 tablet by mouth. then stop");
}

TEST_CASE("idempotence on the golden outputs") {
    for (const char* text :
         {"1/2 tab bid orally 90.", "tablets by mouth daily; 3.5 tab 7 mg.",
          "2 puffs orally q 4 hrs x90 dys wheeze", "1 g vaginal mon/tu/th/fr",
          "spray 1 spray(s) 4 times a day by intranasal route as needed for 90 days ."}) {
        auto once = normalized(text);
        CHECK(normalized(once) == once);
    }
}

TEST_CASE("rules rewrite number forms, never values") {
    for (const char* text :
         {"1/2 tab bid orally 90.", "one tablet by mouth oce daily .",
          "2 puffs orally q 4 hrs x90 dys wheeze", "one and a half tabs po qd",
          "1 g vaginal mon/tu/th/fr"}) {
        CHECK(quantity_multiset(normalized(text)) == quantity_multiset(text));
    }
}

TEST_CASE("normalization_ratio counts changed directions") {
    std::vector<std::string> all_changed = {"1 tab po qd", "2 caps bid"};
    CHECK(norm::normalization_ratio(all_changed, lexicon(), rules()) == doctest::Approx(1.0));

    std::vector<std::string> none_changed = {"Take 1 tablet by mouth every day"};
    CHECK(norm::normalization_ratio(none_changed, lexicon(), rules()) == doctest::Approx(0.0));

    std::vector<std::string> mixed = {"1 tab po qd", "Take 1 tablet by mouth every day",
                                      "take 2 capsules twice a day", "2 caps bid"};
    CHECK(norm::normalization_ratio(mixed, lexicon(), rules()) == doctest::Approx(0.5));
}

TEST_CASE("normalization_ratio on bundled raw directions matches a direct count") {
    auto loaded = corpus::load_corpus(std::string(PHARMMT_DATA_DIR) + "/mini_corpus.jsonl");
    REQUIRE(loaded.errors.empty());
    std::vector<std::string> sources;
    for (std::size_t i = 0; i < 20 && i < loaded.pairs.size(); ++i) {
        sources.push_back(loaded.pairs[i].source);
    }
    std::size_t changed = 0;
    for (const auto& s : sources) {
        std::string out = normalized(s);
        std::string folded_in(s), folded_out(out);
        for (auto& c : folded_in) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        for (auto& c : folded_out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (folded_in != folded_out) ++changed;
    }
    CHECK(norm::normalization_ratio(sources, lexicon(), rules()) ==
          doctest::Approx(static_cast<double>(changed) / static_cast<double>(sources.size())));
}
