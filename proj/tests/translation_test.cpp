#include <doctest.h>

#include <chrono>

#include "pharmmt/translation.hpp"

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

corpus::PrescriptionPair make_pair(std::string id, std::string source, std::string reference) {
    corpus::PrescriptionPair p;
    p.id = std::move(id);
    p.source = std::move(source);
    p.reference = std::move(reference);
    return p;
}

std::shared_ptr<translation::ExternalTranslator> spawn_helper(
    const std::string& mode, std::chrono::milliseconds timeout = std::chrono::seconds(5)) {
    return std::make_shared<translation::ExternalTranslator>(
        std::vector<std::string>{PHARMMT_ECHO_TRANSLATOR, mode}, timeout);
}

}  // namespace

TEST_CASE("translator kind names round-trip") {
    using translation::TranslatorKind;
    CHECK(translation::kind_name(TranslatorKind::RuleBaseline) == "rule-baseline");
    CHECK(translation::kind_from_name("retrieval") == TranslatorKind::Retrieval);
    CHECK(translation::kind_from_name("external") == TranslatorKind::External);
    CHECK_FALSE(translation::kind_from_name("neural").has_value());
}

TEST_CASE("rule baseline translator emits one normalized candidate") {
    auto translator = translation::Translator::rule_baseline(lexicon(), rules());
    auto result = translator.translate("2 puffs orally q 4 hrs x90 dys wheeze");
    REQUIRE(result.candidates.size() == 1);
    CHECK(result.candidates[0].text ==
          "Inhale 2 puffs by mouth every 4 hours for 90 days for wheeze");
    CHECK(result.candidates[0].score == doctest::Approx(1.0));
    CHECK_FALSE(result.error.has_value());
}

TEST_CASE("retrieval table picks the most frequent reference") {
    std::vector<corpus::PrescriptionPair> train = {
        make_pair("a", "1 tab po qd", "Take 1 tablet by mouth every day"),
        make_pair("b", "1 TAB  po qd", "Take 1 tablet by mouth every day"),
        make_pair("c", "1 tab po qd", "Take one tablet by mouth daily"),
        make_pair("d", "2 caps bid", "Take 2 capsules twice a day"),
    };
    auto table = translation::RetrievalTable::build_all_train(train);
    CHECK(table.size() == 2);
    auto hit = table.lookup("1 Tab PO qd");
    REQUIRE(hit.has_value());
    CHECK(hit->text == "Take 1 tablet by mouth every day");
    CHECK(hit->score == doctest::Approx(2.0));
    CHECK_FALSE(table.lookup("3 tabs tid").has_value());
}

TEST_CASE("retrieval frequency ties break lexicographically") {
    std::vector<corpus::PrescriptionPair> train = {
        make_pair("a", "1 tab po qd", "Zebra reference"),
        make_pair("b", "1 tab po qd", "Alpha reference"),
    };
    auto table = translation::RetrievalTable::build_all_train(train);
    CHECK(table.lookup("1 tab po qd")->text == "Alpha reference");
}

TEST_CASE("retrieval build rejects non-train pairs") {
    std::vector<corpus::PrescriptionPair> pairs = {
        make_pair("a", "1 tab po qd", "Take 1 tablet by mouth every day"),
    };
    std::map<std::string, corpus::Split> assignment{{"a", corpus::Split::Test}};
    CHECK_THROWS(translation::RetrievalTable::build(pairs, assignment));
    CHECK_THROWS(translation::RetrievalTable::build(pairs, {}));
}

TEST_CASE("fuzzy lookup tolerates one edit") {
    std::vector<corpus::PrescriptionPair> train = {
        make_pair("a", "1 tab po qd", "Take 1 tablet by mouth every day"),
    };
    auto table = translation::RetrievalTable::build_all_train(train);
    CHECK_FALSE(table.lookup("1 tav po qd", false).has_value());
    CHECK(table.lookup("1 tav po qd", true).has_value());   // substitution
    CHECK(table.lookup("1 tab po qdd", true).has_value());  // insertion
    CHECK(table.lookup("1 tb po qd", true).has_value());    // deletion
    CHECK_FALSE(table.lookup("1 xx po qd", true).has_value());
}

TEST_CASE("external translator echoes over the line protocol") {
    auto process = spawn_helper("echo");
    auto translator = translation::Translator::external(process);
    auto result = translator.translate("1 tab po qd", "req-1");
    REQUIRE(result.candidates.size() == 1);
    CHECK(result.candidates[0].text == "1 tab po qd");
    CHECK_FALSE(result.error.has_value());

    auto second = translator.translate("2 caps bid", "req-2");
    REQUIRE(second.candidates.size() == 1);
    CHECK(second.candidates[0].text == "2 caps bid");
}

TEST_CASE("external translator buffers out-of-order replies by id") {
    auto process = spawn_helper("chatty");
    // The helper answers every request with an extra reply for id "next"
    // before the requested id, so the reader must buffer and keep looking.
    auto first = process->translate("req-1", "1 tab po qd");
    auto* candidates = std::get_if<std::vector<translation::Candidate>>(&first);
    REQUIRE(candidates != nullptr);
    CHECK((*candidates)[0].text == "1 tab po qd");

    // The reply for "next" is already buffered and must be returned directly.
    auto buffered = process->translate("next", "ignored");
    candidates = std::get_if<std::vector<translation::Candidate>>(&buffered);
    REQUIRE(candidates != nullptr);
    CHECK((*candidates)[0].text == "buffered for next");
}

TEST_CASE("external translator times out on a silent process") {
    auto process = spawn_helper("silent", std::chrono::milliseconds(200));
    auto reply = process->translate("req-1", "1 tab po qd");
    auto* error = std::get_if<translation::ExternalError>(&reply);
    REQUIRE(error != nullptr);
    CHECK(*error == translation::ExternalError::Timeout);
}

TEST_CASE("external translator reports malformed replies") {
    auto process = spawn_helper("garbage");
    auto reply = process->translate("req-1", "1 tab po qd");
    auto* error = std::get_if<translation::ExternalError>(&reply);
    REQUIRE(error != nullptr);
    CHECK(*error == translation::ExternalError::Malformed);
}

TEST_CASE("missing external process is unreachable, and stays so") {
    translation::ExternalTranslator process({"/nonexistent/translator-binary"},
                                            std::chrono::milliseconds(500));
    auto reply = process.translate("req-1", "1 tab po qd");
    auto* error = std::get_if<translation::ExternalError>(&reply);
    REQUIRE(error != nullptr);
    CHECK(*error == translation::ExternalError::Unreachable);
    auto again = process.translate("req-2", "2 caps bid");
    CHECK(std::get<translation::ExternalError>(again) ==
          translation::ExternalError::Unreachable);
}

TEST_CASE("external facade surfaces errors through TranslateResult") {
    auto translator = translation::Translator::external(spawn_helper("garbage"));
    auto result = translator.translate("1 tab po qd", "req-1");
    CHECK(result.candidates.empty());
    REQUIRE(result.error.has_value());
    CHECK(*result.error == translation::ExternalError::Malformed);
}
