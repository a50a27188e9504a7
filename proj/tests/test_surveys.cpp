#include <doctest.h>

#include "navloop/surveys.hpp"

using namespace navloop;

TEST_CASE("builtin questionnaires") {
    const auto ssq = simulator_sickness_questionnaire();
    CHECK(ssq.id == "ssq");
    CHECK(ssq.items.size() == 27);
    CHECK(ssq.administerAt == SurveyTiming::PreSession);
    CHECK(ssq.items.back().prompt == "Others");
    for (const auto& item : ssq.items) {
        REQUIRE(item.scaled());
        const auto& s = std::get<ScaleSpec>(item.format);
        CHECK(s.min == 0);
        CHECK(s.max == 3);
        CHECK(s.labels == std::vector<std::string>{"None", "Slight", "Moderate", "Severe"});
    }
    CHECK(total_score_range(ssq) == std::pair{0, 81});

    const auto tlx = nasa_tlx();
    CHECK(tlx.id == "nasa_tlx");
    CHECK(tlx.items.size() == 6);
    CHECK(tlx.administerAt == SurveyTiming::PostBlock);
    CHECK(total_score_range(tlx) == std::pair{6, 42});
    CHECK(total_score_range(nasa_tlx(21)) == std::pair{6, 126});

    const auto all = builtin_surveys();
    REQUIRE(all.size() == 2);
    CHECK(find_survey(all, "nasa_tlx") == &all[1]);
    CHECK(find_survey(all, "sus") == nullptr);
}

TEST_CASE("check_answers") {
    const auto tlx = nasa_tlx();
    CHECK_FALSE(check_answers(tlx, {1, 2, 3, 4, 5, 7}).has_value());
    CHECK(check_answers(tlx, {1, 2, 3}).value().find("expects 6 answers") != std::string::npos);
    CHECK(check_answers(tlx, {1, 2, 3, 4, 5, 8}).value().find("item 6") != std::string::npos);
    CHECK(check_answers(tlx, {0, 2, 3, 4, 5, 7}).value().find("item 1") != std::string::npos);
    CHECK(check_answers(tlx, {1, std::string("high"), 3, 4, 5, 7}).has_value());

    SurveyDefinition mixed{"mix", "Mixed", {{"rate", ScaleSpec{}}, {"comment", FreeText{}}}, SurveyTiming::PostSession};
    CHECK_FALSE(check_answers(mixed, {2, std::string("fine")}).has_value());
    CHECK(check_answers(mixed, {2, 3}).has_value());
    CHECK(total_score_range(mixed) == std::pair{0, 3});
}

TEST_CASE("total_raw_score ignores free text") {
    SurveyResponse r{"mix", "P1", SurveyTiming::PostSession, -1, {2, std::string("fine"), 3}, 1.0};
    CHECK(total_raw_score(r) == 5);
}

TEST_CASE("timing names") {
    for (auto t : {SurveyTiming::PreSession, SurveyTiming::PostBlock, SurveyTiming::PostSession})
        CHECK(survey_timing_from_string(to_string(t)) == t);
    CHECK_FALSE(survey_timing_from_string("Midway").has_value());
}
