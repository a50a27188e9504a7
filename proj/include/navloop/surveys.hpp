#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace navloop {

enum class SurveyTiming { PreSession, PostBlock, PostSession };

std::string_view to_string(SurveyTiming t);
std::optional<SurveyTiming> survey_timing_from_string(std::string_view s);

struct ScaleSpec {
    int min = 0;
    int max = 3;
    std::vector<std::string> labels;
    friend bool operator==(const ScaleSpec&, const ScaleSpec&) = default;
};

struct FreeText {
    friend bool operator==(const FreeText&, const FreeText&) = default;
};

struct SurveyItem {
    std::string prompt;
    std::variant<ScaleSpec, FreeText> format;
    bool scaled() const { return std::holds_alternative<ScaleSpec>(format); }
    friend bool operator==(const SurveyItem&, const SurveyItem&) = default;
};

struct SurveyDefinition {
    std::string id;
    std::string title;
    std::vector<SurveyItem> items;
    SurveyTiming administerAt = SurveyTiming::PostBlock;
    friend bool operator==(const SurveyDefinition&, const SurveyDefinition&) = default;
};

using SurveyAnswer = std::variant<int, std::string>;

struct SurveyResponse {
    std::string surveyId;
    std::string participantId;
    SurveyTiming boundary = SurveyTiming::PostBlock;
    int blockIndex = -1;  // only meaningful for PostBlock
    std::vector<SurveyAnswer> answers;
    double timestamp = 0.0;
    friend bool operator==(const SurveyResponse&, const SurveyResponse&) = default;
};

inline constexpr std::string_view kSsqId = "ssq";
inline constexpr std::string_view kTlxId = "nasa_tlx";

SurveyDefinition simulator_sickness_questionnaire();
// `scaleMax` points on a 1..scaleMax scale; the demo uses 7.
SurveyDefinition nasa_tlx(int scaleMax = 7);

// SSQ (27 items, 0-3, administered before the session) and the NASA TLX
// (6 items, 1-7, after each block).
std::vector<SurveyDefinition> builtin_surveys();

const SurveyDefinition* find_survey(const std::vector<SurveyDefinition>& defs, std::string_view id);

// Empty when the answers conform to the definition; otherwise a description of
// the first mismatch.
std::optional<std::string> check_answers(const SurveyDefinition& def, const std::vector<SurveyAnswer>& answers);

// Plain sum of the scaled answers; free-text answers contribute nothing.
int total_raw_score(const SurveyResponse& response);

// Lowest and highest attainable total for a definition.
std::pair<int, int> total_score_range(const SurveyDefinition& def);

}  // namespace navloop
