#include "navloop/surveys.hpp"

#include <array>

namespace navloop {

namespace {

constexpr std::array<std::string_view, 26> kSsqSymptoms{
    "General discomfort", "Fatigue", "Boredom", "Drowsiness", "Headache", "Eyestrain",
    "Difficulty focusing", "Salivation increase/decrease", "Sweating", "Nausea",
    "Difficulty concentrating", "Mental depression", "Fullness of the head", "Blurred vision",
    "Dizziness with eyes open/closed", "Vertigo", "Visual flashbacks", "Faintness",
    "Breathing awareness", "Stomach awareness", "Loss of appetite", "Increase of appetite",
    "Desire to move bowels", "Confusion", "Burping", "Vomiting"};

constexpr std::array<std::string_view, 6> kTlxDimensions{"Mental demand", "Physical demand", "Temporal demand",
                                                         "Effort", "Performance", "Frustration level"};

}  // namespace

std::string_view to_string(SurveyTiming t) {
    switch (t) {
        case SurveyTiming::PreSession: return "PreSession";
        case SurveyTiming::PostBlock: return "PostBlock";
        case SurveyTiming::PostSession: return "PostSession";
    }
    return "PostBlock";
}

std::optional<SurveyTiming> survey_timing_from_string(std::string_view s) {
    if (s == "PreSession") return SurveyTiming::PreSession;
    if (s == "PostBlock") return SurveyTiming::PostBlock;
    if (s == "PostSession") return SurveyTiming::PostSession;
    return std::nullopt;
}

SurveyDefinition simulator_sickness_questionnaire() {
    SurveyDefinition def;
    def.id = std::string(kSsqId);
    def.title = "Simulator Sickness Questionnaire";
    def.administerAt = SurveyTiming::PreSession;
    const ScaleSpec scale{0, 3, {"None", "Slight", "Moderate", "Severe"}};
    for (auto symptom : kSsqSymptoms) def.items.push_back({std::string(symptom), scale});
    // "Others" is rated like the rest; what the symptom was goes in the notes.
    def.items.push_back({"Others", scale});
    return def;
}

SurveyDefinition nasa_tlx(int scaleMax) {
    SurveyDefinition def;
    def.id = std::string(kTlxId);
    def.title = "NASA Task Load Index";
    def.administerAt = SurveyTiming::PostBlock;
    const ScaleSpec scale{1, scaleMax, {"Very low", "Very high"}};
    for (auto dim : kTlxDimensions) def.items.push_back({std::string(dim), scale});
    return def;
}

std::vector<SurveyDefinition> builtin_surveys() { return {simulator_sickness_questionnaire(), nasa_tlx(7)}; }

const SurveyDefinition* find_survey(const std::vector<SurveyDefinition>& defs, std::string_view id) {
    for (const auto& d : defs) {
        if (d.id == id) return &d;
    }
    return nullptr;
}

std::optional<std::string> check_answers(const SurveyDefinition& def, const std::vector<SurveyAnswer>& answers) {
    if (answers.size() != def.items.size()) {
        return "survey '" + def.id + "' expects " + std::to_string(def.items.size()) + " answers, got " +
               std::to_string(answers.size());
    }
    for (std::size_t i = 0; i < answers.size(); ++i) {
        const auto& item = def.items[i];
        if (const auto* scale = std::get_if<ScaleSpec>(&item.format)) {
            const auto* v = std::get_if<int>(&answers[i]);
            if (!v) return "item " + std::to_string(i + 1) + " expects a number";
            if (*v < scale->min || *v > scale->max) {
                return "item " + std::to_string(i + 1) + " answer " + std::to_string(*v) + " outside [" +
                       std::to_string(scale->min) + "," + std::to_string(scale->max) + "]";
            }
        } else if (!std::holds_alternative<std::string>(answers[i])) {
            return "item " + std::to_string(i + 1) + " expects free text";
        }
    }
    return std::nullopt;
}

int total_raw_score(const SurveyResponse& response) {
    int total = 0;
    for (const auto& a : response.answers) {
        if (const auto* v = std::get_if<int>(&a)) total += *v;
    }
    return total;
}

std::pair<int, int> total_score_range(const SurveyDefinition& def) {
    int lo = 0;
    int hi = 0;
    for (const auto& item : def.items) {
        if (const auto* s = std::get_if<ScaleSpec>(&item.format)) {
            lo += s->min;
            hi += s->max;
        }
    }
    return {lo, hi};
}

}  // namespace navloop
