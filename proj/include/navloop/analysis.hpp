#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "navloop/persistence.hpp"

namespace navloop {

enum class Measure { Time, Distance, Score };
inline constexpr std::array<Measure, 3> kMeasures{Measure::Time, Measure::Distance, Measure::Score};
std::string_view to_string(Measure m);

enum class ExclusionReason { None, Skipped, AccidentalEnd, Outlier, BadSession };
std::string_view to_string(ExclusionReason r);

struct TrialAggregate {
    std::string participantId;
    std::string group;
    std::string sessionId;
    int blockIndex = 0;
    int trialIndex = 0;
    double t = 0.0;
    double d = 0.0;
    long long score = 0;
    // Whole-row exclusion (skipped, accidental end, bad session).
    ExclusionReason excluded = ExclusionReason::None;
    // Per-measure 3-SD outliers; a trial can be an outlier on one measure only.
    std::array<bool, 3> outlier{false, false, false};

    double value(Measure m) const;
    bool excluded_for(Measure m) const;
};

struct AnalysisOptions {
    double minTrialDuration = 0.5;  // shorter trials count as accidental ends
    double gridStart = 0.0;
    double gridStop = 30.0;
    double gridStep = 0.1;
};

// Parses "start:stop:step" (e.g. "0:30:0.1") into the grid fields of `opts`.
// Throws std::invalid_argument on malformed or non-increasing grids.
void parse_grid(std::string_view spec, AnalysisOptions& opts);
std::vector<double> grid_points(const AnalysisOptions& opts);

struct OutlierSplit {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> removed;
};

// Indices of values farther than 3 sample standard deviations from the mean.
// Fewer than two values pass through untouched.
OutlierSplit remove_outliers(std::span<const double> values);

// One row per trial, with row-level exclusions applied and outliers flagged
// per participant, per block and per measure among the rows left.
std::vector<TrialAggregate> aggregate_trials(const std::vector<SessionArchive>& archives,
                                             const AnalysisOptions& opts = {});

struct SummaryCell {
    std::string group;
    int blockIndex = 0;
    Measure measure = Measure::Time;
    std::size_t n = 0;
    std::optional<double> mean;  // absent for an empty cell
    std::optional<double> sd;    // absent with fewer than two values
};

// Mean and sample SD of t, d and score per (group, block), skipping excluded
// rows and per-measure outliers. Cells are ordered by group, block, measure.
std::vector<SummaryCell> block_group_summary(const std::vector<TrialAggregate>& rows);

struct TimeCourse {
    std::string participantId;
    std::string group;
    int blockIndex = 0;
    int trialIndex = 0;
    std::vector<double> samples;  // one per grid point
};

// Residual distance to `goal` on the grid by zero-order hold: each grid point
// takes the last frame at or before it (the first frame before the first
// timestamp). Grid points past the last frame keep the final value.
TimeCourse time_course(std::span<const FrameLogEntry> frames, const Vec3& goal, std::span<const double> grid);

struct MeanCurves {
    std::map<std::string, std::vector<double>> perParticipant;
    std::map<std::string, std::string> participantGroup;
    std::map<std::string, std::vector<double>> perGroup;
};

// Pointwise means: each participant's trials first, then the participant
// curves within each group.
MeanCurves mean_curves(const std::vector<TimeCourse>& courses);

// Time courses for every trial that is not excluded.
std::vector<TimeCourse> trial_time_courses(const std::vector<SessionArchive>& archives,
                                           const std::vector<TrialAggregate>& rows, const AnalysisOptions& opts);

std::string render_aggregates_csv(const std::vector<TrialAggregate>& rows);
std::string render_summary_csv(const std::vector<SummaryCell>& cells);
// Measures as rows, group x block as columns, cells as "mean (sd)".
std::string render_summary_table(const std::vector<SummaryCell>& cells);
std::string render_timecourses_csv(const std::vector<TimeCourse>& courses, const MeanCurves& means,
                                   std::span<const double> grid);

struct AnalysisOutputs {
    std::vector<TrialAggregate> rows;
    std::vector<SummaryCell> summary;
    std::vector<TimeCourse> courses;
    MeanCurves means;
};

AnalysisOutputs analyze(const std::vector<SessionArchive>& archives, const AnalysisOptions& opts = {});

// Reads every session under `inDir` and writes summary.csv, summary_table.csv,
// aggregates.csv and timecourses.csv into `outDir`.
AnalysisOutputs run_analysis(const std::filesystem::path& inDir, const std::filesystem::path& outDir,
                             const AnalysisOptions& opts = {});

}  // namespace navloop
