#include "navloop/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

namespace navloop {

namespace {

constexpr double kGridEps = 1e-9;

std::size_t measure_index(Measure m) { return static_cast<std::size_t>(m); }

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sample_sd(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string opt_fixed(const std::optional<double>& v) { return v ? format_fixed6(*v) : std::string(); }

}  // namespace

std::string_view to_string(Measure m) {
    switch (m) {
        case Measure::Time: return "t";
        case Measure::Distance: return "d";
        case Measure::Score: return "score";
    }
    return "t";
}

std::string_view to_string(ExclusionReason r) {
    switch (r) {
        case ExclusionReason::None: return "";
        case ExclusionReason::Skipped: return "Skipped";
        case ExclusionReason::AccidentalEnd: return "AccidentalEnd";
        case ExclusionReason::Outlier: return "Outlier";
        case ExclusionReason::BadSession: return "BadSession";
    }
    return "";
}

double TrialAggregate::value(Measure m) const {
    switch (m) {
        case Measure::Time: return t;
        case Measure::Distance: return d;
        case Measure::Score: return static_cast<double>(score);
    }
    return t;
}

bool TrialAggregate::excluded_for(Measure m) const {
    return excluded != ExclusionReason::None || outlier[measure_index(m)];
}

void parse_grid(std::string_view spec, AnalysisOptions& opts) {
    double parts[3];
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
        const auto end = i < 2 ? spec.find(':', start) : spec.size();
        if (end == std::string_view::npos) throw std::invalid_argument("grid must look like start:stop:step");
        const auto piece = spec.substr(start, end - start);
        auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), parts[i]);
        if (ec != std::errc() || ptr != piece.data() + piece.size())
            throw std::invalid_argument("grid: '" + std::string(piece) + "' is not a number");
        start = end + 1;
    }
    if (!(parts[2] > 0.0) || !(parts[1] >= parts[0])) throw std::invalid_argument("grid: need stop >= start and step > 0");
    opts.gridStart = parts[0];
    opts.gridStop = parts[1];
    opts.gridStep = parts[2];
}

std::vector<double> grid_points(const AnalysisOptions& opts) {
    std::vector<double> g;
    const auto n = static_cast<long long>(std::floor((opts.gridStop - opts.gridStart) / opts.gridStep + kGridEps));
    for (long long i = 0; i <= n; ++i) g.push_back(opts.gridStart + static_cast<double>(i) * opts.gridStep);
    return g;
}

OutlierSplit remove_outliers(std::span<const double> values) {
    OutlierSplit split;
    if (values.size() < 2) {
        for (std::size_t i = 0; i < values.size(); ++i) split.kept.push_back(i);
        return split;
    }
    const double m = mean_of(values);
    const double sd = sample_sd(values, m);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::abs(values[i] - m) > 3.0 * sd) split.removed.push_back(i);
        else split.kept.push_back(i);
    }
    return split;
}

std::vector<TrialAggregate> aggregate_trials(const std::vector<SessionArchive>& archives, const AnalysisOptions& opts) {
    std::vector<TrialAggregate> rows;
    for (const auto& a : archives) {
        for (const auto& rec : a.trials) {
            TrialAggregate row;
            row.participantId = a.metadata.participant.id;
            row.group = a.metadata.participant.group;
            row.sessionId = a.metadata.sessionId;
            row.blockIndex = rec.blockIndex;
            row.trialIndex = rec.trialIndex;
            row.t = rec.elapsed;
            row.d = rec.residual;
            row.score = rec.displayedScore;
            if (a.metadata.badSession) row.excluded = ExclusionReason::BadSession;
            else if (rec.endReason == EndReason::Skipped) row.excluded = ExclusionReason::Skipped;
            else if (rec.elapsed < opts.minTrialDuration) row.excluded = ExclusionReason::AccidentalEnd;
            rows.push_back(std::move(row));
        }
    }

    // Cells: participant x session x block, over rows still in play.
    std::map<std::tuple<std::string, std::string, int>, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].excluded != ExclusionReason::None) continue;
        cells[{rows[i].participantId, rows[i].sessionId, rows[i].blockIndex}].push_back(i);
    }
    for (const auto& [key, idx] : cells) {
        for (Measure m : kMeasures) {
            std::vector<double> values;
            for (auto i : idx) values.push_back(rows[i].value(m));
            for (auto r : remove_outliers(values).removed) rows[idx[r]].outlier[measure_index(m)] = true;
        }
    }
    return rows;
}

std::vector<SummaryCell> block_group_summary(const std::vector<TrialAggregate>& rows) {
    std::set<std::pair<std::string, int>> keys;
    for (const auto& r : rows) keys.insert({r.group, r.blockIndex});

    std::vector<SummaryCell> out;
    for (const auto& [group, block] : keys) {
        for (Measure m : kMeasures) {
            std::vector<double> values;
            for (const auto& r : rows) {
                if (r.group == group && r.blockIndex == block && !r.excluded_for(m)) values.push_back(r.value(m));
            }
            SummaryCell cell{group, block, m, values.size(), std::nullopt, std::nullopt};
            if (!values.empty()) cell.mean = mean_of(values);
            if (values.size() >= 2) cell.sd = sample_sd(values, *cell.mean);
            out.push_back(std::move(cell));
        }
    }
    return out;
}

TimeCourse time_course(std::span<const FrameLogEntry> frames, const Vec3& goal, std::span<const double> grid) {
    if (frames.empty()) throw std::invalid_argument("time_course: no frames");
    TimeCourse tc;
    tc.samples.reserve(grid.size());
    std::size_t k = 0;
    for (double g : grid) {
        while (k + 1 < frames.size() && frames[k + 1].t <= g + kGridEps) ++k;
        const auto& f = frames[k];
        tc.samples.push_back(horizontal_distance({f.x, 0.0, f.z}, goal));
    }
    return tc;
}

MeanCurves mean_curves(const std::vector<TimeCourse>& courses) {
    MeanCurves out;
    std::map<std::string, std::size_t> counts;
    for (const auto& c : courses) {
        auto& acc = out.perParticipant[c.participantId];
        if (acc.empty()) acc.assign(c.samples.size(), 0.0);
        if (acc.size() != c.samples.size()) throw std::invalid_argument("mean_curves: curves on different grids");
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c.samples[i];
        ++counts[c.participantId];
        out.participantGroup[c.participantId] = c.group;
    }
    for (auto& [pid, acc] : out.perParticipant) {
        for (auto& v : acc) v /= static_cast<double>(counts[pid]);
    }

    std::map<std::string, std::size_t> groupCounts;
    for (const auto& [pid, curve] : out.perParticipant) {
        const auto& group = out.participantGroup[pid];
        auto& acc = out.perGroup[group];
        if (acc.empty()) acc.assign(curve.size(), 0.0);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += curve[i];
        ++groupCounts[group];
    }
    for (auto& [group, acc] : out.perGroup) {
        for (auto& v : acc) v /= static_cast<double>(groupCounts[group]);
    }
    return out;
}

std::vector<TimeCourse> trial_time_courses(const std::vector<SessionArchive>& archives,
                                           const std::vector<TrialAggregate>& rows, const AnalysisOptions& opts) {
    const auto grid = grid_points(opts);
    std::vector<TimeCourse> out;
    std::size_t rowIndex = 0;
    for (const auto& a : archives) {
        for (const auto& rec : a.trials) {
            const auto& row = rows.at(rowIndex++);
            if (row.excluded != ExclusionReason::None || rec.frames.empty()) continue;
            auto tc = time_course(rec.frames, a.scenario.goalPosition, grid);
            tc.participantId = row.participantId;
            tc.group = row.group;
            tc.blockIndex = rec.blockIndex;
            tc.trialIndex = rec.trialIndex;
            out.push_back(std::move(tc));
        }
    }
    return out;
}

std::string render_aggregates_csv(const std::vector<TrialAggregate>& rows) {
    std::string out = "participantId,group,sessionId,block,trial,t,d,score,excluded,outlierT,outlierD,outlierScore\n";
    for (const auto& r : rows) {
        out += r.participantId + ',' + r.group + ',' + r.sessionId + ',' + std::to_string(r.blockIndex) + ',' +
               std::to_string(r.trialIndex) + ',' + format_fixed6(r.t) + ',' + format_fixed6(r.d) + ',' +
               std::to_string(r.score) + ',' + std::string(to_string(r.excluded)) + ',' + (r.outlier[0] ? '1' : '0') +
               ',' + (r.outlier[1] ? '1' : '0') + ',' + (r.outlier[2] ? '1' : '0') + '\n';
    }
    return out;
}

std::string render_summary_csv(const std::vector<SummaryCell>& cells) {
    std::string out = "group,block,measure,n,mean,sd\n";
    for (const auto& c : cells) {
        out += c.group + ',' + std::to_string(c.blockIndex) + ',' + std::string(to_string(c.measure)) + ',' +
               std::to_string(c.n) + ',' + opt_fixed(c.mean) + ',' + opt_fixed(c.sd) + '\n';
    }
    return out;
}

std::string render_summary_table(const std::vector<SummaryCell>& cells) {
    std::vector<std::pair<std::string, int>> columns;
    for (const auto& c : cells) {
        std::pair<std::string, int> key{c.group, c.blockIndex};
        if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    }
    std::string out = "measure";
    for (const auto& [g, b] : columns) out += ',' + g + " block " + std::to_string(b + 1);
    out += '\n';
    for (Measure m : kMeasures) {
        out += std::string(to_string(m));
        for (const auto& col : columns) {
            out += ',';
            for (const auto& c : cells) {
                if (c.measure != m || c.group != col.first || c.blockIndex != col.second) continue;
                char buf[96] = "";
                if (c.mean && c.sd) std::snprintf(buf, sizeof buf, "%.2f (%.2f)", *c.mean, *c.sd);
                else if (c.mean) std::snprintf(buf, sizeof buf, "%.2f", *c.mean);
                out += buf;
            }
        }
        out += '\n';
    }
    return out;
}

std::string render_timecourses_csv(const std::vector<TimeCourse>& courses, const MeanCurves& means,
                                   std::span<const double> grid) {
    std::string out = "level,group,participantId,block,trial,t,value\n";
    auto emit = [&](std::string_view level, const std::string& group, const std::string& pid, const std::string& block,
                    const std::string& trial, const std::vector<double>& samples) {
        for (std::size_t i = 0; i < grid.size() && i < samples.size(); ++i) {
            out += std::string(level) + ',' + group + ',' + pid + ',' + block + ',' + trial + ',' + format_fixed6(grid[i]) +
                   ',' + format_fixed6(samples[i]) + '\n';
        }
    };
    for (const auto& c : courses)
        emit("trial", c.group, c.participantId, std::to_string(c.blockIndex), std::to_string(c.trialIndex), c.samples);
    for (const auto& [pid, curve] : means.perParticipant) emit("participant", means.participantGroup.at(pid), pid, "", "", curve);
    for (const auto& [group, curve] : means.perGroup) emit("group", group, "", "", "", curve);
    return out;
}

AnalysisOutputs analyze(const std::vector<SessionArchive>& archives, const AnalysisOptions& opts) {
    AnalysisOutputs out;
    out.rows = aggregate_trials(archives, opts);
    out.summary = block_group_summary(out.rows);
    out.courses = trial_time_courses(archives, out.rows, opts);
    out.means = mean_curves(out.courses);
    return out;
}

AnalysisOutputs run_analysis(const std::filesystem::path& inDir, const std::filesystem::path& outDir,
                             const AnalysisOptions& opts) {
    std::vector<SessionArchive> archives;
    for (const auto& dir : find_session_directories(inDir)) archives.push_back(read_session_archive(dir));
    auto out = analyze(archives, opts);
    const auto grid = grid_points(opts);
    write_file(outDir / "aggregates.csv", render_aggregates_csv(out.rows));
    write_file(outDir / "summary.csv", render_summary_csv(out.summary));
    write_file(outDir / "summary_table.csv", render_summary_table(out.summary));
    write_file(outDir / "timecourses.csv", render_timecourses_csv(out.courses, out.means, grid));
    return out;
}

}  // namespace navloop
