#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "navloop/core.hpp"
#include "navloop/scoring.hpp"
#include "navloop/session.hpp"
#include "navloop/surveys.hpp"

namespace navloop {

// Malformed settings/log content. `line`/`column` are 1-based when known, 0
// otherwise.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : std::runtime_error(what), line_(line), column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

// A session directory is missing an artifact, or one of its files is corrupt.
// `artifact` names the offending file kind (e.g. "notes", "results").
class ArchiveError : public std::runtime_error {
public:
    ArchiveError(std::string artifact, const std::string& what)
        : std::runtime_error(artifact + ": " + what), artifact_(std::move(artifact)) {}
    const std::string& artifact() const { return artifact_; }

private:
    std::string artifact_;
};

// ---------------------------------------------------------------------------
// Settings files (JSON)

enum class SettingsKind { Environment, Locomotion, Scenario };

template <typename T>
struct Parsed {
    T value;
    std::vector<std::string> warnings;    // absent keys (defaulted) and unknown keys
    std::vector<std::string> violations;  // validation report for the parsed value
};

using AnySettings = std::variant<EnvironmentSettings, LocomotionSettings, ScenarioSettings>;

// Empty or whitespace-only input parses as an empty object. Throws ParseError
// for malformed JSON or wrongly-typed values.
Parsed<EnvironmentSettings> parse_environment(std::string_view text);
Parsed<LocomotionSettings> parse_locomotion(std::string_view text);
Parsed<ScenarioSettings> parse_scenario(std::string_view text);
Parsed<AnySettings> parse_settings(std::string_view text, SettingsKind kind);

std::string serialize(const EnvironmentSettings& env);
std::string serialize(const LocomotionSettings& loco);
std::string serialize(const ScenarioSettings& scen);

// Reads environment.json, locomotion.json and scenario.json from `dir`, plus
// surveys.json when present. Throws ArchiveError / ParseError.
SessionSettings load_settings_dir(const std::filesystem::path& dir);
void save_settings_dir(const SessionSettings& settings, const std::filesystem::path& dir);

std::vector<SurveyDefinition> parse_survey_definitions(std::string_view text);
std::string serialize_survey_definitions(const std::vector<SurveyDefinition>& defs);

// ---------------------------------------------------------------------------
// Logs

// Fixed 6-decimal formatting used for every logged real number.
std::string format_fixed6(double v);

inline constexpr std::string_view kMovementLogHeader = "t,x,z,yaw,lightsOn,soundOn";
inline constexpr std::string_view kTrialResultsHeader =
    "block,trial,startTime,endTime,t,d,pathLength,timeComponent,distanceComponent,R,displayedScore,endReason,practice";

std::string render_movement_log(const std::vector<FrameLogEntry>& frames);
std::vector<FrameLogEntry> parse_movement_log(std::string_view text);
std::string render_trial_results(const std::vector<TrialRecord>& records);
// Frames are left empty; they live in the movement logs.
std::vector<TrialRecord> parse_trial_results(std::string_view text);

// `trialNumber` is the 1-based position of the trial within the session.
std::filesystem::path movement_log_name(int trialNumber);

// Throws ArchiveError when the destination cannot be written.
std::filesystem::path write_movement_log(const TrialRecord& trial, int trialNumber, const std::filesystem::path& dir);
std::filesystem::path write_trial_results(const std::vector<TrialRecord>& records, const std::filesystem::path& file);

// ---------------------------------------------------------------------------
// Session archive

struct SessionMetadata {
    std::string sessionId;
    ParticipantInfo participant;
    bool badSession = false;
    std::string finalPhase = "Ended";
    std::optional<LeaderboardMode> leaderboardMode;
    std::vector<Note> notes;
    friend bool operator==(const SessionMetadata&, const SessionMetadata&) = default;
};

struct SessionArchive {
    EnvironmentSettings environment;
    LocomotionSettings locomotion;
    ScenarioSettings scenario;
    SessionMetadata metadata;
    std::vector<TrialRecord> trials;  // frames filled from the movement logs
    std::vector<SurveyResponse> surveys;
    friend bool operator==(const SessionArchive&, const SessionArchive&) = default;
};

SessionArchive make_archive(const Session& session);

std::string render_session_metadata(const SessionMetadata& meta);
SessionMetadata parse_session_metadata(std::string_view text);
std::string render_notes(const std::vector<Note>& notes);
std::vector<Note> parse_notes(std::string_view text);
std::string render_survey_responses(const std::vector<SurveyResponse>& responses);
std::vector<SurveyResponse> parse_survey_responses(std::string_view text);

// <root>/<participantId>/<sessionId>
std::filesystem::path session_directory(const std::filesystem::path& root, const SessionMetadata& meta);

// Writes settings/, trials/trial_<n>.csv, results.csv, session.json,
// notes.txt and surveys.json under session_directory(root, ...). Returns that
// directory.
std::filesystem::path write_session_archive(const SessionArchive& archive, const std::filesystem::path& root);

// Rebuilds an archive from a directory written by write_session_archive.
// Unrecognized files are ignored. Throws ArchiveError naming the missing or
// corrupt artifact.
SessionArchive read_session_archive(const std::filesystem::path& dir);

// Every session directory (one containing session.json) below `root`, sorted.
std::vector<std::filesystem::path> find_session_directories(const std::filesystem::path& root);

// ---------------------------------------------------------------------------
// Leaderboard file

std::string render_leaderboard(const std::vector<LeaderboardEntry>& entries);
std::vector<LeaderboardEntry> parse_leaderboard(std::string_view text);

// A missing file yields an empty board.
Leaderboard load_leaderboard(const std::filesystem::path& file, LeaderboardMode mode);
// Writes only for Real boards; Fake and Practice boards never touch the disk.
// Returns true when the file was written.
bool save_leaderboard(const Leaderboard& board, const std::filesystem::path& file);

// ---------------------------------------------------------------------------
// Autopilot plan: {"entries": [{"environment": "...", "method": "ArmSwing"}, ...]}

AutopilotPlan parse_autopilot_plan(std::string_view text);
std::string serialize(const AutopilotPlan& plan);

std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, std::string_view content);

}  // namespace navloop
