#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "navloop/core.hpp"
#include "navloop/goal_markers.hpp"
#include "navloop/locomotion.hpp"
#include "navloop/rng.hpp"
#include "navloop/scoring.hpp"
#include "navloop/surveys.hpp"

namespace navloop {

enum class Phase { Idle, InTrial, FeedbackDisplay, SurveyPending, BlockTransition, Ended, Aborted };
enum class EndReason { EndKey, Timeout, Skipped };

std::string_view to_string(Phase p);
std::optional<Phase> phase_from_string(std::string_view s);
std::string_view to_string(EndReason r);
std::optional<EndReason> end_reason_from_string(std::string_view s);

// Thrown when an operation is requested in a phase that does not allow it.
class PhaseError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Thrown by the session constructor when the settings fail validation.
class SettingsError : public std::invalid_argument {
public:
    SettingsError(const std::string& what, std::vector<std::string> report)
        : std::invalid_argument(what), report_(std::move(report)) {}
    const std::vector<std::string>& report() const { return report_; }

private:
    std::vector<std::string> report_;
};

struct ParticipantInfo {
    std::string id;
    int age = 0;
    std::string gender;
    std::string qualification;
    std::string group;  // e.g. "time" / "accuracy"
    friend bool operator==(const ParticipantInfo&, const ParticipantInfo&) = default;
};

struct Note {
    double time = 0.0;  // session clock
    std::string text;
    friend bool operator==(const Note&, const Note&) = default;
};

struct FrameLogEntry {
    double t = 0.0;  // seconds since trial start
    double x = 0.0;
    double z = 0.0;
    double yaw = 0.0;
    bool lightsOn = true;
    bool soundOn = true;
    friend bool operator==(const FrameLogEntry&, const FrameLogEntry&) = default;
};

struct TrialRecord {
    int blockIndex = 0;
    int trialIndex = 0;
    double startTime = 0.0;  // session clock
    double endTime = 0.0;
    double elapsed = 0.0;    // t
    double residual = 0.0;   // d
    double pathLength = 0.0; // distance covered
    double rawReward = 0.0;  // R
    double timeComponent = 0.0;
    double distanceComponent = 0.0;
    long long displayedScore = 0;
    EndReason endReason = EndReason::EndKey;
    bool practice = false;
    std::vector<FrameLogEntry> frames;
    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct SessionSettings {
    EnvironmentSettings environment;
    LocomotionSettings locomotion;
    ScenarioSettings scenario;
    std::vector<SurveyDefinition> surveys = builtin_surveys();
};

SessionSettings demo_settings();

struct SessionOptions {
    std::string sessionId = "session";
    std::optional<Leaderboard> leaderboard;
    // Defaults to the decaying reward built from scenario.score.
    std::shared_ptr<const FeedbackFunction> feedback;
    // Aim origin height for teleporting when no controller is tracked.
    double eyeHeight = 1.7;
};

struct SessionState {
    Phase phase = Phase::Idle;
    int blockIndex = 0;
    int trialIndex = 0;
    ParticipantInfo participant;
    bool badSession = false;
    std::vector<Note> notes;
    double clock = 0.0;       // session clock
    double trialClock = 0.0;  // time since the current trial was presented
    double feedbackClock = 0.0;
    Rng rng;
    bool lightsOn = true;
    bool soundOn = true;
    bool wallsPresent = true;
    bool floorExtendsToHorizon = false;
    Pose pose;
    FireflyState firefly;
    std::vector<std::string> pendingSurveys;
    std::optional<Placement> lastPlacement;
    bool barrierVisible = false;
};

enum class EventKind {
    SessionStarted,
    TrialStarted,
    TrialEnded,
    FeedbackEnded,
    SurveyRequested,
    SurveyRecorded,
    BlockStarted,
    SessionEnded,
    SessionAborted,
    StepDetected,
    Teleported,
};

struct Event {
    EventKind kind;
    int blockIndex = 0;
    int trialIndex = 0;
    double clock = 0.0;
    std::string detail;
};

// Trial / block / session state machine. Every call runs on the caller's
// thread; nothing here is synchronized.
//
//   Idle -> InTrial -> FeedbackDisplay -> InTrial ...
//   FeedbackDisplay (last trial of block) -> SurveyPending | BlockTransition | Ended
//   SurveyPending -> BlockTransition | Ended
//   BlockTransition -> InTrial
//   any non-terminal phase -> Aborted
class Session {
public:
    // Throws SettingsError when the settings fail validation and
    // std::invalid_argument for an empty participant id.
    Session(SessionSettings settings, ParticipantInfo participant, SessionOptions options = {});

    // Idle -> InTrial at block 0, trial 0.
    std::vector<Event> start();

    // One InTrial frame: advance the fly, move the participant, log the frame,
    // then end the trial on the end key, at the time cap or on skip.
    std::vector<Event> tick(const FrameInput& input, double dt);

    // Advances whatever the current phase is by dt: InTrial ticks, the
    // feedback screen counts down (and closes early on the end key), a block
    // transition proceeds into the next block. SurveyPending waits for
    // submit_survey; the clock still runs.
    std::vector<Event> step(const FrameInput& input, double dt);

    std::vector<Event> end_trial(EndReason reason);
    std::vector<Event> end_feedback();
    std::vector<Event> advance_block();

    // Records a response for a pending survey (or a PreSession survey while
    // Idle, or a PostSession survey after the end). Throws std::invalid_argument
    // for non-conforming answers, PhaseError when nothing is pending.
    std::vector<Event> submit_survey(std::string_view surveyId, std::vector<SurveyAnswer> answers);

    void toggle_light();
    void toggle_sound();
    void add_note(std::string text);
    void mark_bad();
    std::vector<Event> abort();

    const SessionState& state() const { return state_; }
    Phase phase() const { return state_.phase; }
    const SessionSettings& settings() const { return settings_; }
    const std::string& session_id() const { return options_.sessionId; }
    const std::vector<TrialRecord>& records() const { return records_; }
    const std::vector<SurveyResponse>& responses() const { return responses_; }
    const std::optional<Leaderboard>& leaderboard() const { return options_.leaderboard; }
    const std::vector<FrameLogEntry>& current_frames() const { return currentFrames_; }
    double path_length() const { return pathLength_; }
    bool finished() const { return state_.phase == Phase::Ended || state_.phase == Phase::Aborted; }

private:
    struct LocomotionState {
        HeadBobState headBob;
        double lastStepTime = -1e300;
        std::vector<Pose> prevControllers;
        bool hasPrevControllers = false;
        PhysicalWalkState walk;
        bool triggerWasHeld = false;
        TeleportTarget pendingTeleport;
    };

    void require_phase(Phase p, const char* op) const;
    void begin_trial(std::vector<Event>& events);
    void apply_block_environment();
    void apply_locomotion(const FrameInput& input, double dt, std::vector<Event>& events);
    void finish_block(std::vector<Event>& events);
    Event make_event(EventKind kind, std::string detail = {}) const;

    SessionSettings settings_;
    SessionOptions options_;
    SessionState state_;
    LocomotionState loco_;
    std::vector<TrialRecord> records_;
    std::vector<SurveyResponse> responses_;
    std::vector<FrameLogEntry> currentFrames_;
    double trialStartTime_ = 0.0;
    double pathLength_ = 0.0;
    double lastInputTimestamp_ = 0.0;
    bool haveInputTimestamp_ = false;
    std::optional<std::size_t> controllerCount_;
};

// Constructs and starts a session (phase InTrial, block 0, trial 0).
Session start_session(SessionSettings settings, ParticipantInfo participant, SessionOptions options = {});

// Preset sequence of environment x locomotion combinations for consecutive
// participants.
struct AutopilotEntry {
    std::string environmentRef;
    LocomotionMethod method = LocomotionMethod::ControllerTeleop;
    friend bool operator==(const AutopilotEntry&, const AutopilotEntry&) = default;
};

struct AutopilotPlan {
    std::vector<AutopilotEntry> entries;
    std::size_t cursor = 0;
    bool exhausted() const { return cursor >= entries.size(); }
};

// Returns the entry at the cursor and advances it; empty once the plan is
// exhausted.
std::optional<AutopilotEntry> autopilot_next(AutopilotPlan& plan);

}  // namespace navloop
