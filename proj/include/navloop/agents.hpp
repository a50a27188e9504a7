#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "navloop/core.hpp"
#include "navloop/persistence.hpp"
#include "navloop/rng.hpp"
#include "navloop/scoring.hpp"
#include "navloop/session.hpp"

namespace navloop {

enum class AgentKind { GoalSeeker, FlyChaser, Scripted };

std::string_view to_string(AgentKind k);
std::optional<AgentKind> agent_kind_from_string(std::string_view s);

struct AgentPolicy {
    AgentKind kind = AgentKind::GoalSeeker;
    double observationNoise = 0.0;  // std of the perceived fly position, meters
    double stopRadius = 0.1;        // end the trial this close to the goal estimate
    int observeTicks = 450;         // ticks spent watching the fly before moving
    double speedPreference = 0.5;   // 0 = careful, 1 = hurried
    double eyeHeight = 1.7;
    std::vector<FrameInput> script;  // Scripted only
};

struct AgentObservation {
    Pose selfPose;
    Vec3 flyPosition;
    double trialClock = 0.0;
};

struct AgentState {
    Rng rng;
    double sumX = 0.0;
    double sumZ = 0.0;
    long long samples = 0;
    std::size_t scriptCursor = 0;

    explicit AgentState(std::uint64_t seed = 0) : rng(seed) {}
    // Forget the goal estimate; a script keeps its position across trials.
    void reset_trial() { sumX = sumZ = 0.0; samples = 0; }
    std::optional<Vec3> goal_estimate() const;
};

// Observe ticks actually spent before moving: fewer when speedPreference is high.
int effective_observe_ticks(const AgentPolicy& policy);

// GoalSeeker: keeps a running centroid of the (noisy) fly positions it sees,
// watches for effective_observe_ticks, then walks toward the centroid and
// presses end-trial once within stopRadius of it. FlyChaser walks toward the
// fly's current position and never ends a trial. Scripted replays
// policy.script one frame per call. `dt` is the coming tick's length and sets
// the frame timestamp.
FrameInput agent_act(const AgentPolicy& policy, const AgentObservation& obs, AgentState& state, double dt);

// Maps reward constants to a speed preference in [0, 1]: the share of the
// reward at stake for taking 20 s versus ending 1 m from the goal. Constants
// that punish time harder yield a higher preference.
double speed_preference_for(const ScoreConstants& c);

struct AgentRunOptions {
    double dt = 1.0 / 90.0;
    std::uint64_t seed = 1;
    // Hard cap on steps so a misconfigured session cannot spin forever.
    long long maxSteps = 50'000'000;
};

// Drives a session to completion with the agent as participant. Post-block
// and post-session surveys are answered with uniformly random valid answers.
// Returns the finished session.
Session run_agent_session(SessionSettings settings, ParticipantInfo participant, SessionOptions sessionOptions,
                          const AgentPolicy& policy, const AgentRunOptions& runOptions = {});

struct CohortGroup {
    std::string label;
    ScoreConstants constants;
};

struct CohortOptions {
    std::uint64_t seed = 1;
    double dt = 1.0 / 90.0;
    // Made-up scores every participant starts from (fake board).
    std::vector<LeaderboardEntry> fakeBoard;
    bool parallel = true;
};

// Runs nPerGroup agents per group through full sessions. Each group's agents
// get the group's reward constants and speed_preference_for(those constants);
// everything else comes from `basePolicy`. Boards run in Fake mode.
std::vector<SessionArchive> run_cohort(int nPerGroup, const std::vector<CohortGroup>& groups,
                                       const SessionSettings& settings, const AgentPolicy& basePolicy,
                                       const CohortOptions& options = {});

// Agent configuration file (JSON): policy, nPerGroup, groups, optional fake board.
struct AgentConfig {
    AgentPolicy policy;
    int nPerGroup = 10;
    std::vector<CohortGroup> groups{{"time", ScoreConstants::time_group()}, {"accuracy", ScoreConstants::accuracy_group()}};
    std::vector<LeaderboardEntry> fakeBoard;
};

AgentConfig parse_agent_config(std::string_view text);
std::string serialize(const AgentConfig& config);

// Low made-up scores so every participant can reach the top ten.
std::vector<LeaderboardEntry> default_fake_board();

}  // namespace navloop
