#include "navloop/agents.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include <json.hpp>

namespace navloop {

std::string_view to_string(AgentKind k) {
    switch (k) {
        case AgentKind::GoalSeeker: return "GoalSeeker";
        case AgentKind::FlyChaser: return "FlyChaser";
        case AgentKind::Scripted: return "Scripted";
    }
    return "GoalSeeker";
}

std::optional<AgentKind> agent_kind_from_string(std::string_view s) {
    if (s == "GoalSeeker") return AgentKind::GoalSeeker;
    if (s == "FlyChaser") return AgentKind::FlyChaser;
    if (s == "Scripted") return AgentKind::Scripted;
    return std::nullopt;
}

std::optional<Vec3> AgentState::goal_estimate() const {
    if (samples == 0) return std::nullopt;
    const double n = static_cast<double>(samples);
    return Vec3{sumX / n, 0.0, sumZ / n};
}

int effective_observe_ticks(const AgentPolicy& policy) {
    const double pref = std::clamp(policy.speedPreference, 0.0, 1.0);
    return static_cast<int>(std::lround(static_cast<double>(policy.observeTicks) * (1.0 - 0.75 * pref)));
}

FrameInput agent_act(const AgentPolicy& policy, const AgentObservation& obs, AgentState& state, double dt) {
    if (policy.kind == AgentKind::Scripted) {
        if (state.scriptCursor < policy.script.size()) return policy.script[state.scriptCursor++];
        FrameInput idle;
        idle.timestamp = obs.trialClock + dt;
        idle.hmd = Pose::make({obs.selfPose.position.x, policy.eyeHeight, obs.selfPose.position.z}, obs.selfPose.yaw);
        return idle;
    }

    FrameInput in;
    in.timestamp = obs.trialClock + dt;
    double yaw = obs.selfPose.yaw;

    if (policy.kind == AgentKind::FlyChaser) {
        if (horizontal_distance(obs.selfPose.position, obs.flyPosition) > 1e-9) {
            yaw = yaw_towards(obs.selfPose.position, obs.flyPosition);
            in.moveHeld = true;
        }
    } else {
        Vec3 seen = obs.flyPosition;
        if (policy.observationNoise > 0.0) {
            seen.x += state.rng.normal(0.0, policy.observationNoise);
            seen.z += state.rng.normal(0.0, policy.observationNoise);
        }
        state.sumX += seen.x;
        state.sumZ += seen.z;
        ++state.samples;
        const Vec3 estimate = *state.goal_estimate();
        if (state.samples > effective_observe_ticks(policy)) {
            if (horizontal_distance(obs.selfPose.position, estimate) <= policy.stopRadius) {
                in.endTrialPressed = true;
            } else {
                yaw = yaw_towards(obs.selfPose.position, estimate);
                in.moveHeld = true;
            }
        }
    }
    in.hmd = Pose::make({obs.selfPose.position.x, policy.eyeHeight, obs.selfPose.position.z}, yaw);
    return in;
}

double speed_preference_for(const ScoreConstants& c) {
    const double timeStake = std::abs(c.beta1 * (1.0 - std::exp(-c.alpha1 * 20.0)));
    const double distanceStake = std::abs(c.beta2 * (1.0 - std::exp(-c.alpha2 * 1.0)));
    if (timeStake + distanceStake == 0.0) return 0.5;
    return timeStake / (timeStake + distanceStake);
}

namespace {

std::vector<SurveyAnswer> random_answers(const SurveyDefinition& def, Rng& rng) {
    std::vector<SurveyAnswer> answers;
    for (const auto& item : def.items) {
        if (const auto* s = std::get_if<ScaleSpec>(&item.format)) {
            const auto span = static_cast<std::uint64_t>(s->max - s->min + 1);
            answers.emplace_back(s->min + static_cast<int>(rng.next_u64() % span));
        } else {
            answers.emplace_back(std::string("none"));
        }
    }
    return answers;
}

}  // namespace

Session run_agent_session(SessionSettings settings, ParticipantInfo participant, SessionOptions sessionOptions,
                          const AgentPolicy& policy, const AgentRunOptions& runOptions) {
    Session session(std::move(settings), std::move(participant), std::move(sessionOptions));
    AgentState agent(runOptions.seed);
    Rng surveyRng(runOptions.seed ^ 0x5eed5eedULL);

    session.start();
    int lastTrialSeen = -1;
    int lastBlockSeen = -1;
    for (long long stepCount = 0; !session.finished(); ++stepCount) {
        if (stepCount > runOptions.maxSteps) throw std::runtime_error("run_agent_session: step limit exceeded");
        const auto& st = session.state();
        switch (st.phase) {
            case Phase::InTrial: {
                if (st.trialIndex != lastTrialSeen || st.blockIndex != lastBlockSeen) {
                    agent.reset_trial();
                    lastTrialSeen = st.trialIndex;
                    lastBlockSeen = st.blockIndex;
                }
                const AgentObservation obs{st.pose, st.firefly.position, st.trialClock};
                session.tick(agent_act(policy, obs, agent, runOptions.dt), runOptions.dt);
                break;
            }
            case Phase::SurveyPending: {
                const std::string id = st.pendingSurveys.front();
                const auto* def = find_survey(session.settings().surveys, id);
                session.submit_survey(id, random_answers(*def, surveyRng));
                break;
            }
            default:
                session.step(FrameInput{}, runOptions.dt);
                break;
        }
    }
    return session;
}

std::vector<SessionArchive> run_cohort(int nPerGroup, const std::vector<CohortGroup>& groups,
                                       const SessionSettings& settings, const AgentPolicy& basePolicy,
                                       const CohortOptions& options) {
    std::vector<SessionArchive> out;
    if (nPerGroup <= 0) return out;

    struct Job {
        SessionSettings settings;
        ParticipantInfo participant;
        AgentPolicy policy;
        std::uint64_t agentSeed;
        std::string sessionId;
    };
    std::vector<Job> jobs;
    Rng seeds(options.seed);
    for (const auto& group : groups) {
        for (int i = 0; i < nPerGroup; ++i) {
            Job job{settings, {}, basePolicy, 0, {}};
            job.settings.scenario.score = group.constants;
            job.settings.scenario.rngSeed = seeds.fork_seed();
            job.agentSeed = seeds.fork_seed();
            job.policy.speedPreference = speed_preference_for(group.constants);
            char id[64];
            std::snprintf(id, sizeof id, "%s_%02d", group.label.c_str(), i + 1);
            job.participant = ParticipantInfo{id, 0, "n/a", "simulated", group.label};
            job.sessionId = "sim-" + std::to_string(options.seed);
            jobs.push_back(std::move(job));
        }
    }

    auto run = [&options](const Job& job) {
        SessionOptions so;
        so.sessionId = job.sessionId;
        so.leaderboard = Leaderboard(options.fakeBoard, LeaderboardMode::Fake);
        AgentRunOptions ro;
        ro.dt = options.dt;
        ro.seed = job.agentSeed;
        return make_archive(run_agent_session(job.settings, job.participant, so, job.policy, ro));
    };

    if (options.parallel) {
        std::vector<std::future<SessionArchive>> futures;
        for (const auto& job : jobs) futures.push_back(std::async(std::launch::async, run, std::cref(job)));
        for (auto& f : futures) out.push_back(f.get());
    } else {
        for (const auto& job : jobs) out.push_back(run(job));
    }
    return out;
}

std::vector<LeaderboardEntry> default_fake_board() {
    std::vector<LeaderboardEntry> board;
    for (int i = 0; i < 10; ++i) board.push_back({"anon" + std::to_string(i + 1), 400 - 30 * i, 0.0});
    return board;
}

AgentConfig parse_agent_config(std::string_view text) {
    using nlohmann::json;
    AgentConfig cfg;
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("agent config: ") + e.what());
    }
    try {
        if (j.contains("policy")) {
            const auto& p = j.at("policy");
            if (p.contains("kind")) {
                auto k = agent_kind_from_string(p.at("kind").get<std::string>());
                if (!k) throw ParseError("agent config: unknown policy kind");
                cfg.policy.kind = *k;
            }
            cfg.policy.observationNoise = p.value("observationNoise", cfg.policy.observationNoise);
            cfg.policy.stopRadius = p.value("stopRadius", cfg.policy.stopRadius);
            cfg.policy.observeTicks = p.value("observeTicks", cfg.policy.observeTicks);
            cfg.policy.speedPreference = p.value("speedPreference", cfg.policy.speedPreference);
            cfg.policy.eyeHeight = p.value("eyeHeight", cfg.policy.eyeHeight);
        }
        cfg.nPerGroup = j.value("nPerGroup", cfg.nPerGroup);
        if (j.contains("groups")) {
            cfg.groups.clear();
            for (const auto& g : j.at("groups")) {
                CohortGroup group;
                group.label = g.at("label").get<std::string>();
                const auto& s = g.at("score");
                group.constants.alpha1 = s.at("alpha1").get<double>();
                group.constants.alpha2 = s.at("alpha2").get<double>();
                group.constants.beta1 = s.at("beta1").get<double>();
                group.constants.beta2 = s.at("beta2").get<double>();
                group.constants.scaleFactor = s.value("scaleFactor", 300.0);
                group.constants.floorAtZero = s.value("floorAtZero", true);
                cfg.groups.push_back(group);
            }
        }
        if (j.contains("fakeBoard")) {
            for (const auto& e : j.at("fakeBoard"))
                cfg.fakeBoard.push_back({e.at("participantId").get<std::string>(), e.at("score").get<long long>(), 0.0});
        } else {
            cfg.fakeBoard = default_fake_board();
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("agent config: ") + e.what());
    }
    if (cfg.policy.stopRadius < 0.0 || cfg.policy.observeTicks < 0)
        throw ParseError("agent config: stopRadius and observeTicks must be >= 0");
    return cfg;
}

std::string serialize(const AgentConfig& config) {
    using ojson = nlohmann::ordered_json;
    ojson groups = ojson::array();
    for (const auto& g : config.groups) {
        const auto& c = g.constants;
        groups.push_back(ojson{{"label", g.label},
                               {"score", ojson{{"alpha1", c.alpha1}, {"alpha2", c.alpha2}, {"beta1", c.beta1},
                                               {"beta2", c.beta2}, {"scaleFactor", c.scaleFactor},
                                               {"floorAtZero", c.floorAtZero}}}});
    }
    ojson board = ojson::array();
    for (const auto& e : config.fakeBoard) board.push_back(ojson{{"participantId", e.participantId}, {"score", e.score}});
    const auto& p = config.policy;
    ojson j{{"policy", ojson{{"kind", std::string(to_string(p.kind))},
                             {"observationNoise", p.observationNoise},
                             {"stopRadius", p.stopRadius},
                             {"observeTicks", p.observeTicks},
                             {"speedPreference", p.speedPreference},
                             {"eyeHeight", p.eyeHeight}}},
            {"nPerGroup", config.nPerGroup},
            {"groups", groups},
            {"fakeBoard", board}};
    return j.dump(2) + "\n";
}

}  // namespace navloop
