#include "navloop/session.hpp"

#include <algorithm>
#include <cmath>

namespace navloop {

namespace {

// Clock comparisons against configured durations tolerate accumulated
// floating-point error from summing dt.
constexpr double kClockEps = 1e-9;

}  // namespace

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::Idle: return "Idle";
        case Phase::InTrial: return "InTrial";
        case Phase::FeedbackDisplay: return "FeedbackDisplay";
        case Phase::SurveyPending: return "SurveyPending";
        case Phase::BlockTransition: return "BlockTransition";
        case Phase::Ended: return "Ended";
        case Phase::Aborted: return "Aborted";
    }
    return "Idle";
}

std::optional<Phase> phase_from_string(std::string_view s) {
    for (Phase p : {Phase::Idle, Phase::InTrial, Phase::FeedbackDisplay, Phase::SurveyPending, Phase::BlockTransition,
                    Phase::Ended, Phase::Aborted}) {
        if (to_string(p) == s) return p;
    }
    return std::nullopt;
}

std::string_view to_string(EndReason r) {
    switch (r) {
        case EndReason::EndKey: return "EndKey";
        case EndReason::Timeout: return "Timeout";
        case EndReason::Skipped: return "Skipped";
    }
    return "EndKey";
}

std::optional<EndReason> end_reason_from_string(std::string_view s) {
    if (s == "EndKey") return EndReason::EndKey;
    if (s == "Timeout") return EndReason::Timeout;
    if (s == "Skipped") return EndReason::Skipped;
    return std::nullopt;
}

SessionSettings demo_settings() {
    return SessionSettings{demo_environment(), demo_locomotion(), demo_scenario(), builtin_surveys()};
}

Session::Session(SessionSettings settings, ParticipantInfo participant, SessionOptions options)
    : settings_(std::move(settings)), options_(std::move(options)) {
    auto report = validate_settings(settings_.environment, settings_.locomotion, settings_.scenario);
    for (const auto& link : settings_.environment.surveyLinks) {
        if (!find_survey(settings_.surveys, link)) report.push_back("environment.surveyLinks: unknown survey '" + link + "'");
    }
    if (!report.empty()) {
        const std::string what = "invalid session settings: " + report.front();
        throw SettingsError(what, std::move(report));
    }
    if (participant.id.empty()) throw std::invalid_argument("participant id must not be empty");

    if (!options_.feedback) options_.feedback = std::make_shared<DecayingRewardFeedback>(settings_.scenario.score);
    if (options_.leaderboard && options_.leaderboard->mode() == LeaderboardMode::Fake)
        options_.leaderboard->reset_for_participant();

    state_.participant = std::move(participant);
    state_.rng = Rng(settings_.scenario.rngSeed);
    state_.lightsOn = settings_.environment.lightsOn;
    state_.soundOn = settings_.environment.soundOn;
    state_.pose = settings_.scenario.startPose;
    apply_block_environment();
}

Event Session::make_event(EventKind kind, std::string detail) const {
    return Event{kind, state_.blockIndex, state_.trialIndex, state_.clock, std::move(detail)};
}

void Session::require_phase(Phase p, const char* op) const {
    if (state_.phase != p) {
        throw PhaseError(std::string(op) + " requires phase " + std::string(to_string(p)) + ", session is " +
                         std::string(to_string(state_.phase)));
    }
}

void Session::apply_block_environment() {
    const auto b = static_cast<std::size_t>(state_.blockIndex);
    const auto& env = settings_.environment;
    state_.wallsPresent = b < env.wallsPresentPerBlock.size() ? env.wallsPresentPerBlock[b] : true;
    state_.floorExtendsToHorizon = b < env.floorExtendsToHorizon.size() ? env.floorExtendsToHorizon[b] : false;
}

std::vector<Event> Session::start() {
    require_phase(Phase::Idle, "start");
    std::vector<Event> events;
    events.push_back(make_event(EventKind::SessionStarted, state_.participant.id));
    events.push_back(make_event(EventKind::BlockStarted));
    begin_trial(events);
    return events;
}

void Session::begin_trial(std::vector<Event>& events) {
    state_.phase = Phase::InTrial;
    state_.trialClock = 0.0;
    state_.feedbackClock = 0.0;
    state_.pose = settings_.scenario.startPose;
    state_.barrierVisible = false;
    const auto& fly = settings_.scenario.fireflyPerBlock[static_cast<std::size_t>(state_.blockIndex)];
    state_.firefly = firefly_init(settings_.scenario.goalPosition, fly, state_.rng);

    loco_ = LocomotionState{};
    loco_.walk.virtualPose = state_.pose;
    currentFrames_.clear();
    trialStartTime_ = state_.clock;
    pathLength_ = 0.0;
    haveInputTimestamp_ = false;
    events.push_back(make_event(EventKind::TrialStarted));
}

void Session::apply_locomotion(const FrameInput& input, double dt, std::vector<Event>& events) {
    const auto& ls = settings_.locomotion;
    Pose& pose = state_.pose;
    const Vec3 before = pose.position;

    switch (ls.method) {
        case LocomotionMethod::KeyboardTeleop:
        case LocomotionMethod::ControllerTeleop: {
            pose.position += teleop_step(pose, input, ls, dt);
            pose.yaw = input.hmd.yaw;
            pose.pitch = input.hmd.pitch;
            break;
        }
        case LocomotionMethod::ArmSwing: {
            if (loco_.hasPrevControllers && !input.controllers.empty()) {
                const double speed = arm_swing_speed(loco_.prevControllers, input.controllers, ls, dt);
                pose.position += heading_vector(input.hmd.yaw) * (speed * dt);
            }
            loco_.prevControllers = input.controllers;
            loco_.hasPrevControllers = true;
            pose.yaw = input.hmd.yaw;
            pose.pitch = input.hmd.pitch;
            break;
        }
        case LocomotionMethod::HeadBob: {
            auto bob = head_bob_step(loco_.headBob, input.hmd.position.y, input.hmd.pitch, ls);
            loco_.headBob = bob.state;
            if (bob.stepDetected) {
                loco_.lastStepTime = state_.trialClock;
                events.push_back(make_event(EventKind::StepDetected));
            }
            if (state_.trialClock - loco_.lastStepTime <= ls.stepHoldTime + kClockEps)
                pose.position += heading_vector(input.hmd.yaw) * (ls.linearVelocity * dt);
            pose.yaw = input.hmd.yaw;
            pose.pitch = input.hmd.pitch;
            break;
        }
        case LocomotionMethod::PhysicalWalk: {
            const auto& env = settings_.environment;
            const SafeArea area{{}, env.safeAreaWidth, env.safeAreaDepth, env.barrierMargin};
            auto walk = physical_walk_step(input.hmd, loco_.walk, area, input.triggerHeld);
            loco_.walk = walk.state;
            pose = walk.virtualPose;
            state_.barrierVisible = walk.barrierVisible;
            break;
        }
        case LocomotionMethod::Teleport: {
            pose.yaw = input.hmd.yaw;
            pose.pitch = input.hmd.pitch;
            if (input.triggerHeld) {
                const Pose aim = input.controllers.empty() ? input.hmd : input.controllers.front();
                const double height = input.controllers.empty() ? options_.eyeHeight : aim.position.y;
                const auto& env = settings_.environment;
                const TeleportWorld world{env.roomWidth, env.roomDepth, {}, env.collisionRegions, ls.teleportMaxRange};
                const Vec3 origin{pose.position.x, std::max(height, 0.0), pose.position.z};
                loco_.pendingTeleport = teleport_resolve(origin, aim_direction(aim.yaw, aim.pitch), world);
            } else if (loco_.triggerWasHeld && loco_.pendingTeleport.valid) {
                pose = apply_teleport(pose, loco_.pendingTeleport);
                loco_.pendingTeleport = {};
                events.push_back(make_event(EventKind::Teleported));
            }
            loco_.triggerWasHeld = input.triggerHeld;
            break;
        }
    }

    pose.position.y = 0.0;
    if (state_.wallsPresent && ls.method != LocomotionMethod::PhysicalWalk) {
        const auto& env = settings_.environment;
        pose.position.x = std::clamp(pose.position.x, -env.roomWidth / 2.0, env.roomWidth / 2.0);
        pose.position.z = std::clamp(pose.position.z, -env.roomDepth / 2.0, env.roomDepth / 2.0);
    }
    pose.yaw = normalize_yaw(pose.yaw);
    pose.pitch = std::clamp(pose.pitch, -90.0, 90.0);
    pathLength_ += horizontal_distance(before, pose.position);
}

std::vector<Event> Session::tick(const FrameInput& input, double dt) {
    require_phase(Phase::InTrial, "tick");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("tick: dt must be positive");
    if (haveInputTimestamp_ && !(input.timestamp > lastInputTimestamp_))
        throw std::invalid_argument("tick: frame timestamps must strictly increase within a trial");
    if (controllerCount_ && *controllerCount_ != input.controllers.size())
        throw std::invalid_argument("tick: controller count must stay constant within a session");
    controllerCount_ = input.controllers.size();
    lastInputTimestamp_ = input.timestamp;
    haveInputTimestamp_ = true;

    std::vector<Event> events;
    state_.clock += dt;
    state_.trialClock += dt;

    const auto& fly = settings_.scenario.fireflyPerBlock[static_cast<std::size_t>(state_.blockIndex)];
    state_.firefly = firefly_advance(state_.firefly, settings_.scenario.goalPosition, fly, state_.rng);

    apply_locomotion(input, dt, events);

    currentFrames_.push_back(FrameLogEntry{state_.trialClock, state_.pose.position.x, state_.pose.position.z,
                                           state_.pose.yaw, state_.lightsOn, state_.soundOn});

    std::optional<EndReason> reason;
    if (input.endTrialPressed) reason = EndReason::EndKey;
    else if (state_.trialClock >= settings_.scenario.maxTrialDuration - kClockEps) reason = EndReason::Timeout;
    else if (input.skipPressed) reason = EndReason::Skipped;

    if (reason) {
        auto more = end_trial(*reason);
        events.insert(events.end(), more.begin(), more.end());
    }
    return events;
}

std::vector<Event> Session::end_trial(EndReason reason) {
    require_phase(Phase::InTrial, "end_trial");
    TrialRecord rec;
    rec.blockIndex = state_.blockIndex;
    rec.trialIndex = state_.trialIndex;
    rec.startTime = trialStartTime_;
    rec.endTime = state_.clock;
    rec.elapsed = state_.trialClock;
    rec.residual = horizontal_distance(state_.pose.position, settings_.scenario.goalPosition);
    rec.pathLength = pathLength_;
    const Reward r = options_.feedback->evaluate(rec.elapsed, rec.residual);
    rec.rawReward = r.total;
    rec.timeComponent = r.timeComponent;
    rec.distanceComponent = r.distanceComponent;
    rec.displayedScore = options_.feedback->present(r);
    rec.endReason = reason;
    rec.frames = std::move(currentFrames_);
    currentFrames_.clear();

    state_.lastPlacement.reset();
    if (options_.leaderboard) {
        rec.practice = options_.leaderboard->mode() == LeaderboardMode::Practice;
        if (reason != EndReason::Skipped) {
            state_.lastPlacement = options_.leaderboard->submit(state_.participant.id,
                                                                std::max(0LL, rec.displayedScore), state_.clock);
        }
    }

    records_.push_back(std::move(rec));
    state_.phase = Phase::FeedbackDisplay;
    state_.feedbackClock = 0.0;
    return {make_event(EventKind::TrialEnded, std::string(to_string(reason)))};
}

std::vector<Event> Session::end_feedback() {
    require_phase(Phase::FeedbackDisplay, "end_feedback");
    std::vector<Event> events{make_event(EventKind::FeedbackEnded)};
    const int trialsInBlock = settings_.scenario.trialsPerBlock[static_cast<std::size_t>(state_.blockIndex)];
    if (state_.trialIndex + 1 < trialsInBlock) {
        ++state_.trialIndex;
        begin_trial(events);
    } else {
        finish_block(events);
    }
    return events;
}

void Session::finish_block(std::vector<Event>& events) {
    const bool lastBlock = state_.blockIndex + 1 >= settings_.scenario.block_count();
    state_.pendingSurveys.clear();
    for (const auto& link : settings_.environment.surveyLinks) {
        const auto* def = find_survey(settings_.surveys, link);
        if (!def) continue;
        if (def->administerAt == SurveyTiming::PostBlock || (lastBlock && def->administerAt == SurveyTiming::PostSession))
            state_.pendingSurveys.push_back(def->id);
    }
    if (!state_.pendingSurveys.empty()) {
        state_.phase = Phase::SurveyPending;
        for (const auto& id : state_.pendingSurveys) events.push_back(make_event(EventKind::SurveyRequested, id));
        return;
    }
    if (lastBlock) {
        state_.phase = Phase::Ended;
        events.push_back(make_event(EventKind::SessionEnded));
    } else {
        state_.phase = Phase::BlockTransition;
    }
}

std::vector<Event> Session::advance_block() {
    require_phase(Phase::BlockTransition, "advance_block");
    std::vector<Event> events;
    if (state_.blockIndex + 1 >= settings_.scenario.block_count()) {
        state_.phase = Phase::Ended;
        events.push_back(make_event(EventKind::SessionEnded));
        return events;
    }
    ++state_.blockIndex;
    state_.trialIndex = 0;
    apply_block_environment();
    events.push_back(make_event(EventKind::BlockStarted));
    begin_trial(events);
    return events;
}

std::vector<Event> Session::step(const FrameInput& input, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("step: dt must be positive");
    switch (state_.phase) {
        case Phase::InTrial:
            return tick(input, dt);
        case Phase::FeedbackDisplay:
            state_.clock += dt;
            state_.feedbackClock += dt;
            if (input.endTrialPressed || state_.feedbackClock >= settings_.scenario.feedbackDisplayDuration - kClockEps)
                return end_feedback();
            return {};
        case Phase::BlockTransition:
            state_.clock += dt;
            return advance_block();
        case Phase::SurveyPending:
            state_.clock += dt;
            return {};
        case Phase::Idle:
        case Phase::Ended:
        case Phase::Aborted:
            break;
    }
    throw PhaseError("step: session is " + std::string(to_string(state_.phase)));
}

std::vector<Event> Session::submit_survey(std::string_view surveyId, std::vector<SurveyAnswer> answers) {
    const auto* def = find_survey(settings_.surveys, surveyId);
    if (!def) throw std::invalid_argument("unknown survey '" + std::string(surveyId) + "'");

    SurveyTiming boundary;
    if (state_.phase == Phase::SurveyPending) {
        auto it = std::find(state_.pendingSurveys.begin(), state_.pendingSurveys.end(), surveyId);
        if (it == state_.pendingSurveys.end())
            throw PhaseError("survey '" + std::string(surveyId) + "' is not pending");
        boundary = def->administerAt == SurveyTiming::PostSession ? SurveyTiming::PostSession : SurveyTiming::PostBlock;
    } else if (state_.phase == Phase::Idle && def->administerAt == SurveyTiming::PreSession) {
        boundary = SurveyTiming::PreSession;
    } else if (finished() && def->administerAt == SurveyTiming::PostSession) {
        boundary = SurveyTiming::PostSession;
    } else {
        throw PhaseError("survey '" + std::string(surveyId) + "' cannot be recorded in phase " +
                         std::string(to_string(state_.phase)));
    }

    if (auto problem = check_answers(*def, answers)) throw std::invalid_argument(*problem);

    SurveyResponse resp;
    resp.surveyId = def->id;
    resp.participantId = state_.participant.id;
    resp.boundary = boundary;
    resp.blockIndex = boundary == SurveyTiming::PostBlock ? state_.blockIndex : -1;
    resp.answers = std::move(answers);
    resp.timestamp = state_.clock;
    responses_.push_back(std::move(resp));

    std::vector<Event> events{make_event(EventKind::SurveyRecorded, def->id)};
    if (state_.phase == Phase::SurveyPending) {
        state_.pendingSurveys.erase(std::find(state_.pendingSurveys.begin(), state_.pendingSurveys.end(), surveyId));
        if (state_.pendingSurveys.empty()) {
            if (state_.blockIndex + 1 >= settings_.scenario.block_count()) {
                state_.phase = Phase::Ended;
                events.push_back(make_event(EventKind::SessionEnded));
            } else {
                state_.phase = Phase::BlockTransition;
            }
        }
    }
    return events;
}

void Session::toggle_light() {
    if (finished()) throw PhaseError("toggle_light: session is over");
    state_.lightsOn = !state_.lightsOn;
}

void Session::toggle_sound() {
    if (finished()) throw PhaseError("toggle_sound: session is over");
    state_.soundOn = !state_.soundOn;
}

void Session::add_note(std::string text) { state_.notes.push_back(Note{state_.clock, std::move(text)}); }

void Session::mark_bad() { state_.badSession = true; }

std::vector<Event> Session::abort() {
    if (finished()) throw PhaseError("abort: session is already over");
    state_.phase = Phase::Aborted;
    state_.badSession = true;
    currentFrames_.clear();
    state_.pendingSurveys.clear();
    return {make_event(EventKind::SessionAborted)};
}

Session start_session(SessionSettings settings, ParticipantInfo participant, SessionOptions options) {
    Session s(std::move(settings), std::move(participant), std::move(options));
    s.start();
    return s;
}

std::optional<AutopilotEntry> autopilot_next(AutopilotPlan& plan) {
    if (plan.exhausted()) return std::nullopt;
    return plan.entries[plan.cursor++];
}

}  // namespace navloop
