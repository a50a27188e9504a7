#include "navloop/protocol.hpp"

#include <json.hpp>

namespace navloop {

using ojson = nlohmann::ordered_json;

namespace {

constexpr CommandKind kAllKinds[] = {
    CommandKind::StartSession, CommandKind::ToggleLight,  CommandKind::ToggleSound,
    CommandKind::AddNote,      CommandKind::MarkBad,      CommandKind::Abort,
    CommandKind::SubmitSurvey, CommandKind::EndFeedback,  CommandKind::AutopilotNext,
};

ojson participant_json(const ParticipantInfo& p) {
    return ojson{{"id", p.id}, {"age", p.age}, {"gender", p.gender}, {"qualification", p.qualification}, {"group", p.group}};
}

ParticipantInfo participant_from(const ojson& j) {
    ParticipantInfo p;
    p.id = j.at("id").get<std::string>();
    p.age = j.value("age", 0);
    p.gender = j.value("gender", std::string());
    p.qualification = j.value("qualification", std::string());
    p.group = j.value("group", std::string());
    return p;
}

ojson to_json(const Command& c) {
    ojson j{{"type", "command"}, {"kind", std::string(to_string(c.kind))}, {"commandId", c.commandId}, {"issuedAt", c.issuedAt}};
    if (!c.text.empty()) j["text"] = c.text;
    if (c.participant) j["participant"] = participant_json(*c.participant);
    if (!c.surveyId.empty()) j["surveyId"] = c.surveyId;
    if (!c.answers.empty()) {
        ojson a = ojson::array();
        for (const auto& ans : c.answers) {
            if (const int* v = std::get_if<int>(&ans)) a.push_back(*v);
            else a.push_back(std::get<std::string>(ans));
        }
        j["answers"] = a;
    }
    return j;
}

ojson to_json(const Ack& a) {
    return ojson{{"type", "ack"}, {"commandId", a.commandId}, {"ok", a.ok}, {"outcome", a.outcome}};
}

ojson to_json(const Snapshot& s) {
    ojson j{{"type", "snapshot"},
            {"seq", s.seq},
            {"sessionId", s.sessionId},
            {"phase", std::string(to_string(s.phase))},
            {"blockIndex", s.blockIndex},
            {"trialIndex", s.trialIndex},
            {"trialClock", s.trialClock},
            {"pose", ojson{{"x", s.x}, {"z", s.z}, {"yaw", s.yaw}}},
            {"fly", ojson{{"x", s.fly.x}, {"y", s.fly.y}, {"z", s.fly.z}}},
            {"lightsOn", s.lightsOn},
            {"soundOn", s.soundOn},
            {"badSession", s.badSession}};
    if (s.lastTrial) {
        const auto& t = *s.lastTrial;
        j["lastTrial"] = ojson{{"blockIndex", t.blockIndex}, {"trialIndex", t.trialIndex}, {"t", t.t},
                               {"d", t.d},                   {"score", t.score},
                               {"endReason", std::string(to_string(t.endReason))}};
        if (t.rank) j["lastTrial"]["rank"] = *t.rank;
        j["lastTrial"]["practice"] = t.practice;
    }
    ojson board = ojson::array();
    for (const auto& e : s.leaderboard)
        board.push_back(ojson{{"participantId", e.participantId}, {"score", e.score}, {"timestamp", e.timestamp}});
    j["leaderboard"] = board;
    if (s.pendingSurvey) j["pendingSurvey"] = *s.pendingSurvey;
    return j;
}

ojson to_json(const ErrorMessage& e) {
    ojson j{{"type", "error"}, {"code", e.code}, {"message", e.message}};
    if (e.commandId) j["commandId"] = *e.commandId;
    return j;
}

ojson to_json(const Hello& h) {
    return ojson{{"type", "hello"}, {"role", std::string(to_string(h.role))}, {"client", h.client}};
}

Command command_from(const ojson& j) {
    Command c;
    const auto kindText = j.at("kind").get<std::string>();
    auto kind = command_kind_from_string(kindText);
    if (!kind) throw ProtocolError("unknown command kind '" + kindText + "'");
    c.kind = *kind;
    c.commandId = j.at("commandId").get<std::string>();
    c.issuedAt = j.value("issuedAt", 0.0);
    c.text = j.value("text", std::string());
    if (j.contains("participant")) c.participant = participant_from(j.at("participant"));
    c.surveyId = j.value("surveyId", std::string());
    if (j.contains("answers")) {
        for (const auto& a : j.at("answers")) {
            if (a.is_number_integer()) c.answers.emplace_back(a.get<int>());
            else if (a.is_string()) c.answers.emplace_back(a.get<std::string>());
            else throw ProtocolError("survey answers must be integers or strings");
        }
    }
    return c;
}

Snapshot snapshot_from(const ojson& j) {
    Snapshot s;
    s.seq = j.at("seq").get<std::uint64_t>();
    s.sessionId = j.at("sessionId").get<std::string>();
    const auto phaseText = j.at("phase").get<std::string>();
    auto phase = phase_from_string(phaseText);
    if (!phase) throw ProtocolError("unknown phase '" + phaseText + "'");
    s.phase = *phase;
    s.blockIndex = j.at("blockIndex").get<int>();
    s.trialIndex = j.at("trialIndex").get<int>();
    s.trialClock = j.at("trialClock").get<double>();
    const auto& pose = j.at("pose");
    s.x = pose.at("x").get<double>();
    s.z = pose.at("z").get<double>();
    s.yaw = pose.at("yaw").get<double>();
    const auto& fly = j.at("fly");
    s.fly = {fly.at("x").get<double>(), fly.at("y").get<double>(), fly.at("z").get<double>()};
    s.lightsOn = j.at("lightsOn").get<bool>();
    s.soundOn = j.at("soundOn").get<bool>();
    s.badSession = j.at("badSession").get<bool>();
    if (j.contains("lastTrial")) {
        const auto& t = j.at("lastTrial");
        TrialSummary ts;
        ts.blockIndex = t.at("blockIndex").get<int>();
        ts.trialIndex = t.at("trialIndex").get<int>();
        ts.t = t.at("t").get<double>();
        ts.d = t.at("d").get<double>();
        ts.score = t.at("score").get<long long>();
        const auto reasonText = t.at("endReason").get<std::string>();
        auto reason = end_reason_from_string(reasonText);
        if (!reason) throw ProtocolError("unknown end reason '" + reasonText + "'");
        ts.endReason = *reason;
        if (t.contains("rank")) ts.rank = t.at("rank").get<int>();
        ts.practice = t.value("practice", false);
        s.lastTrial = ts;
    }
    for (const auto& e : j.at("leaderboard"))
        s.leaderboard.push_back({e.at("participantId").get<std::string>(), e.at("score").get<long long>(),
                                 e.value("timestamp", 0.0)});
    if (j.contains("pendingSurvey")) s.pendingSurvey = j.at("pendingSurvey").get<std::string>();
    return s;
}

}  // namespace

std::string_view to_string(CommandKind k) {
    switch (k) {
        case CommandKind::StartSession: return "StartSession";
        case CommandKind::ToggleLight: return "ToggleLight";
        case CommandKind::ToggleSound: return "ToggleSound";
        case CommandKind::AddNote: return "AddNote";
        case CommandKind::MarkBad: return "MarkBad";
        case CommandKind::Abort: return "Abort";
        case CommandKind::SubmitSurvey: return "SubmitSurvey";
        case CommandKind::EndFeedback: return "EndFeedback";
        case CommandKind::AutopilotNext: return "AutopilotNext";
    }
    return "ToggleLight";
}

std::optional<CommandKind> command_kind_from_string(std::string_view s) {
    for (auto k : kAllKinds) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::string_view to_string(Role r) { return r == Role::Operator ? "operator" : "spectator"; }

std::string encode_payload(const Message& m) {
    return std::visit([](const auto& v) { return to_json(v).dump(); }, m);
}

std::string encode(const Message& m) { return encode_payload(m) + '\n'; }

Message decode(std::string_view line) {
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ojson j;
    try {
        j = ojson::parse(line.begin(), line.end());
    } catch (const ojson::parse_error& e) {
        throw ProtocolError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolError("message must be a JSON object");
    if (!j.contains("type") || !j.at("type").is_string()) throw ProtocolError("message has no string 'type' field");
    const auto type = j.at("type").get<std::string>();
    try {
        if (type == "command") return command_from(j);
        if (type == "ack")
            return Ack{j.at("commandId").get<std::string>(), j.at("ok").get<bool>(), j.value("outcome", std::string())};
        if (type == "snapshot") return snapshot_from(j);
        if (type == "error") {
            ErrorMessage e{j.at("code").get<std::string>(), j.value("message", std::string()), std::nullopt};
            if (j.contains("commandId")) e.commandId = j.at("commandId").get<std::string>();
            return e;
        }
        if (type == "hello") {
            const auto role = j.at("role").get<std::string>();
            if (role != "operator" && role != "spectator") throw ProtocolError("unknown role '" + role + "'");
            return Hello{role == "operator" ? Role::Operator : Role::Spectator, j.value("client", std::string())};
        }
    } catch (const ojson::exception& e) {
        throw ProtocolError(type + ": " + e.what());
    }
    throw ProtocolError("unknown message type '" + type + "'");
}

Snapshot make_snapshot(const Session& session) {
    const auto& st = session.state();
    Snapshot s;
    s.sessionId = session.session_id();
    s.phase = st.phase;
    s.blockIndex = st.blockIndex;
    s.trialIndex = st.trialIndex;
    s.trialClock = st.trialClock;
    s.x = st.pose.position.x;
    s.z = st.pose.position.z;
    s.yaw = st.pose.yaw;
    s.fly = st.firefly.position;
    s.lightsOn = st.lightsOn;
    s.soundOn = st.soundOn;
    s.badSession = st.badSession;
    if (!session.records().empty()) {
        const auto& r = session.records().back();
        s.lastTrial = TrialSummary{r.blockIndex, r.trialIndex, r.elapsed, r.residual, r.displayedScore, r.endReason,
                                   std::nullopt, false};
        if (st.lastPlacement) {
            s.lastTrial->rank = st.lastPlacement->rank;
            s.lastTrial->practice = st.lastPlacement->practice;
        }
    }
    if (session.leaderboard()) s.leaderboard = session.leaderboard()->entries();
    if (!st.pendingSurveys.empty()) s.pendingSurvey = st.pendingSurveys.front();
    return s;
}

std::vector<std::optional<std::string>> LineBuffer::feed(std::string_view bytes) {
    std::vector<std::optional<std::string>> lines;
    for (char ch : bytes) {
        if (ch == '\n') {
            if (overflow_) lines.emplace_back(std::nullopt);
            else lines.emplace_back(std::move(partial_));
            partial_.clear();
            overflow_ = false;
            continue;
        }
        if (overflow_) continue;
        partial_.push_back(ch);
        if (partial_.size() > maxLine_) {
            overflow_ = true;
            partial_.clear();
        }
    }
    return lines;
}

}  // namespace navloop
