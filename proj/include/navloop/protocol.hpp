#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "navloop/session.hpp"

namespace navloop {

// Newline-delimited JSON messages, one object per line, each carrying a
// "type" field. Field layout is documented in docs/protocol.md.

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CommandKind {
    StartSession,
    ToggleLight,
    ToggleSound,
    AddNote,
    MarkBad,
    Abort,
    SubmitSurvey,
    EndFeedback,
    AutopilotNext,
};

std::string_view to_string(CommandKind k);
std::optional<CommandKind> command_kind_from_string(std::string_view s);

struct Command {
    CommandKind kind = CommandKind::ToggleLight;
    std::string commandId;
    double issuedAt = 0.0;  // client clock, seconds; informational
    std::string text;                           // AddNote
    std::optional<ParticipantInfo> participant; // StartSession
    std::string surveyId;                       // SubmitSurvey
    std::vector<SurveyAnswer> answers;          // SubmitSurvey
    friend bool operator==(const Command&, const Command&) = default;
};

struct Ack {
    std::string commandId;
    bool ok = true;
    std::string outcome;  // short result, or the error text when !ok
    friend bool operator==(const Ack&, const Ack&) = default;
};

struct TrialSummary {
    int blockIndex = 0;
    int trialIndex = 0;
    double t = 0.0;
    double d = 0.0;
    long long score = 0;
    EndReason endReason = EndReason::EndKey;
    std::optional<int> rank;  // leaderboard place; absent below the board or without a board
    bool practice = false;
    friend bool operator==(const TrialSummary&, const TrialSummary&) = default;
};

struct Snapshot {
    std::uint64_t seq = 0;
    std::string sessionId;
    Phase phase = Phase::Idle;
    int blockIndex = 0;
    int trialIndex = 0;
    double trialClock = 0.0;
    double x = 0.0;
    double z = 0.0;
    double yaw = 0.0;
    Vec3 fly;
    bool lightsOn = true;
    bool soundOn = true;
    bool badSession = false;
    std::optional<TrialSummary> lastTrial;
    std::vector<LeaderboardEntry> leaderboard;
    std::optional<std::string> pendingSurvey;
    friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct ErrorMessage {
    std::string code;  // "malformed", "occupied", "read-only", "hello-required", ...
    std::string message;
    std::optional<std::string> commandId;
    friend bool operator==(const ErrorMessage&, const ErrorMessage&) = default;
};

enum class Role { Operator, Spectator };
std::string_view to_string(Role r);

struct Hello {
    Role role = Role::Operator;
    std::string client;
    friend bool operator==(const Hello&, const Hello&) = default;
};

using Message = std::variant<Command, Ack, Snapshot, ErrorMessage, Hello>;

// Compact JSON for one message; no trailing newline.
std::string encode_payload(const Message& m);
// encode_payload plus '\n'.
std::string encode(const Message& m);

// Accepts one line with or without its trailing newline. Throws ProtocolError
// for malformed JSON, missing fields, or an unknown "type" (named in the text).
Message decode(std::string_view line);

// Snapshot of a live session; seq is left at 0 for the transport to stamp.
Snapshot make_snapshot(const Session& session);

// Splits a byte stream into lines. Bytes after the last newline are kept for
// the next feed. Lines longer than maxLine are reported as an empty optional
// in place of the line so the caller can answer with an error.
class LineBuffer {
public:
    explicit LineBuffer(std::size_t maxLine = 1 << 20) : maxLine_(maxLine) {}
    std::vector<std::optional<std::string>> feed(std::string_view bytes);

private:
    std::string partial_;
    bool overflow_ = false;
    std::size_t maxLine_;
};

}  // namespace navloop
