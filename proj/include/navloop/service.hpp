#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "navloop/agents.hpp"
#include "navloop/protocol.hpp"
#include "navloop/session.hpp"

namespace navloop {

using AckSink = std::function<void(const Ack&)>;

// Multi-producer command queue drained by the engine thread.
class CommandQueue {
public:
    struct Item {
        Command command;
        AckSink sink;
    };
    void push(Command command, AckSink sink);
    std::deque<Item> drain();
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::deque<Item> items_;
};

// Latest-wins snapshot slot: one writer, many readers. Readers that fall
// behind simply see the newest state.
class SnapshotSlot {
public:
    void publish(Snapshot s);
    // The newest snapshot and its publication counter (0 before the first).
    std::pair<Snapshot, std::uint64_t> latest() const;

private:
    mutable std::mutex mutex_;
    Snapshot snapshot_;
    std::uint64_t version_ = 0;
};

struct HostOptions {
    SessionSettings settings = demo_settings();
    std::filesystem::path outDir;  // finished sessions are archived here when set
    std::optional<AutopilotPlan> autopilot;
    AgentPolicy policy;  // the simulated participant
    double dt = 1.0 / 90.0;
    std::uint64_t seed = 1;
    // Board each participant starts from; Fake boards revert per participant.
    std::optional<Leaderboard> leaderboard;
    // Real boards carry over between sessions and are saved here when set.
    std::filesystem::path leaderboardFile;
    std::string sessionPrefix = "op";
};

// Owns the session and the simulated participant. Commands enter through
// submit() from any thread; pump() runs on the engine thread only.
class EngineHost {
public:
    explicit EngineHost(HostOptions options);

    void submit(Command command, AckSink sink = {});

    // Applies every queued command in arrival order, advances the session by
    // one dt, publishes a snapshot and only then hands out the acks.
    void pump();

    // Calls pump() every dt of wall time until stop is requested (or as fast
    // as possible when realtime is false).
    void run(std::stop_token stop, bool realtime = true);

    const SnapshotSlot& snapshots() const { return slot_; }
    // Fixed at construction; safe from any thread.
    const std::vector<SurveyDefinition>& survey_definitions() const { return options_.settings.surveys; }

    // Engine-thread accessors.
    const Session* session() const { return session_.get(); }
    const std::vector<std::filesystem::path>& archived() const { return archived_; }
    std::optional<LocomotionMethod> autopilot_method() const { return nextMethod_; }
    std::uint64_t pumps() const { return pumps_; }

private:
    Ack apply(const Command& c);
    void start_session(const ParticipantInfo& participant);
    void archive_if_finished();
    Snapshot current_snapshot() const;

    HostOptions options_;
    CommandQueue queue_;
    SnapshotSlot slot_;
    std::unique_ptr<Session> session_;
    std::unique_ptr<AgentState> agent_;
    std::vector<std::string> preSessionPending_;
    bool archivedCurrent_ = false;
    int sessionCounter_ = 0;
    int lastTrialSeen_ = -1;
    int lastBlockSeen_ = -1;
    std::optional<LocomotionMethod> nextMethod_;
    std::optional<std::string> nextEnvironmentRef_;
    std::vector<std::filesystem::path> archived_;
    std::uint64_t pumps_ = 0;
};

// "host:port" split. Throws std::invalid_argument.
std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint);

// The single operator seat shared by both transports.
class OperatorSeat {
public:
    bool try_take(std::uint64_t owner);
    void release(std::uint64_t owner);
    bool held() const;

private:
    mutable std::mutex mutex_;
    std::optional<std::uint64_t> owner_;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;  // 0 picks a free port
    double snapshotRate = 10.0;
};

// Newline-delimited TCP transport. Clients open with a hello; one operator
// at a time, any number of spectators.
class TcpServer {
public:
    TcpServer(EngineHost& host, OperatorSeat& seat, ServerOptions options);
    ~TcpServer();
    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    // Binds and starts accepting. Throws std::runtime_error on socket errors.
    void start();
    void stop();
    std::uint16_t port() const { return port_; }

private:
    void accept_loop(std::stop_token stop);
    void serve_connection(std::stop_token stop, int fd, std::uint64_t id);

    EngineHost& host_;
    OperatorSeat& seat_;
    ServerOptions options_;
    int listenFd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<std::uint64_t> nextId_{1};
    std::jthread acceptThread_;
    std::mutex connMutex_;
    std::vector<std::jthread> connections_;
};

// Browser framing of the same payloads: GET /events is a server-sent event
// stream of snapshots (one "data:" line per message), POST /command takes one
// command object and answers with its ack (or an error object), GET /surveys
// returns the survey definitions so a client can render pending surveys.
class HttpBridge {
public:
    HttpBridge(EngineHost& host, OperatorSeat& seat, ServerOptions options);
    ~HttpBridge();
    HttpBridge(const HttpBridge&) = delete;
    HttpBridge& operator=(const HttpBridge&) = delete;

    void start();
    void stop();
    std::uint16_t port() const { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::uint16_t port_ = 0;
};

// Formats a message as one server-sent event.
std::string sse_frame(const Message& m);

}  // namespace navloop
