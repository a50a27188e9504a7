#include "navloop/service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <future>
#include <stdexcept>

#include <httplib.h>

#include "navloop/persistence.hpp"

namespace navloop {

void CommandQueue::push(Command command, AckSink sink) {
    std::lock_guard lock(mutex_);
    items_.push_back({std::move(command), std::move(sink)});
}

std::deque<CommandQueue::Item> CommandQueue::drain() {
    std::lock_guard lock(mutex_);
    std::deque<Item> out;
    out.swap(items_);
    return out;
}

std::size_t CommandQueue::size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
}

void SnapshotSlot::publish(Snapshot s) {
    std::lock_guard lock(mutex_);
    snapshot_ = std::move(s);
    ++version_;
}

std::pair<Snapshot, std::uint64_t> SnapshotSlot::latest() const {
    std::lock_guard lock(mutex_);
    return {snapshot_, version_};
}

EngineHost::EngineHost(HostOptions options) : options_(std::move(options)) {
    slot_.publish(current_snapshot());
}

void EngineHost::submit(Command command, AckSink sink) { queue_.push(std::move(command), std::move(sink)); }

void EngineHost::start_session(const ParticipantInfo& participant) {
    SessionSettings settings = options_.settings;
    if (nextMethod_) settings.locomotion.method = *nextMethod_;
    SessionOptions so;
    so.sessionId = options_.sessionPrefix + "-" + std::to_string(++sessionCounter_);
    so.leaderboard = options_.leaderboard;
    so.eyeHeight = options_.policy.eyeHeight;
    session_ = std::make_unique<Session>(std::move(settings), participant, std::move(so));
    if (nextEnvironmentRef_) session_->add_note("autopilot: " + *nextEnvironmentRef_ + " / " +
                                                std::string(to_string(session_->settings().locomotion.method)));
    agent_ = std::make_unique<AgentState>(Rng(options_.seed).fork_seed() ^ static_cast<std::uint64_t>(sessionCounter_));
    archivedCurrent_ = false;
    lastTrialSeen_ = lastBlockSeen_ = -1;
    nextMethod_.reset();
    nextEnvironmentRef_.reset();

    preSessionPending_.clear();
    for (const auto& id : session_->settings().environment.surveyLinks) {
        const auto* def = find_survey(session_->settings().surveys, id);
        if (def && def->administerAt == SurveyTiming::PreSession) preSessionPending_.push_back(id);
    }
    if (preSessionPending_.empty()) session_->start();
}

Ack EngineHost::apply(const Command& c) {
    Ack ack{c.commandId, true, "ok"};
    try {
        if (c.kind == CommandKind::StartSession) {
            if (session_ && !session_->finished()) throw PhaseError("a session is already running");
            if (!c.participant) throw std::invalid_argument("StartSession needs a participant");
            start_session(*c.participant);
            ack.outcome = session_->session_id();
            return ack;
        }
        if (c.kind == CommandKind::AutopilotNext) {
            if (!options_.autopilot) throw std::invalid_argument("no autopilot plan loaded");
            auto entry = autopilot_next(*options_.autopilot);
            if (!entry) throw std::out_of_range("autopilot plan exhausted");
            nextMethod_ = entry->method;
            nextEnvironmentRef_ = entry->environmentRef;
            ack.outcome = entry->environmentRef + " / " + std::string(to_string(entry->method));
            return ack;
        }
        if (!session_) throw PhaseError("no session");
        switch (c.kind) {
            case CommandKind::ToggleLight:
                session_->toggle_light();
                ack.outcome = session_->state().lightsOn ? "lightsOn" : "lightsOff";
                break;
            case CommandKind::ToggleSound:
                session_->toggle_sound();
                ack.outcome = session_->state().soundOn ? "soundOn" : "soundOff";
                break;
            case CommandKind::AddNote:
                if (c.text.empty()) throw std::invalid_argument("empty note");
                session_->add_note(c.text);
                break;
            case CommandKind::MarkBad: session_->mark_bad(); break;
            case CommandKind::Abort: session_->abort(); break;
            case CommandKind::EndFeedback:
                if (session_->phase() != Phase::FeedbackDisplay) throw PhaseError("no feedback on screen");
                session_->end_feedback();
                break;
            case CommandKind::SubmitSurvey: {
                session_->submit_survey(c.surveyId, c.answers);
                auto it = std::find(preSessionPending_.begin(), preSessionPending_.end(), c.surveyId);
                if (it != preSessionPending_.end()) {
                    preSessionPending_.erase(it);
                    if (preSessionPending_.empty()) session_->start();
                }
                break;
            }
            default: break;
        }
        ack.outcome = ack.outcome == "ok" ? std::string(to_string(session_->phase())) : ack.outcome;
    } catch (const std::exception& e) {
        ack.ok = false;
        ack.outcome = e.what();
    }
    return ack;
}

void EngineHost::archive_if_finished() {
    if (!session_ || !session_->finished() || archivedCurrent_) return;
    archivedCurrent_ = true;
    const auto& board = session_->leaderboard();
    if (board && board->mode() == LeaderboardMode::Real) {
        options_.leaderboard = *board;
        if (!options_.leaderboardFile.empty()) save_leaderboard(*board, options_.leaderboardFile);
    }
    if (!options_.outDir.empty()) archived_.push_back(write_session_archive(make_archive(*session_), options_.outDir));
}

Snapshot EngineHost::current_snapshot() const {
    if (!session_) {
        Snapshot s;
        if (options_.leaderboard) s.leaderboard = options_.leaderboard->entries();
        return s;
    }
    Snapshot s = make_snapshot(*session_);
    if (session_->phase() == Phase::Idle && !preSessionPending_.empty()) s.pendingSurvey = preSessionPending_.front();
    return s;
}

void EngineHost::pump() {
    std::vector<std::pair<AckSink, Ack>> acks;
    for (auto& item : queue_.drain()) acks.emplace_back(std::move(item.sink), apply(item.command));
    if (session_ && !session_->finished() && session_->phase() != Phase::Idle) {
        const auto& st = session_->state();
        if (st.phase == Phase::InTrial) {
            if (st.trialIndex != lastTrialSeen_ || st.blockIndex != lastBlockSeen_) {
                agent_->reset_trial();
                lastTrialSeen_ = st.trialIndex;
                lastBlockSeen_ = st.blockIndex;
            }
            const AgentObservation obs{st.pose, st.firefly.position, st.trialClock};
            session_->tick(agent_act(options_.policy, obs, *agent_, options_.dt), options_.dt);
        } else {
            session_->step(FrameInput{}, options_.dt);
        }
    }
    archive_if_finished();
    ++pumps_;
    slot_.publish(current_snapshot());
    // Acks go out after the publish so no client sees an ack before its effect.
    for (auto& [sink, ack] : acks)
        if (sink) sink(ack);
}

void EngineHost::run(std::stop_token stop, bool realtime) {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(options_.dt));
    auto next = clock::now();
    while (!stop.stop_requested()) {
        pump();
        if (realtime) {
            next += period;
            std::this_thread::sleep_until(next);
        }
    }
}

std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("endpoint must be host:port");
    const auto portText = endpoint.substr(colon + 1);
    unsigned port = 0;
    auto [ptr, ec] = std::from_chars(portText.data(), portText.data() + portText.size(), port);
    if (ec != std::errc() || ptr != portText.data() + portText.size() || port > 65535)
        throw std::invalid_argument("bad port in endpoint '" + std::string(endpoint) + "'");
    std::string host(endpoint.substr(0, colon));
    if (host.empty()) host = "0.0.0.0";
    return {host, static_cast<std::uint16_t>(port)};
}

bool OperatorSeat::try_take(std::uint64_t owner) {
    std::lock_guard lock(mutex_);
    if (owner_ && *owner_ != owner) return false;
    owner_ = owner;
    return true;
}

void OperatorSeat::release(std::uint64_t owner) {
    std::lock_guard lock(mutex_);
    if (owner_ == owner) owner_.reset();
}

bool OperatorSeat::held() const {
    std::lock_guard lock(mutex_);
    return owner_.has_value();
}

namespace {

bool send_all(int fd, std::string_view data) {
    while (!data.empty()) {
        const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

std::chrono::steady_clock::duration snapshot_period(double rate) {
    return std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(1.0 / rate));
}

}  // namespace

TcpServer::TcpServer(EngineHost& host, OperatorSeat& seat, ServerOptions options)
    : host_(host), seat_(seat), options_(std::move(options)) {
    if (!(options_.snapshotRate > 0.0)) throw std::invalid_argument("snapshot rate must be positive");
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
    listenFd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listenFd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listenFd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(options_.port);
    if (::inet_pton(AF_INET, options_.host.c_str(), &addr.sin_addr) != 1) {
        ::close(listenFd_);
        listenFd_ = -1;
        throw std::runtime_error("bad listen address '" + options_.host + "'");
    }
    if (::bind(listenFd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listenFd_, 16) < 0) {
        const std::string err = std::strerror(errno);
        ::close(listenFd_);
        listenFd_ = -1;
        throw std::runtime_error("bind/listen: " + err);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listenFd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    acceptThread_ = std::jthread([this](std::stop_token st) { accept_loop(st); });
}

void TcpServer::stop() {
    if (acceptThread_.joinable()) {
        acceptThread_.request_stop();
        acceptThread_.join();
    }
    std::vector<std::jthread> conns;
    {
        std::lock_guard lock(connMutex_);
        conns.swap(connections_);
    }
    for (auto& t : conns) t.request_stop();
    conns.clear();
    if (listenFd_ >= 0) {
        ::close(listenFd_);
        listenFd_ = -1;
    }
}

void TcpServer::accept_loop(std::stop_token stop) {
    while (!stop.stop_requested()) {
        pollfd p{listenFd_, POLLIN, 0};
        if (::poll(&p, 1, 50) <= 0) continue;
        const int fd = ::accept(listenFd_, nullptr, nullptr);
        if (fd < 0) continue;
        const auto id = nextId_++;
        std::lock_guard lock(connMutex_);
        connections_.emplace_back([this, fd, id](std::stop_token st) { serve_connection(st, fd, id); });
    }
}

void TcpServer::serve_connection(std::stop_token stop, int fd, std::uint64_t id) {
    // Acks arrive on the engine thread; they queue here and go out in order.
    struct Outbox {
        std::mutex mutex;
        std::deque<std::string> lines;
    };
    auto outbox = std::make_shared<Outbox>();
    auto enqueue = [outbox](const Message& m) {
        std::lock_guard lock(outbox->mutex);
        outbox->lines.push_back(encode(m));
    };

    std::optional<Role> role;
    LineBuffer buffer;
    std::uint64_t seq = 0;
    const auto period = snapshot_period(options_.snapshotRate);
    auto nextSnapshot = std::chrono::steady_clock::now();
    bool open = true;

    auto handle = [&](const std::optional<std::string>& line) {
        if (!line) {
            enqueue(ErrorMessage{"malformed", "line too long", std::nullopt});
            return;
        }
        if (line->empty()) return;
        Message m;
        try {
            m = decode(*line);
        } catch (const ProtocolError& e) {
            enqueue(ErrorMessage{"malformed", e.what(), std::nullopt});
            return;
        }
        if (const auto* hello = std::get_if<Hello>(&m)) {
            if (role) {
                enqueue(ErrorMessage{"protocol", "hello already received", std::nullopt});
                return;
            }
            if (hello->role == Role::Operator && !seat_.try_take(id)) {
                enqueue(ErrorMessage{"occupied", "another operator is connected", std::nullopt});
                open = false;
                return;
            }
            role = hello->role;
            enqueue(Hello{hello->role, "navloop"});
            nextSnapshot = std::chrono::steady_clock::now();
            return;
        }
        if (const auto* cmd = std::get_if<Command>(&m)) {
            if (!role) {
                enqueue(ErrorMessage{"hello-required", "send a hello first", cmd->commandId});
            } else if (*role != Role::Operator) {
                enqueue(ErrorMessage{"read-only", "spectators cannot send commands", cmd->commandId});
            } else {
                host_.submit(*cmd, [enqueue](const Ack& a) { enqueue(a); });
            }
            return;
        }
        enqueue(ErrorMessage{"unexpected", "clients may only send hello and command messages", std::nullopt});
    };

    char buf[4096];
    while (open && !stop.stop_requested()) {
        pollfd p{fd, POLLIN, 0};
        const int ready = ::poll(&p, 1, 5);
        if (ready > 0 && (p.revents & (POLLIN | POLLHUP | POLLERR))) {
            const auto n = ::recv(fd, buf, sizeof buf, 0);
            if (n <= 0) break;
            for (const auto& line : buffer.feed(std::string_view(buf, static_cast<std::size_t>(n)))) handle(line);
        }
        std::deque<std::string> pending;
        {
            std::lock_guard lock(outbox->mutex);
            pending.swap(outbox->lines);
        }
        bool ok = true;
        for (const auto& line : pending) ok = ok && send_all(fd, line);
        if (!ok) break;
        if (role && std::chrono::steady_clock::now() >= nextSnapshot) {
            auto snap = host_.snapshots().latest().first;
            snap.seq = ++seq;
            if (!send_all(fd, encode(snap))) break;
            nextSnapshot += period;
            if (nextSnapshot < std::chrono::steady_clock::now()) nextSnapshot = std::chrono::steady_clock::now() + period;
        }
    }
    // Commands already queued still reach the engine; only unsent acks drop.
    seat_.release(id);
    ::shutdown(fd, SHUT_RDWR);
    ::close(fd);
}

std::string sse_frame(const Message& m) { return "data: " + encode_payload(m) + "\n\n"; }

struct HttpBridge::Impl {
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> stopping{false};
};

HttpBridge::HttpBridge(EngineHost& host, OperatorSeat& seat, ServerOptions options) : impl_(std::make_unique<Impl>()) {
    const auto period = snapshot_period(options.snapshotRate);
    Impl* impl = impl_.get();

    impl->server.Get("/events", [&host, period, impl](const httplib::Request&, httplib::Response& res) {
        auto seq = std::make_shared<std::uint64_t>(0);
        res.set_header("Cache-Control", "no-cache");
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_chunked_content_provider("text/event-stream", [&host, period, impl, seq](std::size_t, httplib::DataSink& sink) {
            if (impl->stopping) return false;
            auto snap = host.snapshots().latest().first;
            snap.seq = ++*seq;
            const auto frame = sse_frame(snap);
            if (!sink.write(frame.data(), frame.size())) return false;
            std::this_thread::sleep_for(period);
            return !impl->stopping.load();
        });
    });

    impl->server.Post("/command", [&host, &seat](const httplib::Request& req, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        Message m;
        try {
            m = decode(req.body);
        } catch (const ProtocolError& e) {
            res.status = 400;
            res.set_content(encode_payload(ErrorMessage{"malformed", e.what(), std::nullopt}), "application/json");
            return;
        }
        const auto* cmd = std::get_if<Command>(&m);
        if (!cmd) {
            res.status = 400;
            res.set_content(encode_payload(ErrorMessage{"unexpected", "expected a command", std::nullopt}), "application/json");
            return;
        }
        if (seat.held()) {
            res.status = 409;
            res.set_content(encode_payload(ErrorMessage{"occupied", "another operator is connected", cmd->commandId}),
                            "application/json");
            return;
        }
        auto promise = std::make_shared<std::promise<Ack>>();
        auto future = promise->get_future();
        host.submit(*cmd, [promise](const Ack& a) { promise->set_value(a); });
        if (future.wait_for(std::chrono::seconds(5)) != std::future_status::ready) {
            res.status = 504;
            res.set_content(encode_payload(ErrorMessage{"timeout", "engine did not answer", cmd->commandId}),
                            "application/json");
            return;
        }
        res.set_content(encode_payload(future.get()), "application/json");
    });

    impl->server.Get("/surveys", [&host](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_content(serialize_survey_definitions(host.survey_definitions()), "application/json");
    });

    impl->server.Options("/command", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.set_header("Access-Control-Allow-Methods", "POST");
    });

    if (options.port == 0) {
        port_ = static_cast<std::uint16_t>(impl->server.bind_to_any_port(options.host));
    } else if (impl->server.bind_to_port(options.host, options.port)) {
        port_ = options.port;
    }
    if (port_ == 0) throw std::runtime_error("http: cannot bind " + options.host);
}

HttpBridge::~HttpBridge() { stop(); }

void HttpBridge::start() {
    impl_->thread = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpBridge::stop() {
    if (!impl_) return;
    impl_->stopping = true;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace navloop
