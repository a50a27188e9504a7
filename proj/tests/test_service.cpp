#include <doctest.h>

#include <httplib.h>

#include "helpers.hpp"
#include "navloop/service.hpp"
#include "net_client.hpp"

using namespace navloop;
using testing::LineClient;

namespace {

HostOptions host_options() {
    HostOptions o;
    o.settings = testing::small_settings({3, 3});
    o.policy.observeTicks = 100000;  // keeps the first trial running
    o.leaderboard = Leaderboard(default_fake_board(), LeaderboardMode::Fake);
    return o;
}

Command command(CommandKind kind, std::string id) {
    Command c;
    c.kind = kind;
    c.commandId = std::move(id);
    return c;
}

Command start_command(std::string id) {
    auto c = command(CommandKind::StartSession, std::move(id));
    c.participant = testing::participant();
    return c;
}

bool is_ack(const Message& m, const std::string& id) {
    const auto* a = std::get_if<Ack>(&m);
    return a && a->commandId == id;
}

template <typename T>
bool is(const Message& m) { return std::holds_alternative<T>(m); }

}  // namespace

TEST_CASE("engine host applies commands before the tick") {
    EngineHost host(host_options());
    std::vector<Ack> acks;
    auto sink = [&](const Ack& a) { acks.push_back(a); };
    host.submit(command(CommandKind::ToggleLight, "early"), sink);
    host.submit(start_command("go"), sink);
    host.pump();
    REQUIRE(acks.size() == 2);
    CHECK_FALSE(acks[0].ok);
    CHECK(acks[1].ok);
    REQUIRE(host.session() != nullptr);
    CHECK(host.session()->phase() == Phase::InTrial);

    host.submit(command(CommandKind::ToggleLight, "l1"), sink);
    host.pump();
    CHECK(acks.back().outcome == "lightsOff");
    CHECK_FALSE(host.session()->current_frames().back().lightsOn);
    CHECK_FALSE(host.snapshots().latest().first.lightsOn);

    host.submit(start_command("again"), sink);
    host.submit(command(CommandKind::EndFeedback, "fb"), sink);
    host.pump();
    CHECK_FALSE(acks[acks.size() - 2].ok);
    CHECK_FALSE(acks.back().ok);

    host.submit(command(CommandKind::Abort, "stop"), sink);
    host.pump();
    CHECK(acks.back().outcome == "Aborted");
    CHECK(host.snapshots().latest().first.phase == Phase::Aborted);
}

TEST_CASE("pre-session survey holds the session idle") {
    auto o = host_options();
    o.settings = testing::small_settings({2}, true);
    o.settings.environment.surveyLinks = {"ssq", "nasa_tlx"};
    EngineHost host(o);
    Ack last;
    auto sink = [&](const Ack& a) { last = a; };
    host.submit(start_command("go"), sink);
    host.pump();
    CHECK(host.session()->phase() == Phase::Idle);
    CHECK(host.snapshots().latest().first.pendingSurvey == "ssq");
    auto survey = command(CommandKind::SubmitSurvey, "ssq");
    survey.surveyId = "ssq";
    survey.answers.assign(27, SurveyAnswer{0});
    host.submit(survey, sink);
    host.pump();
    CHECK(last.ok);
    CHECK(host.session()->phase() == Phase::InTrial);
}

TEST_CASE("autopilot picks the next method") {
    auto o = host_options();
    o.autopilot = AutopilotPlan{{{"room_a", LocomotionMethod::ArmSwing}}};
    EngineHost host(o);
    std::vector<Ack> acks;
    auto sink = [&](const Ack& a) { acks.push_back(a); };
    host.submit(command(CommandKind::AutopilotNext, "a1"), sink);
    host.submit(start_command("go"), sink);
    host.submit(command(CommandKind::AutopilotNext, "a2"), sink);
    host.pump();
    CHECK(acks[0].outcome == "room_a / ArmSwing");
    CHECK(host.session()->settings().locomotion.method == LocomotionMethod::ArmSwing);
    CHECK_FALSE(acks[2].ok);
}

TEST_CASE("finished sessions are archived") {
    testing::TempDir out;
    auto o = host_options();
    o.settings = testing::small_settings({1});
    o.settings.scenario.feedbackDisplayDuration = 0.1;
    o.policy.observeTicks = 10;
    o.outDir = out.path;
    EngineHost host(o);
    host.submit(start_command("go"));
    for (int i = 0; i < 100000 && host.archived().empty(); ++i) host.pump();
    REQUIRE(host.archived().size() == 1);
    CHECK(read_session_archive(host.archived()[0]).trials.size() == 1);
}

TEST_CASE("tcp transport") {
    EngineHost host(host_options());
    OperatorSeat seat;
    TcpServer server(host, seat, ServerOptions{"127.0.0.1", 0, 50.0});
    server.start();
    auto pump = [&] { host.pump(); };

    LineClient op(server.port());
    SUBCASE("commands before hello are refused") {
        op.send(command(CommandKind::ToggleLight, "x"));
        REQUIRE(op.read_until([](const Message& m) { return is<ErrorMessage>(m); }, 2000));
        CHECK(std::get<ErrorMessage>(op.log.back()).code == "hello-required");
    }

    op.send(Hello{Role::Operator, "test"});
    REQUIRE(op.read_until([](const Message& m) { return is<Hello>(m); }, 2000));

    SUBCASE("toggle light is acked and visible in the next snapshot and frame") {
        op.send(start_command("start"));
        REQUIRE(op.read_until([](const Message& m) { return is_ack(m, "start"); }, 2000, pump));
        CHECK(std::get<Ack>(op.log.back()).ok);
        for (int i = 0; i < 3; ++i) host.pump();
        const int before = host.session()->current_frames().size();
        op.send(command(CommandKind::ToggleLight, "light"));
        REQUIRE(op.read_until([](const Message& m) { return is_ack(m, "light"); }, 2000, pump));
        // The frame logged in the tick that applied the command already shows it.
        const auto& frames = host.session()->current_frames();
        bool flippedAt = false;
        for (std::size_t i = before; i < frames.size(); ++i) {
            if (!frames[i].lightsOn) {
                flippedAt = true;
                CHECK(frames[i - 1].lightsOn);
                break;
            }
        }
        CHECK(flippedAt);
        REQUIRE(op.read_until([](const Message& m) { return is<Snapshot>(m); }, 2000));
        CHECK_FALSE(std::get<Snapshot>(op.log.back()).lightsOn);
    }

    SUBCASE("a second operator is turned away") {
        LineClient other(server.port());
        other.send(Hello{Role::Operator, "other"});
        REQUIRE(other.read_until([](const Message& m) { return is<ErrorMessage>(m); }, 2000));
        CHECK(std::get<ErrorMessage>(other.log.back()).code == "occupied");
        other.read_for(200);
        CHECK(other.closed());

        LineClient watcher(server.port());
        watcher.send(Hello{Role::Spectator, "w"});
        REQUIRE(watcher.read_until([](const Message& m) { return is<Snapshot>(m); }, 2000));
        watcher.send(command(CommandKind::Abort, "sneaky"));
        REQUIRE(watcher.read_until([](const Message& m) { return is<ErrorMessage>(m); }, 2000));
        CHECK(std::get<ErrorMessage>(watcher.log.back()).code == "read-only");
        CHECK(std::get<ErrorMessage>(watcher.log.back()).commandId == "sneaky");
    }

    SUBCASE("malformed input leaves the stream open") {
        op.send_raw("{\"type\": \n");
        REQUIRE(op.read_until([](const Message& m) { return is<ErrorMessage>(m); }, 2000));
        CHECK(std::get<ErrorMessage>(op.log.back()).code == "malformed");
        op.send_raw("{\"type\":\"bogus\"}\n");
        REQUIRE(op.read_until([](const Message& m) { return is<ErrorMessage>(m); }, 2000));
        CHECK(std::get<ErrorMessage>(op.log.back()).message.find("'bogus'") != std::string::npos);
        op.send(start_command("after"));
        REQUIRE(op.read_until([](const Message& m) { return is_ack(m, "after"); }, 2000, pump));
        CHECK(std::get<Ack>(op.log.back()).ok);
    }

    SUBCASE("abort lands within one tick") {
        op.send(start_command("start"));
        REQUIRE(op.read_until([](const Message& m) { return is_ack(m, "start"); }, 2000, pump));
        host.pump();
        const auto pumps = host.pumps();
        op.send(command(CommandKind::Abort, "abort"));
        REQUIRE(op.read_until([](const Message& m) { return is_ack(m, "abort"); }, 2000, pump));
        CHECK(host.pumps() >= pumps + 1);
        CHECK(host.session()->phase() == Phase::Aborted);
        REQUIRE(op.read_until([](const Message& m) { return is<Snapshot>(m); }, 2000));
        CHECK(std::get<Snapshot>(op.log.back()).phase == Phase::Aborted);
    }

    SUBCASE("acks keep command order and snapshots count up without gaps") {
        op.send(start_command("start"));
        REQUIRE(op.read_until([](const Message& m) { return is_ack(m, "start"); }, 2000, pump));
        std::string burst;
        for (int i = 0; i < 50; ++i) {
            auto c = command(CommandKind::AddNote, "n" + std::to_string(i));
            c.text = "note " + std::to_string(i);
            burst += encode(c);
        }
        op.send_raw(burst);
        REQUIRE(op.read_until([](const Message& m) { return is_ack(m, "n49"); }, 5000, pump));
        op.read_until([](const Message&) { return false; }, 300, pump);
        std::vector<std::string> order;
        std::vector<std::uint64_t> seqs;
        for (const auto& m : op.log) {
            if (const auto* a = std::get_if<Ack>(&m); a && a->commandId[0] == 'n') order.push_back(a->commandId);
            if (const auto* s = std::get_if<Snapshot>(&m)) seqs.push_back(s->seq);
        }
        REQUIRE(order.size() == 50);
        for (int i = 0; i < 50; ++i) CHECK(order[i] == "n" + std::to_string(i));
        REQUIRE(seqs.size() > 3);
        for (std::size_t i = 0; i < seqs.size(); ++i) CHECK(seqs[i] == i + 1);
        CHECK(host.session()->state().notes.size() == 50);
    }
    server.stop();
}

TEST_CASE("http bridge") {
    EngineHost host(host_options());
    OperatorSeat seat;
    HttpBridge bridge(host, seat, ServerOptions{"127.0.0.1", 0, 50.0});
    bridge.start();
    std::jthread engine([&host](std::stop_token st) { host.run(st, true); });

    httplib::Client client("127.0.0.1", bridge.port());
    auto res = client.Post("/command", encode_payload(start_command("start")), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(std::get<Ack>(decode(res->body)).ok);

    res = client.Post("/command", encode_payload(command(CommandKind::ToggleLight, "light")), "application/json");
    REQUIRE(res);
    CHECK(std::get<Ack>(decode(res->body)).outcome == "lightsOff");

    res = client.Post("/command", "{oops", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(std::get<ErrorMessage>(decode(res->body)).code == "malformed");

    seat.try_take(77);
    res = client.Post("/command", encode_payload(command(CommandKind::Abort, "a")), "application/json");
    REQUIRE(res);
    CHECK(res->status == 409);
    seat.release(77);

    res = client.Get("/surveys");
    REQUIRE(res);
    CHECK(parse_survey_definitions(res->body) == builtin_surveys());

    std::string stream;
    httplib::Client sse("127.0.0.1", bridge.port());
    sse.Get("/events", [&](const char* data, std::size_t n) {
        stream.append(data, n);
        return std::count(stream.begin(), stream.end(), '\n') < 6;
    });
    std::vector<Snapshot> snaps;
    std::size_t pos = 0, end;
    while ((end = stream.find("\n\n", pos)) != std::string::npos) {
        const auto frame = stream.substr(pos, end - pos);
        REQUIRE(frame.rfind("data: ", 0) == 0);
        snaps.push_back(std::get<Snapshot>(decode(frame.substr(6))));
        pos = end + 2;
    }
    REQUIRE(snaps.size() >= 3);
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        CHECK(snaps[i].seq == i + 1);
        CHECK_FALSE(snaps[i].lightsOn);
        CHECK(snaps[i].phase == Phase::InTrial);
    }
    engine.request_stop();
    engine.join();
    bridge.stop();
}

TEST_CASE("sse framing and endpoints") {
    CHECK(sse_frame(Ack{"c", true, "ok"}) == "data: {\"type\":\"ack\",\"commandId\":\"c\",\"ok\":true,\"outcome\":\"ok\"}\n\n");
    CHECK(parse_endpoint("127.0.0.1:7000") == std::pair<std::string, std::uint16_t>{"127.0.0.1", 7000});
    CHECK(parse_endpoint(":80").first == "0.0.0.0");
    CHECK_THROWS_AS(parse_endpoint("localhost"), std::invalid_argument);
    CHECK_THROWS_AS(parse_endpoint("h:99999"), std::invalid_argument);
    OperatorSeat seat;
    CHECK(seat.try_take(1));
    CHECK(seat.try_take(1));
    CHECK_FALSE(seat.try_take(2));
    seat.release(2);
    CHECK(seat.held());
    seat.release(1);
    CHECK_FALSE(seat.held());
}

TEST_CASE("real boards carry over between sessions and reach the disk") {
    testing::TempDir out;
    auto o = host_options();
    o.settings = testing::small_settings({1});
    o.settings.scenario.feedbackDisplayDuration = 0.1;
    o.policy.observeTicks = 10;
    o.leaderboard = Leaderboard({}, LeaderboardMode::Real);
    o.leaderboardFile = out.path / "leaderboard.json";
    EngineHost host(o);
    for (const char* id : {"P1", "P2"}) {
        auto c = start_command(id);
        c.participant->id = id;
        host.submit(c);
        host.pump();
        for (int i = 0; i < 100000 && !host.session()->finished(); ++i) host.pump();
        host.pump();
    }
    const auto saved = parse_leaderboard(read_file(o.leaderboardFile));
    REQUIRE(saved.size() == 2);
    CHECK(host.snapshots().latest().first.leaderboard.size() == 2);
}
