#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "navloop/persistence.hpp"
#include "navloop/protocol.hpp"
#include "protocol_fuzz.hpp"

using namespace navloop;

TEST_CASE("ToggleLight command") {
    Command c;
    c.kind = CommandKind::ToggleLight;
    c.commandId = "c-1";
    c.issuedAt = 12.5;
    const auto line = encode(c);
    CHECK(line == "{\"type\":\"command\",\"kind\":\"ToggleLight\",\"commandId\":\"c-1\",\"issuedAt\":12.5}\n");
    CHECK(std::get<Command>(decode(line)) == c);
}

TEST_CASE("absent optional fields decode as absent") {
    const auto m = decode(
        R"({"type":"snapshot","seq":3,"sessionId":"s","phase":"InTrial","blockIndex":0,"trialIndex":1,)"
        R"("trialClock":0.5,"pose":{"x":1,"z":2,"yaw":225},"fly":{"x":-3,"y":1,"z":-1},)"
        R"("lightsOn":true,"soundOn":false,"badSession":false,"leaderboard":[]})");
    const auto& s = std::get<Snapshot>(m);
    CHECK_FALSE(s.pendingSurvey.has_value());
    CHECK_FALSE(s.lastTrial.has_value());
    CHECK(s.seq == 3);
    CHECK(s.yaw == 225.0);
    CHECK_FALSE(s.soundOn);

    const auto e = std::get<ErrorMessage>(decode(R"({"type":"error","code":"occupied","message":"taken"})"));
    CHECK_FALSE(e.commandId.has_value());
}

TEST_CASE("10^4 random messages round-trip") {
    Rng rng(4242);
    for (int i = 0; i < 10000; ++i) {
        const auto m = fuzz::message(rng);
        const auto line = encode(m);
        REQUIRE(line.back() == '\n');
        REQUIRE(line.find('\n') == line.size() - 1);
        const auto back = decode(line);
        REQUIRE(back == m);
        REQUIRE(encode(back) == line);
    }
}

TEST_CASE("decode errors") {
    try {
        decode(R"({"type":"telemetry","x":1})");
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(std::string(e.what()).find("'telemetry'") != std::string::npos);
    }
    CHECK_THROWS_AS(decode("{not json"), ProtocolError);
    CHECK_THROWS_AS(decode("[1,2]"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"kind":"Abort"})"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"type":"command","kind":"Explode","commandId":"x"})"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"type":"command","kind":"Abort"})"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"type":"hello","role":"admin"})"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"type":"ack","commandId":"x","ok":"yes"})"), ProtocolError);
}

TEST_CASE("LineBuffer") {
    LineBuffer b(8);
    auto lines = b.feed("ab");
    CHECK(lines.empty());
    lines = b.feed("c\nde\n\nf");
    REQUIRE(lines.size() == 3);
    CHECK(*lines[0] == "abc");
    CHECK(*lines[1] == "de");
    CHECK(*lines[2] == "");
    lines = b.feed("0123456789\nok\n");
    REQUIRE(lines.size() == 2);
    CHECK_FALSE(lines[0].has_value());
    CHECK(*lines[1] == "ok");
}

TEST_CASE("command kinds") {
    for (int k = 0; k < 9; ++k) {
        const auto kind = static_cast<CommandKind>(k);
        CHECK(command_kind_from_string(to_string(kind)) == kind);
    }
    CHECK_FALSE(command_kind_from_string("Launch").has_value());
}

TEST_CASE("make_snapshot carries the latest placement") {
    SessionOptions so;
    so.sessionId = "snap";
    so.leaderboard = Leaderboard({}, LeaderboardMode::Practice);
    auto s = start_session(testing::small_settings({2}), testing::participant(), so);
    auto snap = make_snapshot(s);
    CHECK(snap.sessionId == "snap");
    CHECK(snap.phase == Phase::InTrial);
    CHECK_FALSE(snap.lastTrial.has_value());
    CHECK(snap.x == 4.5);
    CHECK(snap.yaw == 225.0);
    auto in = testing::idle_input(s, 1.0 / 90.0);
    in.endTrialPressed = true;
    s.tick(in, 1.0 / 90.0);
    snap = make_snapshot(s);
    REQUIRE(snap.lastTrial.has_value());
    CHECK(snap.lastTrial->rank == 1);
    CHECK(snap.lastTrial->practice);
    CHECK(snap.phase == Phase::FeedbackDisplay);
    CHECK(std::get<Snapshot>(decode(encode(snap))) == snap);
}

TEST_CASE("examples in docs/protocol.md are canonical encodings") {
    std::istringstream doc(read_file(std::filesystem::path(NAVLOOP_SOURCE_DIR) / "docs" / "protocol.md"));
    std::string line;
    bool inJson = false;
    int checked = 0;
    while (std::getline(doc, line)) {
        if (line == "```json") inJson = true;
        else if (line == "```") inJson = false;
        else if (inJson) {
            INFO(line);
            CHECK(encode_payload(decode(line)) == line);
            ++checked;
        }
    }
    CHECK(checked >= 10);
}
