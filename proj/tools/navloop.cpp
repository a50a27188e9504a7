#include <csignal>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "navloop/agents.hpp"
#include "navloop/analysis.hpp"
#include "navloop/persistence.hpp"
#include "navloop/service.hpp"

namespace fs = std::filesystem;
using namespace navloop;

namespace {

volatile std::sig_atomic_t g_interrupted = 0;

void on_signal(int) { g_interrupted = 1; }

// A directory holds all three settings files; a lone scenario file borrows
// environment.json / locomotion.json from next to it, else the demo ones.
SessionSettings load_scenario(const fs::path& path) {
    if (fs::is_directory(path)) return load_settings_dir(path);
    SessionSettings s = demo_settings();
    const auto dir = path.parent_path();
    if (fs::exists(dir / "environment.json")) s.environment = parse_environment(read_file(dir / "environment.json")).value;
    if (fs::exists(dir / "locomotion.json")) s.locomotion = parse_locomotion(read_file(dir / "locomotion.json")).value;
    if (fs::exists(dir / "surveys.json")) s.surveys = parse_survey_definitions(read_file(dir / "surveys.json"));
    auto scen = parse_scenario(read_file(path));
    for (const auto& w : scen.warnings) std::cerr << "warning: " << w << '\n';
    s.scenario = scen.value;
    return s;
}

int cmd_simulate(const fs::path& scenario, const fs::path& agents, const fs::path& out, std::uint64_t seed, bool serial) {
    const auto settings = load_scenario(scenario);
    const auto config = parse_agent_config(read_file(agents));
    CohortOptions opts;
    opts.seed = seed;
    opts.fakeBoard = config.fakeBoard;
    opts.parallel = !serial;
    const auto started = std::chrono::steady_clock::now();
    const auto archives = run_cohort(config.nPerGroup, config.groups, settings, config.policy, opts);
    for (const auto& a : archives) write_session_archive(a, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::size_t trials = 0;
    for (const auto& a : archives) trials += a.trials.size();
    std::cout << "simulated " << archives.size() << " sessions, " << trials << " trials in " << secs << " s -> " << out.string()
              << '\n';
    return 0;
}

int cmd_analyze(const fs::path& in, const fs::path& out, const std::string& grid, double minDuration) {
    AnalysisOptions opts;
    parse_grid(grid, opts);
    opts.minTrialDuration = minDuration;
    const auto result = run_analysis(in, out, opts);
    std::size_t excluded = 0;
    for (const auto& r : result.rows) excluded += r.excluded != ExclusionReason::None;
    std::cout << "analyzed " << result.rows.size() << " trials (" << excluded << " excluded) -> " << out.string() << '\n';
    std::cout << render_summary_table(result.summary);
    return 0;
}

int cmd_serve(const fs::path& settingsDir, const std::string& listen, const fs::path& out, const std::string& autopilot,
              const std::string& http, const std::string& agents, const std::string& boardMode, double rate,
              double duration) {
    HostOptions ho;
    ho.settings = load_settings_dir(settingsDir);
    ho.outDir = out;
    if (!autopilot.empty()) ho.autopilot = parse_autopilot_plan(read_file(autopilot));
    auto fakeBoard = default_fake_board();
    if (!agents.empty()) {
        const auto cfg = parse_agent_config(read_file(agents));
        ho.policy = cfg.policy;
        fakeBoard = cfg.fakeBoard;
    }
    const auto mode = leaderboard_mode_from_string(boardMode);
    if (!mode) throw CLI::ValidationError("--leaderboard", "expected Real, Fake or Practice");
    if (*mode == LeaderboardMode::Real) {
        ho.leaderboardFile = out / "leaderboard.json";
        ho.leaderboard = load_leaderboard(ho.leaderboardFile, *mode);
    } else {
        ho.leaderboard = Leaderboard(fakeBoard, *mode);
    }

    EngineHost host(std::move(ho));
    OperatorSeat seat;
    ServerOptions so;
    std::tie(so.host, so.port) = parse_endpoint(listen);
    so.snapshotRate = rate;
    TcpServer tcp(host, seat, so);
    tcp.start();
    std::cout << "listening on " << so.host << ':' << tcp.port() << std::endl;

    std::optional<HttpBridge> bridge;
    if (!http.empty()) {
        ServerOptions hs = so;
        std::tie(hs.host, hs.port) = parse_endpoint(http);
        bridge.emplace(host, seat, hs);
        bridge->start();
        std::cout << "browser framing on " << hs.host << ':' << bridge->port() << std::endl;
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::jthread engine([&host](std::stop_token st) { host.run(st); });
    const auto started = std::chrono::steady_clock::now();
    while (!g_interrupted) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        if (duration > 0 && std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() >= duration) break;
    }
    if (bridge) bridge->stop();
    tcp.stop();
    engine.request_stop();
    engine.join();
    std::cout << "archived " << host.archived().size() << " sessions\n";
    return 0;
}

int cmd_validate(const fs::path& dir) {
    int bad = 0;
    auto report = [&bad](const char* file, const auto& parsed) {
        for (const auto& w : parsed.warnings) std::cout << file << ": warning: " << w << '\n';
        for (const auto& v : parsed.violations) {
            std::cout << file << ": violation: " << v << '\n';
            ++bad;
        }
    };
    report("environment.json", parse_environment(read_file(dir / "environment.json")));
    report("locomotion.json", parse_locomotion(read_file(dir / "locomotion.json")));
    report("scenario.json", parse_scenario(read_file(dir / "scenario.json")));
    const auto settings = load_settings_dir(dir);
    for (const auto& v : validate_settings(settings.environment, settings.locomotion, settings.scenario)) {
        std::cout << "settings: violation: " << v << '\n';
        ++bad;
    }
    std::cout << (bad ? "invalid" : "ok") << '\n';
    return bad ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"navloop: headless goal-directed navigation experiments"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "run simulated participants through a scenario");
    fs::path simScenario, simAgents, simOut;
    std::uint64_t simSeed = 1;
    bool simSerial = false;
    sim->add_option("--scenario", simScenario, "scenario.json or a settings directory")->required()->check(CLI::ExistingPath);
    sim->add_option("--agents", simAgents, "agent configuration JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", simOut, "output root")->required();
    sim->add_option("--seed", simSeed, "cohort seed");
    sim->add_flag("--serial", simSerial, "run sessions one after another");

    auto* ana = app.add_subcommand("analyze", "aggregate session logs into tables and time courses");
    fs::path anaIn, anaOut;
    std::string grid = "0:30:0.1";
    double minDuration = 0.5;
    ana->add_option("--in", anaIn, "root holding session directories")->required()->check(CLI::ExistingDirectory);
    ana->add_option("--out", anaOut, "output directory")->required();
    ana->add_option("--grid", grid, "time grid start:stop:step");
    ana->add_option("--min-trial-duration", minDuration, "shorter trials count as accidental ends");

    auto* srv = app.add_subcommand("serve", "run the engine behind the operator protocol");
    fs::path srvSettings, srvOut;
    std::string listen, autopilot, http, srvAgents, boardMode = "Fake";
    double rate = 10.0, duration = 0.0;
    srv->add_option("--settings-dir", srvSettings, "directory with the settings files")->required()->check(CLI::ExistingDirectory);
    srv->add_option("--listen", listen, "TCP endpoint host:port")->required();
    srv->add_option("--out", srvOut, "where finished sessions are archived")->required();
    srv->add_option("--autopilot", autopilot, "autopilot plan JSON")->check(CLI::ExistingFile);
    srv->add_option("--http", http, "also serve the browser framing on host:port");
    srv->add_option("--agents", srvAgents, "agent configuration for the simulated participant")->check(CLI::ExistingFile);
    srv->add_option("--leaderboard", boardMode, "Real, Fake or Practice");
    srv->add_option("--snapshot-rate", rate, "snapshots per second")->check(CLI::PositiveNumber);
    srv->add_option("--duration", duration, "stop after this many seconds (0 = until interrupted)");

    auto* val = app.add_subcommand("validate", "check a settings directory");
    fs::path valDir;
    val->add_option("dir", valDir, "settings directory")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return cmd_simulate(simScenario, simAgents, simOut, simSeed, simSerial);
        if (*ana) return cmd_analyze(anaIn, anaOut, grid, minDuration);
        if (*srv) return cmd_serve(srvSettings, listen, srvOut, autopilot, http, srvAgents, boardMode, rate, duration);
        if (*val) return cmd_validate(valDir);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what();
        if (e.line()) std::cerr << " (line " << e.line() << ", column " << e.column() << ')';
        std::cerr << '\n';
        return 2;
    } catch (const SettingsError& e) {
        std::cerr << "error: " << e.what() << '\n';
        for (const auto& v : e.report()) std::cerr << "  " << v << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
