#include "navloop/persistence.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace navloop {

using ojson = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// JSON helpers

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

ojson parse_json(std::string_view text, const std::string& what) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return ojson::object();
    try {
        return ojson::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError(what + ": malformed JSON at line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ": " + e.what(),
                         line, col);
    }
}

// Reads one JSON object key by key, recording absent keys (defaulted) and
// unknown keys as warnings.
class ObjectReader {
public:
    ObjectReader(const ojson& obj, std::string path, std::vector<std::string>& warnings)
        : obj_(obj), path_(std::move(path)), warnings_(warnings) {
        if (!obj_.is_object()) throw ParseError(path_ + ": expected an object");
    }

    const ojson* find(const char* key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) {
            warnings_.push_back(path_ + "." + key + " absent, using default");
            return nullptr;
        }
        return &*it;
    }

    template <typename T>
    void get(const char* key, T& out) {
        if (const ojson* v = find(key)) out = as<T>(*v, path_ + "." + key);
    }

    std::string child(const char* key) const { return path_ + "." + key; }
    std::vector<std::string>& warnings() { return warnings_; }

    void finish() {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) warnings_.push_back(path_ + "." + it.key() + " is not a recognized key");
        }
    }

    template <typename T>
    static T as(const ojson& v, const std::string& where) {
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ParseError(where + ": expected a number");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ParseError(where + ": expected true/false");
            }
            return v.get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
    }

private:
    const ojson& obj_;
    std::string path_;
    std::vector<std::string>& warnings_;
    std::set<std::string> seen_;
};

ojson to_json(const Vec3& v) { return ojson{{"x", v.x}, {"y", v.y}, {"z", v.z}}; }

Vec3 vec3_from(const ojson& j, const std::string& path, std::vector<std::string>& w) {
    Vec3 v;
    ObjectReader r(j, path, w);
    r.get("x", v.x);
    r.get("y", v.y);
    r.get("z", v.z);
    r.finish();
    return v;
}

ojson to_json(const Pose& p) { return ojson{{"position", to_json(p.position)}, {"yaw", p.yaw}, {"pitch", p.pitch}}; }

Pose pose_from(const ojson& j, const std::string& path, std::vector<std::string>& w) {
    Pose p;
    ObjectReader r(j, path, w);
    if (const auto* pos = r.find("position")) p.position = vec3_from(*pos, r.child("position"), w);
    r.get("yaw", p.yaw);
    r.get("pitch", p.pitch);
    r.finish();
    if (!std::isfinite(p.yaw)) throw ParseError(path + ".yaw: must be finite");
    return Pose::make(p.position, p.yaw, p.pitch);
}

ojson to_json(const ScoreConstants& c) {
    return ojson{{"alpha1", c.alpha1}, {"alpha2", c.alpha2},           {"beta1", c.beta1},
                 {"beta2", c.beta2},   {"scaleFactor", c.scaleFactor}, {"floorAtZero", c.floorAtZero}};
}

ScoreConstants score_from(const ojson& j, const std::string& path, std::vector<std::string>& w) {
    ScoreConstants c;
    ObjectReader r(j, path, w);
    r.get("alpha1", c.alpha1);
    r.get("alpha2", c.alpha2);
    r.get("beta1", c.beta1);
    r.get("beta2", c.beta2);
    r.get("scaleFactor", c.scaleFactor);
    r.get("floorAtZero", c.floorAtZero);
    r.finish();
    return c;
}

ojson to_json(const FireflyParams& f) {
    return ojson{{"radius", f.radius}, {"minHeight", f.minHeight}, {"maxHeight", f.maxHeight}, {"stepSize", f.stepSize}};
}

FireflyParams firefly_from(const ojson& j, const std::string& path, std::vector<std::string>& w) {
    FireflyParams f;
    ObjectReader r(j, path, w);
    r.get("radius", f.radius);
    r.get("minHeight", f.minHeight);
    r.get("maxHeight", f.maxHeight);
    r.get("stepSize", f.stepSize);
    r.finish();
    return f;
}

template <typename T, typename Fn>
std::vector<T> array_from(const ojson& j, const std::string& path, Fn&& each) {
    if (!j.is_array()) throw ParseError(path + ": expected an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(each(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<bool> bools_from(const ojson& j, const std::string& path) {
    return array_from<bool>(j, path, [](const ojson& v, const std::string& p) { return ObjectReader::as<bool>(v, p); });
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// CSV helpers

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto line : split(text, '\n')) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
    }
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

double to_double(std::string_view s, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(where + ": '" + std::string(s) + "' is not a number");
    return v;
}

long long to_integer(std::string_view s, const std::string& where) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(where + ": '" + std::string(s) + "' is not an integer");
    return v;
}

bool to_flag(std::string_view s, const std::string& where) {
    if (s == "1") return true;
    if (s == "0") return false;
    throw ParseError(where + ": expected 0 or 1");
}

void check_header(const std::vector<std::string_view>& lines, std::string_view header, const std::string& what) {
    if (lines.empty() || lines.front() != header) throw ParseError(what + ": missing or unexpected header", 1, 1);
}

std::string row_where(const std::string& what, std::size_t row) { return what + " line " + std::to_string(row + 1); }

// Notes text is free-form; escape the separators used by notes.txt.
std::string escape_note(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

std::string unescape_note(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out += s[i];
            continue;
        }
        switch (s[++i]) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            default: out += s[i];
        }
    }
    return out;
}

ojson answers_json(const std::vector<SurveyAnswer>& answers) {
    ojson arr = ojson::array();
    for (const auto& a : answers) {
        if (const auto* i = std::get_if<int>(&a)) arr.push_back(*i);
        else arr.push_back(std::get<std::string>(a));
    }
    return arr;
}

std::vector<SurveyAnswer> answers_from(const ojson& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected an array");
    std::vector<SurveyAnswer> out;
    for (const auto& v : j) {
        if (v.is_number_integer()) out.emplace_back(v.get<int>());
        else if (v.is_string()) out.emplace_back(v.get<std::string>());
        else throw ParseError(where + ": answers must be integers or strings");
    }
    return out;
}

template <typename Fn>
auto as_artifact(const std::string& artifact, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ParseError& e) {
        throw ArchiveError(artifact, e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ArchiveError(artifact, e.what());
    }
}

std::string read_artifact(const std::filesystem::path& file, const std::string& artifact) {
    if (!std::filesystem::is_regular_file(file)) throw ArchiveError(artifact, "missing file " + file.string());
    return read_file(file);
}

}  // namespace

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& file, std::string_view content) {
    if (file.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(file.parent_path(), ec);
    }
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + file.string());
}

// ---------------------------------------------------------------------------
// Settings

Parsed<EnvironmentSettings> parse_environment(std::string_view text) {
    Parsed<EnvironmentSettings> out;
    const ojson j = parse_json(text, "environment settings");
    auto& e = out.value;
    ObjectReader r(j, "environment", out.warnings);
    r.get("roomWidth", e.roomWidth);
    r.get("roomDepth", e.roomDepth);
    r.get("wallHeight", e.wallHeight);
    if (const auto* v = r.find("wallsPresentPerBlock")) e.wallsPresentPerBlock = bools_from(*v, r.child("wallsPresentPerBlock"));
    if (const auto* v = r.find("floorExtendsToHorizon")) e.floorExtendsToHorizon = bools_from(*v, r.child("floorExtendsToHorizon"));
    r.get("lightsOn", e.lightsOn);
    r.get("soundOn", e.soundOn);
    if (const auto* v = r.find("surveyLinks")) {
        e.surveyLinks = array_from<std::string>(*v, r.child("surveyLinks"), [](const ojson& s, const std::string& p) {
            if (!s.is_string()) throw ParseError(p + ": expected a string");
            return s.get<std::string>();
        });
    }
    r.get("safeAreaWidth", e.safeAreaWidth);
    r.get("safeAreaDepth", e.safeAreaDepth);
    r.get("barrierMargin", e.barrierMargin);
    if (const auto* v = r.find("collisionRegions")) {
        e.collisionRegions = array_from<CollisionDisc>(*v, r.child("collisionRegions"), [&](const ojson& c, const std::string& p) {
            CollisionDisc d;
            ObjectReader cr(c, p, out.warnings);
            if (const auto* center = cr.find("center")) d.center = vec3_from(*center, cr.child("center"), out.warnings);
            cr.get("radius", d.radius);
            cr.finish();
            return d;
        });
    }
    r.finish();
    out.violations = validate_environment(e);
    return out;
}

Parsed<LocomotionSettings> parse_locomotion(std::string_view text) {
    Parsed<LocomotionSettings> out;
    const ojson j = parse_json(text, "locomotion settings");
    auto& l = out.value;
    ObjectReader r(j, "locomotion", out.warnings);
    if (const auto* v = r.find("method")) {
        if (!v->is_string()) throw ParseError("locomotion.method: expected a string");
        auto m = locomotion_method_from_string(v->get<std::string>());
        if (!m) throw ParseError("locomotion.method: unknown method '" + v->get<std::string>() + "'");
        l.method = *m;
    }
    r.get("linearVelocity", l.linearVelocity);
    r.get("rotationSpeed", l.rotationSpeed);
    r.get("bobHeightThreshold", l.bobHeightThreshold);
    r.get("pitchRejectThreshold", l.pitchRejectThreshold);
    r.get("armSwingThreshold", l.armSwingThreshold);
    r.get("armSwingGain", l.armSwingGain);
    r.get("requireBothControllers", l.requireBothControllers);
    r.get("teleportMaxRange", l.teleportMaxRange);
    r.get("stepHoldTime", l.stepHoldTime);
    r.finish();
    out.violations = validate_locomotion(l);
    return out;
}

Parsed<ScenarioSettings> parse_scenario(std::string_view text) {
    Parsed<ScenarioSettings> out;
    const ojson j = parse_json(text, "scenario settings");
    auto& s = out.value;
    ObjectReader r(j, "scenario", out.warnings);
    if (const auto* v = r.find("trialsPerBlock")) {
        s.trialsPerBlock = array_from<int>(*v, r.child("trialsPerBlock"), [](const ojson& n, const std::string& p) {
            if (!n.is_number_integer()) throw ParseError(p + ": expected an integer");
            return n.get<int>();
        });
    }
    r.get("maxTrialDuration", s.maxTrialDuration);
    if (const auto* v = r.find("startPose")) s.startPose = pose_from(*v, r.child("startPose"), out.warnings);
    if (const auto* v = r.find("goalPosition")) s.goalPosition = vec3_from(*v, r.child("goalPosition"), out.warnings);
    if (const auto* v = r.find("score")) s.score = score_from(*v, r.child("score"), out.warnings);
    if (const auto* v = r.find("fireflyPerBlock")) {
        s.fireflyPerBlock = array_from<FireflyParams>(*v, r.child("fireflyPerBlock"), [&](const ojson& f, const std::string& p) {
            return firefly_from(f, p, out.warnings);
        });
    }
    r.get("feedbackDisplayDuration", s.feedbackDisplayDuration);
    if (const auto* v = r.find("rngSeed")) {
        if (!v->is_number_unsigned()) throw ParseError("scenario.rngSeed: expected a non-negative integer");
        s.rngSeed = v->get<std::uint64_t>();
    }
    r.finish();
    out.violations = validate_scenario(s);
    return out;
}

Parsed<AnySettings> parse_settings(std::string_view text, SettingsKind kind) {
    auto wrap = [](auto parsed) {
        return Parsed<AnySettings>{AnySettings{std::move(parsed.value)}, std::move(parsed.warnings),
                                   std::move(parsed.violations)};
    };
    switch (kind) {
        case SettingsKind::Environment: return wrap(parse_environment(text));
        case SettingsKind::Locomotion: return wrap(parse_locomotion(text));
        case SettingsKind::Scenario: return wrap(parse_scenario(text));
    }
    throw std::invalid_argument("parse_settings: unknown kind");
}

std::string serialize(const EnvironmentSettings& e) {
    ojson discs = ojson::array();
    for (const auto& d : e.collisionRegions) discs.push_back(ojson{{"center", to_json(d.center)}, {"radius", d.radius}});
    ojson j{{"roomWidth", e.roomWidth},
            {"roomDepth", e.roomDepth},
            {"wallHeight", e.wallHeight},
            {"wallsPresentPerBlock", e.wallsPresentPerBlock},
            {"floorExtendsToHorizon", e.floorExtendsToHorizon},
            {"lightsOn", e.lightsOn},
            {"soundOn", e.soundOn},
            {"surveyLinks", e.surveyLinks},
            {"safeAreaWidth", e.safeAreaWidth},
            {"safeAreaDepth", e.safeAreaDepth},
            {"barrierMargin", e.barrierMargin},
            {"collisionRegions", discs}};
    return dump(j);
}

std::string serialize(const LocomotionSettings& l) {
    ojson j{{"method", std::string(to_string(l.method))},
            {"linearVelocity", l.linearVelocity},
            {"rotationSpeed", l.rotationSpeed},
            {"bobHeightThreshold", l.bobHeightThreshold},
            {"pitchRejectThreshold", l.pitchRejectThreshold},
            {"armSwingThreshold", l.armSwingThreshold},
            {"armSwingGain", l.armSwingGain},
            {"requireBothControllers", l.requireBothControllers},
            {"teleportMaxRange", l.teleportMaxRange},
            {"stepHoldTime", l.stepHoldTime}};
    return dump(j);
}

std::string serialize(const ScenarioSettings& s) {
    ojson flies = ojson::array();
    for (const auto& f : s.fireflyPerBlock) flies.push_back(to_json(f));
    ojson j{{"trialsPerBlock", s.trialsPerBlock},
            {"maxTrialDuration", s.maxTrialDuration},
            {"startPose", to_json(s.startPose)},
            {"goalPosition", to_json(s.goalPosition)},
            {"score", to_json(s.score)},
            {"fireflyPerBlock", flies},
            {"feedbackDisplayDuration", s.feedbackDisplayDuration},
            {"rngSeed", s.rngSeed}};
    return dump(j);
}

std::vector<SurveyDefinition> parse_survey_definitions(std::string_view text) {
    const ojson j = parse_json(text, "survey definitions");
    if (!j.is_array()) throw ParseError("survey definitions: expected an array");
    std::vector<SurveyDefinition> defs;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string where = "surveys[" + std::to_string(i) + "]";
        const auto& d = j[i];
        try {
            SurveyDefinition def;
            def.id = d.at("id").get<std::string>();
            def.title = d.value("title", def.id);
            auto timing = survey_timing_from_string(d.value("administerAt", std::string("PostBlock")));
            if (!timing) throw ParseError(where + ".administerAt: unknown timing");
            def.administerAt = *timing;
            for (const auto& item : d.at("items")) {
                SurveyItem it;
                it.prompt = item.at("prompt").get<std::string>();
                if (item.contains("scale")) {
                    const auto& sc = item.at("scale");
                    ScaleSpec spec{sc.at("min").get<int>(), sc.at("max").get<int>(),
                                   sc.value("labels", std::vector<std::string>{})};
                    if (spec.min >= spec.max) throw ParseError(where + ": scale min must be < max");
                    it.format = spec;
                } else {
                    it.format = FreeText{};
                }
                def.items.push_back(std::move(it));
            }
            if (def.items.empty()) throw ParseError(where + ": a survey needs at least one item");
            defs.push_back(std::move(def));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    return defs;
}

std::string serialize_survey_definitions(const std::vector<SurveyDefinition>& defs) {
    ojson arr = ojson::array();
    for (const auto& d : defs) {
        ojson items = ojson::array();
        for (const auto& it : d.items) {
            ojson item{{"prompt", it.prompt}};
            if (const auto* s = std::get_if<ScaleSpec>(&it.format))
                item["scale"] = ojson{{"min", s->min}, {"max", s->max}, {"labels", s->labels}};
            items.push_back(item);
        }
        arr.push_back(ojson{{"id", d.id},
                            {"title", d.title},
                            {"administerAt", std::string(to_string(d.administerAt))},
                            {"items", items}});
    }
    return dump(arr);
}

SessionSettings load_settings_dir(const std::filesystem::path& dir) {
    SessionSettings s;
    s.environment = as_artifact("environment settings", [&] {
        return parse_environment(read_artifact(dir / "environment.json", "environment settings")).value;
    });
    s.locomotion = as_artifact("locomotion settings", [&] {
        return parse_locomotion(read_artifact(dir / "locomotion.json", "locomotion settings")).value;
    });
    s.scenario = as_artifact("scenario settings", [&] {
        return parse_scenario(read_artifact(dir / "scenario.json", "scenario settings")).value;
    });
    if (std::filesystem::is_regular_file(dir / "surveys.json")) {
        s.surveys = as_artifact("survey definitions", [&] { return parse_survey_definitions(read_file(dir / "surveys.json")); });
    }
    return s;
}

void save_settings_dir(const SessionSettings& settings, const std::filesystem::path& dir) {
    write_file(dir / "environment.json", serialize(settings.environment));
    write_file(dir / "locomotion.json", serialize(settings.locomotion));
    write_file(dir / "scenario.json", serialize(settings.scenario));
    write_file(dir / "surveys.json", serialize_survey_definitions(settings.surveys));
}

// ---------------------------------------------------------------------------
// Logs

std::string format_fixed6(double v) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf, static_cast<std::size_t>(n));
    if (s == "-0.000000") s = "0.000000";
    return s;
}

std::string render_movement_log(const std::vector<FrameLogEntry>& frames) {
    std::string out(kMovementLogHeader);
    out += '\n';
    for (const auto& f : frames) {
        out += format_fixed6(f.t) + ',' + format_fixed6(f.x) + ',' + format_fixed6(f.z) + ',' + format_fixed6(f.yaw) +
               ',' + (f.lightsOn ? '1' : '0') + ',' + (f.soundOn ? '1' : '0') + '\n';
    }
    return out;
}

std::vector<FrameLogEntry> parse_movement_log(std::string_view text) {
    const auto lines = lines_of(text);
    check_header(lines, kMovementLogHeader, "movement log");
    std::vector<FrameLogEntry> frames;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto where = row_where("movement log", i);
        const auto cols = split(lines[i], ',');
        if (cols.size() != 6) throw ParseError(where + ": expected 6 columns", i + 1, 1);
        frames.push_back(FrameLogEntry{to_double(cols[0], where), to_double(cols[1], where), to_double(cols[2], where),
                                       to_double(cols[3], where), to_flag(cols[4], where), to_flag(cols[5], where)});
    }
    return frames;
}

std::string render_trial_results(const std::vector<TrialRecord>& records) {
    std::string out(kTrialResultsHeader);
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.blockIndex) + ',' + std::to_string(r.trialIndex) + ',' + format_fixed6(r.startTime) + ',' +
               format_fixed6(r.endTime) + ',' + format_fixed6(r.elapsed) + ',' + format_fixed6(r.residual) + ',' +
               format_fixed6(r.pathLength) + ',' + format_fixed6(r.timeComponent) + ',' +
               format_fixed6(r.distanceComponent) + ',' + format_fixed6(r.rawReward) + ',' +
               std::to_string(r.displayedScore) + ',' + std::string(to_string(r.endReason)) + ',' +
               (r.practice ? '1' : '0') + '\n';
    }
    return out;
}

std::vector<TrialRecord> parse_trial_results(std::string_view text) {
    const auto lines = lines_of(text);
    check_header(lines, kTrialResultsHeader, "trial results");
    std::vector<TrialRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto where = row_where("trial results", i);
        const auto c = split(lines[i], ',');
        if (c.size() != 13) throw ParseError(where + ": expected 13 columns", i + 1, 1);
        TrialRecord r;
        r.blockIndex = static_cast<int>(to_integer(c[0], where));
        r.trialIndex = static_cast<int>(to_integer(c[1], where));
        r.startTime = to_double(c[2], where);
        r.endTime = to_double(c[3], where);
        r.elapsed = to_double(c[4], where);
        r.residual = to_double(c[5], where);
        r.pathLength = to_double(c[6], where);
        r.timeComponent = to_double(c[7], where);
        r.distanceComponent = to_double(c[8], where);
        r.rawReward = to_double(c[9], where);
        r.displayedScore = to_integer(c[10], where);
        auto reason = end_reason_from_string(c[11]);
        if (!reason) throw ParseError(where + ": unknown end reason '" + std::string(c[11]) + "'", i + 1, 1);
        r.endReason = *reason;
        r.practice = to_flag(c[12], where);
        out.push_back(std::move(r));
    }
    return out;
}

std::filesystem::path movement_log_name(int trialNumber) {
    return "trial_" + std::to_string(trialNumber) + ".csv";
}

std::filesystem::path write_movement_log(const TrialRecord& trial, int trialNumber, const std::filesystem::path& dir) {
    const auto file = dir / movement_log_name(trialNumber);
    try {
        write_file(file, render_movement_log(trial.frames));
    } catch (const std::runtime_error& e) {
        throw ArchiveError("movement log", e.what());
    }
    return file;
}

std::filesystem::path write_trial_results(const std::vector<TrialRecord>& records, const std::filesystem::path& file) {
    try {
        write_file(file, render_trial_results(records));
    } catch (const std::runtime_error& e) {
        throw ArchiveError("results", e.what());
    }
    return file;
}

// ---------------------------------------------------------------------------
// Session archive

SessionArchive make_archive(const Session& session) {
    SessionArchive a;
    a.environment = session.settings().environment;
    a.locomotion = session.settings().locomotion;
    a.scenario = session.settings().scenario;
    a.metadata.sessionId = session.session_id();
    a.metadata.participant = session.state().participant;
    a.metadata.badSession = session.state().badSession;
    a.metadata.finalPhase = std::string(to_string(session.phase()));
    if (session.leaderboard()) a.metadata.leaderboardMode = session.leaderboard()->mode();
    a.metadata.notes = session.state().notes;
    a.trials = session.records();
    a.surveys = session.responses();
    return a;
}

std::string render_session_metadata(const SessionMetadata& m) {
    ojson notes = ojson::array();
    for (const auto& n : m.notes) notes.push_back(ojson{{"time", format_fixed6(n.time)}, {"text", n.text}});
    ojson j{{"sessionId", m.sessionId},
            {"participant",
             ojson{{"id", m.participant.id},
                   {"age", m.participant.age},
                   {"gender", m.participant.gender},
                   {"qualification", m.participant.qualification},
                   {"group", m.participant.group}}},
            {"badSession", m.badSession},
            {"finalPhase", m.finalPhase},
            {"leaderboardMode", m.leaderboardMode ? ojson(std::string(to_string(*m.leaderboardMode))) : ojson(nullptr)},
            {"notes", notes}};
    return dump(j);
}

SessionMetadata parse_session_metadata(std::string_view text) {
    const ojson j = parse_json(text, "session metadata");
    try {
        SessionMetadata m;
        m.sessionId = j.at("sessionId").get<std::string>();
        const auto& p = j.at("participant");
        m.participant.id = p.at("id").get<std::string>();
        m.participant.age = p.at("age").get<int>();
        m.participant.gender = p.at("gender").get<std::string>();
        m.participant.qualification = p.at("qualification").get<std::string>();
        m.participant.group = p.at("group").get<std::string>();
        m.badSession = j.at("badSession").get<bool>();
        m.finalPhase = j.at("finalPhase").get<std::string>();
        if (!j.at("leaderboardMode").is_null()) {
            auto mode = leaderboard_mode_from_string(j.at("leaderboardMode").get<std::string>());
            if (!mode) throw ParseError("session metadata: unknown leaderboard mode");
            m.leaderboardMode = mode;
        }
        for (const auto& n : j.at("notes")) {
            m.notes.push_back(Note{to_double(n.at("time").get<std::string>(), "session metadata note"),
                                   n.at("text").get<std::string>()});
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("session metadata: ") + e.what());
    }
}

std::string render_notes(const std::vector<Note>& notes) {
    std::string out;
    for (const auto& n : notes) out += format_fixed6(n.time) + '\t' + escape_note(n.text) + '\n';
    return out;
}

std::vector<Note> parse_notes(std::string_view text) {
    std::vector<Note> out;
    const auto lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto tab = lines[i].find('\t');
        if (tab == std::string_view::npos) throw ParseError("notes line " + std::to_string(i + 1) + ": missing tab", i + 1, 1);
        out.push_back(Note{to_double(lines[i].substr(0, tab), "notes line " + std::to_string(i + 1)),
                           unescape_note(lines[i].substr(tab + 1))});
    }
    return out;
}

std::string render_survey_responses(const std::vector<SurveyResponse>& responses) {
    ojson arr = ojson::array();
    for (const auto& r : responses) {
        arr.push_back(ojson{{"surveyId", r.surveyId},
                            {"participantId", r.participantId},
                            {"boundary", std::string(to_string(r.boundary))},
                            {"blockIndex", r.blockIndex},
                            {"answers", answers_json(r.answers)},
                            {"timestamp", format_fixed6(r.timestamp)}});
    }
    return dump(arr);
}

std::vector<SurveyResponse> parse_survey_responses(std::string_view text) {
    const ojson j = parse_json(text, "survey responses");
    if (!j.is_array()) throw ParseError("survey responses: expected an array");
    std::vector<SurveyResponse> out;
    try {
        for (const auto& r : j) {
            SurveyResponse s;
            s.surveyId = r.at("surveyId").get<std::string>();
            s.participantId = r.at("participantId").get<std::string>();
            auto b = survey_timing_from_string(r.at("boundary").get<std::string>());
            if (!b) throw ParseError("survey responses: unknown boundary");
            s.boundary = *b;
            s.blockIndex = r.at("blockIndex").get<int>();
            s.answers = answers_from(r.at("answers"), "survey responses");
            s.timestamp = to_double(r.at("timestamp").get<std::string>(), "survey responses");
            out.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("survey responses: ") + e.what());
    }
    return out;
}

std::filesystem::path session_directory(const std::filesystem::path& root, const SessionMetadata& meta) {
    return root / meta.participant.id / meta.sessionId;
}

std::filesystem::path write_session_archive(const SessionArchive& a, const std::filesystem::path& root) {
    const auto dir = session_directory(root, a.metadata);
    try {
        std::filesystem::create_directories(dir / "settings");
        std::filesystem::create_directories(dir / "trials");
    } catch (const std::filesystem::filesystem_error& e) {
        throw ArchiveError("session directory", e.what());
    }
    auto put = [&](const std::filesystem::path& file, std::string_view content, const char* artifact) {
        try {
            write_file(file, content);
        } catch (const std::runtime_error& e) {
            throw ArchiveError(artifact, e.what());
        }
    };
    put(dir / "settings" / "environment.json", serialize(a.environment), "environment settings");
    put(dir / "settings" / "locomotion.json", serialize(a.locomotion), "locomotion settings");
    put(dir / "settings" / "scenario.json", serialize(a.scenario), "scenario settings");
    for (std::size_t i = 0; i < a.trials.size(); ++i)
        write_movement_log(a.trials[i], static_cast<int>(i) + 1, dir / "trials");
    write_trial_results(a.trials, dir / "results.csv");
    put(dir / "session.json", render_session_metadata(a.metadata), "session");
    put(dir / "notes.txt", render_notes(a.metadata.notes), "notes");
    put(dir / "surveys.json", render_survey_responses(a.surveys), "surveys");
    return dir;
}

SessionArchive read_session_archive(const std::filesystem::path& dir) {
    SessionArchive a;
    a.environment = as_artifact("environment settings", [&] {
        return parse_environment(read_artifact(dir / "settings" / "environment.json", "environment settings")).value;
    });
    a.locomotion = as_artifact("locomotion settings", [&] {
        return parse_locomotion(read_artifact(dir / "settings" / "locomotion.json", "locomotion settings")).value;
    });
    a.scenario = as_artifact("scenario settings", [&] {
        return parse_scenario(read_artifact(dir / "settings" / "scenario.json", "scenario settings")).value;
    });
    a.metadata = as_artifact("session", [&] { return parse_session_metadata(read_artifact(dir / "session.json", "session")); });
    const auto notes = as_artifact("notes", [&] { return parse_notes(read_artifact(dir / "notes.txt", "notes")); });
    if (notes.size() != a.metadata.notes.size()) throw ArchiveError("notes", "notes.txt disagrees with session.json");
    for (std::size_t i = 0; i < notes.size(); ++i) {
        if (notes[i].text != a.metadata.notes[i].text || format_fixed6(notes[i].time) != format_fixed6(a.metadata.notes[i].time))
            throw ArchiveError("notes", "notes.txt disagrees with session.json");
    }
    a.trials = as_artifact("results", [&] { return parse_trial_results(read_artifact(dir / "results.csv", "results")); });
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        const auto file = dir / "trials" / movement_log_name(static_cast<int>(i) + 1);
        a.trials[i].frames = as_artifact("movement log " + file.filename().string(),
                                         [&] { return parse_movement_log(read_artifact(file, "movement log")); });
    }
    if (std::filesystem::is_regular_file(dir / "trials" / movement_log_name(static_cast<int>(a.trials.size()) + 1)))
        throw ArchiveError("movement log", "more movement logs than trial results");
    a.surveys = as_artifact("surveys", [&] { return parse_survey_responses(read_artifact(dir / "surveys.json", "surveys")); });
    return a;
}

std::vector<std::filesystem::path> find_session_directories(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> out;
    if (!std::filesystem::is_directory(root)) return out;
    if (std::filesystem::is_regular_file(root / "session.json")) out.push_back(root);
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (entry.is_directory() && std::filesystem::is_regular_file(entry.path() / "session.json")) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Leaderboard

std::string render_leaderboard(const std::vector<LeaderboardEntry>& entries) {
    ojson arr = ojson::array();
    for (const auto& e : entries)
        arr.push_back(ojson{{"participantId", e.participantId}, {"score", e.score}, {"timestamp", e.timestamp}});
    return dump(ojson{{"entries", arr}});
}

std::vector<LeaderboardEntry> parse_leaderboard(std::string_view text) {
    const ojson j = parse_json(text, "leaderboard");
    std::vector<LeaderboardEntry> out;
    try {
        if (!j.contains("entries")) return out;
        for (const auto& e : j.at("entries")) {
            out.push_back(LeaderboardEntry{e.at("participantId").get<std::string>(), e.at("score").get<long long>(),
                                           e.value("timestamp", 0.0)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("leaderboard: ") + e.what());
    }
    return out;
}

Leaderboard load_leaderboard(const std::filesystem::path& file, LeaderboardMode mode) {
    if (!std::filesystem::exists(file)) return Leaderboard({}, mode);
    return Leaderboard(parse_leaderboard(read_file(file)), mode);
}

bool save_leaderboard(const Leaderboard& board, const std::filesystem::path& file) {
    auto entries = board.entries_to_persist();
    if (!entries) return false;
    write_file(file, render_leaderboard(*entries));
    return true;
}

AutopilotPlan parse_autopilot_plan(std::string_view text) {
    ojson j;
    try {
        j = ojson::parse(text.begin(), text.end());
    } catch (const ojson::parse_error& e) {
        throw ParseError(std::string("autopilot: ") + e.what());
    }
    AutopilotPlan plan;
    try {
        for (const auto& e : j.at("entries")) {
            const auto methodText = e.at("method").get<std::string>();
            auto method = locomotion_method_from_string(methodText);
            if (!method) throw ParseError("autopilot: unknown locomotion method '" + methodText + "'");
            plan.entries.push_back({e.at("environment").get<std::string>(), *method});
        }
    } catch (const ojson::exception& e) {
        throw ParseError(std::string("autopilot: ") + e.what());
    }
    return plan;
}

std::string serialize(const AutopilotPlan& plan) {
    ojson entries = ojson::array();
    for (const auto& e : plan.entries)
        entries.push_back(ojson{{"environment", e.environmentRef}, {"method", std::string(to_string(e.method))}});
    return ojson{{"entries", entries}}.dump(2) + "\n";
}

}  // namespace navloop
