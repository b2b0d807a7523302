#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "../support/paths.hpp"
#include "cogtrace/service/config.hpp"
#include "cogtrace/service/record.hpp"

using namespace cogtrace;
using namespace cogtrace::service;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const auto kStudy = testpaths::kFixtures / "study";

json session_json() {
    std::ifstream in(kStudy / "session.json");
    return json::parse(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Short run of the fixture: everything compressed 100x.
RecordResult short_record(const fs::path& out) {
    auto config = load_session_config(kStudy / "session.json");
    auto events = load_scripted_events(kStudy / "events.json");
    events.time_scale = 0.01;
    return record_session(config, events, {std::nullopt, out});
}

}  // namespace

TEST_CASE("fixture config loads and resolves paths") {
    const auto c = load_session_config(kStudy / "session.json");
    CHECK(c.participant_id == "P01");
    CHECK(c.seed == 7);
    CHECK(fs::exists(c.workflow_path));
    CHECK(fs::is_directory(c.corpus_dir));
    CHECK(c.analysis.granularity == code::SymbolKind::Line);
    CHECK(c.clocks.size() == 5);
    CHECK(c.effective_session_id().find("P01") != std::string::npos);
    CHECK(simulated_devices(c).size() == 5);
}

TEST_CASE("config errors name every bad path") {
    auto j = session_json();
    j["corpus_dir"] = "../no-such-corpus";
    j["workflow"] = "missing.json";
    j["time_scale"] = -1;
    try {
        parse_session_config(j, kStudy);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        std::string all;
        for (const auto& d : e.diagnostics()) all += d + "\n";
        CHECK(all.find("no-such-corpus") != std::string::npos);
        CHECK(all.find("missing.json") != std::string::npos);
        CHECK(e.diagnostics().size() >= 3);
    }
    CHECK_THROWS_AS(load_session_config(kStudy / "nope.json"), Error);
}

TEST_CASE("environment overrides") {
    auto c = load_session_config(kStudy / "session.json");
    ::setenv("COGTRACE_HTTP_PORT", "9123", 1);
    ::setenv("COGTRACE_DISCOVERY_PORT", "17001", 1);
    const auto o = with_env_overrides(c);
    CHECK(o.http_port == 9123);
    CHECK(o.network.discovery_port == 17001);
    ::setenv("COGTRACE_HTTP_PORT", "http", 1);
    CHECK_THROWS_AS(with_env_overrides(c), ConfigError);
    ::unsetenv("COGTRACE_HTTP_PORT");
    ::unsetenv("COGTRACE_DISCOVERY_PORT");
    CHECK(with_env_overrides(c).http_port == c.http_port);
}

TEST_CASE("analysis settings and geometry JSON roundtrip") {
    AnalysisSettings s;
    s.granularity = code::SymbolKind::Method;
    s.fixation.dispersion_px = 35;
    s.attach.lag_s = 2.5;
    s.metrics.scr.min_amplitude = 0.02;
    s.script = "norm(scr_count)";
    s.highlight.normalization = highlight::Normalization::File;
    const auto back = analysis_settings_from_json(to_json(s));
    CHECK(to_json(back) == to_json(s));
    CHECK(back.granularity == code::SymbolKind::Method);
    CHECK(back.attach.lag_s == 2.5);

    code::EditorGeometry g;
    g.first_visible_line = 12;
    g.cell_width = 7.5;
    CHECK(geometry_from_json(to_json(g)) == g);
    CHECK(analysis_settings_from_json(json::object()).script == highlight::kDefaultScript);
    CHECK_THROWS_AS(analysis_settings_from_json({{"granularity", "paragraph"}}), ConfigError);
}

TEST_CASE("scripted events parse") {
    const auto e = load_scripted_events(kStudy / "events.json");
    CHECK(e.time_scale == 0.1);
    CHECK(e.answers_by_questionnaire.count("nasa_tlx") == 1);
    CHECK(e.steps.at("coding").gaze.size() >= 1);
    CHECK_THROWS(parse_scripted_events({{"steps", {{"coding", {{"gaze", {{{"line", "x"}}}}}}}}}));
}

TEST_CASE("headless record: finished run, offline analysis equals the live table") {
    const auto dir = testpaths::scratch("svc-record") / "s";
    const auto r = short_record(dir);
    CHECK(r.state.phase == workflow::RunPhase::Finished);
    CHECK(r.plan.size() == 13);
    CHECK_FALSE(r.table.rows.empty());
    CHECK(r.table == r.live_table);
    CHECK(analyze_directory(dir) == r.table);
    for (const char* f : {kContextFile, kMetricsFile, kOverlayFile, kHtmlFile, "manifest.toml", "events.csv", "responses.csv"})
        CHECK_MESSAGE(fs::exists(dir / f), f);
    CHECK(fs::is_directory(dir / kCorpusDir));
    CHECK(rec::load_manifest(dir) == r.manifest);

    // Heatmap exports are pure functions of the directory.
    const auto a = heatmap_directory(dir, nullptr);
    const auto b = heatmap_directory(dir, nullptr);
    CHECK(a.overlay_csv == b.overlay_csv);
    CHECK(a.html == b.html);
    CHECK(a.overlay_csv == slurp(dir / kOverlayFile));
    const std::string s = "norm(scr_count + 1)";
    CHECK(heatmap_directory(dir, &s).overlay_csv.find(highlight::kOverlayHeader) == 0);

    const auto ctx = read_context(dir);
    CHECK_FALSE(ctx.views.empty());
    CHECK(ctx.workflow.contains("marker_log"));
    CHECK_THROWS_AS(short_record(dir), Error);  // never overwrites
}

TEST_CASE("aborted scripted run") {
    auto config = load_session_config(kStudy / "session.json");
    auto events = load_scripted_events(kStudy / "events.json");
    events.time_scale = 0.01;
    events.abort_after = "baseline_start";
    const auto r = record_session(config, events, {std::nullopt, testpaths::scratch("svc-abort") / "s"});
    CHECK(r.state.phase == workflow::RunPhase::Aborted);
    CHECK(r.state.status[2] == workflow::StepStatus::Done);
    CHECK(r.state.status[3] == workflow::StepStatus::Pending);
}

TEST_CASE("score on an empty table is empty") {
    CHECK(score({}, std::string(highlight::kDefaultScript), {}).entries.empty());
}
