#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "../support/paths.hpp"
#include "cogtrace/physio/metrics.hpp"

namespace fs = std::filesystem;

namespace {

const auto kStudy = testpaths::kFixtures / "study";

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(COGTRACE_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p);
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Events with everything compressed further, optionally aborting early.
fs::path fast_events(const fs::path& dir, const char* abort_after = nullptr) {
    std::ifstream in(kStudy / "events.json");
    auto j = nlohmann::json::parse(in);
    j["time_scale"] = 0.01;
    if (abort_after) j["abort_after"] = abort_after;
    const auto p = dir / "events.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

}  // namespace

TEST_CASE("validate accepts the fixture study") {
    CHECK(cli("validate --config " + q(kStudy / "session.json")).code == 0);
    CHECK(cli("validate --events " + q(kStudy / "events.json")).code == 0);
    CHECK(cli("validate --workflow " + q(kStudy / "workflow.json") + " --corpus " + q(testpaths::kFixtures / "corpus")).code == 0);
}

TEST_CASE("validate rejects a broken config with diagnostics") {
    const auto dir = testpaths::scratch("cli-bad");
    std::ifstream in(kStudy / "session.json");
    auto j = nlohmann::json::parse(in);
    j["workflow"] = (kStudy / "workflow.json").string();
    j["corpus_dir"] = (dir / "missing-corpus").string();
    std::ofstream(dir / "session.json") << j.dump();
    const auto r = cli("validate --config " + q(dir / "session.json"));
    CHECK(r.code == 2);
    CHECK(r.out.find("missing-corpus") != std::string::npos);
    CHECK(cli("validate").code != 0);
    CHECK(cli("frobnicate").code != 0);
}

TEST_CASE("record, analyze and heatmap") {
    const auto dir = testpaths::scratch("cli-record");
    const auto session = dir / "s";
    const auto r = cli("record --config " + q(kStudy / "session.json") + " --events " + q(fast_events(dir)) +
                       " --out " + q(session));
    REQUIRE_MESSAGE(r.code == 0, r.out);
    CHECK(fs::exists(session / "manifest.toml"));

    const auto a = cli("analyze " + q(session));
    CHECK(a.code == 0);
    CHECK(a.out == slurp(session / "metrics.csv"));
    CHECK_FALSE(cogtrace::physio::parse_metric_csv(a.out).rows.empty());

    const auto out1 = dir / "h1", out2 = dir / "h2";
    CHECK(cli("heatmap " + q(session) + " --out " + q(out1)).code == 0);
    CHECK(cli("heatmap " + q(session) + " --out " + q(out2)).code == 0);
    CHECK(slurp(out1 / "overlay.csv") == slurp(out2 / "overlay.csv"));
    CHECK(slurp(out1 / "heatmap.html") == slurp(out2 / "heatmap.html"));
    CHECK(slurp(out1 / "overlay.csv") == slurp(session / "overlay.csv"));

    const auto bad = cli("heatmap " + q(session) + " --script 'norm(' --out " + q(dir / "h3"));
    CHECK(bad.code != 0);
    CHECK(bad.out.find("1:6") != std::string::npos);

    CHECK(cli("record --config " + q(kStudy / "session.json") + " --events " + q(fast_events(dir)) + " --out " +
              q(session))
              .code != 0);  // never overwrites
}

TEST_CASE("an aborted session without gaze analyzes to a header-only table") {
    const auto dir = testpaths::scratch("cli-empty");
    const auto r = cli("record --config " + q(kStudy / "session.json") + " --events " + q(fast_events(dir, "pre")) +
                       " --out " + q(dir / "s"));
    CHECK(r.code == 3);
    const auto a = cli("analyze " + q(dir / "s"));
    CHECK(a.code == 0);
    CHECK(a.out == cogtrace::physio::render_metric_csv({}));
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 1);
}
