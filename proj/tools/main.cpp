// cogtrace command line: simulate, serve, record, analyze, heatmap, validate.
#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ranges.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <thread>

#include "cogtrace/common/error.hpp"
#include "cogtrace/common/text.hpp"
#include "cogtrace/physio/metrics.hpp"
#include "cogtrace/service/analysis.hpp"
#include "cogtrace/service/config.hpp"
#include "cogtrace/service/record.hpp"
#include "cogtrace/service/server.hpp"
#include "cogtrace/stream_net/transport.hpp"
#include "cogtrace/workflow/workflow.hpp"

namespace fs = std::filesystem;
using namespace cogtrace;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void sleep_until_interrupted(double limit_s) {
    const auto start = std::chrono::steady_clock::now();
    while (!g_interrupted) {
        if (limit_s > 0 && std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= limit_s)
            return;
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
}

service::SessionConfig load_config(const std::string& path, std::optional<std::uint64_t> seed,
                                   std::optional<int> port) {
    auto config = service::with_env_overrides(service::load_session_config(path));
    if (seed) config.seed = *seed;
    if (port) {
        if (*port < 0 || *port > 65535) throw ConfigError("port out of range: " + std::to_string(*port));
        config.http_port = static_cast<std::uint16_t>(*port);
    }
    return config;
}

std::vector<std::unique_ptr<net::LiveDevice>> launch_devices(const std::vector<net::DeviceProfile>& profiles,
                                                             const net::NetworkConfig& network) {
    std::vector<std::unique_ptr<net::LiveDevice>> devices;
    for (const auto& p : profiles) {
        devices.push_back(std::make_unique<net::LiveDevice>(p, network));
        devices.back()->start();
        const auto& ep = devices.back()->endpoint();
        fmt::print("{} ({}, {} Hz) data {}:{} probe {}\n", ep.info.source_id, net::to_string(ep.info.modality),
                   ep.info.nominal_rate, ep.host, ep.data_port, ep.probe_port);
    }
    std::fflush(stdout);
    return devices;
}

int run_simulate(const std::string& config_path, std::uint64_t seed, double duration) {
    std::vector<net::DeviceProfile> profiles;
    net::NetworkConfig network;
    if (!config_path.empty()) {
        auto config = load_config(config_path, seed, std::nullopt);
        profiles = service::simulated_devices(config);
        network = config.network;
    } else {
        profiles = net::default_device_set(seed);
        network = network.with_env_overrides();
    }
    // Live devices stamp samples with their own clock from "now".
    for (auto& p : profiles) p.start_time = p.clock.sender_time(net::local_clock());
    auto devices = launch_devices(profiles, network);
    fmt::print("announcing on {}:{}\n", network.discovery_host, network.discovery_port);
    std::fflush(stdout);
    sleep_until_interrupted(duration);
    for (auto& d : devices) d->stop();
    return 0;
}

int run_serve(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<int> port,
              bool with_simulators) {
    auto config = load_config(config_path, seed, port);
    service::SessionService svc(config);
    svc.start();
    fmt::print("listening on http://{}:{}\n", config.network.bind_host, svc.port());
    std::fflush(stdout);
    std::vector<std::unique_ptr<net::LiveDevice>> devices;
    if (with_simulators) {
        auto profiles = service::simulated_devices(config);
        for (auto& p : profiles) p.start_time = p.clock.sender_time(net::local_clock());
        devices = launch_devices(profiles, config.network);
    }
    sleep_until_interrupted(0);
    for (auto& d : devices) d->stop();
    svc.stop();
    return 0;
}

int run_record(const std::string& config_path, const std::string& events_path, std::optional<std::uint64_t> seed,
               const std::string& out) {
    auto config = load_config(config_path, std::nullopt, std::nullopt);
    const auto events = service::load_scripted_events(events_path);
    service::RecordOptions options;
    options.seed = seed;
    if (!out.empty()) options.output = out;
    const auto result = service::record_session(config, events, options);
    for (const auto& w : result.warnings) fmt::print(stderr, "warning: {}\n", w);
    fmt::print("session {} written to {}\n", result.manifest.identity.session_id, result.directory.string());
    fmt::print("workflow {}, {} steps, {} metric rows\n", workflow::to_string(result.state.phase), result.plan.size(),
               result.table.rows.size());
    return result.state.phase == workflow::RunPhase::Finished ? 0 : 3;
}

int run_analyze(const std::string& dir, const std::string& out) {
    const auto csv = physio::render_metric_csv(service::analyze_directory(dir));
    if (out.empty())
        fmt::print("{}", csv);
    else
        text::write_file(out, csv);
    return 0;
}

int run_heatmap(const std::string& dir, const std::string& script, const std::string& script_file,
                const std::string& out) {
    std::optional<std::string> override_script;
    if (!script.empty()) override_script = script;
    if (!script_file.empty()) override_script = text::read_file(script_file);
    const auto ex = service::heatmap_directory(dir, override_script ? &*override_script : nullptr);
    const fs::path target = out.empty() ? fs::path(dir) : fs::path(out);
    fs::create_directories(target);
    text::write_file((target / service::kOverlayFile).string(), ex.overlay_csv);
    text::write_file((target / service::kHtmlFile).string(), ex.html);
    for (const auto& d : ex.diagnostics) fmt::print(stderr, "diagnostic: {}\n", d);
    fmt::print("wrote {} and {} to {}\n", service::kOverlayFile, service::kHtmlFile, target.string());
    return 0;
}

int run_validate(const std::string& config_path, const std::string& workflow_path, const std::string& corpus,
                 const std::string& events_path) {
    if (config_path.empty() && workflow_path.empty() && events_path.empty())
        throw ConfigError("nothing to validate: pass --config, --workflow or --events");
    if (!config_path.empty()) {
        const auto config = load_config(config_path, std::nullopt, std::nullopt);
        const auto wf = workflow::load_workflow_file(config.workflow_path, config.corpus_dir);
        code::SourceCorpus::load_directory(config.corpus_dir);
        fmt::print("config ok: workflow {} with {} planned steps\n", wf.id, workflow::plan_steps(wf).size());
    }
    if (!workflow_path.empty()) {
        const auto wf = workflow::load_workflow_file(workflow_path, corpus);
        fmt::print("workflow ok: {} with {} planned steps\n", wf.id, workflow::plan_steps(wf).size());
    }
    if (!events_path.empty()) {
        service::load_scripted_events(events_path);
        fmt::print("events ok\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cogtrace: recording and analysis of code reading sessions"};
    app.require_subcommand(1);

    std::string config_path, events_path, out, dir, script, script_file, workflow_path, corpus;
    std::optional<std::uint64_t> seed;
    std::optional<int> port;
    double duration = 0.0;
    bool with_simulators = false;

    auto* simulate = app.add_subcommand("simulate", "Serve the simulated device set on the network");
    simulate->add_option("--config", config_path, "Session config (clock models, network)")->check(CLI::ExistingFile);
    simulate->add_option("--seed", seed, "Simulator seed");
    simulate->add_option("--duration", duration, "Seconds to run; 0 runs until interrupted")->check(CLI::NonNegativeNumber);

    auto* serve = app.add_subcommand("serve", "Run the session service");
    serve->add_option("--config", config_path, "Session config")->required()->check(CLI::ExistingFile);
    serve->add_option("--port", port, "HTTP port, 0 picks a free one");
    serve->add_option("--seed", seed, "Randomization seed");
    serve->add_flag("--simulate", with_simulators, "Also launch the simulated device set");

    auto* record = app.add_subcommand("record", "Run a scripted session headlessly");
    record->add_option("--config", config_path, "Session config")->required()->check(CLI::ExistingFile);
    record->add_option("--events", events_path, "Scripted participant events")->required()->check(CLI::ExistingFile);
    record->add_option("--seed", seed, "Randomization and simulator seed");
    record->add_option("--out", out, "Session directory");

    auto* analyze = app.add_subcommand("analyze", "Write the metric table of a finalized session as CSV");
    analyze->add_option("dir", dir, "Session directory")->required()->check(CLI::ExistingDirectory);
    analyze->add_option("--out", out, "CSV file; stdout if omitted");

    auto* heatmap = app.add_subcommand("heatmap", "Render overlay CSV and HTML for a finalized session");
    heatmap->add_option("dir", dir, "Session directory")->required()->check(CLI::ExistingDirectory);
    heatmap->add_option("--script", script, "Scoring script, overrides the session's");
    heatmap->add_option("--script-file", script_file, "Scoring script file")->check(CLI::ExistingFile);
    heatmap->add_option("--out", out, "Output directory; the session directory if omitted");

    auto* validate = app.add_subcommand("validate", "Check a config, workflow or events file");
    validate->add_option("--config", config_path, "Session config");
    validate->add_option("--workflow", workflow_path, "Workflow file");
    validate->add_option("--corpus", corpus, "Corpus directory for the workflow's task files");
    validate->add_option("--events", events_path, "Scripted events file");

    CLI11_PARSE(app, argc, argv);

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    try {
        if (*simulate) return run_simulate(config_path, seed.value_or(0), duration);
        if (*serve) return run_serve(config_path, seed, port, with_simulators);
        if (*record) return run_record(config_path, events_path, seed, out);
        if (*analyze) return run_analyze(dir, out);
        if (*heatmap) return run_heatmap(dir, script, script_file, out);
        if (*validate) return run_validate(config_path, workflow_path, corpus, events_path);
    } catch (const ValidationError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        for (const auto& d : e.diagnostics()) fmt::print(stderr, "  {}\n", d);
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 1;
}
