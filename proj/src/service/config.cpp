#include "cogtrace/service/config.hpp"

#include <cstdlib>

#include "cogtrace/common/error.hpp"
#include "cogtrace/common/text.hpp"

namespace cogtrace::service {

using nlohmann::json;

std::string SessionConfig::effective_session_id() const {
    return session_id.empty() ? participant_id + "-s" + std::to_string(seed) : session_id;
}

SessionConfig parse_session_config(const json& j, const std::filesystem::path& base) {
    std::vector<std::string> diags;
    SessionConfig c;
    if (!j.is_object()) throw ValidationError({"config: document must be a JSON object"});

    auto path_field = [&](const char* key, bool must_exist, bool directory) {
        std::filesystem::path p;
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            diags.push_back(std::string("config: missing string \"") + key + "\"");
            return p;
        }
        p = base / it->get<std::string>();
        if (must_exist) {
            const bool ok = directory ? std::filesystem::is_directory(p) : std::filesystem::is_regular_file(p);
            if (!ok) diags.push_back(std::string("config: ") + key + " not found: " + p.string());
        }
        return p;
    };
    c.workflow_path = path_field("workflow", true, false);
    c.corpus_dir = path_field("corpus_dir", true, true);
    c.output_dir = path_field("output_dir", false, true);

    auto guard = [&](const char* what, auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            diags.push_back(std::string("config: ") + what + ": " + e.what());
        } catch (const json::exception& e) {
            diags.push_back(std::string("config: ") + what + ": " + e.what());
        }
    };
    guard("participant_id", [&] {
        if (j.contains("participant_id")) c.participant_id = j.at("participant_id").get<std::string>();
        if (c.participant_id.empty()) throw ConfigError("must not be empty");
    });
    guard("session_id", [&] {
        if (j.contains("session_id")) c.session_id = j.at("session_id").get<std::string>();
    });
    guard("seed", [&] {
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    });
    guard("time_scale", [&] {
        if (j.contains("time_scale")) c.time_scale = j.at("time_scale").get<double>();
        if (!(c.time_scale > 0.0)) throw ConfigError("must be positive");
    });
    guard("geometry", [&] {
        if (j.contains("geometry")) c.geometry = geometry_from_json(j.at("geometry"));
        c.geometry.validate();
    });
    guard("devices", [&] {
        if (!j.contains("devices")) return;
        const auto& d = j.at("devices");
        if (auto it = d.find("clocks"); it != d.end()) {
            for (const auto& [id, clk] : it->items()) {
                net::ClockModel m;
                m.offset_s = clk.value("offset_s", 0.0);
                m.drift_ppm = clk.value("drift_ppm", 0.0);
                c.clocks[id] = m;
            }
        }
    });
    guard("network", [&] {
        if (!j.contains("network")) return;
        const auto& n = j.at("network");
        c.http_port = n.value("http_port", c.http_port);
        c.network.discovery_port = n.value("discovery_port", c.network.discovery_port);
        c.network.discovery_host = n.value("discovery_host", c.network.discovery_host);
        c.network.announce_interval_s = n.value("announce_interval_s", c.network.announce_interval_s);
        if (!(c.network.announce_interval_s > 0.0)) throw ConfigError("announce_interval_s must be positive");
    });
    guard("analysis", [&] { c.analysis = analysis_settings_from_json(j.value("analysis", json::object())); });
    if (!diags.empty()) throw ValidationError(diags);
    return c;
}

SessionConfig load_session_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(text::read_file(path.string()));
    } catch (const json::parse_error& e) {
        throw ValidationError({path.string() + ": " + e.what()});
    } catch (const Error& e) {
        throw ValidationError({e.what()});
    }
    return parse_session_config(j, path.parent_path());
}

SessionConfig with_env_overrides(SessionConfig c) {
    c.network = c.network.with_env_overrides();
    if (const char* v = std::getenv("COGTRACE_HTTP_PORT")) {
        try {
            const long port = std::stol(v);
            if (port < 0 || port > 65535) throw std::out_of_range("port");
            c.http_port = static_cast<std::uint16_t>(port);
        } catch (const std::exception&) {
            throw ConfigError(std::string("COGTRACE_HTTP_PORT is not a port number: ") + v);
        }
    }
    return c;
}

std::vector<net::DeviceProfile> simulated_devices(const SessionConfig& config) {
    auto devices = net::default_device_set(config.seed);
    for (auto& d : devices)
        if (auto it = config.clocks.find(d.info.source_id); it != config.clocks.end()) d.clock = it->second;
    return devices;
}

}  // namespace cogtrace::service
