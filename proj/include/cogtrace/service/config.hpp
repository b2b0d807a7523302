#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "cogtrace/code_model/geometry.hpp"
#include "cogtrace/service/analysis.hpp"
#include "cogtrace/stream_net/simulator.hpp"
#include "cogtrace/stream_net/transport.hpp"

namespace cogtrace::service {

struct SessionConfig {
    std::filesystem::path workflow_path;
    std::filesystem::path corpus_dir;
    std::filesystem::path output_dir;
    std::string participant_id = "P00";
    std::string session_id;  // empty: derived from participant and seed
    std::uint64_t seed = 0;
    code::EditorGeometry geometry;
    double time_scale = 1.0;  // step durations are multiplied by this
    std::map<std::string, net::ClockModel> clocks;  // per simulated source id
    net::NetworkConfig network;
    std::uint16_t http_port = 8080;
    AnalysisSettings analysis;

    std::string effective_session_id() const;
};

// Relative paths resolve against the config file's directory. Throws
// ValidationError listing every problem, including referenced paths that
// do not exist.
SessionConfig load_session_config(const std::filesystem::path& path);
SessionConfig parse_session_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

// COGTRACE_HTTP_PORT plus the network overrides.
SessionConfig with_env_overrides(SessionConfig config);

// Default device set with the configured clock models applied.
std::vector<net::DeviceProfile> simulated_devices(const SessionConfig& config);

}  // namespace cogtrace::service
