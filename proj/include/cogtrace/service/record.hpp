#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogtrace/physio/metrics.hpp"
#include "cogtrace/recorder/session.hpp"
#include "cogtrace/service/config.hpp"
#include "cogtrace/workflow/workflow.hpp"

namespace cogtrace::service {

// A dwell on one editor cell during a task, in seconds of gaze time.
struct ScriptedDwell {
    int line = 0;
    int column = 0;
    double duration_s = 1.0;
};

struct ScriptedStep {
    std::optional<double> duration_s;  // before time scaling
    nlohmann::json answers;             // questionnaires
    std::optional<std::string> file;    // tasks: file shown instead of the first corpus file
    std::optional<int> first_visible_line;
    std::vector<ScriptedDwell> gaze;  // tasks: played in order, repeated until the step ends
};

// What a participant does, keyed by planned step id so that the script is
// independent of the randomized task order.
struct ScriptedEvents {
    std::optional<double> time_scale;
    double questionnaire_s = 30.0;
    double task_s = 180.0;
    std::map<std::string, nlohmann::json> answers_by_questionnaire;
    std::map<std::string, ScriptedStep> steps;
    std::optional<std::string> abort_after;  // planned step id; abort once it is active
};

ScriptedEvents parse_scripted_events(const nlohmann::json& j);
ScriptedEvents load_scripted_events(const std::filesystem::path& path);

struct RecordOptions {
    std::optional<std::uint64_t> seed;           // overrides the config
    std::optional<std::filesystem::path> output;  // session directory; default output_dir/<session id>
    double chunk_period_s = 0.1;                  // virtual receiver time per ingestion round
};

struct RecordResult {
    std::filesystem::path directory;
    rec::SessionManifest manifest;
    workflow::WorkflowState state;
    std::vector<workflow::PlannedStep> plan;
    physio::MetricTable live_table;  // computed from the in-memory recording
    physio::MetricTable table;       // recomputed from the finalized directory
    std::vector<std::string> warnings;
};

// Runs the whole workflow on a virtual clock: simulated devices stream
// through the frame codec, clock probes run every 5 s, scripted participant
// actions drive the state machine, and the finalized directory is analyzed.
// Identical inputs give byte-identical directories.
RecordResult record_session(const SessionConfig& config, const ScriptedEvents& events, const RecordOptions& options = {});

// Marker stream that carries workflow markers: code = 2 * plan index + 1 on
// step start, + 2 on step stop.
inline constexpr const char* kWorkflowMarkerSource = "cogtrace-workflow";

}  // namespace cogtrace::service
