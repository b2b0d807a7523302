#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogtrace/code_model/corpus.hpp"
#include "cogtrace/gaze/fixation.hpp"
#include "cogtrace/gaze/mapping.hpp"
#include "cogtrace/highlight/heatmap.hpp"
#include "cogtrace/physio/metrics.hpp"
#include "cogtrace/recorder/session.hpp"

namespace cogtrace::service {

struct AnalysisSettings {
    code::SymbolKind granularity = code::SymbolKind::Line;
    gaze::FixationParams fixation;
    gaze::AttachParams attach;
    physio::MetricParams metrics;
    std::string script{highlight::kDefaultScript};
    highlight::EvaluateOptions highlight;
};

nlohmann::json to_json(const AnalysisSettings& s);
// Missing keys keep their defaults; throws ConfigError on bad values.
AnalysisSettings analysis_settings_from_json(const nlohmann::json& j, AnalysisSettings defaults = {});

nlohmann::json to_json(const code::EditorGeometry& g);
code::EditorGeometry geometry_from_json(const nlohmann::json& j, code::EditorGeometry defaults = {});

struct AnalysisResult {
    std::vector<gaze::Fixation> fixations;
    std::vector<gaze::SymbolHit> hits;
    physio::MetricTable table;
    std::vector<std::string> warnings;
};

// Gaze (first gaze stream) -> fixations -> symbols -> windows -> metrics.
// `recording` must be on the receiver clock.
AnalysisResult analyze(const rec::SessionData& recording, const code::SourceCorpus& corpus,
                       const gaze::ViewTimeline& views, const AnalysisSettings& settings);

// Evaluates the script over the table; an empty table yields an empty map.
highlight::HighlightMap score(const physio::MetricTable& table, const std::string& script,
                              const highlight::EvaluateOptions& options);

// Everything a finalized session directory needs for offline replay, stored
// as session.json next to the recorder files; the corpus is copied to
// corpus/.
struct SessionContext {
    AnalysisSettings settings;
    std::vector<gaze::ViewChange> views;
    nlohmann::json workflow;  // plan, final state and marker log, informational
};

inline constexpr const char* kContextFile = "session.json";
inline constexpr const char* kCorpusDir = "corpus";
inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kOverlayFile = "overlay.csv";
inline constexpr const char* kHtmlFile = "heatmap.html";

void write_context(const std::filesystem::path& dir, const SessionContext& context);
SessionContext read_context(const std::filesystem::path& dir);
void copy_corpus(const code::SourceCorpus& corpus, const std::filesystem::path& dir);

// Pure functions of a finalized directory.
physio::MetricTable analyze_directory(const std::filesystem::path& dir);
highlight::HeatmapExport heatmap_directory(const std::filesystem::path& dir, const std::string* script_override);

}  // namespace cogtrace::service
