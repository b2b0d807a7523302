#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cogtrace/code_model/corpus.hpp"
#include "cogtrace/highlight/script.hpp"
#include "cogtrace/physio/metrics.hpp"

namespace cogtrace::highlight {

struct Rgba {
    std::uint8_t r = 0, g = 0, b = 0, a = 0;

    std::string hex() const;  // "#rrggbbaa"
    bool operator==(const Rgba&) const = default;
};

using Rgb = std::array<std::uint8_t, 3>;

// Colors are interpolated linearly between evenly spaced anchors; alpha
// grows linearly from 0 to max_alpha.
struct Palette {
    std::vector<Rgb> anchors{{255, 255, 0}, {255, 0, 0}};
    std::uint8_t max_alpha = 160;

    void validate() const;  // throws ConfigError
};

// Throws Error for a score outside [0, 1].
Rgba color_for_score(double score, const Palette& palette = {});

struct HighlightEntry {
    double score = 0.0;
    Rgba color;

    bool operator==(const HighlightEntry&) const = default;
};

struct HighlightMap {
    std::map<std::string, HighlightEntry> entries;
    std::vector<std::string> warnings;

    bool operator==(const HighlightMap&) const = default;
};

enum class Normalization { Session, File };

struct EvaluateOptions {
    Normalization normalization = Normalization::Session;
    Palette palette;
};

// File part of a "file:kind:line:col" symbol id.
std::string symbol_file(std::string_view symbol_id);

// Evaluates the script for every row. Absent metrics read as 0 with one
// warning per symbol and variable. norm() maps the minimum to 0 and the
// maximum to 1 across all symbols (or per file), all-equal inputs to 0.5.
// Scores are clamped to [0, 1]. Throws ConfigError for an empty table and
// EvaluationError for division by zero, log of a non-positive value or a
// non-finite result.
HighlightMap evaluate(const ScoreScript& script, const physio::MetricTable& table, const EvaluateOptions& options = {});

struct HeatmapExport {
    std::string overlay_csv;
    std::string html;
    std::vector<std::string> diagnostics;
};

// Overlay rows are ordered by file and span position. Entries whose id is
// not in the corpus, or whose span kind differs from `granularity`, are
// excluded from the overlay and reported in the diagnostics.
HeatmapExport render_heatmap(const HighlightMap& map, const code::SourceCorpus& corpus, code::SymbolKind granularity);

inline constexpr const char* kOverlayHeader = "file,start_line,start_col,end_line,end_col,score,rgba_hex";

}  // namespace cogtrace::highlight
