#include "cogtrace/service/analysis.hpp"

#include <fstream>

#include "cogtrace/common/error.hpp"
#include "cogtrace/common/text.hpp"

namespace cogtrace::service {

using nlohmann::json;

namespace {

double num(const json& j, const char* key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
    return it->get<double>();
}

const json& section(const json& j, const char* key) {
    static const json empty = json::object();
    auto it = j.find(key);
    if (it == j.end()) return empty;
    if (!it->is_object()) throw ConfigError(std::string("\"") + key + "\" must be an object");
    return *it;
}

}  // namespace

json to_json(const code::EditorGeometry& g) {
    return {{"origin_x", g.origin_x},
            {"origin_y", g.origin_y},
            {"cell_width", g.cell_width},
            {"cell_height", g.cell_height},
            {"first_visible_line", g.first_visible_line},
            {"horizontal_scroll", g.horizontal_scroll},
            {"viewport_width", g.viewport_width},
            {"viewport_height", g.viewport_height}};
}

code::EditorGeometry geometry_from_json(const json& j, code::EditorGeometry g) {
    if (!j.is_object()) throw ConfigError("geometry must be an object");
    g.origin_x = num(j, "origin_x", g.origin_x);
    g.origin_y = num(j, "origin_y", g.origin_y);
    g.cell_width = num(j, "cell_width", g.cell_width);
    g.cell_height = num(j, "cell_height", g.cell_height);
    g.first_visible_line = static_cast<int>(num(j, "first_visible_line", g.first_visible_line));
    g.horizontal_scroll = static_cast<int>(num(j, "horizontal_scroll", g.horizontal_scroll));
    g.viewport_width = num(j, "viewport_width", g.viewport_width);
    g.viewport_height = num(j, "viewport_height", g.viewport_height);
    g.validate();
    return g;
}

json to_json(const AnalysisSettings& s) {
    json palette = json::array();
    for (const auto& a : s.highlight.palette.anchors) palette.push_back({a[0], a[1], a[2]});
    return {{"granularity", code::to_string(s.granularity)},
            {"fixation",
             {{"dispersion_px", s.fixation.dispersion_px},
              {"min_duration_s", s.fixation.min_duration_s},
              {"max_gap_s", s.fixation.max_gap_s}}},
            {"physio",
             {{"lead_s", s.attach.lead_s},
              {"lag_s", s.attach.lag_s},
              {"scr_min_amplitude", s.metrics.scr.min_amplitude},
              {"scr_lowpass_hz", s.metrics.scr.lowpass_hz},
              {"welch_segment_s", s.metrics.welch.segment_s},
              {"welch_overlap", s.metrics.welch.overlap},
              {"epoch_s", s.metrics.epoch_s},
              {"epoch_hop_s", s.metrics.epoch_hop_s},
              {"heart_max_cv", s.metrics.heart.max_cv}}},
            {"highlight",
             {{"script", s.script},
              {"normalization", s.highlight.normalization == highlight::Normalization::File ? "file" : "session"},
              {"max_alpha", s.highlight.palette.max_alpha},
              {"palette", palette}}}};
}

AnalysisSettings analysis_settings_from_json(const json& j, AnalysisSettings s) {
    if (!j.is_object()) throw ConfigError("analysis settings must be an object");
    if (auto it = j.find("granularity"); it != j.end()) {
        auto k = it->is_string() ? code::parse_symbol_kind(it->get<std::string>()) : std::nullopt;
        if (!k) throw ConfigError("granularity must be one of class, method, field, identifier, line");
        s.granularity = *k;
    }
    const auto& f = section(j, "fixation");
    s.fixation.dispersion_px = num(f, "dispersion_px", s.fixation.dispersion_px);
    s.fixation.min_duration_s = num(f, "min_duration_s", s.fixation.min_duration_s);
    s.fixation.max_gap_s = num(f, "max_gap_s", s.fixation.max_gap_s);
    s.fixation.validate();

    const auto& p = section(j, "physio");
    s.attach.lead_s = num(p, "lead_s", s.attach.lead_s);
    s.attach.lag_s = num(p, "lag_s", s.attach.lag_s);
    s.metrics.scr.min_amplitude = num(p, "scr_min_amplitude", s.metrics.scr.min_amplitude);
    s.metrics.scr.lowpass_hz = num(p, "scr_lowpass_hz", s.metrics.scr.lowpass_hz);
    s.metrics.welch.segment_s = num(p, "welch_segment_s", s.metrics.welch.segment_s);
    s.metrics.welch.overlap = num(p, "welch_overlap", s.metrics.welch.overlap);
    s.metrics.epoch_s = num(p, "epoch_s", s.metrics.epoch_s);
    s.metrics.epoch_hop_s = num(p, "epoch_hop_s", s.metrics.epoch_hop_s);
    s.metrics.heart.max_cv = num(p, "heart_max_cv", s.metrics.heart.max_cv);
    if (!(s.attach.lead_s >= 0.0) || !(s.attach.lag_s >= 0.0)) throw ConfigError("lead_s and lag_s must be >= 0");
    if (!(s.metrics.scr.min_amplitude > 0.0)) throw ConfigError("scr_min_amplitude must be positive");
    if (!(s.metrics.welch.segment_s > 0.0) || !(s.metrics.welch.overlap >= 0.0 && s.metrics.welch.overlap < 1.0))
        throw ConfigError("welch_segment_s must be positive and welch_overlap in [0, 1)");
    if (!(s.metrics.epoch_s > 0.0) || !(s.metrics.epoch_hop_s > 0.0))
        throw ConfigError("epoch_s and epoch_hop_s must be positive");

    const auto& h = section(j, "highlight");
    if (auto it = h.find("script"); it != h.end()) {
        if (!it->is_string()) throw ConfigError("highlight script must be a string");
        s.script = it->get<std::string>();
    }
    if (auto it = h.find("normalization"); it != h.end()) {
        const auto v = it->is_string() ? it->get<std::string>() : "";
        if (v == "session")
            s.highlight.normalization = highlight::Normalization::Session;
        else if (v == "file")
            s.highlight.normalization = highlight::Normalization::File;
        else
            throw ConfigError("normalization must be \"session\" or \"file\"");
    }
    const double alpha = num(h, "max_alpha", s.highlight.palette.max_alpha);
    if (!(alpha >= 0.0 && alpha <= 255.0)) throw ConfigError("max_alpha must lie in 0..255");
    s.highlight.palette.max_alpha = static_cast<std::uint8_t>(alpha);
    if (auto it = h.find("palette"); it != h.end()) {
        if (!it->is_array() || it->empty()) throw ConfigError("palette must be a non-empty array of [r,g,b]");
        s.highlight.palette.anchors.clear();
        for (const auto& c : *it) {
            if (!c.is_array() || c.size() != 3) throw ConfigError("palette colors must be [r,g,b]");
            highlight::Rgb rgb{};
            for (std::size_t i = 0; i < 3; ++i) {
                if (!c[i].is_number_integer() || c[i].get<int>() < 0 || c[i].get<int>() > 255)
                    throw ConfigError("palette channels must be integers 0..255");
                rgb[i] = static_cast<std::uint8_t>(c[i].get<int>());
            }
            s.highlight.palette.anchors.push_back(rgb);
        }
    }
    // Fail early on a broken script rather than at the first heatmap request.
    (void)highlight::parse_script(s.script);
    return s;
}

AnalysisResult analyze(const rec::SessionData& recording, const code::SourceCorpus& corpus,
                       const gaze::ViewTimeline& views, const AnalysisSettings& settings) {
    AnalysisResult r;
    const rec::StreamRecord* gaze_stream = nullptr;
    for (const auto& s : recording.streams)
        if (s.info.modality == net::Modality::Gaze) {
            gaze_stream = &s;
            break;
        }
    if (gaze_stream == nullptr) {
        r.warnings.push_back("no gaze stream recorded");
        return r;
    }
    const auto points = gaze::gaze_points(gaze_stream->samples);
    r.fixations = gaze::detect_fixations(points, settings.fixation);
    auto hits = gaze::map_fixations(r.fixations, views, corpus, settings.granularity);
    auto attached = gaze::attach_physio_windows(std::move(hits), recording, settings.attach);
    r.hits = std::move(attached.hits);
    r.warnings = std::move(attached.warnings);
    const auto baseline = physio::find_baseline(recording.events);
    if (!baseline) r.warnings.push_back("no baseline segment in the marker log; pupil dilation omitted");
    r.table = physio::build_metric_table(r.hits, recording, baseline, settings.metrics);
    return r;
}

highlight::HighlightMap score(const physio::MetricTable& table, const std::string& script,
                              const highlight::EvaluateOptions& options) {
    const auto compiled = highlight::parse_script(script);
    if (table.rows.empty()) return {};
    return highlight::evaluate(compiled, table, options);
}

void write_context(const std::filesystem::path& dir, const SessionContext& ctx) {
    json views = json::array();
    for (const auto& v : ctx.views)
        views.push_back({{"start", v.start}, {"file", v.view.file}, {"geometry", to_json(v.view.geometry)}});
    json j{{"format", "cogtrace-session-context"},
           {"version", 1},
           {"analysis", to_json(ctx.settings)},
           {"views", views},
           {"workflow", ctx.workflow}};
    text::write_file((dir / kContextFile).string(), j.dump(2) + "\n");
}

SessionContext read_context(const std::filesystem::path& dir) {
    SessionContext ctx;
    const auto path = dir / kContextFile;
    if (!std::filesystem::exists(path)) return ctx;
    json j;
    try {
        j = json::parse(text::read_file(path.string()));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (auto it = j.find("analysis"); it != j.end()) ctx.settings = analysis_settings_from_json(*it);
    if (auto it = j.find("views"); it != j.end() && it->is_array()) {
        for (const auto& v : *it) {
            gaze::ViewChange c;
            c.start = v.at("start").get<double>();
            c.view.file = v.at("file").get<std::string>();
            c.view.geometry = geometry_from_json(v.at("geometry"));
            ctx.views.push_back(std::move(c));
        }
    }
    if (auto it = j.find("workflow"); it != j.end()) ctx.workflow = *it;
    return ctx;
}

void copy_corpus(const code::SourceCorpus& corpus, const std::filesystem::path& dir) {
    const auto root = dir / kCorpusDir;
    std::filesystem::create_directories(root);
    for (const auto& f : corpus.files()) {
        const auto path = root / f.path;
        std::filesystem::create_directories(path.parent_path());
        text::write_file(path.string(), f.text);
    }
}

namespace {

struct Loaded {
    rec::SessionData data;
    SessionContext ctx;
    code::SourceCorpus corpus;
};

Loaded load_dir(const std::filesystem::path& dir) {
    Loaded l;
    l.data = rec::load_session(dir);
    l.ctx = read_context(dir);
    if (std::filesystem::is_directory(dir / kCorpusDir)) l.corpus = code::SourceCorpus::load_directory(dir / kCorpusDir);
    return l;
}

}  // namespace

physio::MetricTable analyze_directory(const std::filesystem::path& dir) {
    const auto l = load_dir(dir);
    return analyze(l.data, l.corpus, gaze::ViewTimeline(l.ctx.views), l.ctx.settings).table;
}

highlight::HeatmapExport heatmap_directory(const std::filesystem::path& dir, const std::string* script_override) {
    const auto l = load_dir(dir);
    const auto result = analyze(l.data, l.corpus, gaze::ViewTimeline(l.ctx.views), l.ctx.settings);
    const auto map = score(result.table, script_override ? *script_override : l.ctx.settings.script,
                           l.ctx.settings.highlight);
    return highlight::render_heatmap(map, l.corpus, l.ctx.settings.granularity);
}

}  // namespace cogtrace::service
