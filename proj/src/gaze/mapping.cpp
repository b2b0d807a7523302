#include "cogtrace/gaze/mapping.hpp"

#include <algorithm>

#include "cogtrace/common/error.hpp"
#include "cogtrace/kernels/spectral.hpp"

namespace cogtrace::gaze {

ViewTimeline::ViewTimeline(std::vector<ViewChange> changes) : changes_(std::move(changes)) {
    std::stable_sort(changes_.begin(), changes_.end(),
                     [](const ViewChange& a, const ViewChange& b) { return a.start < b.start; });
}

const EditorView* ViewTimeline::at(double t) const {
    auto it = std::upper_bound(changes_.begin(), changes_.end(), t,
                               [](double v, const ViewChange& c) { return v < c.start; });
    if (it == changes_.begin()) return nullptr;
    return &std::prev(it)->view;
}

SymbolHit map_fixation(const Fixation& fixation, const EditorView& view, const code::SourceCorpus& corpus,
                       code::SymbolKind granularity) {
    SymbolHit hit;
    hit.fixation = fixation;
    hit.file = view.file;
    if (view.file.empty() || corpus.find(view.file) == nullptr) return hit;
    hit.cell = code::cell_from_point(view.geometry, fixation.x, fixation.y);
    if (!hit.cell) return hit;
    if (auto span = corpus.locate(view.file, hit.cell->line, hit.cell->column, granularity))
        hit.symbol_id = span->symbol_id;
    return hit;
}

std::vector<SymbolHit> map_fixations(std::span<const Fixation> fixations, const ViewTimeline& views,
                                     const code::SourceCorpus& corpus, code::SymbolKind granularity) {
    std::vector<SymbolHit> hits(fixations.size());
    const auto n = static_cast<std::ptrdiff_t>(fixations.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& f = fixations[static_cast<std::size_t>(i)];
        const EditorView* view = views.at(f.start);
        if (view != nullptr) {
            hits[static_cast<std::size_t>(i)] = map_fixation(f, *view, corpus, granularity);
        } else {
            hits[static_cast<std::size_t>(i)].fixation = f;
        }
    }
    return hits;
}

std::map<std::string, double> accumulate_dwell(std::span<const SymbolHit> hits) {
    std::map<std::string, double> dwell;
    for (const auto& h : hits)
        if (h.symbol_id) dwell[*h.symbol_id] += h.fixation.duration;
    return dwell;
}

AttachResult attach_physio_windows(std::vector<SymbolHit> hits, const rec::SessionData& recording,
                                   const AttachParams& params) {
    if (!(params.lead_s >= 0.0) || !(params.lag_s >= 0.0))
        throw ConfigError("physio window lead and lag must be non-negative");
    AttachResult result;
    std::vector<kernels::Interval> intervals;
    intervals.reserve(hits.size());
    for (const auto& h : hits)
        intervals.emplace_back(h.fixation.start - params.lead_s, h.fixation.end() + params.lag_s);

    for (auto& h : hits) h.windows.clear();

    for (auto modality : params.modalities) {
        if (modality == net::Modality::Marker) {
            result.warnings.push_back("modality marker carries no physiological samples; ignored");
            continue;
        }
        for (const auto& stream : recording.streams) {
            if (stream.info.modality != modality) continue;
            std::vector<double> ts(stream.samples.size());
            for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = stream.samples[i].timestamp;
            const auto ranges = kernels::parallel::sample_ranges(ts, intervals);
            for (std::size_t i = 0; i < hits.size(); ++i)
                hits[i].windows.push_back({stream.info.source_id, modality, ranges[i].first, ranges[i].second});
        }
    }
    result.hits = std::move(hits);
    return result;
}

}  // namespace cogtrace::gaze
