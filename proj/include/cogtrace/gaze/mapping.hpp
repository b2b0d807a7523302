#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cogtrace/code_model/corpus.hpp"
#include "cogtrace/code_model/geometry.hpp"
#include "cogtrace/gaze/fixation.hpp"
#include "cogtrace/recorder/session.hpp"

namespace cogtrace::gaze {

// What the editor showed: a file (empty = no code on screen) and its layout.
struct EditorView {
    std::string file;
    code::EditorGeometry geometry;

    bool operator==(const EditorView&) const = default;
};

// Views over time on the receiver clock; each entry holds from `start` until
// the next entry's start.
struct ViewChange {
    double start = 0.0;
    EditorView view;

    bool operator==(const ViewChange&) const = default;
};

class ViewTimeline {
public:
    ViewTimeline() = default;
    explicit ViewTimeline(std::vector<ViewChange> changes);  // sorts by start

    // View active at t, or nullptr before the first change.
    const EditorView* at(double t) const;
    const std::vector<ViewChange>& changes() const noexcept { return changes_; }

private:
    std::vector<ViewChange> changes_;
};

// Samples of one stream attached to a hit: indices [first, last).
struct PhysioWindow {
    std::string source_id;
    net::Modality modality = net::Modality::EDA;
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t size() const noexcept { return last - first; }
    bool operator==(const PhysioWindow&) const = default;
};

struct SymbolHit {
    Fixation fixation;
    std::optional<std::string> symbol_id;
    std::string file;
    std::optional<code::Cell> cell;
    std::vector<PhysioWindow> windows;

    bool operator==(const SymbolHit&) const = default;
};

// Centroid -> cell -> smallest span of `granularity`. Fixations that land
// outside the viewport, past the end of the file, or on no span of the
// requested kind are kept with an empty symbol_id.
SymbolHit map_fixation(const Fixation& fixation, const EditorView& view,
                       const code::SourceCorpus& corpus, code::SymbolKind granularity);

// Maps each fixation with the view active at its start.
std::vector<SymbolHit> map_fixations(std::span<const Fixation> fixations, const ViewTimeline& views,
                                     const code::SourceCorpus& corpus, code::SymbolKind granularity);

// symbol_id -> summed fixation duration in seconds.
std::map<std::string, double> accumulate_dwell(std::span<const SymbolHit> hits);

struct AttachParams {
    double lead_s = 0.0;
    double lag_s = 1.0;
    std::vector<net::Modality> modalities{net::Modality::Gaze, net::Modality::EEG, net::Modality::EDA,
                                          net::Modality::PPG, net::Modality::Temperature};
};

struct AttachResult {
    std::vector<SymbolHit> hits;
    std::vector<std::string> warnings;
};

// For every hit and every stream of a requested modality, the samples with
// timestamp in [start - lead, end + lag]. Requested modalities that carry
// no samples (markers) are ignored with a warning. Timestamps must already
// be on the receiver clock.
AttachResult attach_physio_windows(std::vector<SymbolHit> hits, const rec::SessionData& recording,
                                   const AttachParams& params = {});

}  // namespace cogtrace::gaze
