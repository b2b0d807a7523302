#include "cogtrace/gaze/fixation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cogtrace/common/error.hpp"
#include "cogtrace/stream_net/simulator.hpp"

namespace cogtrace::gaze {

void FixationParams::validate() const {
    if (!(dispersion_px > 0.0) || !(min_duration_s > 0.0) || !(max_gap_s > 0.0))
        throw ConfigError("fixation parameters must be strictly positive");
}

double dispersion(std::span<const GazePoint> w) {
    if (w.empty()) return 0.0;
    double min_x = w[0].x, max_x = w[0].x, min_y = w[0].y, max_y = w[0].y;
    for (const auto& p : w) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    return (max_x - min_x) + (max_y - min_y);
}

std::vector<GazePoint> gaze_points(std::span<const net::Sample> samples) {
    std::vector<GazePoint> out;
    out.reserve(samples.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& s : samples) {
        if (s.values.size() <= net::kGazePupilRight) {
            out.push_back({s.timestamp, nan, nan});
            continue;
        }
        const bool lost = s.values[net::kGazePupilLeft] <= 0.0f && s.values[net::kGazePupilRight] <= 0.0f;
        if (lost)
            out.push_back({s.timestamp, nan, nan});
        else
            out.push_back({s.timestamp, s.values[net::kGazeX], s.values[net::kGazeY]});
    }
    return out;
}

namespace {

bool usable(const GazePoint& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

Fixation make_fixation(std::span<const GazePoint> pts, std::size_t i, std::size_t j) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t k = i; k <= j; ++k) {
        sx += pts[k].x;
        sy += pts[k].y;
    }
    const auto n = static_cast<double>(j - i + 1);
    return {pts[i].t, pts[j].t - pts[i].t, sx / n, sy / n, j - i + 1, i, j};
}

// I-DT on one contiguous run [begin, end) of usable samples.
void detect_in_run(std::span<const GazePoint> pts, std::size_t begin, std::size_t end,
                   const FixationParams& p, std::vector<Fixation>& out) {
    std::size_t i = begin;
    while (i < end) {
        std::size_t j = i;
        while (j < end && pts[j].t - pts[i].t < p.min_duration_s) ++j;
        if (j >= end) return;
        double min_x = pts[i].x, max_x = pts[i].x, min_y = pts[i].y, max_y = pts[i].y;
        for (std::size_t k = i + 1; k <= j; ++k) {
            min_x = std::min(min_x, pts[k].x);
            max_x = std::max(max_x, pts[k].x);
            min_y = std::min(min_y, pts[k].y);
            max_y = std::max(max_y, pts[k].y);
        }
        if ((max_x - min_x) + (max_y - min_y) > p.dispersion_px) {
            ++i;
            continue;
        }
        while (j + 1 < end) {
            const auto& q = pts[j + 1];
            const double nx0 = std::min(min_x, q.x), nx1 = std::max(max_x, q.x);
            const double ny0 = std::min(min_y, q.y), ny1 = std::max(max_y, q.y);
            if ((nx1 - nx0) + (ny1 - ny0) > p.dispersion_px) break;
            min_x = nx0;
            max_x = nx1;
            min_y = ny0;
            max_y = ny1;
            ++j;
        }
        out.push_back(make_fixation(pts, i, j));
        i = j + 1;
    }
}

}  // namespace

std::vector<Fixation> detect_fixations(std::span<const GazePoint> pts, const FixationParams& params) {
    params.validate();
    for (std::size_t k = 1; k < pts.size(); ++k)
        if (pts[k].t < pts[k - 1].t) throw Error("gaze samples are not time-ordered");

    std::vector<Fixation> out;
    std::size_t k = 0;
    while (k < pts.size()) {
        if (!usable(pts[k])) {
            ++k;
            continue;
        }
        std::size_t end = k + 1;
        while (end < pts.size() && usable(pts[end]) && pts[end].t - pts[end - 1].t <= params.max_gap_s)
            ++end;
        detect_in_run(pts, k, end, params, out);
        k = end;
    }
    return out;
}

}  // namespace cogtrace::gaze
