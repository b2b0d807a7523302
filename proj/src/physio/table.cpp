#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "cogtrace/common/error.hpp"
#include "cogtrace/common/text.hpp"
#include "cogtrace/physio/metrics.hpp"
#include "cogtrace/stream_net/simulator.hpp"

namespace cogtrace::physio {

const MetricRow* MetricTable::find(std::string_view symbol_id) const {
    auto it = std::lower_bound(rows.begin(), rows.end(), symbol_id,
                               [](const MetricRow& r, std::string_view id) { return r.symbol_id < id; });
    return it != rows.end() && it->symbol_id == symbol_id ? &*it : nullptr;
}

std::optional<double> metric_value(const MetricRow& row, std::string_view column) {
    if (column == "gaze_duration_ms") return row.gaze_duration_ms;
    if (column == "scr_count") return row.scr_count ? std::optional<double>(*row.scr_count) : std::nullopt;
    if (column == "scr_mean_rise_s") return row.scr_mean_rise_s;
    if (column == "pupil_dilation_pct") return row.pupil_dilation_pct;
    if (column == "alpha_power") return row.alpha_power;
    if (column == "theta_power") return row.theta_power;
    if (column == "heart_rate_bpm") return row.heart_rate_bpm;
    if (column == "temp_c") return row.temp_c;
    throw Error("unknown metric column: " + std::string(column));
}

std::optional<kernels::Interval> find_baseline(std::span<const rec::Event> events) {
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.kind != "step_start" || !e.label.starts_with("baseline:")) continue;
        for (std::size_t j = i + 1; j < events.size(); ++j)
            if (events[j].kind == "step_stop" && events[j].label == e.label)
                return kernels::Interval{e.receiver_time, events[j].receiver_time};
        return std::nullopt;
    }
    return std::nullopt;
}

namespace {

using Ranges = std::vector<kernels::IndexRange>;

// Sorted, merged, non-empty.
Ranges merge(Ranges r) {
    std::sort(r.begin(), r.end());
    Ranges out;
    for (const auto& [a, b] : r) {
        if (a >= b) continue;
        if (!out.empty() && a <= out.back().second)
            out.back().second = std::max(out.back().second, b);
        else
            out.emplace_back(a, b);
    }
    return out;
}

bool covers(const Ranges& merged, std::size_t i) {
    auto it = std::upper_bound(merged.begin(), merged.end(), i,
                               [](std::size_t v, const kernels::IndexRange& r) { return v < r.first; });
    return it != merged.begin() && i < std::prev(it)->second;
}

std::vector<double> channel(const rec::StreamRecord& s, std::size_t c) {
    std::vector<double> out(s.samples.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.samples[i].values[c];
    return out;
}

std::optional<double> pupil_of(const net::Sample& s) {
    if (s.values.size() <= net::kGazePupilRight) return std::nullopt;
    const double l = s.values[net::kGazePupilLeft], r = s.values[net::kGazePupilRight];
    if (l > 0.0 && r > 0.0) return (l + r) / 2.0;
    if (l > 0.0) return l;
    if (r > 0.0) return r;
    return std::nullopt;
}

// Per-modality analysis of the first stream of each modality.
struct Prepared {
    const rec::StreamRecord* gaze = nullptr;
    const rec::StreamRecord* eda = nullptr;
    const rec::StreamRecord* eeg = nullptr;
    const rec::StreamRecord* ppg = nullptr;
    const rec::StreamRecord* temp = nullptr;

    std::optional<std::vector<ScrEvent>> scrs;
    std::optional<kernels::EpochBandPower> epochs;
    std::size_t epoch_samples = 0;
    std::optional<HeartRate> heart;
    std::optional<double> baseline_pupil;
};

Prepared prepare(const rec::SessionData& rec, std::optional<kernels::Interval> baseline, const MetricParams& p) {
    Prepared out;
    for (const auto& s : rec.streams) {
        const rec::StreamRecord** slot = nullptr;
        switch (s.info.modality) {
            case net::Modality::Gaze: slot = &out.gaze; break;
            case net::Modality::EDA: slot = &out.eda; break;
            case net::Modality::EEG: slot = &out.eeg; break;
            case net::Modality::PPG: slot = &out.ppg; break;
            case net::Modality::Temperature: slot = &out.temp; break;
            case net::Modality::Marker: break;
        }
        if (slot != nullptr && *slot == nullptr) *slot = &s;
    }

    if (out.eda != nullptr && !out.eda->samples.empty()) {
        try {
            out.scrs = detect_scrs(channel(*out.eda, 0), out.eda->info.nominal_rate, p.scr);
        } catch (const SignalError&) {
        }
    }
    if (out.eeg != nullptr) {
        const double rate = out.eeg->info.nominal_rate;
        const kernels::EpochLayout layout{static_cast<std::size_t>(std::lround(p.epoch_s * rate)),
                                          static_cast<std::size_t>(std::lround(p.epoch_hop_s * rate))};
        if (layout.epoch_samples > 0 && layout.hop_samples > 0 && out.eeg->samples.size() >= layout.epoch_samples) {
            std::vector<std::vector<double>> chans;
            for (std::uint32_t c = 0; c < out.eeg->info.channel_count; ++c) chans.push_back(channel(*out.eeg, c));
            const kernels::Band bands[] = {kAlphaBand, kThetaBand};
            out.epochs = kernels::parallel::epoch_band_power(chans, rate, layout, bands, p.welch);
            out.epoch_samples = layout.epoch_samples;
        }
    }
    if (out.ppg != nullptr && !out.ppg->samples.empty()) {
        try {
            auto hr = heart_rate(channel(*out.ppg, 0), out.ppg->info.nominal_rate, p.heart);
            if (hr.reliable) out.heart = std::move(hr);
        } catch (const SignalError&) {
        }
    }
    if (out.gaze != nullptr && baseline) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& s : out.gaze->samples) {
            if (s.timestamp < baseline->first || s.timestamp > baseline->second) continue;
            if (auto v = pupil_of(s)) {
                sum += *v;
                ++n;
            }
        }
        if (n > 0 && sum > 0.0) out.baseline_pupil = sum / static_cast<double>(n);
    }
    return out;
}

std::optional<double> mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

MetricTable build_metric_table(std::span<const gaze::SymbolHit> hits, const rec::SessionData& recording,
                               std::optional<kernels::Interval> baseline, const MetricParams& params) {
    std::map<std::string, std::vector<const gaze::SymbolHit*>> by_symbol;
    for (const auto& h : hits)
        if (h.symbol_id) by_symbol[*h.symbol_id].push_back(&h);

    const Prepared prep = prepare(recording, baseline, params);

    auto windows_of = [](const std::vector<const gaze::SymbolHit*>& group, const rec::StreamRecord* stream) {
        Ranges r;
        if (stream == nullptr) return r;
        for (const auto* h : group)
            for (const auto& w : h->windows)
                if (w.source_id == stream->info.source_id) r.emplace_back(w.first, w.last);
        return r;
    };

    MetricTable table;
    for (const auto& [symbol, group] : by_symbol) {
        MetricRow row;
        row.symbol_id = symbol;
        for (const auto* h : group) row.gaze_duration_ms += h->fixation.duration;
        row.gaze_duration_ms *= 1000.0;

        if (prep.scrs) {
            const Ranges w = merge(windows_of(group, prep.eda));
            int count = 0;
            double rise = 0.0;
            for (const auto& e : *prep.scrs) {
                if (!covers(w, e.onset_index)) continue;
                ++count;
                rise += e.rise_time();
            }
            row.scr_count = count;
            if (count > 0) row.scr_mean_rise_s = rise / count;
        }

        if (prep.epochs && prep.epochs->epochs > 0) {
            const auto& ep = *prep.epochs;
            const Ranges raw = windows_of(group, prep.eeg);
            const Ranges w = merge(raw);
            std::vector<std::size_t> chosen;
            for (std::size_t e = 0; e < ep.epochs; ++e)
                if (covers(w, ep.first_sample[e] + prep.epoch_samples / 2)) chosen.push_back(e);
            if (chosen.empty()) {
                for (const auto& [a, b] : raw) {
                    const double center = (static_cast<double>(a) + static_cast<double>(b)) / 2.0;
                    std::size_t best = 0;
                    double best_d = std::numeric_limits<double>::infinity();
                    for (std::size_t e = 0; e < ep.epochs; ++e) {
                        const double c = static_cast<double>(ep.first_sample[e] + prep.epoch_samples / 2);
                        if (std::abs(c - center) < best_d) {
                            best_d = std::abs(c - center);
                            best = e;
                        }
                    }
                    chosen.push_back(best);
                }
            }
            if (!chosen.empty()) {
                double alpha = 0.0, theta = 0.0;
                for (auto e : chosen) {
                    alpha += ep.at(e, 0);
                    theta += ep.at(e, 1);
                }
                row.alpha_power = alpha / static_cast<double>(chosen.size());
                row.theta_power = theta / static_cast<double>(chosen.size());
            }
        }

        if (prep.heart) {
            const Ranges w = merge(windows_of(group, prep.ppg));
            std::vector<double> ibis;
            for (std::size_t k = 1; k < prep.heart->beat_indices.size(); ++k)
                if (covers(w, prep.heart->beat_indices[k])) ibis.push_back(prep.heart->ibis[k - 1]);
            if (auto m = mean_of(ibis)) row.heart_rate_bpm = 60.0 / *m;
        }

        if (prep.baseline_pupil) {
            const Ranges w = merge(windows_of(group, prep.gaze));
            std::vector<double> pupil;
            for (const auto& [a, b] : w)
                for (std::size_t i = a; i < b; ++i)
                    if (auto v = pupil_of(prep.gaze->samples[i])) pupil.push_back(*v);
            if (auto m = mean_of(pupil)) row.pupil_dilation_pct = 100.0 * (*m - *prep.baseline_pupil) / *prep.baseline_pupil;
        }

        if (prep.temp != nullptr) {
            const Ranges w = merge(windows_of(group, prep.temp));
            std::vector<double> temp;
            for (const auto& [a, b] : w)
                for (std::size_t i = a; i < b; ++i) temp.push_back(prep.temp->samples[i].values[0]);
            row.temp_c = mean_of(temp);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string render_metric_csv(const MetricTable& table) {
    std::string out = "symbol_id";
    for (const char* c : kMetricColumns) out += std::string(",") + c;
    out += '\n';
    auto opt = [](const std::optional<double>& v) { return v ? text::format_double(*v) : std::string(); };
    for (const auto& r : table.rows) {
        out += text::csv_field(r.symbol_id);
        out += ',' + text::format_double(r.gaze_duration_ms);
        out += ',' + (r.scr_count ? std::to_string(*r.scr_count) : std::string());
        out += ',' + opt(r.scr_mean_rise_s);
        out += ',' + opt(r.pupil_dilation_pct);
        out += ',' + opt(r.alpha_power);
        out += ',' + opt(r.theta_power);
        out += ',' + opt(r.heart_rate_bpm);
        out += ',' + opt(r.temp_c);
        out += '\n';
    }
    return out;
}

MetricTable parse_metric_csv(std::string_view text_in) {
    MetricTable table;
    const auto lines = text::split(text_in, '\n');
    bool header = true;
    for (const auto& line : lines) {
        if (text::trim(line).empty()) continue;
        const auto f = text::parse_csv_line(line);
        if (header) {
            header = false;
            if (f.size() != 9 || f[0] != "symbol_id") throw Error("metric CSV header is malformed");
            continue;
        }
        if (f.size() != 9) throw Error("metric CSV row has " + std::to_string(f.size()) + " fields, expected 9");
        auto num = [](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            return std::stod(s);
        };
        MetricRow r;
        r.symbol_id = f[0];
        r.gaze_duration_ms = std::stod(f[1]);
        if (!f[2].empty()) r.scr_count = std::stoi(f[2]);
        r.scr_mean_rise_s = num(f[3]);
        r.pupil_dilation_pct = num(f[4]);
        r.alpha_power = num(f[5]);
        r.theta_power = num(f[6]);
        r.heart_rate_bpm = num(f[7]);
        r.temp_c = num(f[8]);
        table.rows.push_back(std::move(r));
    }
    return table;
}

}  // namespace cogtrace::physio
