#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "cogtrace/common/error.hpp"
#include "cogtrace/physio/filters.hpp"
#include "cogtrace/physio/metrics.hpp"

using namespace cogtrace;
using namespace cogtrace::physio;

namespace {

std::vector<double> sine(double hz, double rate, double seconds, double amplitude = 1.0) {
    std::vector<double> x(static_cast<std::size_t>(rate * seconds));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = amplitude * std::sin(2 * std::numbers::pi * hz * i / rate);
    return x;
}

// Narrow Gaussian pulses at the given beat times.
std::vector<double> pulse_train(const std::vector<double>& beats, double rate, double seconds) {
    std::vector<double> x(static_cast<std::size_t>(rate * seconds), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = static_cast<double>(i) / rate;
        for (double b : beats) x[i] += std::exp(-0.5 * std::pow((t - b) / 0.05, 2));
    }
    return x;
}

std::vector<double> regular_beats(double hz, double seconds) {
    std::vector<double> b;
    for (double t = 0.5; t < seconds; t += 1.0 / hz) b.push_back(t);
    return b;
}

rec::StreamRecord stream_of(net::StreamInfo info, const std::vector<double>& values) {
    rec::StreamRecord r{std::move(info), {}, {}};
    for (std::size_t i = 0; i < values.size(); ++i)
        r.samples.push_back({static_cast<double>(i) / r.info.nominal_rate, {static_cast<float>(values[i])}});
    return r;
}

gaze::SymbolHit hit(std::string id, double start, double duration) {
    gaze::SymbolHit h;
    h.symbol_id = std::move(id);
    h.fixation.start = start;
    h.fixation.duration = duration;
    return h;
}

}  // namespace

TEST_CASE("Butterworth sections have unit passband gain") {
    CHECK(butter_lowpass(1.0, 128.0).dc_gain() == doctest::Approx(1.0));
    CHECK(butter_highpass(1.0, 128.0).dc_gain() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(butter_lowpass(64.0, 128.0), SignalError);
    CHECK_THROWS_AS(butter_lowpass(0.0, 128.0), SignalError);
}

TEST_CASE("filtfilt keeps a constant and removes a fast sine") {
    const Biquad lp[] = {butter_lowpass(1.0, 128.0)};
    const std::vector<double> flat(512, 3.0);
    for (double v : filtfilt(lp, flat)) CHECK(v == doctest::Approx(3.0));
    const auto fast = sine(20.0, 128.0, 8.0);
    const auto out = filtfilt(lp, fast);
    double peak = 0;
    for (std::size_t i = 128; i + 128 < out.size(); ++i) peak = std::max(peak, std::abs(out[i]));
    CHECK(peak < 1e-3);
    CHECK(filter(lp, flat).front() == doctest::Approx(3.0 * lp[0].b0));
}

TEST_CASE("SCR: flat series has no events") {
    const std::vector<double> flat(128 * 10, 2.0);
    CHECK(detect_scrs(flat, 128.0).empty());
}

TEST_CASE("SCR: single linear ramp") {
    const double rate = 128.0;
    std::vector<double> x(static_cast<std::size_t>(rate * 20), 2.0);
    const std::size_t onset = static_cast<std::size_t>(5 * rate), rise = static_cast<std::size_t>(1.5 * rate);
    for (std::size_t i = onset; i < x.size(); ++i) {
        const double k = static_cast<double>(i - onset);
        x[i] = k <= rise ? 2.0 + 0.5 * k / rise : 2.0 + 0.5 * std::exp(-(k - rise) / (3.0 * rate));
    }
    const auto ev = detect_scrs(x, rate);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].amplitude == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(ev[0].rise_time() - 1.5) <= 1.0 / rate + 1e-9);
    CHECK(ev[0].onset == doctest::Approx(5.0).epsilon(0.002));
}

TEST_CASE("SCR: three planted responses in noise match the zig-zag oracle") {
    const double rate = 128.0;
    testgen::Rng rng(11);
    const testgen::PlantedScr planted[] = {{5.0, 0.05}, {20.0, 0.1}, {35.0, 0.2}};
    std::vector<double> x(static_cast<std::size_t>(rate * 50));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = static_cast<double>(i) / rate;
        x[i] = 2.0 + rng.normal(0.005);
        for (const auto& s : planted) x[i] += s.value(t);
    }
    // The oracle scans the low-passed series for extremum pairs with a
    // reversal threshold well above the residual noise.
    const Biquad lp[] = {butter_lowpass(1.0, rate)};
    const auto smooth = filtfilt(lp, x);
    const auto ref = oracle::zigzag_rises(smooth, 0.01);
    const auto ev = detect_scrs(x, rate);
    REQUIRE(ref.size() == 3);
    REQUIRE(ev.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(ev[k].onset - static_cast<double>(ref[k].trough) / rate) < 0.6);
        CHECK(std::abs(ev[k].peak - static_cast<double>(ref[k].peak) / rate) < 0.6);
        CHECK(ev[k].amplitude == doctest::Approx(planted[k].amplitude).epsilon(0.25));
    }
}

TEST_CASE("SCR preconditions") {
    CHECK_THROWS_AS(detect_scrs(std::vector<double>(200, 1.0), 8.0), SignalError);
    CHECK_THROWS_AS(detect_scrs(std::vector<double>(20, 1.0), 128.0), SignalError);
    std::vector<double> bad(512, 1.0);
    bad[7] = std::nan("");
    CHECK_THROWS_AS(detect_scrs(bad, 128.0), SignalError);
}

TEST_CASE("property: SCR detection is level invariant and scales with amplitude") {
    for (int seed = 0; seed < 25; ++seed) {
        testgen::Rng rng(seed);
        const auto tr = testgen::eda_trace(rng, 64.0, 90.0, 4, 0.02, 0.4, 20.0);
        const auto base = detect_scrs(tr.samples, tr.rate);
        const double shift = rng.uniform(-1.0, 5.0), k = rng.uniform(0.3, 4.0);
        std::vector<double> shifted = tr.samples, scaled = tr.samples;
        for (auto& v : shifted) v += shift;
        for (auto& v : scaled) v *= k;
        const auto s = detect_scrs(shifted, tr.rate);
        ScrParams p;
        p.min_amplitude *= k;
        const auto c = detect_scrs(scaled, tr.rate, p);
        INFO("seed " << seed);
        REQUIRE(s.size() == base.size());
        REQUIRE(c.size() == base.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(s[i].onset_index == base[i].onset_index);
            CHECK(s[i].peak_index == base[i].peak_index);
            CHECK(s[i].amplitude == doctest::Approx(base[i].amplitude));
            CHECK(c[i].onset_index == base[i].onset_index);
            CHECK(c[i].peak_index == base[i].peak_index);
            CHECK(c[i].amplitude == doctest::Approx(k * base[i].amplitude));
        }
    }
}

TEST_CASE("band power of a 10 Hz sine") {
    const auto x = sine(10.0, 128.0, 8.0);
    const auto alpha = band_power(x, 128.0, kAlphaBand, "alpha");
    const auto theta = band_power(x, 128.0, kThetaBand, "theta");
    CHECK(alpha.name == "alpha");
    CHECK(alpha.power > 100 * theta.power);
    CHECK(alpha.power == doctest::Approx(oracle::dft_band_power(x, 128.0, 7, 13)).epsilon(0.05));
    CHECK(band_power(std::vector<double>(512, 0.0), 128.0, kAlphaBand).power == 0.0);
    CHECK_THROWS_AS(band_power(x, 20.0, kAlphaBand), SignalError);
    CHECK_THROWS_AS(band_power(std::vector<double>(100, 0.0), 128.0, kAlphaBand), SignalError);
}

TEST_CASE("pupil dilation") {
    const std::vector<double> base{3.0, 3.0, 3.0}, wide{3.2, 3.4, 3.3};
    CHECK(pupil_dilation_pct(base, base) == 0.0);
    CHECK(pupil_dilation_pct(wide, base) == doctest::Approx(10.0));
    CHECK_THROWS_AS(pupil_dilation_pct({}, base), SignalError);
    CHECK_THROWS_AS(pupil_dilation_pct(base, std::vector<double>{0.0, 0.0}), SignalError);
    testgen::Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> s(static_cast<std::size_t>(rng.integer(1, 40)));
        for (auto& v : s) v = rng.uniform(1.5, 8.0);
        CHECK(pupil_dilation_pct(s, s) == doctest::Approx(0.0).scale(1.0));
    }
}

TEST_CASE("heart rate of regular pulse trains") {
    for (const auto [hz, bpm] : {std::pair{1.0, 60.0}, std::pair{1.25, 75.0}}) {
        const auto x = pulse_train(regular_beats(hz, 30.0), 64.0, 30.0);
        const auto hr = heart_rate(x, 64.0);
        CHECK(hr.bpm == doctest::Approx(bpm).epsilon(0.01));
        CHECK(hr.reliable);
        CHECK(hr.ibi_cv < 0.05);
    }
}

TEST_CASE("erratic beats are flagged unreliable") {
    testgen::Rng rng(5);
    std::vector<double> beats;
    for (double t = 0.5; t < 30.0; t += rng.chance(0.5) ? 0.45 : 1.4) beats.push_back(t);
    const auto hr = heart_rate(pulse_train(beats, 64.0, 30.0), 64.0);
    CHECK(hr.ibi_cv > 0.2);
    CHECK_FALSE(hr.reliable);
    CHECK_THROWS_AS(heart_rate(std::vector<double>(64 * 5, 0.0), 64.0), SignalError);
}

TEST_CASE("find_baseline picks the first baseline step") {
    const std::vector<rec::Event> ev{{1, "step_start", "questionnaire:pre"}, {2, "step_stop", "questionnaire:pre"},
                                     {3, "step_start", "baseline:b1"},       {9, "step_stop", "baseline:b1"},
                                     {20, "step_start", "baseline:b2"},      {25, "step_stop", "baseline:b2"}};
    const auto b = find_baseline(ev);
    REQUIRE(b);
    CHECK(b->first == 3);
    CHECK(b->second == 9);
    CHECK_FALSE(find_baseline(std::span(ev).first(3)));
    CHECK_FALSE(find_baseline({}));
}

TEST_CASE("metric table: flat physio gives scr_count 0") {
    rec::SessionData data;
    data.corrected = true;
    data.streams.push_back(stream_of(net::eda_stream_info("eda"), std::vector<double>(128 * 30, 2.0)));
    const auto r = gaze::attach_physio_windows({hit("A", 10.0, 0.5)}, data, {0.0, 1.0, {net::Modality::EDA}});
    const auto t = build_metric_table(r.hits, data, std::nullopt);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].symbol_id == "A");
    CHECK(t.rows[0].gaze_duration_ms == doctest::Approx(500.0));
    CHECK(t.rows[0].scr_count == 0);
    CHECK_FALSE(t.rows[0].pupil_dilation_pct);
    CHECK_FALSE(t.rows[0].alpha_power);
}

TEST_CASE("metric table: planted SCR counts only for the symbol whose window holds it") {
    const double rate = 128.0;
    const testgen::PlantedScr s{20.0, 0.2};
    std::vector<double> x(static_cast<std::size_t>(rate * 60));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 2.0 + s.value(static_cast<double>(i) / rate);
    rec::SessionData data;
    data.corrected = true;
    data.streams.push_back(stream_of(net::eda_stream_info("eda"), x));
    const std::vector<gaze::SymbolHit> hits{hit("A", 19.5, 1.0), hit("B", 40.0, 1.0), hit("B", 5.0, 0.3)};
    const auto r = gaze::attach_physio_windows(hits, data, {0.0, 1.0, {net::Modality::EDA}});
    const auto t = build_metric_table(r.hits, data, std::nullopt);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.find("A")->scr_count == 1);
    CHECK(t.find("A")->scr_mean_rise_s.value_or(0) == doctest::Approx(s.peak_delay()).epsilon(0.05));
    CHECK(t.find("B")->scr_count == 0);
    CHECK(t.find("B")->gaze_duration_ms == doctest::Approx(1300.0));
    CHECK(t.find("C") == nullptr);
}

TEST_CASE("metric table: pupil against the baseline and mean temperature") {
    rec::SessionData data;
    data.corrected = true;
    rec::StreamRecord g{net::gaze_stream_info("gaze"), {}, {}};
    for (int i = 0; i < 600; ++i) {
        const float p = i < 300 ? 3.0f : 3.3f;
        g.samples.push_back({i / 60.0, {100, 100, p, p}});
    }
    data.streams.push_back(g);
    data.streams.push_back(stream_of(net::temperature_stream_info("temp"), std::vector<double>(40, 33.5)));
    const auto r = gaze::attach_physio_windows({hit("A", 6.0, 2.0)}, data,
                                               {0.0, 1.0, {net::Modality::Gaze, net::Modality::Temperature}});
    const auto t = build_metric_table(r.hits, data, kernels::Interval{0.0, 4.9});
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].pupil_dilation_pct.value_or(0) == doctest::Approx(10.0).epsilon(1e-4));
    CHECK(t.rows[0].temp_c.value_or(0) == doctest::Approx(33.5));
}

TEST_CASE("metric CSV roundtrip") {
    for (int seed = 0; seed < 40; ++seed) {
        testgen::Rng rng(seed);
        const auto t = testgen::metric_table(rng);
        const auto text = render_metric_csv(t);
        CHECK(text.rfind("symbol_id,gaze_duration_ms,", 0) == 0);
        const auto back = parse_metric_csv(text);
        REQUIRE(back.rows.size() == t.rows.size());
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            CHECK(back.rows[i].symbol_id == t.rows[i].symbol_id);
            CHECK(back.rows[i].scr_count == t.rows[i].scr_count);
            for (const char* col : kMetricColumns) {
                const auto a = metric_value(t.rows[i], col), b = metric_value(back.rows[i], col);
                REQUIRE(a.has_value() == b.has_value());
                if (a) CHECK(*b == doctest::Approx(*a).epsilon(1e-9));
            }
        }
    }
    CHECK(parse_metric_csv(render_metric_csv({})).rows.empty());
    CHECK_THROWS(parse_metric_csv("nonsense\n1,2\n"));
}
