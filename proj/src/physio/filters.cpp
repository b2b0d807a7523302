#include "cogtrace/physio/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cogtrace/common/error.hpp"

namespace cogtrace::physio {

namespace {

struct Rbj {
    double cos_w0, alpha;
};

Rbj rbj(double cutoff_hz, double rate) {
    if (!(rate > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < rate / 2.0))
        throw SignalError("filter cutoff must lie strictly between 0 and Nyquist");
    const double w0 = 2.0 * std::numbers::pi * cutoff_hz / rate;
    return {std::cos(w0), std::sin(w0) / std::numbers::sqrt2};  // Q = 1/sqrt(2)
}

Biquad normalized(double b0, double b1, double b2, double a0, double a1, double a2) {
    return {b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
}

double cascade_gain(std::span<const Biquad> sections) {
    double g = 1.0;
    for (const auto& s : sections) g *= s.dc_gain();
    return g;
}

// Filters x - x[0] and adds back the steady-state response to x[0].
std::vector<double> settled_pass(std::span<const Biquad> sections, std::span<const double> x, double gain) {
    if (x.empty()) return {};
    const double level = x[0];
    std::vector<double> shifted(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) shifted[i] = x[i] - level;
    auto y = filter(sections, shifted);
    for (auto& v : y) v += gain * level;
    return y;
}

}  // namespace

Biquad butter_lowpass(double cutoff_hz, double rate) {
    const auto [c, alpha] = rbj(cutoff_hz, rate);
    return normalized((1.0 - c) / 2.0, 1.0 - c, (1.0 - c) / 2.0, 1.0 + alpha, -2.0 * c, 1.0 - alpha);
}

Biquad butter_highpass(double cutoff_hz, double rate) {
    const auto [c, alpha] = rbj(cutoff_hz, rate);
    return normalized((1.0 + c) / 2.0, -(1.0 + c), (1.0 + c) / 2.0, 1.0 + alpha, -2.0 * c, 1.0 - alpha);
}

std::vector<double> filter(std::span<const Biquad> sections, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    for (const auto& s : sections) {
        // transposed direct form II
        double z1 = 0.0, z2 = 0.0;
        for (auto& v : y) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

std::vector<double> filtfilt(std::span<const Biquad> sections, std::span<const double> x) {
    const double gain = cascade_gain(sections);
    auto forward = settled_pass(sections, x, gain);
    std::reverse(forward.begin(), forward.end());
    auto backward = settled_pass(sections, forward, gain);
    std::reverse(backward.begin(), backward.end());
    return backward;
}

}  // namespace cogtrace::physio
