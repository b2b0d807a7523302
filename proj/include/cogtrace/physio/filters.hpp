#pragma once

#include <span>
#include <vector>

namespace cogtrace::physio {

// Second-order IIR section, a0 normalized to 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    double dc_gain() const noexcept { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

// Butterworth (Q = 1/sqrt(2)) sections via the bilinear transform.
Biquad butter_lowpass(double cutoff_hz, double rate);
Biquad butter_highpass(double cutoff_hz, double rate);

// Causal cascade, zero initial state.
std::vector<double> filter(std::span<const Biquad> sections, std::span<const double> x);

// Zero-phase forward-backward filtering. Each pass starts as if the input
// had held its first value forever, so level shifts produce no start-up
// transient.
std::vector<double> filtfilt(std::span<const Biquad> sections, std::span<const double> x);

}  // namespace cogtrace::physio
