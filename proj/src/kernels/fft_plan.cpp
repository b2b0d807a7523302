#include "fft_plan.hpp"

#include <cmath>
#include <mutex>
#include <new>
#include <numbers>

namespace cogtrace::kernels::detail {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
    FftScratch probe(n);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), probe.in, probe.out, FFTW_ESTIMATE);
    if (!plan_) throw std::bad_alloc();
}

RealFft::~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
}

void RealFft::execute(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(plan_, in, out); }

FftScratch::FftScratch(std::size_t n) {
    in = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    if (!in || !out) {
        fftw_free(in);
        fftw_free(out);
        throw std::bad_alloc();
    }
}

FftScratch::~FftScratch() {
    fftw_free(in);
    fftw_free(out);
}

WelchPlan::WelchPlan(std::size_t segment_, std::size_t step_, double rate_)
    : segment(segment_), step(step_), rate(rate_), window(segment_), fft(segment_) {
    double energy = 0.0;
    for (std::size_t i = 0; i < segment; ++i) {
        // periodic Hann
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(segment));
        energy += window[i] * window[i];
    }
    scale = 1.0 / (rate * energy);
}

void WelchPlan::periodogram(const double* x, FftScratch& scratch, double* power) const {
    double mean = 0.0;
    for (std::size_t i = 0; i < segment; ++i) mean += x[i];
    mean /= static_cast<double>(segment);
    for (std::size_t i = 0; i < segment; ++i) scratch.in[i] = (x[i] - mean) * window[i];
    fft.execute(scratch.in, scratch.out);
    const std::size_t bins = segment / 2 + 1;
    for (std::size_t k = 0; k < bins; ++k) {
        const double re = scratch.out[k][0], im = scratch.out[k][1];
        double p = (re * re + im * im) * scale;
        const bool nyquist = segment % 2 == 0 && k == segment / 2;
        if (k != 0 && !nyquist) p *= 2.0;
        power[k] = p;
    }
}

}  // namespace cogtrace::kernels::detail
