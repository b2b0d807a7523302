#pragma once

#include <fftw3.h>

#include <cstddef>
#include <memory>
#include <vector>

namespace cogtrace::kernels::detail {

// FFTW planning is not thread-safe; executing a finished plan on fresh
// arrays is. RealFft serializes planning and exposes only new-array execution.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const noexcept { return n_; }
    std::size_t bins() const noexcept { return n_ / 2 + 1; }
    void execute(double* in, fftw_complex* out) const;

private:
    std::size_t n_;
    fftw_plan plan_ = nullptr;
};

// fftw_malloc'd scratch so every buffer shares the planner's alignment.
struct FftScratch {
    explicit FftScratch(std::size_t n);
    ~FftScratch();
    FftScratch(const FftScratch&) = delete;
    FftScratch& operator=(const FftScratch&) = delete;

    double* in = nullptr;
    fftw_complex* out = nullptr;
};

struct WelchPlan {
    WelchPlan(std::size_t segment, std::size_t step, double rate);

    std::size_t segment;
    std::size_t step;
    double rate;
    std::vector<double> window;
    double scale;  // 1 / (rate * sum(w^2))
    RealFft fft;

    std::size_t segments_for(std::size_t n) const { return n < segment ? 0 : 1 + (n - segment) / step; }
    // Mean-removed, Hann-tapered one-sided periodogram of x[0, segment).
    void periodogram(const double* x, FftScratch& scratch, double* power) const;
};

}  // namespace cogtrace::kernels::detail
