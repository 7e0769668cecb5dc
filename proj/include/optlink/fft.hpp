#pragma once

// Thin RAII wrapper over FFTW for in-place complex transforms with unitary scaling.

#include <complex>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <mutex>
#include <span>
#include <stdexcept>

#include <fftw3.h>

namespace optlink {

namespace detail {
// The FFTW planner is not reentrant; plan execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}
} // namespace detail

/// Owns one forward/backward plan pair plus its working buffer for a fixed size.
class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n), scale_(1.0 / std::sqrt(static_cast<double>(n)))
    {
        if (n == 0)
            throw std::invalid_argument("FftPlan: size must be positive");
        buf_ = fftw_alloc_complex(n);
        if (!buf_)
            throw std::bad_alloc();
        std::lock_guard lock(detail::fftw_planner_mutex());
        const int ni = static_cast<int>(n);
        fwd_ = fftw_plan_dft_1d(ni, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(ni, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    ~FftPlan()
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    std::size_t size() const { return n_; }

    /// X[k] = n^{-1/2} sum_t x[t] exp(-2 pi i k t / n), in place.
    void forward(std::span<std::complex<double>> data) { run(fwd_, data); }

    /// Inverse of forward(), in place.
    void inverse(std::span<std::complex<double>> data) { run(bwd_, data); }

private:
    void run(fftw_plan plan, std::span<std::complex<double>> data)
    {
        if (data.size() != n_)
            throw std::invalid_argument("FftPlan: buffer size mismatch");
        std::memcpy(buf_, data.data(), n_ * sizeof(fftw_complex));
        fftw_execute(plan);
        const auto* src = reinterpret_cast<const std::complex<double>*>(buf_);
        for (std::size_t i = 0; i < n_; ++i)
            data[i] = src[i] * scale_;
    }

    std::size_t n_;
    double scale_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

} // namespace optlink
