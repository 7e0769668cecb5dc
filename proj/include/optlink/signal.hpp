#pragma once

// Sampling grid and waveform containers shared by every stage of the link.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "optlink/fft.hpp"

namespace optlink {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 2.99792458e8;   // m/s
inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kElectronCharge = 1.602176634e-19; // C

// Largest transform the grid will hand to the FFT backend.
inline constexpr std::size_t kMaxSamples = std::size_t{1} << 26;

class SamplingGrid {
public:
    /// Throws std::invalid_argument on any shape violation.
    static SamplingGrid make(double bit_rate, std::size_t n_bits, std::size_t samples_per_bit,
                             double wavelength)
    {
        if (!(bit_rate > 0.0) || !std::isfinite(bit_rate))
            throw std::invalid_argument("make_grid: bit_rate must be positive");
        if (!(wavelength > 0.0) || !std::isfinite(wavelength))
            throw std::invalid_argument("make_grid: wavelength must be positive");
        if (n_bits < 16)
            throw std::invalid_argument("make_grid: n_bits must be >= 16");
        if (samples_per_bit < 8 || samples_per_bit > 128 || !std::has_single_bit(samples_per_bit))
            throw std::invalid_argument("make_grid: samples_per_bit must be one of 8,16,32,64,128");
        if (n_bits > kMaxSamples / samples_per_bit)
            throw std::invalid_argument("make_grid: n_samples exceeds the maximum FFT size");
        const std::size_t n = n_bits * samples_per_bit;
        if (!std::has_single_bit(n))
            throw std::invalid_argument("make_grid: n_samples = " + std::to_string(n) +
                                        " is not a power of two");
        SamplingGrid g;
        g.bit_rate_ = bit_rate;
        g.n_bits_ = n_bits;
        g.samples_per_bit_ = samples_per_bit;
        g.n_samples_ = n;
        g.dt_ = 1.0 / (bit_rate * static_cast<double>(samples_per_bit));
        g.wavelength_ = wavelength;
        return g;
    }

    double bit_rate() const { return bit_rate_; }
    std::size_t n_bits() const { return n_bits_; }
    std::size_t samples_per_bit() const { return samples_per_bit_; }
    std::size_t n_samples() const { return n_samples_; }
    double dt() const { return dt_; }
    double bit_period() const { return 1.0 / bit_rate_; }
    double wavelength() const { return wavelength_; }
    double carrier_frequency() const { return kSpeedOfLight / wavelength_; }
    double window() const { return dt_ * static_cast<double>(n_samples_); }
    double frequency_spacing() const { return 1.0 / window(); }
    /// Sampling rate 1/dt, the bandwidth a white per-sample noise process occupies.
    double simulation_bandwidth() const { return 1.0 / dt_; }

    /// Frequency of FFT bin k in Hz, in FFTW's standard (0..N/2-1, -N/2..-1) ordering.
    double frequency(std::size_t k) const
    {
        const auto n = static_cast<std::ptrdiff_t>(n_samples_);
        auto kk = static_cast<std::ptrdiff_t>(k);
        if (kk >= n / 2)
            kk -= n;
        return static_cast<double>(kk) * frequency_spacing();
    }

    std::vector<double> angular_frequencies() const
    {
        std::vector<double> w(n_samples_);
        for (std::size_t k = 0; k < n_samples_; ++k)
            w[k] = 2.0 * std::numbers::pi * frequency(k);
        return w;
    }

    bool operator==(const SamplingGrid&) const = default;

private:
    SamplingGrid() = default;

    double bit_rate_ = 0.0;
    std::size_t n_bits_ = 0;
    std::size_t samples_per_bit_ = 0;
    std::size_t n_samples_ = 0;
    double dt_ = 0.0;
    double wavelength_ = 0.0;
};

inline SamplingGrid make_grid(double bit_rate, std::size_t n_bits, std::size_t samples_per_bit,
                              double wavelength)
{
    return SamplingGrid::make(bit_rate, n_bits, samples_per_bit, wavelength);
}

namespace detail {
template <typename T>
void check_length(const SamplingGrid& grid, const std::vector<T>& samples, const char* what)
{
    if (samples.size() != grid.n_samples())
        throw std::invalid_argument(std::string(what) + ": sample count does not match grid");
}
} // namespace detail

/// Complex baseband envelope in sqrt(W); |s|^2 is instantaneous power.
struct OpticalField {
    OpticalField(SamplingGrid g, std::vector<Complex> s) : grid(g), samples(std::move(s))
    {
        detail::check_length(grid, samples, "OpticalField");
    }
    explicit OpticalField(SamplingGrid g) : grid(g), samples(g.n_samples()) {}

    SamplingGrid grid;
    std::vector<Complex> samples;

    bool all_finite() const
    {
        return std::all_of(samples.begin(), samples.end(), [](const Complex& c) {
            return std::isfinite(c.real()) && std::isfinite(c.imag());
        });
    }
};

/// Real waveform: volts for drive signals, amperes for photocurrent.
struct ElectricalWaveform {
    ElectricalWaveform(SamplingGrid g, std::vector<double> s) : grid(g), samples(std::move(s))
    {
        detail::check_length(grid, samples, "ElectricalWaveform");
    }
    explicit ElectricalWaveform(SamplingGrid g) : grid(g), samples(g.n_samples()) {}

    SamplingGrid grid;
    std::vector<double> samples;

    bool all_finite() const
    {
        return std::all_of(samples.begin(), samples.end(), [](double v) { return std::isfinite(v); });
    }
};

inline double mean_power(const OpticalField& f)
{
    double acc = 0.0;
    for (const auto& s : f.samples)
        acc += std::norm(s);
    return acc / static_cast<double>(f.samples.size());
}

inline double peak_power(const OpticalField& f)
{
    double peak = 0.0;
    for (const auto& s : f.samples)
        peak = std::max(peak, std::norm(s));
    return peak;
}

inline double energy(const OpticalField& f)
{
    double acc = 0.0;
    for (const auto& s : f.samples)
        acc += std::norm(s);
    return acc * f.grid.dt();
}

/// Mark-level power estimate for an on-off keyed field: the mean power of all
/// samples whose power exceeds the overall mean. Zero for an all-zero field.
inline double mark_power(const OpticalField& f)
{
    const double mean = mean_power(f);
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& s : f.samples) {
        const double p = std::norm(s);
        if (p > mean) {
            acc += p;
            ++count;
        }
    }
    return count == 0 ? mean : acc / static_cast<double>(count);
}

/// Unitary forward DFT (kernel exp(-i w t)).
inline std::vector<Complex> spectrum(std::span<const Complex> x)
{
    std::vector<Complex> out(x.begin(), x.end());
    FftPlan plan(out.size());
    plan.forward(out);
    return out;
}

inline std::vector<Complex> spectrum(const OpticalField& f) { return spectrum(std::span<const Complex>(f.samples)); }

inline std::vector<Complex> inverse_spectrum(std::span<const Complex> x)
{
    std::vector<Complex> out(x.begin(), x.end());
    FftPlan plan(out.size());
    plan.inverse(out);
    return out;
}

inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace optlink
