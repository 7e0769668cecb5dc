#pragma once

// Transmitter: PRBS data source, NRZ driver, CW laser with Lorentzian linewidth and a
// chirp-free sin^2 Mach-Zehnder amplitude modulator.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "optlink/signal.hpp"

namespace optlink {

using Rng = std::mt19937_64;

struct PrbsTag {
    int order = 7;
    std::uint64_t seed = 1;
};

struct BitSequence {
    std::vector<std::uint8_t> bits;
    std::optional<PrbsTag> generator; // empty for explicit patterns

    static BitSequence from_bits(std::vector<std::uint8_t> b)
    {
        if (b.empty())
            throw std::invalid_argument("BitSequence: empty");
        for (auto v : b)
            if (v > 1)
                throw std::invalid_argument("BitSequence: values must be 0 or 1");
        return BitSequence{std::move(b), std::nullopt};
    }

    std::size_t size() const { return bits.size(); }
    std::uint8_t operator[](std::size_t i) const { return bits[i]; }
};

struct TxConfig {
    double bit_rate = 10e9;         // b/s
    double wavelength = 1550e-9;    // m
    double launch_power_dbm = 0.0;  // mark-level power at the first fiber input
    double linewidth = 10e6;        // Hz, Lorentzian FWHM
    int prbs_order = 7;
    std::uint64_t prbs_seed = 1;
    double rise_time = 0.25;        // fraction of the bit period
    double extinction_ratio_db = 30.0;
    std::uint64_t rng_seed = 1;

    void validate() const
    {
        if (!(bit_rate > 0.0))
            throw std::invalid_argument("tx: bit_rate must be positive");
        if (!(wavelength > 0.0))
            throw std::invalid_argument("tx: wavelength must be positive");
        if (!(linewidth >= 0.0))
            throw std::invalid_argument("tx: linewidth must be >= 0");
        if (!(rise_time > 0.0 && rise_time < 0.5))
            throw std::invalid_argument("tx: rise_time must lie in (0, 0.5)");
        if (!(extinction_ratio_db > 0.0))
            throw std::invalid_argument("tx: extinction_ratio must be positive");
        if (!std::isfinite(launch_power_dbm))
            throw std::invalid_argument("tx: launch power must be finite");
    }
};

/// Feedback tap (besides the order itself) of the maximal-length polynomial x^k + x^m + 1.
inline int prbs_feedback_tap(int order)
{
    switch (order) {
    case 7: return 6;
    case 9: return 5;
    case 11: return 9;
    case 15: return 14;
    case 23: return 18;
    case 31: return 28;
    default:
        throw std::invalid_argument("prbs: unsupported order " + std::to_string(order));
    }
}

/// Fibonacci LFSR; the seed is the initial k-bit register state and must be non-zero.
inline BitSequence prbs_generate(int order, std::uint64_t seed, std::size_t n_bits)
{
    const int tap = prbs_feedback_tap(order);
    if (n_bits == 0)
        throw std::invalid_argument("prbs: n_bits must be >= 1");
    const std::uint64_t mask = (std::uint64_t{1} << order) - 1;
    std::uint64_t state = seed & mask;
    if (state == 0 || seed != state)
        throw std::invalid_argument("prbs: seed must be a non-zero " + std::to_string(order) + "-bit state");

    // One period is enough; the rest repeats cyclically.
    const std::size_t period = static_cast<std::size_t>(mask);
    const std::size_t gen = std::min(n_bits, period);
    std::vector<std::uint8_t> bits(n_bits);
    for (std::size_t i = 0; i < gen; ++i) {
        const auto fb = static_cast<std::uint8_t>(((state >> (order - 1)) ^ (state >> (tap - 1))) & 1u);
        state = ((state << 1) | fb) & mask;
        bits[i] = fb;
    }
    for (std::size_t i = gen; i < n_bits; ++i)
        bits[i] = bits[i - period];
    return BitSequence{std::move(bits), PrbsTag{order, seed}};
}

/// Normalized NRZ drive with linear edges of rise_time UI centered on each bit boundary.
/// Sample i sits at t = i*dt; the waveform is periodic over the grid.
inline ElectricalWaveform nrz_drive(const BitSequence& bits, const SamplingGrid& grid, double rise_time)
{
    if (bits.size() != grid.n_bits())
        throw std::invalid_argument("nrz_drive: bit count does not match grid");
    if (!(rise_time > 0.0 && rise_time < 0.5))
        throw std::invalid_argument("nrz_drive: rise_time must lie in (0, 0.5)");

    const std::size_t spb = grid.samples_per_bit();
    const std::size_t nb = grid.n_bits();
    const double half = 0.5 * rise_time;
    ElectricalWaveform out(grid);
    for (std::size_t b = 0; b < nb; ++b) {
        const double prev = bits[(b + nb - 1) % nb];
        const double cur = bits[b];
        const double next = bits[(b + 1) % nb];
        for (std::size_t i = 0; i < spb; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(spb);
            double v = cur;
            if (u < half)
                v = prev + (cur - prev) * ((u + half) / rise_time);
            else if (u > 1.0 - half)
                v = cur + (next - cur) * ((u - (1.0 - half)) / rise_time);
            out.samples[b * spb + i] = v;
        }
    }
    return out;
}

/// Constant-magnitude CW field whose phase is a Wiener process with increment
/// variance 2*pi*linewidth*dt (Lorentzian line of FWHM = linewidth).
inline OpticalField cw_laser(const SamplingGrid& grid, double power_watts, double linewidth, Rng& rng)
{
    if (!(power_watts >= 0.0))
        throw std::invalid_argument("cw_laser: power must be >= 0");
    if (!(linewidth >= 0.0))
        throw std::invalid_argument("cw_laser: linewidth must be >= 0");
    OpticalField out(grid);
    const double amp = std::sqrt(power_watts);
    if (linewidth == 0.0) {
        std::fill(out.samples.begin(), out.samples.end(), Complex(amp, 0.0));
        return out;
    }
    std::normal_distribution<double> step(0.0, std::sqrt(2.0 * std::numbers::pi * linewidth * grid.dt()));
    double phase = 0.0;
    for (auto& s : out.samples) {
        s = std::polar(amp, phase);
        phase += step(rng);
    }
    return out;
}

/// Drive level that yields P(1)/P(0) = extinction ratio on the sin^2 transfer curve.
inline double mz_bias_floor(double extinction_ratio_db)
{
    if (!(extinction_ratio_db > 0.0))
        throw std::invalid_argument("mz_modulate: extinction ratio must be positive");
    if (std::isinf(extinction_ratio_db))
        return 0.0;
    const double er = db_to_linear(extinction_ratio_db);
    return 2.0 / std::numbers::pi * std::asin(std::sqrt(1.0 / er));
}

/// Chirp-free push-pull MZ: amplitude scales by sin(pi/2 * v'), phase untouched.
inline OpticalField mz_modulate(const OpticalField& field, const ElectricalWaveform& drive,
                                double extinction_ratio_db)
{
    if (!(field.grid == drive.grid))
        throw std::invalid_argument("mz_modulate: field and drive grids differ");
    const double vmin = mz_bias_floor(extinction_ratio_db);
    constexpr double tol = 1e-12;
    OpticalField out(field.grid);
    for (std::size_t i = 0; i < field.samples.size(); ++i) {
        const double v = drive.samples[i];
        if (!(v >= -tol && v <= 1.0 + tol))
            throw std::invalid_argument("mz_modulate: drive sample out of [0,1] at index " + std::to_string(i));
        const double vp = vmin + (1.0 - vmin) * std::clamp(v, 0.0, 1.0);
        out.samples[i] = field.samples[i] * std::sin(0.5 * std::numbers::pi * vp);
    }
    return out;
}

struct Transmission {
    BitSequence bits;
    OpticalField field;
};

/// PRBS -> NRZ -> laser -> MZ, scaled so the mark-level power equals the launch power.
inline Transmission transmit(const TxConfig& cfg, const SamplingGrid& grid)
{
    cfg.validate();
    const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::abs(b); };
    if (!close(grid.bit_rate(), cfg.bit_rate) || !close(grid.wavelength(), cfg.wavelength))
        throw std::invalid_argument("transmit: grid does not match tx bit rate / wavelength");

    Rng rng(cfg.rng_seed);
    auto bits = prbs_generate(cfg.prbs_order, cfg.prbs_seed, grid.n_bits());
    const auto drive = nrz_drive(bits, grid, cfg.rise_time);
    const auto carrier = cw_laser(grid, 1.0, cfg.linewidth, rng);
    auto field = mz_modulate(carrier, drive, cfg.extinction_ratio_db);

    const double scale = std::sqrt(dbm_to_watts(cfg.launch_power_dbm) / mark_power(field));
    for (auto& s : field.samples)
        s *= scale;
    return Transmission{std::move(bits), std::move(field)};
}

} // namespace optlink
