#pragma once

// Scalar NLSE propagation by symmetric split-step Fourier, and lumped amplification.
//
// Internal units: distance km, time ps, beta2 ps^2/km, gamma 1/(W km).

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "optlink/fft.hpp"
#include "optlink/signal.hpp"
#include "optlink/txchain.hpp"

namespace optlink {

enum class FiberKind { smf, dcf_pre, dcf_post };

inline const char* to_string(FiberKind k)
{
    switch (k) {
    case FiberKind::smf: return "SMF";
    case FiberKind::dcf_pre: return "DCF-pre";
    case FiberKind::dcf_post: return "DCF-post";
    }
    return "?";
}

struct FiberParams {
    double length_km = 0.0;
    double dispersion = 0.0;   // ps/(nm km)
    double loss_db_km = 0.0;
    double gamma = 0.0;        // 1/(W km)
    FiberKind kind = FiberKind::smf;

    void validate() const
    {
        if (!(length_km >= 0.0) || !std::isfinite(length_km))
            throw std::invalid_argument("fiber: length must be >= 0");
        if (!(loss_db_km >= 0.0) || !std::isfinite(loss_db_km))
            throw std::invalid_argument("fiber: loss must be >= 0");
        if (!(gamma >= 0.0) || !std::isfinite(gamma))
            throw std::invalid_argument("fiber: gamma must be >= 0");
        if (!(std::abs(dispersion) <= 200.0))
            throw std::invalid_argument("fiber: |dispersion| must be <= 200 ps/(nm km)");
    }
};

// Table values for standard SMF and the compensating fiber at 1550 nm.
inline FiberParams standard_smf(double length_km = 120.0)
{
    return FiberParams{length_km, 16.0, 0.2, 1.26677, FiberKind::smf};
}

inline FiberParams standard_dcf(double length_km = 24.0, FiberKind kind = FiberKind::dcf_pre)
{
    return FiberParams{length_km, -80.0, 0.6, 1.8, kind};
}

enum class AmpMode { restore_power, fixed_gain };

struct AmplifierParams {
    AmpMode mode = AmpMode::restore_power;
    double target_dbm = 0.0;  // restore_power: mark-level output power
    double gain_db = 0.0;     // fixed_gain
    bool ase_enabled = false;
    double noise_figure_db = 5.0;

    void validate() const
    {
        if (mode == AmpMode::fixed_gain && !(gain_db >= 0.0))
            throw std::invalid_argument("amplifier: gain must be >= 0 dB");
        if (!std::isfinite(target_dbm) || !std::isfinite(gain_db))
            throw std::invalid_argument("amplifier: non-finite setting");
        if (ase_enabled && !(noise_figure_db >= 3.0))
            throw std::invalid_argument("amplifier: noise figure must be >= 3 dB with ASE enabled");
    }
};

enum class StepMode { fixed, adaptive };

struct SsfmOptions {
    StepMode mode = StepMode::fixed;
    double step_km = 0.1;
    double max_nl_phase = 0.05; // rad per step, adaptive mode

    static SsfmOptions fixed_step(double dz) { return {StepMode::fixed, dz, 0.05}; }
    static SsfmOptions adaptive(double phase_cap) { return {StepMode::adaptive, 0.1, phase_cap}; }

    void validate() const
    {
        if (mode == StepMode::fixed && !(step_km > 0.0))
            throw std::invalid_argument("ssfm: step must be positive");
        if (mode == StepMode::adaptive && !(max_nl_phase > 0.0))
            throw std::invalid_argument("ssfm: nonlinear phase cap must be positive");
    }
};

class PropagationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// beta2 = -D lambda^2 / (2 pi c), D in ps/(nm km), result in ps^2/km.
inline double d_to_beta2(double dispersion, double wavelength)
{
    if (!(wavelength > 0.0))
        throw std::invalid_argument("d_to_beta2: wavelength must be positive");
    // ps/(nm km) = 1e-6 s/m^2 ; s^2/m = 1e27 ps^2/km
    return -dispersion * wavelength * wavelength / (2.0 * std::numbers::pi * kSpeedOfLight) * 1e21;
}

/// Power attenuation coefficient in 1/km.
inline double loss_db_to_alpha(double loss_db_km)
{
    if (!(loss_db_km >= 0.0))
        throw std::invalid_argument("loss_db_to_alpha: loss must be >= 0");
    return loss_db_km * std::numbers::ln10 / 10.0;
}

namespace detail {

class LinearOperator {
public:
    LinearOperator(const SamplingGrid& grid, double alpha, double beta2) : alpha_(alpha), b2_half_(0.5 * beta2)
    {
        w2_ = grid.angular_frequencies();
        for (auto& w : w2_) {
            w *= 1e-12; // rad/ps
            w *= w;
        }
    }

    // exp((-alpha/2 + i beta2/2 w^2) h) for the exp(-i w t) forward kernel.
    void apply(std::vector<Complex>& spec, double h) const
    {
        const double decay = std::exp(-0.5 * alpha_ * h);
        for (std::size_t k = 0; k < spec.size(); ++k)
            spec[k] *= std::polar(decay, b2_half_ * w2_[k] * h);
    }

    // Same as apply() but with a cached factor table, for repeated equal steps.
    void build_table(double h, std::vector<Complex>& table) const
    {
        table.resize(w2_.size());
        const double decay = std::exp(-0.5 * alpha_ * h);
        for (std::size_t k = 0; k < w2_.size(); ++k)
            table[k] = std::polar(decay, b2_half_ * w2_[k] * h);
    }

private:
    double alpha_;
    double b2_half_;
    std::vector<double> w2_;
};

inline void apply_table(std::vector<Complex>& spec, const std::vector<Complex>& table)
{
    for (std::size_t k = 0; k < spec.size(); ++k)
        spec[k] *= table[k];
}

inline void check_finite(const std::vector<Complex>& a, double z)
{
    for (const auto& s : a)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw PropagationError("propagate_fiber: non-finite field at z = " + std::to_string(z) +
                                   " km (step too large?)");
}

inline double peak_norm(const std::vector<Complex>& a)
{
    double p = 0.0;
    for (const auto& s : a)
        p = std::max(p, std::norm(s));
    return p;
}

} // namespace detail

/// Symmetric split-step integration over fiber.length_km. The half linear steps of
/// consecutive slices are merged so each slice costs one forward/inverse FFT pair.
inline OpticalField propagate_fiber(const OpticalField& in, const FiberParams& fiber, const SsfmOptions& opt = {})
{
    fiber.validate();
    opt.validate();
    if (!in.all_finite())
        throw PropagationError("propagate_fiber: non-finite input field");
    if (fiber.length_km == 0.0)
        return in;

    const double length = fiber.length_km;
    const double alpha = loss_db_to_alpha(fiber.loss_db_km);
    const double beta2 = d_to_beta2(fiber.dispersion, in.grid.wavelength());
    const double gamma = fiber.gamma;
    const detail::LinearOperator lin(in.grid, alpha, beta2);

    std::vector<Complex> a = in.samples;
    FftPlan fft(a.size());

    const auto nonlinear = [&](double h) {
        if (gamma == 0.0)
            return;
        for (auto& s : a)
            s *= std::polar(1.0, gamma * std::norm(s) * h);
    };

    if (opt.mode == StepMode::fixed) {
        const auto n_steps = static_cast<std::size_t>(std::max(1.0, std::ceil(length / opt.step_km - 1e-9)));
        const double h = length / static_cast<double>(n_steps);
        std::vector<Complex> full, half;
        lin.build_table(h, full);
        lin.build_table(0.5 * h, half);

        fft.forward(a);
        detail::apply_table(a, half);
        for (std::size_t j = 0; j < n_steps; ++j) {
            fft.inverse(a);
            detail::check_finite(a, static_cast<double>(j) * h);
            nonlinear(h);
            fft.forward(a);
            detail::apply_table(a, j + 1 == n_steps ? half : full);
        }
        fft.inverse(a);
        detail::check_finite(a, length);
        return OpticalField(in.grid, std::move(a));
    }

    // Adaptive: each slice length bounds the peak nonlinear phase gamma*Pmax*h.
    const auto next_step = [&](double remaining) {
        const double nl_rate = gamma * detail::peak_norm(a);
        if (nl_rate <= 0.0)
            return remaining;
        const double h = opt.max_nl_phase / nl_rate;
        // absorb a sliver at the end rather than taking a vanishing final step
        return h >= remaining * (1.0 - 1e-9) ? remaining : h;
    };

    double z = 0.0;
    double h = next_step(length);
    fft.forward(a);
    lin.apply(a, 0.5 * h);
    while (true) {
        fft.inverse(a);
        detail::check_finite(a, z);
        nonlinear(h);
        z += h;
        const double remaining = length - z;
        fft.forward(a);
        if (remaining <= length * 1e-12) {
            lin.apply(a, 0.5 * h);
            break;
        }
        const double h_next = next_step(remaining);
        lin.apply(a, 0.5 * (h + h_next));
        h = h_next;
    }
    fft.inverse(a);
    detail::check_finite(a, length);
    return OpticalField(in.grid, std::move(a));
}

/// Lumped amplifier. restore_power picks G so the mark-level power reaches the target;
/// ASE adds circular Gaussian noise of PSD (G-1) nsp h nu over the simulation bandwidth.
inline OpticalField amplify(const OpticalField& in, const AmplifierParams& amp, Rng& rng)
{
    amp.validate();
    double gain = 1.0;
    if (amp.mode == AmpMode::fixed_gain) {
        gain = db_to_linear(amp.gain_db);
    } else {
        const double p = mark_power(in);
        if (!(p > 0.0))
            throw PropagationError("amplify: cannot restore power of an all-zero field");
        gain = dbm_to_watts(amp.target_dbm) / p;
    }

    OpticalField out(in.grid);
    const double g = std::sqrt(gain);
    for (std::size_t i = 0; i < in.samples.size(); ++i)
        out.samples[i] = in.samples[i] * g;

    if (amp.ase_enabled && gain > 1.0) {
        const double nsp = db_to_linear(amp.noise_figure_db) / 2.0;
        const double psd = (gain - 1.0) * nsp * kPlanck * in.grid.carrier_frequency();
        const double var = psd * in.grid.simulation_bandwidth();
        std::normal_distribution<double> n(0.0, std::sqrt(0.5 * var));
        for (auto& s : out.samples) {
            const double re = n(rng);
            const double im = n(rng);
            s += Complex(re, im);
        }
    }
    return out;
}

} // namespace optlink
