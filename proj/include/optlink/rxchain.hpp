#pragma once

// Receiver: square-law photodetection with thermal and shot noise, followed by an
// analog Bessel low-pass filter applied exactly on the frequency grid.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "optlink/fft.hpp"
#include "optlink/signal.hpp"
#include "optlink/txchain.hpp"

namespace optlink {

struct RxConfig {
    double responsivity = 1.0;       // A/W
    double thermal_noise_psd = 1e-11; // A/sqrt(Hz)
    bool shot_noise = true;
    int bessel_order = 4;
    double bessel_bandwidth = 8e9;   // Hz, -3 dB
    std::uint64_t rng_seed = 1;

    static RxConfig noiseless()
    {
        RxConfig c;
        c.thermal_noise_psd = 0.0;
        c.shot_noise = false;
        return c;
    }

    void validate() const
    {
        if (!(responsivity > 0.0))
            throw std::invalid_argument("rx: responsivity must be positive");
        if (!(thermal_noise_psd >= 0.0))
            throw std::invalid_argument("rx: thermal noise PSD must be >= 0");
        if (bessel_order < 1 || bessel_order > 10)
            throw std::invalid_argument("rx: bessel_order must lie in [1, 10]");
        if (!(bessel_bandwidth > 0.0))
            throw std::invalid_argument("rx: bessel bandwidth must be positive");
    }
};

/// Analog Bessel (maximally-flat group delay) low-pass, scaled to -3 dB at `bandwidth`.
class BesselFilter {
public:
    BesselFilter(int order, double bandwidth) : order_(order), bandwidth_(bandwidth)
    {
        if (order < 1 || order > 10)
            throw std::invalid_argument("bessel: order must lie in [1, 10]");
        if (!(bandwidth > 0.0))
            throw std::invalid_argument("bessel: bandwidth must be positive");
        // a_k = (2n-k)! / (2^(n-k) k! (n-k)!)
        coeffs_.resize(static_cast<std::size_t>(order) + 1);
        for (int k = 0; k <= order; ++k)
            coeffs_[static_cast<std::size_t>(k)] =
                std::exp(std::lgamma(2.0 * order - k + 1) - (order - k) * std::log(2.0) - std::lgamma(k + 1.0) -
                         std::lgamma(order - k + 1.0));
        for (auto& c : coeffs_)
            c = std::round(c); // integers; lgamma only loses the last ulp
        w3db_ = find_prototype_cutoff();
    }

    int order() const { return order_; }
    double bandwidth() const { return bandwidth_; }
    const std::vector<double>& coefficients() const { return coeffs_; }

    /// H(s) of the unit-delay prototype.
    Complex prototype(Complex s) const
    {
        Complex den = 0.0;
        for (std::size_t k = coeffs_.size(); k-- > 0;)
            den = den * s + coeffs_[k];
        return coeffs_[0] / den;
    }

    /// Response at frequency f in Hz (s = j 2 pi f).
    Complex response(double f) const { return prototype(Complex(0.0, w3db_ * f / bandwidth_)); }

    /// Radian -3 dB frequency of the unit-delay prototype.
    double prototype_cutoff() const { return w3db_; }

private:
    double find_prototype_cutoff() const
    {
        const auto mag2 = [&](double w) { return std::norm(prototype(Complex(0.0, w))); };
        double lo = 0.0, hi = 1.0;
        while (mag2(hi) > 0.5)
            hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mag2(mid) > 0.5 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    int order_;
    double bandwidth_;
    std::vector<double> coeffs_;
    double w3db_ = 1.0;
};

/// i(t) = R |E|^2 + thermal + shot. Thermal std = psd * sqrt(1/dt); shot variance
/// 2 q R |E|^2 / dt per sample.
inline ElectricalWaveform photodetect(const OpticalField& field, const RxConfig& cfg, Rng& rng)
{
    cfg.validate();
    ElectricalWaveform out(field.grid);
    const double bw = field.grid.simulation_bandwidth();
    const double thermal_std = cfg.thermal_noise_psd * std::sqrt(bw);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < field.samples.size(); ++i) {
        const double signal = cfg.responsivity * std::norm(field.samples[i]);
        double v = signal;
        if (thermal_std > 0.0)
            v += thermal_std * unit(rng);
        if (cfg.shot_noise && signal > 0.0)
            v += std::sqrt(2.0 * kElectronCharge * signal * bw) * unit(rng);
        out.samples[i] = v;
    }
    return out;
}

inline ElectricalWaveform bessel_lowpass(const ElectricalWaveform& wave, int order, double bandwidth)
{
    const double nyquist = 0.5 * wave.grid.simulation_bandwidth();
    if (!(bandwidth < nyquist))
        throw std::invalid_argument("bessel_lowpass: bandwidth " + std::to_string(bandwidth) +
                                    " Hz is not below Nyquist " + std::to_string(nyquist) + " Hz");
    const BesselFilter filter(order, bandwidth);
    const auto& grid = wave.grid;
    std::vector<Complex> buf(wave.samples.begin(), wave.samples.end());
    FftPlan fft(buf.size());
    fft.forward(buf);
    for (std::size_t k = 0; k < buf.size(); ++k)
        buf[k] *= filter.response(grid.frequency(k));
    fft.inverse(buf);
    ElectricalWaveform out(grid);
    for (std::size_t i = 0; i < buf.size(); ++i)
        out.samples[i] = buf[i].real();
    return out;
}

inline ElectricalWaveform receive(const OpticalField& field, const RxConfig& cfg, Rng& rng)
{
    return bessel_lowpass(photodetect(field, cfg, rng), cfg.bessel_order, cfg.bessel_bandwidth);
}

/// Convenience overload seeding its own generator from cfg.rng_seed.
inline ElectricalWaveform receive(const OpticalField& field, const RxConfig& cfg)
{
    Rng rng(cfg.rng_seed);
    return receive(field, cfg, rng);
}

} // namespace optlink
