#pragma once

// Eye folding and Gaussian-rail Q / BER / jitter estimation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "optlink/fft.hpp"
#include "optlink/format.hpp"
#include "optlink/signal.hpp"
#include "optlink/txchain.hpp"

namespace optlink {

inline constexpr double kBerFloor = 1e-40;
// Reported in place of an unbounded Q when the rails carry no spread at all.
inline constexpr double kMaxQ = 1e6;

struct EyeDiagram {
    SamplingGrid grid;
    std::size_t skip_bits = 0;
    std::vector<std::vector<double>> traces; // one per bit after skip_bits
    double threshold = 0.0;
    std::vector<double> crossing_times;   // s, absolute on the grid
    std::vector<double> crossing_offsets; // s, relative to the nearest bit boundary
    bool degenerate = false;

    /// Peak-to-peak spread of the crossing offsets, seconds.
    double crossing_spread() const
    {
        if (crossing_offsets.empty())
            return 0.0;
        const auto [lo, hi] = std::minmax_element(crossing_offsets.begin(), crossing_offsets.end());
        return *hi - *lo;
    }
};

struct RailStats {
    double mean_one = 0.0;
    double std_one = 0.0;
    double mean_zero = 0.0;
    double std_zero = 0.0;

    bool operator==(const RailStats&) const = default;
};

struct QResult {
    double q_linear = 0.0;
    double q_db = -std::numeric_limits<double>::infinity();
    double ber = 0.5;
    double jitter_ns = 0.0;
    double decision_phase = 0.0; // fraction of UI
    double threshold = 0.0;     // A
    RailStats rails;
    std::size_t delay_samples = 0;

    bool operator==(const QResult&) const = default;
};

inline double q_to_db(double q) { return 20.0 * std::log10(q); }
inline double db_to_q(double q_db) { return std::pow(10.0, q_db / 20.0); }

/// BER = erfc(Q / sqrt 2) / 2, floored at 1e-40.
inline double ber_from_q(double q_linear)
{
    if (!(q_linear >= 0.0))
        throw std::invalid_argument("ber_from_q: Q must be >= 0");
    const double ber = 0.5 * std::erfc(q_linear / std::numbers::sqrt2);
    return std::clamp(ber, kBerFloor, 0.5);
}

/// Slice the waveform per bit after skip_bits and locate threshold crossings.
/// With no explicit threshold the mean of the retained samples is used.
inline EyeDiagram fold_eye(const ElectricalWaveform& wave, std::size_t skip_bits,
                           std::optional<double> threshold = std::nullopt)
{
    const auto& grid = wave.grid;
    if (skip_bits >= grid.n_bits())
        throw std::invalid_argument("fold_eye: skip_bits must be < n_bits");
    const std::size_t spb = grid.samples_per_bit();
    const std::size_t first = skip_bits * spb;
    const std::size_t n = grid.n_samples();
    const auto& x = wave.samples;

    EyeDiagram eye{grid, skip_bits, {}, 0.0, {}, {}, false};
    eye.traces.reserve(grid.n_bits() - skip_bits);
    for (std::size_t b = skip_bits; b < grid.n_bits(); ++b)
        eye.traces.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(b * spb),
                                x.begin() + static_cast<std::ptrdiff_t>((b + 1) * spb));

    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = first; i < n; ++i) {
        sum += x[i];
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
    }
    eye.threshold = threshold.value_or(sum / static_cast<double>(n - first));
    if (hi - lo <= 1e-12 * std::max(std::abs(hi), std::abs(lo))) {
        eye.degenerate = true;
        return eye;
    }

    const double dt = grid.dt();
    const double ui = grid.bit_period();
    for (std::size_t i = first; i + 1 < n; ++i) {
        const double d0 = x[i] - eye.threshold;
        const double d1 = x[i + 1] - eye.threshold;
        if ((d0 < 0.0) == (d1 < 0.0))
            continue;
        const double t = (static_cast<double>(i) + d0 / (d0 - d1)) * dt;
        eye.crossing_times.push_back(t);
        eye.crossing_offsets.push_back(t - ui * std::round(t / ui));
    }
    if (eye.crossing_times.empty())
        eye.degenerate = true;
    return eye;
}

/// Ideal 0/1 square NRZ for the bit pattern on the grid.
inline std::vector<double> ideal_nrz(const BitSequence& bits, const SamplingGrid& grid)
{
    std::vector<double> out(grid.n_samples());
    const std::size_t spb = grid.samples_per_bit();
    for (std::size_t b = 0; b < grid.n_bits(); ++b)
        std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(b * spb), spb, static_cast<double>(bits[b]));
    return out;
}

/// Circular lag (in samples) maximizing sum_n w[n + lag] * ideal[n].
inline std::size_t estimate_delay(const ElectricalWaveform& wave, const BitSequence& bits)
{
    const auto& grid = wave.grid;
    const auto ideal = ideal_nrz(bits, grid);
    const std::size_t n = grid.n_samples();
    const auto centered = [n](const std::vector<double>& v) {
        double m = 0.0;
        for (double s : v)
            m += s;
        m /= static_cast<double>(n);
        std::vector<Complex> c(n);
        for (std::size_t i = 0; i < n; ++i)
            c[i] = v[i] - m;
        return c;
    };
    auto w = centered(wave.samples);
    auto r = centered(ideal);
    FftPlan fft(n);
    fft.forward(w);
    fft.forward(r);
    for (std::size_t k = 0; k < n; ++k)
        w[k] *= std::conj(r[k]);
    fft.inverse(w);
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (w[i].real() > w[best].real())
            best = i;
    return best;
}

/// Rotate the waveform so that sample n holds wave[n + lag].
inline ElectricalWaveform align(const ElectricalWaveform& wave, std::size_t lag)
{
    ElectricalWaveform out(wave.grid);
    const std::size_t n = wave.samples.size();
    for (std::size_t i = 0; i < n; ++i)
        out.samples[i] = wave.samples[(i + lag) % n];
    return out;
}

namespace detail {
inline void mean_std(const std::vector<double>& v, double& mean, double& sd)
{
    double m = 0.0;
    for (double s : v)
        m += s;
    m /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double s : v)
        acc += (s - m) * (s - m);
    mean = m;
    sd = std::sqrt(acc / static_cast<double>(v.size()));
}
} // namespace detail

/// Gaussian-rail Q at the best sampling phase. The waveform is first rotated onto
/// the transmitted pattern by cross-correlation, which removes the link delay.
inline QResult estimate_q(const ElectricalWaveform& wave, const BitSequence& bits, std::size_t skip_bits = 8)
{
    const auto& grid = wave.grid;
    if (bits.size() != grid.n_bits())
        throw std::invalid_argument("estimate_q: bit count does not match grid");
    if (skip_bits >= grid.n_bits())
        throw std::invalid_argument("estimate_q: skip_bits must be < n_bits");
    std::size_t ones = 0;
    for (std::size_t b = skip_bits; b < bits.size(); ++b)
        ones += bits[b];
    const std::size_t zeros = bits.size() - skip_bits - ones;
    if (ones < 8 || zeros < 8)
        throw std::invalid_argument("estimate_q: insufficient statistics (" + std::to_string(ones) + " ones, " +
                                    std::to_string(zeros) + " zeros)");
    if (!wave.all_finite())
        throw std::invalid_argument("estimate_q: non-finite waveform");

    const std::size_t lag = estimate_delay(wave, bits);
    const auto aligned = align(wave, lag);
    const std::size_t spb = grid.samples_per_bit();

    QResult best;
    best.q_linear = -1.0;
    std::vector<double> rail1, rail0;
    rail1.reserve(ones);
    rail0.reserve(zeros);
    for (std::size_t p = 0; p < spb; ++p) {
        rail1.clear();
        rail0.clear();
        for (std::size_t b = skip_bits; b < grid.n_bits(); ++b)
            (bits[b] ? rail1 : rail0).push_back(aligned.samples[b * spb + p]);
        RailStats rs;
        detail::mean_std(rail1, rs.mean_one, rs.std_one);
        detail::mean_std(rail0, rs.mean_zero, rs.std_zero);
        const double spread = rs.std_one + rs.std_zero;
        const double open = rs.mean_one - rs.mean_zero;
        double q = 0.0;
        if (open > 0.0)
            q = spread > 0.0 ? std::min(open / spread, kMaxQ) : kMaxQ;
        if (q > best.q_linear) {
            best.q_linear = q;
            best.decision_phase = static_cast<double>(p) / static_cast<double>(spb);
            best.rails = rs;
        }
    }

    best.q_db = q_to_db(best.q_linear);
    best.ber = ber_from_q(best.q_linear);
    best.threshold = 0.5 * (best.rails.mean_one + best.rails.mean_zero);
    best.delay_samples = lag;
    const auto eye = fold_eye(aligned, skip_bits, best.threshold);
    best.jitter_ns = eye.crossing_spread() * 1e9;
    return best;
}

/// Plain-text eye table: trace_index sample_index time_ui amplitude.
inline void write_eye_table(std::ostream& os, const EyeDiagram& eye)
{
    os << "# trace_index sample_index time_ui amplitude\n";
    const double spb = static_cast<double>(eye.grid.samples_per_bit());
    for (std::size_t t = 0; t < eye.traces.size(); ++t)
        for (std::size_t s = 0; s < eye.traces[t].size(); ++s)
            os << t << ' ' << s << ' ' << format_double(static_cast<double>(s) / spb) << ' '
               << format_double(eye.traces[t][s]) << '\n';
}

} // namespace optlink
