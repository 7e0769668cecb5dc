#include <gtest/gtest.h>

#include "optlink/metrics.hpp"
#include "optlink/rxchain.hpp"
#include "oracles.hpp"
#include "test_fields.hpp"

using namespace optlink;
using namespace testing_fields;

TEST(Bessel, PrototypeCoefficients)
{
    EXPECT_EQ(BesselFilter(4, 8e9).coefficients(), (std::vector<double>{105, 105, 45, 10, 1}));
    EXPECT_EQ(BesselFilter(1, 8e9).coefficients(), (std::vector<double>{1, 1}));
    EXPECT_EQ(BesselFilter(3, 8e9).coefficients(), (std::vector<double>{15, 15, 6, 1}));
}

TEST(Bessel, NormalizationPoints)
{
    for (int order = 1; order <= 10; ++order) {
        const BesselFilter f(order, 8e9);
        EXPECT_NEAR(std::abs(f.response(0.0)), 1.0, 1e-10) << order;
        EXPECT_NEAR(std::norm(f.response(8e9)), 0.5, 0.005) << order;
    }
}

// Property: Bessel magnitude responses fall monotonically for every supported order.
TEST(Bessel, MonotonicMagnitude)
{
    for (int order = 1; order <= 10; ++order) {
        const BesselFilter f(order, 8e9);
        double prev = std::abs(f.response(0.0));
        for (double fr = 1e8; fr < 300e9; fr *= 1.05) {
            const double m = std::abs(f.response(fr));
            EXPECT_LT(m, prev) << "order " << order << " f " << fr;
            prev = m;
        }
    }
}

TEST(Bessel, StepResponseMatchesStateSpaceOracle)
{
    const auto g = make_grid(10e9, 1024, 32, 1550e-9);
    ElectricalWaveform step(g);
    for (std::size_t i = 0; i < g.n_samples() / 2; ++i)
        step.samples[i] = 1.0;
    const auto y = bessel_lowpass(step, 4, 8e9);

    const BesselFilter f(4, 8e9);
    const double w0 = 2 * std::numbers::pi * 8e9 / f.prototype_cutoff(); // rad/s per prototype unit
    const double tau = g.dt() * w0;
    const int sub = 50;
    const auto ref = oracle::bessel4_step_response(400 * tau, tau / sub);

    double peak = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < 400; ++i) {
        peak = std::max(peak, y.samples[i]);
        // A sampled step is the band-limited step centered half a sample early.
        worst = std::max(worst, std::abs(y.samples[i] - ref[i * sub + sub / 2]));
    }
    double ref_peak = 0.0;
    for (double v : ref)
        ref_peak = std::max(ref_peak, v);
    EXPECT_LT(worst, 2e-3);
    EXPECT_GT(ref_peak, 1.0);
    EXPECT_LT(ref_peak, 1.01);
    EXPECT_LT(peak, 1.01);
}

TEST(Bessel, RejectsBandwidthAboveNyquist)
{
    const auto g = make_grid(10e9, 64, 8, 1550e-9); // Nyquist 40 GHz
    ElectricalWaveform w(g);
    EXPECT_THROW(bessel_lowpass(w, 4, 40e9), std::invalid_argument);
    EXPECT_THROW(bessel_lowpass(w, 4, 50e9), std::invalid_argument);
    EXPECT_THROW(bessel_lowpass(w, 11, 8e9), std::invalid_argument);
    EXPECT_NO_THROW(bessel_lowpass(w, 4, 39e9));
}

// Property: the filter is linear in its input.
TEST(Bessel, Linearity)
{
    const auto g = make_grid(10e9, 128, 16, 1550e-9);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 5; ++trial) {
        ElectricalWaveform x(g), y(g), mix(g);
        const double a = n(rng), b = n(rng);
        for (std::size_t i = 0; i < g.n_samples(); ++i) {
            x.samples[i] = n(rng);
            y.samples[i] = n(rng);
            mix.samples[i] = a * x.samples[i] + b * y.samples[i];
        }
        const auto fx = bessel_lowpass(x, 4, 8e9);
        const auto fy = bessel_lowpass(y, 4, 8e9);
        const auto fm = bessel_lowpass(mix, 4, 8e9);
        for (std::size_t i = 0; i < g.n_samples(); ++i)
            EXPECT_NEAR(fm.samples[i], a * fx.samples[i] + b * fy.samples[i], 1e-10);
    }
}

TEST(Photodetect, NoiselessSquareLaw)
{
    const auto g = make_grid(10e9, 64, 8, 1550e-9);
    Rng rng(1);
    const auto rx = RxConfig::noiseless();
    OpticalField cw(g, std::vector<Complex>(g.n_samples(), std::sqrt(1e-3)));
    for (double v : photodetect(cw, rx, rng).samples)
        EXPECT_NEAR(v, 1e-3, 1e-18);
    for (double v : photodetect(OpticalField(g), rx, rng).samples)
        EXPECT_EQ(v, 0.0);
    // Non-negative before any noise is injected.
    for (double v : photodetect(random_field(g, 1e-3, 5), rx, rng).samples)
        EXPECT_GE(v, 0.0);
}

TEST(Photodetect, ThermalNoiseStatistics)
{
    const auto g = make_grid(10e9, 4096, 32, 1550e-9); // 131072 samples, B_sim = 320 GHz
    RxConfig rx;
    rx.shot_noise = false;
    Rng rng(8);
    const auto i = photodetect(OpticalField(g), rx, rng);
    double m = 0, s = 0;
    for (double v : i.samples)
        m += v;
    m /= static_cast<double>(i.samples.size());
    for (double v : i.samples)
        s += (v - m) * (v - m);
    s = std::sqrt(s / static_cast<double>(i.samples.size()));
    const double expect = 1e-11 * std::sqrt(320e9);
    EXPECT_NEAR(s / expect, 1.0, 0.05);
    EXPECT_NEAR(expect, 5.657e-6, 1e-9);
}

TEST(Photodetect, ShotNoiseStatistics)
{
    const auto g = make_grid(10e9, 4096, 32, 1550e-9);
    RxConfig rx;
    rx.thermal_noise_psd = 0.0;
    Rng rng(9);
    OpticalField cw(g, std::vector<Complex>(g.n_samples(), std::sqrt(1e-3)));
    const auto i = photodetect(cw, rx, rng);
    double s = 0;
    for (double v : i.samples)
        s += (v - 1e-3) * (v - 1e-3);
    s = std::sqrt(s / static_cast<double>(i.samples.size()));
    EXPECT_NEAR(s / std::sqrt(2 * kElectronCharge * 1e-3 * 320e9), 1.0, 0.05);
}

TEST(Receive, ConstantFieldPassesDc)
{
    const auto g = make_grid(10e9, 64, 32, 1550e-9);
    OpticalField cw(g, std::vector<Complex>(g.n_samples(), std::sqrt(2e-3)));
    for (double v : receive(cw, RxConfig::noiseless()).samples)
        EXPECT_NEAR(v, 2e-3, 1e-15);
}

TEST(Receive, DeterministicUnderSeed)
{
    TxConfig tx;
    const auto g = make_grid(tx.bit_rate, 256, 32, tx.wavelength);
    const auto field = transmit(tx, g).field;
    RxConfig rx;
    rx.rng_seed = 17;
    EXPECT_EQ(receive(field, rx).samples, receive(field, rx).samples);
    auto other = rx;
    other.rng_seed = 18;
    EXPECT_NE(receive(field, other).samples, receive(field, rx).samples);
}

TEST(Receive, BackToBackEyeIsOpen)
{
    TxConfig tx;
    const auto g = make_grid(tx.bit_rate, 1024, 32, tx.wavelength);
    const auto t = transmit(tx, g);
    const auto q = estimate_q(receive(t.field, RxConfig{}), t.bits);
    EXPECT_GT(q.q_linear, 6.0);
    // Regression baseline for the default back-to-back link (seed 1).
    EXPECT_GT(q.q_db, 40.0);
}
