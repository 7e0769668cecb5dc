#include <gtest/gtest.h>

#include "optlink/propagation.hpp"
#include "oracles.hpp"
#include "test_fields.hpp"

using namespace optlink;
using namespace testing_fields;

namespace {

const SamplingGrid& pulse_grid()
{
    static const auto g = make_grid(10e9, 64, 32, 1550e-9); // 2048 samples, 6.4 ns window
    return g;
}

FiberParams lossless(double length, double d, double gamma)
{
    return FiberParams{length, d, 0.0, gamma, FiberKind::smf};
}

} // namespace

TEST(Units, Beta2Conversion)
{
    EXPECT_NEAR(d_to_beta2(16.0, 1550e-9), oracle::beta2_ps2_per_km(16.0, 1550e-9), 1e-12);
    EXPECT_NEAR(d_to_beta2(-80.0, 1550e-9), oracle::beta2_ps2_per_km(-80.0, 1550e-9), 1e-12);
    // Frozen from the oracle formula with c = 2.99792458e8.
    EXPECT_NEAR(d_to_beta2(16.0, 1550e-9), -20.407171191919897, 1e-9);
    EXPECT_NEAR(d_to_beta2(-80.0, 1550e-9), 102.03585595959949, 1e-9);
    EXPECT_EQ(d_to_beta2(0.0, 1310e-9), 0.0);
    EXPECT_THROW(d_to_beta2(16.0, 0.0), std::invalid_argument);
}

TEST(Units, LossConversion)
{
    EXPECT_NEAR(loss_db_to_alpha(0.2), 0.2 * std::log(10.0) / 10.0, 1e-16);
    EXPECT_NEAR(loss_db_to_alpha(0.2), 0.046052, 1e-6);
    EXPECT_EQ(loss_db_to_alpha(0.0), 0.0);
    EXPECT_NEAR(std::exp(-loss_db_to_alpha(0.2) * 120.0), std::pow(10.0, -2.4), 1e-15);
    EXPECT_NEAR(std::pow(10.0, -2.4), 3.981e-3, 1e-6);
    EXPECT_THROW(loss_db_to_alpha(-0.1), std::invalid_argument);
}

TEST(Fiber, ValidatesParameters)
{
    const auto f = gaussian(pulse_grid(), 1e-3, 25);
    EXPECT_THROW(propagate_fiber(f, FiberParams{-1, 16, 0.2, 1, FiberKind::smf}), std::invalid_argument);
    EXPECT_THROW(propagate_fiber(f, FiberParams{1, 16, -0.2, 1, FiberKind::smf}), std::invalid_argument);
    EXPECT_THROW(propagate_fiber(f, FiberParams{1, 16, 0.2, -1, FiberKind::smf}), std::invalid_argument);
    EXPECT_THROW(propagate_fiber(f, FiberParams{1, 250, 0.2, 1, FiberKind::smf}), std::invalid_argument);
    EXPECT_THROW(propagate_fiber(f, standard_smf(), SsfmOptions::fixed_step(0.0)), std::invalid_argument);
    EXPECT_THROW(propagate_fiber(f, standard_smf(), SsfmOptions::adaptive(-1.0)), std::invalid_argument);
}

TEST(Fiber, ZeroLengthIsIdentity)
{
    const auto f = random_field(pulse_grid(), 1e-3, 1);
    EXPECT_EQ(propagate_fiber(f, standard_smf(0.0)).samples, f.samples);
}

TEST(Fiber, GaussianDispersiveBroadening)
{
    const double t0 = 25.0;
    const double beta2 = d_to_beta2(16.0, 1550e-9);
    const double ld = t0 * t0 / std::abs(beta2);
    const auto t = centered_time_ps(pulse_grid());
    const auto in = gaussian(pulse_grid(), 1e-3, t0);
    const double w0 = oracle::rms_width(t, intensity(in));

    for (double zr : {0.5, 1.0, 1.5, 2.0}) {
        const auto out = propagate_fiber(in, lossless(zr * ld, 16.0, 0.0));
        const double expected = std::sqrt(1.0 + zr * zr);
        EXPECT_NEAR(oracle::rms_width(t, intensity(out)) / w0, expected, 0.005 * expected) << "z/LD " << zr;
        EXPECT_NEAR(peak_power(out) / peak_power(in), 1.0 / expected, 1e-3) << "z/LD " << zr;
        EXPECT_NEAR(energy(out) / energy(in), 1.0, 1e-12);
    }
}

TEST(Fiber, PureSelfPhaseModulation)
{
    const double gamma = 1.26677, z = 120.0;
    const auto in = random_field(pulse_grid(), 5e-3, 4);
    const auto out = propagate_fiber(in, lossless(z, 0.0, gamma));
    for (std::size_t i = 0; i < in.samples.size(); ++i) {
        EXPECT_NEAR(std::abs(out.samples[i]), std::abs(in.samples[i]), 1e-12);
        const double expect = gamma * std::norm(in.samples[i]) * z;
        const double got = std::arg(out.samples[i] / in.samples[i]);
        EXPECT_NEAR(std::remainder(got - expect, 2 * std::numbers::pi), 0.0, 1e-4) << i;
    }
}

TEST(Fiber, LossOnlyScaling)
{
    const auto in = random_field(pulse_grid(), 1e-3, 5);
    const FiberParams f{120.0, 0.0, 0.2, 0.0, FiberKind::smf};
    const auto out = propagate_fiber(in, f);
    const double s = std::exp(-loss_db_to_alpha(0.2) * 120.0 / 2);
    for (std::size_t i = 0; i < in.samples.size(); ++i)
        EXPECT_LT(std::abs(out.samples[i] - in.samples[i] * s), 1e-10);
}

TEST(Fiber, FundamentalSolitonKeepsShape)
{
    const double t0 = 25.0, gamma = 1.26677;
    const double beta2 = d_to_beta2(16.0, 1550e-9);
    const double p0 = std::abs(beta2) / (gamma * t0 * t0);
    const double ld = t0 * t0 / std::abs(beta2);
    const auto in = sech(pulse_grid(), p0, t0);
    const double z = 0.5 * std::numbers::pi * ld;
    const auto out = propagate_fiber(in, lossless(z, 16.0, gamma));
    EXPECT_NEAR(peak_power(out) / p0, 1.0, 0.01);

    const auto fine = propagate_fiber(in, lossless(z, 16.0, gamma), SsfmOptions::fixed_step(0.005));
    EXPECT_NEAR(peak_power(fine) / p0, 1.0, 0.01);
    // The intensity profile, not just the peak, is preserved.
    double worst = 0;
    for (std::size_t i = 0; i < in.samples.size(); ++i)
        worst = std::max(worst, std::abs(std::norm(fine.samples[i]) - std::norm(in.samples[i])) / p0);
    EXPECT_LT(worst, 0.01);
}

TEST(Fiber, AntiSolitonDisperses)
{
    // Same pulse in normal dispersion must broaden: guards the relative sign of the operators.
    const double t0 = 25.0, gamma = 1.26677;
    const double beta2 = d_to_beta2(16.0, 1550e-9);
    const double p0 = std::abs(beta2) / (gamma * t0 * t0);
    const double ld = t0 * t0 / std::abs(beta2);
    const auto in = sech(pulse_grid(), p0, t0);
    const auto out = propagate_fiber(in, lossless(0.5 * std::numbers::pi * ld, -16.0, gamma));
    EXPECT_LT(peak_power(out) / p0, 0.7);
}

// Property: the lossless SSFM is unitary for any dispersion and nonlinearity.
TEST(Fiber, LosslessEnergyConservation)
{
    const auto g = make_grid(10e9, 128, 16, 1550e-9);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto in = random_field(g, 2e-3 * static_cast<double>(seed), seed);
        for (const auto& f : {lossless(120.0, 16.0, 1.26677), lossless(24.0, -80.0, 1.8)}) {
            const auto out = propagate_fiber(in, f);
            EXPECT_NEAR(energy(out) / energy(in), 1.0, 1e-6);
        }
    }
}

TEST(Fiber, LinearCompensationRoundTrip)
{
    const auto g = make_grid(10e9, 256, 32, 1550e-9);
    const auto in = random_field(g, 1e-3, 8);
    FiberParams smf = standard_smf(120.0);
    FiberParams dcf = standard_dcf(24.0);
    smf.gamma = dcf.gamma = 0.0;
    const auto out = propagate_fiber(propagate_fiber(in, smf), dcf);
    const double s = std::exp(-(loss_db_to_alpha(0.2) * 120.0 + loss_db_to_alpha(0.6) * 24.0) / 2);
    std::vector<Complex> scaled(out.samples);
    for (auto& v : scaled)
        v /= s;
    EXPECT_LT(rel_l2(scaled, in.samples), 1e-6);
}

TEST(Fiber, SecondOrderStepConvergence)
{
    const double t0 = 25.0, gamma = 1.26677;
    const double beta2 = d_to_beta2(16.0, 1550e-9);
    const double ld = t0 * t0 / std::abs(beta2);
    const double p0 = 4.0 * std::abs(beta2) / (gamma * t0 * t0); // N = 2
    const auto in = gaussian(pulse_grid(), p0, t0);
    const auto fiber = lossless(ld, 16.0, gamma);
    const auto ref = propagate_fiber(in, fiber, SsfmOptions::fixed_step(ld / 4096));
    const auto coarse = propagate_fiber(in, fiber, SsfmOptions::fixed_step(ld / 64));
    const auto finer = propagate_fiber(in, fiber, SsfmOptions::fixed_step(ld / 128));
    const double ratio = rel_l2(coarse.samples, ref.samples) / rel_l2(finer.samples, ref.samples);
    EXPECT_GE(ratio, 3.4);
    EXPECT_LE(ratio, 4.6);
}

TEST(Fiber, AdaptiveStepMatchesFineReference)
{
    const double t0 = 25.0, gamma = 1.26677;
    const double beta2 = d_to_beta2(16.0, 1550e-9);
    const double p0 = 4.0 * std::abs(beta2) / (gamma * t0 * t0);
    const auto in = gaussian(pulse_grid(), p0, t0);
    const FiberParams fiber{30.0, 16.0, 0.2, gamma, FiberKind::smf};
    const auto ref = propagate_fiber(in, fiber, SsfmOptions::fixed_step(0.002));
    const auto ad = propagate_fiber(in, fiber, SsfmOptions::adaptive(0.005));
    EXPECT_LT(rel_l2(ad.samples, ref.samples), 1e-3);
    const auto coarse = propagate_fiber(in, fiber, SsfmOptions::adaptive(0.05));
    EXPECT_LT(rel_l2(coarse.samples, ref.samples), 0.05);
}

TEST(Fiber, AdaptiveLinearIsExact)
{
    const auto in = random_field(pulse_grid(), 1e-3, 12);
    FiberParams f = standard_smf(120.0);
    f.gamma = 0.0;
    const auto a = propagate_fiber(in, f, SsfmOptions::adaptive(0.05));
    const auto b = propagate_fiber(in, f, SsfmOptions::fixed_step(0.1));
    EXPECT_LT(rel_l2(a.samples, b.samples), 1e-9);
}

TEST(Fiber, NonFiniteAborts)
{
    auto in = random_field(pulse_grid(), 1e-3, 2);
    in.samples[10] = Complex(1e200, 0.0);
    EXPECT_THROW(propagate_fiber(in, standard_smf()), PropagationError);
    in.samples[10] = Complex(std::nan(""), 0.0);
    EXPECT_THROW(propagate_fiber(in, standard_smf()), PropagationError);
}

TEST(Amplifier, FixedGain)
{
    Rng rng(1);
    const auto in = random_field(pulse_grid(), 1e-3, 3);
    AmplifierParams amp;
    amp.mode = AmpMode::fixed_gain;
    amp.gain_db = 0.0;
    EXPECT_EQ(amplify(in, amp, rng).samples, in.samples);
    amp.gain_db = 24.0;
    EXPECT_NEAR(mean_power(amplify(in, amp, rng)) / mean_power(in), 251.18864315095797, 1e-9);
    amp.gain_db = -1.0;
    EXPECT_THROW(amplify(in, amp, rng), std::invalid_argument);
}

TEST(Amplifier, RestoreAfterSpanLoss)
{
    TxConfig cfg;
    const auto g = make_grid(cfg.bit_rate, 512, 32, cfg.wavelength);
    const auto tx = transmit(cfg, g);
    const auto lossy = propagate_fiber(tx.field, FiberParams{120.0, 0.0, 0.2, 0.0, FiberKind::smf});
    EXPECT_NEAR(watts_to_dbm(mark_power(lossy)), -24.0, 1e-9);
    Rng rng(4);
    AmplifierParams amp; // restore to 0 dBm
    const auto out = amplify(lossy, amp, rng);
    EXPECT_NEAR(mark_power(out), 1e-3, 0.01e-3);

    // With ASE the gain is unchanged and the noise adds (G-1) nsp h nu / dt on average.
    amp.ase_enabled = true;
    const auto noisy = amplify(lossy, amp, rng);
    const double gain = 1e-3 / mark_power(lossy);
    const double p_ase = (gain - 1.0) * std::pow(10.0, 0.5) / 2.0 * kPlanck * g.carrier_frequency() / g.dt();
    double noise = 0.0;
    for (std::size_t i = 0; i < g.n_samples(); ++i)
        noise += std::norm(noisy.samples[i] - out.samples[i]);
    noise /= static_cast<double>(g.n_samples());
    EXPECT_NEAR(noise / p_ase, 1.0, 0.03);
}

TEST(Amplifier, AseVarianceMatchesPsd)
{
    const auto g = make_grid(10e9, 4096, 32, 1550e-9);
    OpticalField zero(g);
    AmplifierParams amp;
    amp.mode = AmpMode::fixed_gain;
    amp.gain_db = 20.0;
    amp.ase_enabled = true;
    amp.noise_figure_db = 5.0;
    Rng rng(6);
    const auto out = amplify(zero, amp, rng);
    const double nsp = std::pow(10.0, 0.5) / 2.0;
    const double expect = (100.0 - 1.0) * nsp * kPlanck * (kSpeedOfLight / 1550e-9) / g.dt();
    EXPECT_NEAR(mean_power(out) / expect, 1.0, 0.02);

    amp.noise_figure_db = 2.0;
    EXPECT_THROW(amplify(zero, amp, rng), std::invalid_argument);
}

TEST(Amplifier, RestoreRejectsDarkField)
{
    Rng rng(1);
    EXPECT_THROW(amplify(OpticalField(pulse_grid()), AmplifierParams{}, rng), PropagationError);
}
