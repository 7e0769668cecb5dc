#pragma once

// Dispersion-compensation topologies (pre / post / symmetric), dispersion maps,
// end-to-end link runs and DCF length sweeps.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "optlink/metrics.hpp"
#include "optlink/propagation.hpp"
#include "optlink/rxchain.hpp"
#include "optlink/signal.hpp"
#include "optlink/txchain.hpp"

namespace optlink {

enum class Scheme { pre, post, symmetric };

inline const char* to_string(Scheme s)
{
    switch (s) {
    case Scheme::pre: return "pre";
    case Scheme::post: return "post";
    case Scheme::symmetric: return "symmetric";
    }
    return "?";
}

using LinkElement = std::variant<FiberParams, AmplifierParams>;

struct LinkTopology {
    std::vector<LinkElement> elements;

    std::size_t fiber_count() const
    {
        std::size_t n = 0;
        for (const auto& e : elements)
            n += std::holds_alternative<FiberParams>(e);
        return n;
    }

    /// Concatenation: this link followed by `next`.
    LinkTopology then(const LinkTopology& next) const
    {
        LinkTopology out = *this;
        out.elements.insert(out.elements.end(), next.elements.begin(), next.elements.end());
        return out;
    }
};

/// Every fiber is followed by `amp`. pre: DCF(l_pre) then the SMF chain; post: the SMF
/// chain then DCF(l_post); symmetric: DCF(l_pre), SMF chain, DCF(l_post).
inline LinkTopology build_link(Scheme scheme, double l_pre, double l_post, const FiberParams& smf,
                               const FiberParams& dcf, int n_smf_spans, const AmplifierParams& amp = {})
{
    if (!(l_pre >= 0.0) || !(l_post >= 0.0))
        throw std::invalid_argument("build_link: DCF lengths must be >= 0");
    if (n_smf_spans < 1)
        throw std::invalid_argument("build_link: at least one SMF span is required");
    switch (scheme) {
    case Scheme::symmetric:
        if (!(l_pre > 0.0 && l_post > 0.0))
            throw std::invalid_argument("build_link: symmetric compensation needs l_pre > 0 and l_post > 0");
        break;
    case Scheme::pre:
        if (l_post != 0.0)
            throw std::invalid_argument("build_link: pre-compensation requires l_post = 0");
        break;
    case Scheme::post:
        if (l_pre != 0.0)
            throw std::invalid_argument("build_link: post-compensation requires l_pre = 0");
        break;
    }
    smf.validate();
    dcf.validate();
    amp.validate();

    LinkTopology link;
    const auto add = [&](FiberParams f) {
        f.validate();
        link.elements.emplace_back(f);
        link.elements.emplace_back(amp);
    };
    auto dcf_pre = dcf;
    dcf_pre.length_km = l_pre;
    dcf_pre.kind = FiberKind::dcf_pre;
    auto dcf_post = dcf;
    dcf_post.length_km = l_post;
    dcf_post.kind = FiberKind::dcf_post;
    auto span = smf;
    span.kind = FiberKind::smf;

    if (scheme != Scheme::post)
        add(dcf_pre);
    for (int i = 0; i < n_smf_spans; ++i)
        add(span);
    if (scheme != Scheme::pre)
        add(dcf_post);
    return link;
}

/// Accumulated dispersion sum(D * L), ps/nm.
inline double residual_dispersion(const LinkTopology& link)
{
    double acc = 0.0;
    for (const auto& e : link.elements)
        if (const auto* f = std::get_if<FiberParams>(&e))
            acc += f->dispersion * f->length_km;
    return acc;
}

struct ProfilePoint {
    double position_km = 0.0;
    double accumulated_ps_nm = 0.0;
};

/// Breakpoints of the piecewise-linear dispersion map, starting at (0, 0).
inline std::vector<ProfilePoint> dispersion_profile(const LinkTopology& link)
{
    std::vector<ProfilePoint> pts{{0.0, 0.0}};
    for (const auto& e : link.elements) {
        const auto* f = std::get_if<FiberParams>(&e);
        if (!f)
            continue;
        const auto& last = pts.back();
        pts.push_back({last.position_km + f->length_km, last.accumulated_ps_nm + f->dispersion * f->length_km});
    }
    return pts;
}

/// Everything a single end-to-end run needs.
struct LinkConfig {
    TxConfig tx;
    RxConfig rx;
    FiberParams smf = standard_smf();
    FiberParams dcf = standard_dcf();
    Scheme scheme = Scheme::symmetric;
    double pre_km = 24.0;
    double post_km = 24.0;
    int n_smf_spans = 2;
    AmplifierParams amp;       // restore mode targets tx.launch_power_dbm
    SsfmOptions ssfm;
    std::size_t n_bits = 1024;
    std::size_t samples_per_bit = 32;
    std::uint64_t seed = 1;
    std::size_t skip_bits = 8;

    SamplingGrid grid() const { return make_grid(tx.bit_rate, n_bits, samples_per_bit, tx.wavelength); }

    AmplifierParams amplifier() const
    {
        auto a = amp;
        if (a.mode == AmpMode::restore_power)
            a.target_dbm = tx.launch_power_dbm;
        return a;
    }

    LinkTopology topology() const { return build_link(scheme, pre_km, post_km, smf, dcf, n_smf_spans, amplifier()); }
};

/// splitmix64 finalizer; derives independent stream seeds from one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class LinkError : public std::runtime_error {
public:
    LinkError(std::size_t element, const std::string& what)
        : std::runtime_error("element " + std::to_string(element) + ": " + what), element_(element)
    {
    }
    std::size_t element() const { return element_; }

private:
    std::size_t element_;
};

struct LinkRun {
    QResult q;
    double residual_ps_nm = 0.0;
    Transmission tx;
    ElectricalWaveform received; // delay-aligned photocurrent after the filter
    EyeDiagram eye;
};

/// Propagate a field element by element through the topology.
inline OpticalField propagate_link(OpticalField field, const LinkTopology& link, const SsfmOptions& ssfm, Rng& amp_rng)
{
    for (std::size_t i = 0; i < link.elements.size(); ++i) {
        const auto& e = link.elements[i];
        try {
            if (const auto* f = std::get_if<FiberParams>(&e))
                field = propagate_fiber(field, *f, ssfm);
            else
                field = amplify(field, std::get<AmplifierParams>(e), amp_rng);
        } catch (const std::exception& ex) {
            throw LinkError(i, ex.what());
        }
        if (!field.all_finite())
            throw LinkError(i, "non-finite field");
    }
    return field;
}

/// transmit -> link -> receive -> estimate_q, deterministic in cfg.seed.
inline LinkRun run_link(const LinkConfig& cfg)
{
    const auto grid = cfg.grid();
    const auto link = cfg.topology();
    cfg.ssfm.validate();
    cfg.rx.validate();

    auto tx_cfg = cfg.tx;
    tx_cfg.rng_seed = derive_seed(cfg.seed, 0);
    auto rx_cfg = cfg.rx;
    rx_cfg.rng_seed = derive_seed(cfg.seed, 2);
    Rng amp_rng(derive_seed(cfg.seed, 1));

    auto tx = transmit(tx_cfg, grid);
    const auto out = propagate_link(tx.field, link, cfg.ssfm, amp_rng);
    const auto wave = receive(out, rx_cfg);
    const auto q = estimate_q(wave, tx.bits, cfg.skip_bits);
    auto aligned = align(wave, q.delay_samples);
    auto eye = fold_eye(aligned, cfg.skip_bits, q.threshold);
    return LinkRun{q, residual_dispersion(link), std::move(tx), std::move(aligned), std::move(eye)};
}

enum class Pairing { zip, cross };

struct SweepSpec {
    std::vector<double> pre_lengths;
    std::vector<double> post_lengths;
    Pairing pairing = Pairing::zip;
    LinkConfig base;
    bool seed_per_row = false; // derive a distinct seed from (base.seed, row index)
    unsigned threads = 1;      // 0 = hardware concurrency
};

struct SweepRow {
    double pre_km = 0.0;
    double post_km = 0.0;
    double residual_ps_nm = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    std::optional<QResult> result;
    std::string error;

    bool ok() const { return result.has_value(); }
};

inline std::vector<std::pair<double, double>> sweep_points(const SweepSpec& spec)
{
    if (spec.pre_lengths.empty() || spec.post_lengths.empty())
        throw std::invalid_argument("sweep: pre and post length lists must be non-empty");
    std::vector<std::pair<double, double>> pts;
    if (spec.pairing == Pairing::zip) {
        if (spec.pre_lengths.size() != spec.post_lengths.size())
            throw std::invalid_argument("sweep: zip pairing needs equally long pre and post lists");
        for (std::size_t i = 0; i < spec.pre_lengths.size(); ++i)
            pts.emplace_back(spec.pre_lengths[i], spec.post_lengths[i]);
    } else {
        for (double a : spec.pre_lengths)
            for (double b : spec.post_lengths)
                pts.emplace_back(a, b);
    }
    return pts;
}

/// One run_link per (pre, post) pair, rows in input order. Failures are recorded
/// in their row and do not stop the sweep.
inline std::vector<SweepRow> sweep(const SweepSpec& spec)
{
    const auto pts = sweep_points(spec);
    std::vector<SweepRow> rows(pts.size());

    const auto run_row = [&](std::size_t i) {
        auto& row = rows[i];
        row.pre_km = pts[i].first;
        row.post_km = pts[i].second;
        auto cfg = spec.base;
        cfg.pre_km = row.pre_km;
        cfg.post_km = row.post_km;
        cfg.seed = spec.seed_per_row ? derive_seed(spec.base.seed, 1000 + i) : spec.base.seed;
        row.seed = cfg.seed;
        try {
            row.residual_ps_nm = residual_dispersion(cfg.topology());
            row.result = run_link(cfg).q;
        } catch (const std::exception& ex) {
            row.error = ex.what();
        }
    };

    unsigned threads = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, rows.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            run_row(i);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < rows.size(); i = next++)
                run_row(i);
        });
    pool.clear();
    return rows;
}

} // namespace optlink
