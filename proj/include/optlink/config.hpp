#pragma once

// Flat `key = value` configuration files mapped onto LinkConfig.
//
//   # comment
//   link.scheme = symmetric
//   dcf.pre_length_km = 30
//
// Unknown keys are rejected; missing keys keep the defaults of LinkConfig, which
// carry the standard SMF/DCF table values.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "optlink/linkmap.hpp"

namespace optlink {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, std::string key, const std::string& msg)
        : std::runtime_error(compose(line, key, msg)), line_(line), key_(std::move(key))
    {
    }
    std::size_t line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    static std::string compose(std::size_t line, const std::string& key, const std::string& msg)
    {
        std::string s = "config";
        if (line > 0)
            s += " line " + std::to_string(line);
        if (!key.empty())
            s += " key '" + key + "'";
        return s + ": " + msg;
    }
    std::size_t line_;
    std::string key_;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::optional<double> to_double(std::string_view s)
{
    if (s == "inf" || s == "+inf")
        return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+')
        ++first;
    auto [p, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

inline std::optional<std::uint64_t> to_uint(std::string_view s)
{
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

inline std::optional<bool> to_bool(std::string_view s)
{
    if (s == "true" || s == "on" || s == "yes" || s == "1")
        return true;
    if (s == "false" || s == "off" || s == "no" || s == "0")
        return false;
    return std::nullopt;
}

} // namespace detail

/// Parsed configuration plus the line each key was set on (0 = default).
struct ParsedConfig {
    LinkConfig link;
    std::map<std::string, std::size_t> lines;

    std::size_t line_of(const std::string& key) const
    {
        const auto it = lines.find(key);
        return it == lines.end() ? 0 : it->second;
    }
};

inline ParsedConfig parse_config(std::string_view text)
{
    ParsedConfig out;
    LinkConfig& c = out.link;
    std::optional<double> dcf_len, pre_len, post_len;
    std::optional<double> step_km, nl_phase;

    std::size_t line_no = 0;
    std::string key;
    std::string_view value;

    const auto fail = [&](const std::string& msg) -> void { throw ConfigError(line_no, key, msg); };
    const auto num = [&]() {
        const auto v = detail::to_double(value);
        if (!v || std::isnan(*v))
            fail("malformed number '" + std::string(value) + "'");
        return *v;
    };
    const auto finite = [&]() {
        const double v = num();
        if (!std::isfinite(v))
            fail("value must be finite");
        return v;
    };
    const auto non_negative = [&]() {
        const double v = finite();
        if (v < 0.0)
            fail("value must be >= 0");
        return v;
    };
    const auto positive = [&]() {
        const double v = finite();
        if (!(v > 0.0))
            fail("value must be > 0");
        return v;
    };
    const auto uint = [&]() {
        const auto v = detail::to_uint(value);
        if (!v)
            fail("malformed integer '" + std::string(value) + "'");
        return *v;
    };
    const auto boolean = [&]() {
        const auto v = detail::to_bool(value);
        if (!v)
            fail("malformed boolean '" + std::string(value) + "'");
        return *v;
    };
    const auto dispersion = [&]() {
        const double v = finite();
        if (std::abs(v) > 200.0)
            fail("|dispersion| must be <= 200 ps/(nm km)");
        return v;
    };

    using Setter = std::function<void()>;
    const std::map<std::string, Setter, std::less<>> setters = {
        {"link.scheme",
         [&] {
             if (value == "pre")
                 c.scheme = Scheme::pre;
             else if (value == "post")
                 c.scheme = Scheme::post;
             else if (value == "symmetric")
                 c.scheme = Scheme::symmetric;
             else
                 fail("expected pre, post or symmetric");
         }},
        {"link.n_smf_spans",
         [&] {
             const auto v = uint();
             if (v < 1 || v > 1000)
                 fail("must lie in [1, 1000]");
             c.n_smf_spans = static_cast<int>(v);
         }},
        {"smf.length_km", [&] { c.smf.length_km = non_negative(); }},
        {"smf.dispersion_ps_nm_km", [&] { c.smf.dispersion = dispersion(); }},
        {"smf.loss_db_km", [&] { c.smf.loss_db_km = non_negative(); }},
        {"smf.gamma_per_w_km", [&] { c.smf.gamma = non_negative(); }},
        {"dcf.length_km", [&] { dcf_len = non_negative(); }},
        {"dcf.dispersion_ps_nm_km", [&] { c.dcf.dispersion = dispersion(); }},
        {"dcf.loss_db_km", [&] { c.dcf.loss_db_km = non_negative(); }},
        {"dcf.gamma_per_w_km", [&] { c.dcf.gamma = non_negative(); }},
        {"dcf.pre_length_km", [&] { pre_len = non_negative(); }},
        {"dcf.post_length_km", [&] { post_len = non_negative(); }},
        {"tx.bit_rate_gbps", [&] { c.tx.bit_rate = positive() * 1e9; }},
        {"tx.wavelength_nm", [&] { c.tx.wavelength = positive() * 1e-9; }},
        {"tx.power_dbm", [&] { c.tx.launch_power_dbm = finite(); }},
        {"tx.linewidth_mhz", [&] { c.tx.linewidth = non_negative() * 1e6; }},
        {"tx.prbs_order",
         [&] {
             const auto v = uint();
             try {
                 prbs_feedback_tap(static_cast<int>(v));
             } catch (const std::invalid_argument&) {
                 fail("must be one of 7, 9, 11, 15, 23, 31");
             }
             c.tx.prbs_order = static_cast<int>(v);
         }},
        {"tx.rise_time_ui",
         [&] {
             const double v = finite();
             if (!(v > 0.0 && v < 0.5))
                 fail("must lie in (0, 0.5)");
             c.tx.rise_time = v;
         }},
        {"tx.extinction_db",
         [&] {
             const double v = num();
             if (!(v > 0.0))
                 fail("value must be > 0");
             c.tx.extinction_ratio_db = v;
         }},
        {"rx.responsivity_a_w", [&] { c.rx.responsivity = positive(); }},
        {"rx.thermal_psd", [&] { c.rx.thermal_noise_psd = non_negative(); }},
        {"rx.shot_noise", [&] { c.rx.shot_noise = boolean(); }},
        {"rx.bessel_order",
         [&] {
             const auto v = uint();
             if (v < 1 || v > 10)
                 fail("must lie in [1, 10]");
             c.rx.bessel_order = static_cast<int>(v);
         }},
        {"rx.bessel_bw_ghz", [&] { c.rx.bessel_bandwidth = positive() * 1e9; }},
        {"amp.mode",
         [&] {
             if (value == "restore")
                 c.amp.mode = AmpMode::restore_power;
             else if (value == "fixed")
                 c.amp.mode = AmpMode::fixed_gain;
             else
                 fail("expected restore or fixed");
         }},
        {"amp.gain_db", [&] { c.amp.gain_db = non_negative(); }},
        {"amp.noise_figure_db", [&] { c.amp.noise_figure_db = finite(); }},
        {"amp.ase", [&] { c.amp.ase_enabled = boolean(); }},
        {"sim.n_bits", [&] { c.n_bits = static_cast<std::size_t>(uint()); }},
        {"sim.samples_per_bit", [&] { c.samples_per_bit = static_cast<std::size_t>(uint()); }},
        {"sim.step_km", [&] { step_km = positive(); }},
        {"sim.max_nl_phase_rad", [&] { nl_phase = positive(); }},
        {"sim.seed", [&] { c.seed = uint(); }},
        {"sim.skip_bits", [&] { c.skip_bits = static_cast<std::size_t>(uint()); }},
    };

    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        key.clear();
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail("expected 'key = value'");
        key = std::string(detail::trim(line.substr(0, eq)));
        value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            fail("missing key");
        const auto it = setters.find(key);
        if (it == setters.end())
            fail("unknown key");
        if (out.lines.count(key))
            fail("duplicate key (first set on line " + std::to_string(out.lines[key]) + ")");
        if (value.empty())
            fail("missing value");
        it->second();
        out.lines[key] = line_no;
    }

    // Cross-key resolution and invariants.
    const auto fail_at = [&](const std::string& k, const std::string& msg) {
        throw ConfigError(out.line_of(k), k, msg);
    };
    if (step_km && nl_phase)
        fail_at("sim.max_nl_phase_rad", "conflicts with sim.step_km; choose fixed or adaptive stepping");
    if (nl_phase)
        c.ssfm = SsfmOptions::adaptive(*nl_phase);
    else if (step_km)
        c.ssfm = SsfmOptions::fixed_step(*step_km);

    const double base_dcf = dcf_len.value_or(c.dcf.length_km);
    c.dcf.length_km = base_dcf;
    c.pre_km = pre_len.value_or(c.scheme == Scheme::post ? 0.0 : base_dcf);
    c.post_km = post_len.value_or(c.scheme == Scheme::pre ? 0.0 : base_dcf);

    try {
        c.tx.validate();
    } catch (const std::exception& e) {
        fail_at("tx.rise_time_ui", e.what());
    }
    if (c.amp.ase_enabled && c.amp.noise_figure_db < 3.0)
        fail_at("amp.noise_figure_db", "must be >= 3 dB when amp.ase is enabled");
    try {
        (void)c.grid();
    } catch (const std::exception& e) {
        fail_at(out.line_of("sim.n_bits") ? "sim.n_bits" : "sim.samples_per_bit", e.what());
    }
    const double nyquist = 0.5 * c.tx.bit_rate * static_cast<double>(c.samples_per_bit);
    if (!(c.rx.bessel_bandwidth < nyquist))
        fail_at("rx.bessel_bw_ghz", "filter bandwidth must be below the simulation Nyquist frequency");
    if (c.skip_bits >= c.n_bits)
        fail_at("sim.skip_bits", "must be smaller than sim.n_bits");
    try {
        (void)c.topology();
    } catch (const std::exception& e) {
        std::string k = "link.scheme";
        if (c.scheme == Scheme::pre && out.line_of("dcf.post_length_km"))
            k = "dcf.post_length_km";
        else if (c.scheme == Scheme::post && out.line_of("dcf.pre_length_km"))
            k = "dcf.pre_length_km";
        fail_at(k, e.what());
    }
    return out;
}

inline ParsedConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError(0, "", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

} // namespace optlink
