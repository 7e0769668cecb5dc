#pragma once

// run / sweep / profile commands and their CSV and eye-table outputs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "optlink/config.hpp"
#include "optlink/format.hpp"
#include "optlink/linkmap.hpp"
#include "optlink/metrics.hpp"

namespace optlink {

inline constexpr const char* kResultHeader = "pre_km,post_km,residual_ps_nm,q_db,ber,jitter_ns,seed";

inline void write_result_row(std::ostream& os, const SweepRow& row)
{
    os << format_double(row.pre_km) << ',' << format_double(row.post_km) << ','
       << format_double(row.residual_ps_nm) << ',';
    if (row.ok())
        os << format_double(row.result->q_db) << ',' << format_double(row.result->ber) << ','
           << format_double(row.result->jitter_ns);
    else
        os << "failed,failed,failed";
    os << ',' << row.seed << '\n';
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows)
{
    os << kResultHeader << '\n';
    for (const auto& r : rows)
        write_result_row(os, r);
}

inline void write_profile(std::ostream& os, const std::vector<ProfilePoint>& pts)
{
    os << "position_km,accumulated_ps_nm\n";
    for (const auto& p : pts)
        os << format_double(p.position_km) << ',' << format_double(p.accumulated_ps_nm) << '\n';
}

struct CommandIo {
    std::ostream& out = std::cout;
    std::ostream& err = std::cerr;
};

namespace detail {
inline std::ofstream open_output(const std::filesystem::path& dir, const char* name)
{
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
}
} // namespace detail

/// Single link run: result.csv + eye.txt in out_dir, summary on stdout.
inline int cmd_run(const std::string& config_path, const std::filesystem::path& out_dir,
                   std::optional<std::uint64_t> seed = std::nullopt, CommandIo io = {})
{
    try {
        auto cfg = load_config(config_path).link;
        if (seed)
            cfg.seed = *seed;
        SweepRow row{cfg.pre_km, cfg.post_km, residual_dispersion(cfg.topology()), cfg.seed, std::nullopt, {}};
        std::optional<LinkRun> run;
        try {
            run = run_link(cfg);
            row.result = run->q;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        {
            auto f = detail::open_output(out_dir, "result.csv");
            f << kResultHeader << '\n';
            write_result_row(f, row);
        }
        if (!run) {
            io.err << "run failed: " << row.error << '\n';
            return 1;
        }
        {
            auto f = detail::open_output(out_dir, "eye.txt");
            write_eye_table(f, run->eye);
        }
        io.out << "q_db " << format_double(run->q.q_db) << '\n'
               << "ber " << format_double(run->q.ber) << '\n'
               << "jitter_ns " << format_double(run->q.jitter_ns) << '\n'
               << "residual_ps_nm " << format_double(run->residual_ps_nm) << '\n';
        return 0;
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << '\n';
        return 1;
    }
}

struct SweepOptions {
    std::vector<double> pre;  // empty = config value
    std::vector<double> post; // empty = config value
    Pairing pairing = Pairing::zip;
    std::optional<std::uint64_t> seed;
    bool seed_per_row = false;
    unsigned threads = 1;
};

/// Writes sweep.csv; exit code 0 iff every row succeeded.
inline int cmd_sweep(const std::string& config_path, const SweepOptions& opt, const std::filesystem::path& out_dir,
                     CommandIo io = {})
{
    try {
        SweepSpec spec;
        spec.base = load_config(config_path).link;
        if (opt.seed)
            spec.base.seed = *opt.seed;
        spec.pre_lengths = opt.pre.empty() ? std::vector<double>{spec.base.pre_km} : opt.pre;
        spec.post_lengths = opt.post.empty() ? std::vector<double>{spec.base.post_km} : opt.post;
        spec.pairing = opt.pairing;
        spec.seed_per_row = opt.seed_per_row;
        spec.threads = opt.threads;
        const auto rows = sweep(spec);
        {
            auto f = detail::open_output(out_dir, "sweep.csv");
            write_sweep_csv(f, rows);
        }
        int failed = 0;
        for (const auto& r : rows) {
            if (!r.ok()) {
                ++failed;
                io.err << "row (" << format_double(r.pre_km) << ", " << format_double(r.post_km)
                       << ") failed: " << r.error << '\n';
            }
        }
        write_sweep_csv(io.out, rows);
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << '\n';
        return 1;
    }
}

inline int cmd_profile(const std::string& config_path, CommandIo io = {})
{
    try {
        const auto cfg = load_config(config_path).link;
        write_profile(io.out, dispersion_profile(cfg.topology()));
        return 0;
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace optlink
