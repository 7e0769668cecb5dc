#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optlink/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Single-channel 10 Gb/s NRZ fiber link simulator with DCF dispersion compensation"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = ".";
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "simulate one link and write result.csv and eye.txt");
    run->add_option("config", config, "configuration file (key = value)")->required();
    run->add_option("--out", out_dir, "output directory");
    auto* run_seed = run->add_option("--seed", seed, "override sim.seed");

    optlink::SweepOptions sweep_opt;
    std::string pairing = "zip";
    auto* sw = app.add_subcommand("sweep", "sweep DCF pre/post lengths and write sweep.csv");
    sw->add_option("config", config, "configuration file (key = value)")->required();
    sw->add_option("--pre", sweep_opt.pre, "pre-compensation DCF lengths, km")->delimiter(',');
    sw->add_option("--post", sweep_opt.post, "post-compensation DCF lengths, km")->delimiter(',');
    sw->add_option("--pairing", pairing, "zip or cross")->check(CLI::IsMember({"zip", "cross"}));
    sw->add_option("--out", out_dir, "output directory");
    auto* sw_seed = sw->add_option("--seed", seed, "override sim.seed");
    sw->add_flag("--seed-per-row", sweep_opt.seed_per_row, "derive a distinct seed for every row");
    sw->add_option("--threads", sweep_opt.threads, "worker threads (0 = all cores)");

    auto* prof = app.add_subcommand("profile", "print the accumulated dispersion map");
    prof->add_option("config", config, "configuration file (key = value)")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        std::optional<std::uint64_t> s;
        if (run_seed->count())
            s = seed;
        return optlink::cmd_run(config, out_dir, s);
    }
    if (sw->parsed()) {
        if (sw_seed->count())
            sweep_opt.seed = seed;
        sweep_opt.pairing = pairing == "cross" ? optlink::Pairing::cross : optlink::Pairing::zip;
        return optlink::cmd_sweep(config, sweep_opt, out_dir);
    }
    return optlink::cmd_profile(config);
}
