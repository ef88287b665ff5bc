#include <CLI11.hpp>

#include "mos/cli.hpp"

// mos <solve|verify|analyze|denoise> <config> [--trace] [--seed N] [--out DIR]
//     [--threads N]

int main(int argc, char** argv) {
    CLI::App app{"Musielak-Orlicz energy minimization toolkit"};
    app.require_subcommand(1);

    mos::cli::CliOptions opts;
    long long seed_arg = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", opts.config_path, "run configuration (INI)")->required();
        sub->add_flag("--trace", opts.trace, "write per-iteration solver progress CSV");
        sub->add_option("--seed", seed_arg, "override the configured random seed");
        sub->add_option("--out", opts.out_dir, "output directory (default: .)");
        sub->add_option("--threads", opts.threads, "worker threads for cell loops (default: 1)");
    };

    CLI::App* solve = app.add_subcommand("solve", "minimize the singular energy");
    CLI::App* verify = app.add_subcommand("verify", "run the invariant battery");
    CLI::App* analyze = app.add_subcommand("analyze", "growth indices and conjugate table");
    CLI::App* denoise = app.add_subcommand("denoise", "variable-exponent image restoration");
    add_common(solve);
    add_common(verify);
    add_common(analyze);
    add_common(denoise);

    CLI11_PARSE(app, argc, argv);
    if (seed_arg >= 0) opts.seed = static_cast<std::uint64_t>(seed_arg);

    if (solve->parsed()) return mos::cli::cmd_solve(opts);
    if (verify->parsed()) return mos::cli::cmd_verify(opts);
    if (analyze->parsed()) return mos::cli::cmd_analyze(opts);
    if (denoise->parsed()) return mos::cli::cmd_denoise(opts);
    return 2;
}
