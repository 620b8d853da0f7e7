#include <iostream>

#include "CLI11.hpp"
#include "qrate/commands.hpp"

int main(int argc, char** argv) {
    using namespace qrate;
    CLI::App app{"Quantized sampled-data control: design validation, simulation and ISS certificate checks"};
    app.require_subcommand(1);

    CommandOptions opt;
    std::uint64_t seed = 0;
    int substeps = 0;
    std::uint64_t corrupt = 0;
    std::vector<std::string> batch_configs;

    auto common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config,-c", opt.config, "scenario file or builtin:<name>");
        if (config_required) {
            c->required();
        }
        sub->add_option("--out,-o", opt.out_dir, "output directory (default: $QRATE_OUT or qrate_out)");
        sub->add_option("--seed", seed, "override the seed of a seeded_uniform disturbance");
        sub->add_option("--substeps", substeps, "integration substeps per sampling period")
            ->check(CLI::PositiveNumber);
    };

    auto* validate = app.add_subcommand("validate", "check the assumptions and design inequalities");
    common(validate, true);
    auto* synthesize = app.add_subcommand("synthesize", "pick a certified (psi, rho, phi) and write a config");
    common(synthesize, true);
    auto* simulate = app.add_subcommand("simulate", "run the closed loop and write CSV/SVG outputs");
    common(simulate, true);
    auto* check = app.add_subcommand("check", "simulate, then test every certificate inequality");
    common(check, true);
    check->add_option("--corrupt-log", corrupt, "halve E_k at this sample before checking")->group("");
    auto* gains = app.add_subcommand("gains", "tabulate the ISS gains on a log-spaced grid");
    common(gains, true);
    gains->add_option("--s-min", opt.s_min, "smallest nonzero grid point")->check(CLI::PositiveNumber);
    gains->add_option("--s-max", opt.s_max, "largest grid point")->check(CLI::PositiveNumber);
    gains->add_option("--points", opt.points, "number of nonzero grid points")->check(CLI::NonNegativeNumber);
    auto* reproduce = app.add_subcommand("reproduce-paper", "run and check the bundled simulation example");
    common(reproduce, false);
    reproduce->add_option("--corrupt-log", corrupt, "halve E_k at this sample before checking")->group("");
    auto* batch = app.add_subcommand("batch", "simulate and check several scenarios concurrently");
    batch->add_option("configs", batch_configs, "scenario files or builtin:<name>")->required();
    batch->add_option("--out,-o", opt.out_dir, "root output directory");
    batch->add_option("--seed", seed, "override the seed of seeded_uniform disturbances");
    batch->add_option("--substeps", substeps, "integration substeps per sampling period")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    for (CLI::App* sub : app.get_subcommands()) {
        if (sub->count("--seed") > 0) {
            opt.seed = seed;
        }
        if (sub->count("--substeps") > 0) {
            opt.substeps = substeps;
        }
        if (sub->get_option_no_throw("--corrupt-log") != nullptr && sub->count("--corrupt-log") > 0) {
            opt.corrupt_sample = corrupt;
        }
    }

    if (*validate) return cmd_validate(opt, std::cout, std::cerr);
    if (*synthesize) return cmd_synthesize(opt, std::cout, std::cerr);
    if (*simulate) return cmd_simulate(opt, std::cout, std::cerr);
    if (*check) return cmd_check(opt, std::cout, std::cerr);
    if (*gains) return cmd_gains(opt, std::cout, std::cerr);
    if (*reproduce) return cmd_reproduce_paper(opt, std::cout, std::cerr);
    return cmd_batch(batch_configs, opt, std::cout, std::cerr);
}
