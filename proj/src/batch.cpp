#include "qrate/batch.hpp"

#include <exception>

namespace qrate {

ScenarioResult run_scenario(const Scenario& sc, Exec kernels) {
    ScenarioResult out;
    out.name = sc.name;
    try {
        const DerivedConstants d = derive_constants(sc.plant, sc.design, kernels);
        RunOptions opt;
        opt.substeps = sc.substeps;
        opt.decimation = sc.decimation;
        out.log = run_closed_loop(sc.plant, sc.design, d, sc.signal, sc.x0, sc.horizon, opt);
        if (sc.check) {
            const GainConstants g = gain_constants(d, sc.design);
            const GainFunctions f(d, sc.design, g);
            out.report = check_trajectory(out.log, d, sc.design, g, f, sc.signal, sc.x0, kernels);
        }
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

std::vector<ScenarioResult> run_batch(const std::vector<Scenario>& scenarios, Exec exec) {
    std::vector<ScenarioResult> out(scenarios.size());
    const auto n = static_cast<std::ptrdiff_t>(scenarios.size());
    if (exec == Exec::parallel) {
        // Kernels stay serial inside a run so threads are spent across runs.
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = run_scenario(scenarios[static_cast<std::size_t>(i)], Exec::serial);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = run_scenario(scenarios[static_cast<std::size_t>(i)], Exec::serial);
        }
    }
    return out;
}

}  // namespace qrate
