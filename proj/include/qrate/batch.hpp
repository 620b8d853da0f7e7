#pragma once

// Independent closed-loop runs executed serially or across OpenMP threads.

#include <optional>
#include <string>
#include <vector>

#include "qrate/analysis.hpp"

namespace qrate {

struct Scenario {
    std::string name;
    PlantModel plant;
    DesignParams design;
    DisturbanceSignal signal;
    Vector x0;
    double horizon = 1.0;
    int substeps = 100;
    int decimation = 1;
    bool check = true;
};

struct ScenarioResult {
    std::string name;
    TrajectoryLog log;
    std::optional<CheckReport> report;
    std::string error;  // non-empty when the run threw

    [[nodiscard]] bool ok() const noexcept { return error.empty(); }
};

ScenarioResult run_scenario(const Scenario& sc, Exec kernels = Exec::serial);

/// Results come back in input order and are identical for both modes.
std::vector<ScenarioResult> run_batch(const std::vector<Scenario>& scenarios, Exec exec = Exec::parallel);

}  // namespace qrate
