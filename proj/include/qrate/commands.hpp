#pragma once

// Subcommands of the `qrate` executable. Each returns the process exit code:
// 0 success / certified / all checks pass, 1 failing verdict or runtime
// error, 2 usage or configuration error.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qrate/analysis.hpp"
#include "qrate/config.hpp"

namespace qrate {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

struct CommandOptions {
    std::string config;   // path or builtin:<name>
    std::string out_dir;  // empty: config output.dir, then $QRATE_OUT, then "qrate_out"
    std::optional<std::uint64_t> seed;
    std::optional<int> substeps;
    std::optional<std::uint64_t> corrupt_sample;  // halve E_k at this sample before checking
    double s_min = 1e-3;
    double s_max = 1e3;
    int points = 25;
};

/// The design actually used for a run: the configured triple, or a
/// synthesized one when the configured triple fails and the config allows it.
struct ResolvedDesign {
    DesignParams params;
    CertificateReport configured;
    CertificateReport used;
    bool synthesized = false;
};

ResolvedDesign resolve_design(const ScenarioConfig& cfg);

/// Applies --seed and --substeps.
ScenarioConfig apply_overrides(ScenarioConfig cfg, const CommandOptions& opt);

std::string resolve_out_dir(const CommandOptions& opt, const ScenarioConfig& cfg);

int cmd_validate(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_synthesize(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_simulate(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_check(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_gains(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_reproduce_paper(const CommandOptions& opt, std::ostream& out, std::ostream& err);

/// Simulates and checks several configs concurrently, each into
/// <out>/<name>/.
int cmd_batch(const std::vector<std::string>& configs, const CommandOptions& opt, std::ostream& out,
              std::ostream& err);

}  // namespace qrate
