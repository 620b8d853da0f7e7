#pragma once

// Scenario files: one `section.key = value` per line, `#` starts a comment.
// Values are JSON literals (numbers, booleans, strings, nested arrays); a bare
// word such as `pulse_train` is read as a string.
//
//   plant.A = [[1, 0], [0, -1.5]]
//   plant.N = 5
//   design.rho = 0.1
//   sim.x0 = [1, 1]
//   disturbance.kind = pulse_train
//   disturbance.pulses = [[10.5, 10.7, [1.5]]]

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qrate/design.hpp"
#include "qrate/disturbance.hpp"

namespace qrate {

struct ScenarioConfig {
    std::string name = "scenario";
    PlantModel plant;
    DesignParams design;
    Vector x0;
    double horizon = 1.0;
    DisturbanceSignal disturbance;
    int substeps = 100;
    int decimation = 1;
    std::string output_dir;  // empty: use --out, QRATE_OUT, or the default
    bool synthesize_if_invalid = false;

    /// Horizon and dimension checks on top of the plant/design invariants.
    void validate() const;

    friend bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);
};

/// Parse or validation failure with the offending line (0 if not tied to a
/// line) and field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string source, int line, std::string field, const std::string& message);

    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

ScenarioConfig parse_config(std::string_view text, const std::string& source = "<config>");

/// Reads a file, or a bundled scenario when `path` starts with "builtin:".
ScenarioConfig load_config(const std::string& path);

/// Canonical text form; numbers carry 17 significant digits so that
/// parse_config(serialize_config(c)) == c.
std::string serialize_config(const ScenarioConfig& c);

/// Names of the bundled scenarios and their text.
std::vector<std::string> builtin_names();
std::string builtin_text(std::string_view name);

/// printf %.17g, which round-trips every finite double.
std::string format_number(double v);

}  // namespace qrate
