#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "qrate/matnum.hpp"

namespace qrate {

struct ZeroSignal {};

struct ConstantSignal {
    Vector level;
};

/// Active on [start, end).
struct Pulse {
    double start = 0.0;
    double end = 0.0;
    Vector level;
};

struct PulseTrainSignal {
    std::vector<Pulse> pulses;
};

/// d_c(t) = amplitude_c * sin(2 pi f t + phase); all channels share f and phase.
struct SinusoidSignal {
    Vector amplitude;
    double frequency_hz = 1.0;
    double phase = 0.0;
};

/// Piecewise constant on [m h, (m+1) h); each value is uniform on
/// [-bound, bound], drawn from a generator keyed by (seed, m) so any
/// interval can be evaluated without replaying the sequence.
struct SeededUniformSignal {
    double bound = 0.0;
    std::uint64_t seed = 0;
    double hold = 0.1;
};

/// Declarative disturbance d(.) with exact interval sup-norms.
class DisturbanceSignal {
public:
    using Kind = std::variant<ZeroSignal, ConstantSignal, PulseTrainSignal, SinusoidSignal, SeededUniformSignal>;

    DisturbanceSignal() = default;
    DisturbanceSignal(std::size_t channels, Kind kind);

    static DisturbanceSignal zero(std::size_t channels) { return {channels, ZeroSignal{}}; }

    [[nodiscard]] std::size_t channels() const noexcept { return channels_; }
    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }
    [[nodiscard]] std::string kind_name() const;

    /// Right-continuous value d(t).
    [[nodiscard]] Vector value(double t) const;

    /// ess sup over [a, b] of |d(t)|_inf. For a == b the value at a.
    /// Throws std::invalid_argument when b < a.
    [[nodiscard]] double sup_norm_on(double a, double b) const;

    /// True when d is constant between consecutive breakpoints.
    [[nodiscard]] bool piecewise_constant() const noexcept;

    /// Discontinuity times strictly inside (a, b), ascending.
    [[nodiscard]] std::vector<double> breakpoints(double a, double b) const;

    /// Times where a disturbance switches on (for plot markers).
    [[nodiscard]] std::vector<double> onsets(double horizon) const;

    /// Replaces the seed of a SeededUniform signal; no-op otherwise.
    void reseed(std::uint64_t seed);

    friend bool operator==(const DisturbanceSignal&, const DisturbanceSignal&);

private:
    std::size_t channels_ = 1;
    Kind kind_ = ZeroSignal{};
};

double sup_norm_on(const DisturbanceSignal& sig, double a, double b);

}  // namespace qrate
