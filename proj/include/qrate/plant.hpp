#pragma once

// Continuous-time closed loop: the plant driven by u = K x_hat, the
// controller's auxiliary copy x_hat, and the sampled encoder/decoder
// exchange that ties them together.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qrate/codec.hpp"
#include "qrate/design.hpp"
#include "qrate/disturbance.hpp"

namespace qrate {

struct SampleRecord {
    std::uint64_t k = 0;
    double t = 0.0;
    Vector x;          // x(t_k)
    Vector x_hat;      // x_hat(t_k) after the reset
    Vector x_hat_end;  // x_hat(t_{k+1}^-)
    Vector x_end;      // x(t_{k+1})
    Vector x_star;     // x*_k
    Vector center;     // c_k; empty for the overflow symbol
    Symbol symbol;
    Stage stage = Stage::none;
    double E = 0.0;
    double V = 0.0;
    double d_sup_prev = 0.0;  // ||d|| over [t_{k-1}, t_k]; 0 at k = 0
    double d_sup_next = 0.0;  // ||d|| over [t_k, t_{k+1}]

    [[nodiscard]] bool visible() const noexcept { return !symbol.overflow(); }
};

struct DenseRecord {
    std::uint64_t k = 0;  // sampling interval the point belongs to
    double t = 0.0;
    Vector x;
    Vector x_hat;
    Vector u;
};

enum class EventKind { captured, escaped };

std::string_view to_string(EventKind e) noexcept;

struct Event {
    EventKind kind = EventKind::captured;
    std::uint64_t k = 0;
    double t = 0.0;
};

struct TrajectoryLog {
    std::size_t nx = 0;
    int N = 2;
    double tau_s = 0.0;
    Vector x0;
    double horizon = 0.0;
    std::vector<SampleRecord> samples;
    std::vector<DenseRecord> dense;
    std::vector<Event> events;
};

struct RunOptions {
    int substeps = 100;   // RK4 steps / ZOH grid per sampling period
    int decimation = 1;   // keep every n-th dense point
    /// Called after each exchange with the encoder and decoder states.
    std::function<void(const CodecState& encoder, const CodecState& decoder)> observer;
};

/// Endpoint values of one sampling interval.
struct IntervalResult {
    Vector x_end;
    Vector x_hat_end;
};

/// Integrates x' = A x + B u + D d and the auxiliary system over one period.
/// Piecewise-constant disturbances are stepped exactly with the matrix
/// exponential of the augmented system, split at every discontinuity;
/// other signals use fixed-step RK4.
class ClosedLoopIntegrator {
public:
    ClosedLoopIntegrator(const PlantModel& plant, int substeps);

    /// `stabilizing` selects u = K x_hat and x_hat' = (A+BK) x_hat; otherwise
    /// u = 0 and x_hat' = A x_hat. Dense points (including both endpoints) are
    /// appended to `dense` when it is non-null.
    IntervalResult step(std::span<const double> x, std::span<const double> x_hat, bool stabilizing,
                        const DisturbanceSignal& sig, double t_k, std::uint64_t k, int decimation,
                        std::vector<DenseRecord>* dense) const;

    [[nodiscard]] int substeps() const noexcept { return substeps_; }

private:
    [[nodiscard]] Matrix generator(bool stabilizing) const;
    void propagate_exact(Vector& z, const Matrix& gen, double len, std::span<const double> d) const;

    PlantModel plant_;
    int substeps_;
    double h_;
    Matrix gen_stab_;
    Matrix gen_search_;
    Matrix step_stab_;    // e^{gen_stab h}
    Matrix step_search_;  // e^{gen_search h}
};

IntervalResult step_interval(const PlantModel& m, std::span<const double> x, std::span<const double> x_hat,
                             Stage stage, const DisturbanceSignal& sig, double t_k, int substeps = 100,
                             std::vector<DenseRecord>* dense = nullptr);

/// Runs the sampled protocol from x0 over [0, horizon]. Throws
/// std::logic_error if the encoder and decoder states ever diverge.
TrajectoryLog run_closed_loop(const PlantModel& m, const DesignParams& p, const DerivedConstants& d,
                              const DisturbanceSignal& sig, std::span<const double> x0, double horizon,
                              const RunOptions& options = {});

}  // namespace qrate
