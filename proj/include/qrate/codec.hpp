#pragma once

// Sensor-side encoder and controller-side decoder. Both sides hold a
// CodecState and advance it with the same deterministic propagation after
// every symbol, so the quantization range (x*_k, E_k) is never transmitted.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "qrate/design.hpp"
#include "qrate/matnum.hpp"

namespace qrate {

enum class Stage { none, stabilizing, searching };

std::string_view to_string(Stage s) noexcept;

/// Transmitted integer. 0 = overflow, 1 = near-origin cell, 2..N^nx+1 = cells.
struct Symbol {
    std::uint64_t value = 0;

    [[nodiscard]] bool overflow() const noexcept { return value == 0; }
    [[nodiscard]] bool near_origin() const noexcept { return value == 1; }
    friend bool operator==(Symbol, Symbol) = default;
};

inline constexpr Symbol kOverflow{0};
inline constexpr Symbol kNearOrigin{1};

/// Shared bookkeeping. Before sample k is processed, `x_star` and `E` are the
/// range (x*_k, E_k), `E_prev` is E_{k-1}, and `stage` is the stage decided at
/// sample k-1 (none at k = 0); `prev_stage` is the one before that.
struct CodecState {
    std::uint64_t k = 0;
    Vector x_star;
    double E = 0.0;
    std::optional<double> E_prev;
    Stage stage = Stage::none;
    Stage prev_stage = Stage::none;

    friend bool operator==(const CodecState&, const CodecState&) = default;
};

CodecState initial_state(std::size_t nx, double E0);

/// Per-dimension cell indices in {0..N-1}, first dimension most significant.
struct CellIndex {
    std::vector<int> idx;
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Number of cells N^nx; throws std::overflow_error if the alphabet does not
/// fit in 64 bits.
std::uint64_t cell_count(int N, std::size_t nx);

std::uint64_t flatten(const CellIndex& c, int N);
CellIndex unflatten(std::uint64_t offset, int N, std::size_t nx);

/// Cell centre along one dimension.
double cell_center(double x_star_d, double E, int N, int idx) noexcept;

/// Visibility test, then the near-origin test, then the containing cell.
Symbol encode(const CodecState& state, std::span<const double> x, int N);

/// Cell centre c_k for s >= 1; throws std::invalid_argument for the overflow
/// symbol or an out-of-range value.
Vector decode_center(const CodecState& state, Symbol s, int N);

/// Parameters consumed by the propagation step.
struct Propagation {
    Matrix S;
    Matrix S_hat;
    Matrix P;
    double Lambda_eff = 0.0;
    double Phi = 0.0;
    int N = 2;
    double eps = 0.0;
    double delta = 0.0;
    double rho = 0.0;
    double phi = 0.0;
};

Propagation make_propagation(const DerivedConstants& d, const DesignParams& p);

/// V(x*, E) = x*^T P x* + rho E^2
double lyapunov_value(const Propagation& prop, std::span<const double> x_star, double E);

/// Applies the range update for symbol s at sample state.k and returns the
/// state for sample k+1. Throws std::logic_error on an escape with no E_{k-1}.
CodecState advance(const CodecState& state, Symbol s, const Propagation& prop);
inline CodecState advance(const CodecState& state, Symbol s, const DerivedConstants& d, const DesignParams& p) {
    return advance(state, s, make_propagation(d, p));
}

/// Sensor side: sees the sampled state, emits a symbol, then propagates.
class Encoder {
public:
    Encoder(Propagation prop, CodecState state) : prop_(std::move(prop)), state_(std::move(state)) {}

    Symbol sample(std::span<const double> x);
    [[nodiscard]] const CodecState& state() const noexcept { return state_; }

private:
    Propagation prop_;
    CodecState state_;
};

/// Controller side: sees only symbols.
class Decoder {
public:
    Decoder(Propagation prop, CodecState state) : prop_(std::move(prop)), state_(std::move(state)) {}

    /// Returns the cell centre for s >= 1, nothing for the overflow symbol.
    std::optional<Vector> receive(Symbol s);
    [[nodiscard]] const CodecState& state() const noexcept { return state_; }

private:
    Propagation prop_;
    CodecState state_;
};

/// u = K x_hat while stabilizing, zero while searching.
Vector controller_input(Symbol s, const Matrix& K, std::span<const double> x_hat);

}  // namespace qrate
