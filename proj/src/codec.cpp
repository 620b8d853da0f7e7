#include "qrate/codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qrate {

std::string_view to_string(Stage s) noexcept {
    switch (s) {
        case Stage::stabilizing:
            return "stabilizing";
        case Stage::searching:
            return "searching";
        case Stage::none:
            break;
    }
    return "none";
}

CodecState initial_state(std::size_t nx, double E0) {
    if (!(E0 > 0.0)) {
        throw std::invalid_argument("initial_state: E0 must be positive");
    }
    CodecState s;
    s.x_star.assign(nx, 0.0);
    s.E = E0;
    return s;
}

std::uint64_t cell_count(int N, std::size_t nx) {
    std::uint64_t count = 1;
    const auto n = static_cast<std::uint64_t>(N);
    for (std::size_t i = 0; i < nx; ++i) {
        // Two symbols are reserved on top of the N^nx cells.
        if (count > (std::numeric_limits<std::uint64_t>::max() - 2) / n) {
            throw std::overflow_error("cell_count: N^n_x + 2 symbols do not fit in 64 bits");
        }
        count *= n;
    }
    return count;
}

std::uint64_t flatten(const CellIndex& c, int N) {
    std::uint64_t offset = 0;
    for (int i : c.idx) {
        offset = offset * static_cast<std::uint64_t>(N) + static_cast<std::uint64_t>(i);
    }
    return offset;
}

CellIndex unflatten(std::uint64_t offset, int N, std::size_t nx) {
    CellIndex c;
    c.idx.assign(nx, 0);
    for (std::size_t i = nx; i-- > 0;) {
        c.idx[i] = static_cast<int>(offset % static_cast<std::uint64_t>(N));
        offset /= static_cast<std::uint64_t>(N);
    }
    return c;
}

double cell_center(double x_star_d, double E, int N, int idx) noexcept {
    const double offset = static_cast<double>(2 * idx + 1 - N) * E / N;
    double c = x_star_d + offset;
    // rounding of the sum can push an edge centre past (N-1)E/N; step back toward x*
    const double limit = (N - 1) * E / N;
    while (std::abs(c - x_star_d) > limit) {
        c = std::nextafter(c, x_star_d);
    }
    // edge cells: pull the centre toward the rounded face so the face point itself is covered
    if (idx == 0 || idx == N - 1) {
        const double face = idx == 0 ? x_star_d - E : x_star_d + E;
        while (std::abs(face - c) > E / N) {
            const double next = std::nextafter(c, face);
            if (std::abs(next - x_star_d) > limit) break;
            c = next;
        }
    }
    return c;
}

namespace {

// Both quantization guarantees, evaluated exactly as the checkers evaluate them.
bool cell_fits(double x_d, double x_star_d, double E, int N, int idx) {
    const double c = cell_center(x_star_d, E, N, idx);
    return std::abs(x_d - c) <= E / N && std::abs(c - x_star_d) <= (N - 1) * E / N;
}

int cell_along(double x_d, double x_star_d, double E, int N) {
    const double pos = (x_d - (x_star_d - E)) * N / (2.0 * E);
    int idx = static_cast<int>(std::floor(pos));
    idx = std::clamp(idx, 0, N - 1);
    if (cell_fits(x_d, x_star_d, E, N, idx)) {
        return idx;
    }
    // Points on a shared face can round out of both bounds for one neighbour;
    // the other neighbour then satisfies them.
    for (int alt : {idx - 1, idx + 1}) {
        if (alt >= 0 && alt < N && cell_fits(x_d, x_star_d, E, N, alt)) {
            return alt;
        }
    }
    // within rounding of the outer face: no cell certifies the point
    return -1;
}

}  // namespace

Symbol encode(const CodecState& state, std::span<const double> x, int N) {
    if (x.size() != state.x_star.size()) {
        throw std::invalid_argument("encode: state dimension mismatch");
    }
    if (inf_norm(vec_sub(x, state.x_star)) > state.E) {
        return kOverflow;
    }
    if (inf_norm(x) <= state.E / N) {
        return kNearOrigin;
    }
    CellIndex cell;
    cell.idx.resize(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
        cell.idx[d] = cell_along(x[d], state.x_star[d], state.E, N);
        if (cell.idx[d] < 0) {
            return kOverflow;
        }
    }
    return Symbol{flatten(cell, N) + 2};
}

Vector decode_center(const CodecState& state, Symbol s, int N) {
    const std::size_t nx = state.x_star.size();
    if (s.overflow()) {
        throw std::invalid_argument("decode_center: the overflow symbol carries no cell");
    }
    if (s.near_origin()) {
        return Vector(nx, 0.0);
    }
    if (s.value - 2 >= cell_count(N, nx)) {
        throw std::invalid_argument("decode_center: symbol " + std::to_string(s.value) + " out of range");
    }
    const CellIndex cell = unflatten(s.value - 2, N, nx);
    Vector c(nx);
    for (std::size_t d = 0; d < nx; ++d) {
        c[d] = cell_center(state.x_star[d], state.E, N, cell.idx[d]);
    }
    return c;
}

Propagation make_propagation(const DerivedConstants& d, const DesignParams& p) {
    return Propagation{d.S, d.S_hat, d.P, d.Lambda_eff, d.Phi, d.N, p.eps, p.delta, p.rho, p.phi};
}

double lyapunov_value(const Propagation& prop, std::span<const double> x_star, double E) {
    return quad_form(prop.P, x_star) + prop.rho * E * E;
}

CodecState advance(const CodecState& state, Symbol s, const Propagation& prop) {
    CodecState next;
    next.k = state.k + 1;
    next.E_prev = state.E;
    next.prev_stage = state.stage;

    if (!s.overflow()) {
        const Vector c = decode_center(state, s, prop.N);
        const double v = lyapunov_value(prop, state.x_star, state.E);
        next.x_star = prop.S * c;
        next.E = prop.Lambda_eff / prop.N * state.E + std::sqrt(prop.phi * v);
        next.stage = Stage::stabilizing;
        return next;
    }

    next.x_star = prop.S_hat * state.x_star;
    next.stage = Stage::searching;
    const double growth = (1.0 + prop.eps) * prop.Lambda_eff;
    const double floor_term = prop.Phi * prop.delta;
    if (state.stage == Stage::stabilizing) {
        // Escape: restart the search from the radius one sample back.
        if (!state.E_prev) {
            throw std::logic_error("advance: escape at k = 0 has no previous radius");
        }
        const double e_hat = prop.Lambda_eff / prop.N * *state.E_prev + floor_term;
        next.E = growth * e_hat + floor_term;
    } else {
        next.E = growth * state.E + floor_term;
    }
    return next;
}

Symbol Encoder::sample(std::span<const double> x) {
    const Symbol s = encode(state_, x, prop_.N);
    state_ = advance(state_, s, prop_);
    return s;
}

std::optional<Vector> Decoder::receive(Symbol s) {
    std::optional<Vector> center;
    if (!s.overflow()) {
        center = decode_center(state_, s, prop_.N);
    }
    state_ = advance(state_, s, prop_);
    return center;
}

Vector controller_input(Symbol s, const Matrix& K, std::span<const double> x_hat) {
    if (s.overflow()) {
        return Vector(K.rows(), 0.0);
    }
    return K * x_hat;
}

}  // namespace qrate
