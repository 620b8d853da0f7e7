#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "qrate/analysis.hpp"
#include "qrate/batch.hpp"
#include "qrate/design.hpp"

namespace qtest {

using namespace qrate;

// A = diag(1, -1.5), B = (1, 0.5)^T, K = (-3.5, 0), tau_s = 0.1, N = 5
inline PlantModel sec7_plant() {
    PlantModel m;
    m.A = Matrix{{1.0, 0.0}, {0.0, -1.5}};
    m.B = Matrix{{1.0}, {0.5}};
    m.D = Matrix{{1.0}, {0.0}};
    m.K = Matrix{{-3.5, 0.0}};
    m.tau_s = 0.1;
    m.N = 5;
    return m;
}

inline DesignParams sec7_raw_design() {
    DesignParams p;
    p.E0 = 0.5;
    p.eps = 0.2;
    p.delta = 0.1;
    p.psi = 0.2;
    p.rho = 0.1;
    p.phi = 0.01;
    return p;
}

inline DesignParams sec7_certified_design() { return synthesize_design(sec7_plant(), sec7_raw_design()); }

// scalar: a = ln 1.1, a + k = ln 0.5, tau_s = 1, N = 5 -> S = 0.5, Lambda = 1.1
inline PlantModel scalar_toy() {
    PlantModel m;
    m.A = Matrix{{std::log(1.1)}};
    m.B = Matrix{{1.0}};
    m.D = Matrix{{1.0}};
    m.K = Matrix{{std::log(0.5) - std::log(1.1)}};
    m.tau_s = 1.0;
    m.N = 5;
    return m;
}

inline DesignParams scalar_toy_design() {
    DesignParams p;
    p.psi = 0.2;
    p.rho = 1.0;
    p.phi = 0.01;
    return p;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale = 1.0) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = uniform(rng, -scale, scale);
    return m;
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    Vector v(n);
    for (auto& x : v) x = uniform(rng, -scale, scale);
    return v;
}

inline Matrix random_spd(std::mt19937_64& rng, std::size_t n) {
    Matrix g = random_matrix(rng, n, n);
    return g.transpose() * g + Matrix::identity(n) * 0.1;
}

// Random plant with n = 2 or 3 that satisfies both assumptions: A has modest
// eigenvalues, B = I so K = -(A + a I) places A + BK at -a I.
inline PlantModel random_plant(std::mt19937_64& rng) {
    for (;;) {
        const std::size_t n = 2 + rng() % 2;
        PlantModel m;
        m.A = random_matrix(rng, n, n, 1.0);
        m.B = Matrix::identity(n);
        m.D = random_matrix(rng, n, 1, 1.0);
        const double a = uniform(rng, 1.0, 4.0);
        m.K = (m.A + Matrix::identity(n) * a) * -1.0;
        m.tau_s = uniform(rng, 0.05, 0.2);
        m.N = 3 + static_cast<int>(rng() % 5);
        const auto [a1, a2] = check_assumptions(m);
        if (a1 && a2) return m;
    }
}

/// Certified design for m, or nothing when synthesis cannot reach nu < 1.
inline DesignParams certified_design(const PlantModel& m, const DesignParams& hints = {}) {
    DesignParams p = synthesize_design(m, hints);
    if (!validate_design(m, p).certified()) throw std::runtime_error("synthesis did not certify");
    return p;
}

}  // namespace qtest
