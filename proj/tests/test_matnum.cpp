#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qrate/matnum.hpp"
#include "support.hpp"

using namespace qrate;

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace

TEST_CASE("inf norms") {
    CHECK(inf_norm(Vector{0, 0, 0}) == 0.0);
    CHECK(inf_norm(Vector{1, -2, 0.5}) == 2.0);
    CHECK(inf_norm(Vector{-7}) == 7.0);
    CHECK(inf_norm(Matrix::identity(2)) == 1.0);
    CHECK(inf_norm(Matrix{{1, -2}, {3, 4}}) == 7.0);
    CHECK(inf_norm(Matrix{{0.5, 0}, {0, -0.9}}) == 0.9);
}

TEST_CASE("matrix construction rejects ragged rows") {
    CHECK_THROWS_AS(Matrix({{1.0, 2.0}, {3.0}}), std::invalid_argument);
}

TEST_CASE("expm closed forms") {
    CHECK(max_abs_diff(expm(Matrix(2, 2), 1.0), Matrix::identity(2)) == 0.0);

    const Matrix d = expm(Matrix{{1.0, 0.0}, {0.0, -1.5}}, 0.1);
    CHECK(d(0, 0) == doctest::Approx(std::exp(0.1)).epsilon(1e-13));
    CHECK(d(1, 1) == doctest::Approx(std::exp(-0.15)).epsilon(1e-13));
    CHECK(d(0, 1) == 0.0);
    CHECK(d(1, 0) == 0.0);

    const Matrix nil = expm(Matrix{{0.0, 1.0}, {0.0, 0.0}}, 2.0);
    CHECK(max_abs_diff(nil, Matrix{{1.0, 2.0}, {0.0, 1.0}}) < 1e-14);

    // rotation generator: e^{Jt} = [[cos, sin], [-sin, cos]]
    const Matrix rot = expm(Matrix{{0.0, 1.0}, {-1.0, 0.0}}, 3.0);
    CHECK(rot(0, 0) == doctest::Approx(std::cos(3.0)).epsilon(1e-12));
    CHECK(rot(0, 1) == doctest::Approx(std::sin(3.0)).epsilon(1e-12));

    // large norm exercises scaling and squaring
    const Matrix big = expm(Matrix{{-30.0}}, 1.0);
    CHECK(big(0, 0) == doctest::Approx(std::exp(-30.0)).epsilon(1e-12));
}

TEST_CASE("expm semigroup") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 4;
        Matrix m = qtest::random_matrix(rng, n, n) - Matrix::identity(n) * 2.5;
        const double s = qtest::uniform(rng, 0.0, 2.0);
        const double t = qtest::uniform(rng, 0.0, 2.0);
        CHECK(max_abs_diff(expm(m, s) * expm(m, t), expm(m, s + t)) < 1e-9);
    }
}

TEST_CASE("phi_integral closed forms") {
    const Matrix a0(2, 2);
    CHECK(phi_integral(a0, Matrix::identity(2), 0.5) == doctest::Approx(0.5).epsilon(1e-12));

    const Matrix a{{1.0, 0.0}, {0.0, -1.5}};
    const Matrix d{{1.0}, {0.0}};
    CHECK(phi_integral(a, d, 0.1) == doctest::Approx(std::expm1(0.1)).epsilon(1e-10));

    CHECK(phi_integral(Matrix{{-1.0}}, Matrix{{1.0}}, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-10));

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const double l = qtest::uniform(rng, -3.0, 3.0);
        const double tau = qtest::uniform(rng, 0.01, 1.5);
        const double w = qtest::uniform(rng, 0.1, 2.0);
        const double exact = w * std::expm1(l * tau) / l;
        CHECK(phi_integral(Matrix{{l}}, Matrix{{w}}, tau) == doctest::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("max_norm_over_interval") {
    CHECK(max_norm_over_interval(Matrix(2, 2), 0.7) == 1.0);
    CHECK(max_norm_over_interval(Matrix{{-1.0, 0.0}, {0.0, -2.0}}, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(max_norm_over_interval(Matrix{{1.0}}, 0.1) == doctest::Approx(std::exp(0.1)).epsilon(1e-10));
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = qtest::random_matrix(rng, 3, 3, 2.0);
        const Matrix d = qtest::random_matrix(rng, 3, 2);
        CHECK(phi_integral(a, d, 0.3, Exec::serial) == phi_integral(a, d, 0.3, Exec::parallel));
        CHECK(max_norm_over_interval(a, 0.3, Exec::serial) == max_norm_over_interval(a, 0.3, Exec::parallel));
    }
}

TEST_CASE("symmetric eigen-extremes") {
    auto [lo, hi] = sym_eig_extremes(Matrix::identity(3));
    CHECK(lo == doctest::Approx(1.0));
    CHECK(hi == doctest::Approx(1.0));
    std::tie(lo, hi) = sym_eig_extremes(Matrix{{2.0, 0.0}, {0.0, -5.0}});
    CHECK(lo == doctest::Approx(-5.0));
    CHECK(hi == doctest::Approx(2.0));
    std::tie(lo, hi) = sym_eig_extremes(Matrix{{2.0, 1.0}, {1.0, 2.0}});
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hi == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("dlyap") {
    CHECK(dlyap(Matrix{{0.0}}, Matrix{{1.0}})(0, 0) == doctest::Approx(1.0));
    CHECK(dlyap(Matrix{{0.5}}, Matrix{{1.0}})(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    const Matrix p = dlyap(Matrix{{0.5, 0.0}, {0.0, 0.2}}, Matrix::identity(2));
    CHECK(p(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(p(1, 1) == doctest::Approx(25.0 / 24.0).epsilon(1e-12));
    CHECK(std::abs(p(0, 1)) < 1e-14);

    CHECK_THROWS(dlyap(Matrix::identity(2), Matrix::identity(2)));

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 4;
        Matrix s = qtest::random_matrix(rng, n, n);
        s *= qtest::uniform(rng, 0.1, 0.95) / std::max(1.0, inf_norm(s));
        const Matrix q = qtest::random_spd(rng, n);
        const Matrix pp = dlyap(s, q);
        CHECK(is_symmetric(pp));
        CHECK(inf_norm(s.transpose() * pp * s - pp + q) <= 1e-10 * inf_norm(q));
        CHECK(sym_eig_extremes(pp).first > 0.0);
    }
}

TEST_CASE("Schur stability") {
    CHECK(is_schur_stable(Matrix::identity(2) * 0.99));
    CHECK_FALSE(is_schur_stable(Matrix::identity(2)));
    CHECK(is_schur_stable(Matrix{{0.0, 2.0}, {0.0, 0.0}}));
    CHECK_FALSE(is_schur_stable(Matrix{{0.0, 2.0}, {-2.0, 0.0}}));
}

TEST_CASE("norm inequalities and basic linear-algebra facts") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 5;
        const Matrix m = qtest::random_matrix(rng, n, n, 3.0);
        const Matrix k = qtest::random_matrix(rng, n, n, 3.0);
        const Vector v = qtest::random_vector(rng, n, 3.0);
        const Vector w = qtest::random_vector(rng, n, 3.0);
        CHECK(inf_norm(m * v) <= inf_norm(m) * inf_norm(v) * (1 + 1e-14));
        CHECK(inf_norm(m * k) <= inf_norm(m) * inf_norm(k) * (1 + 1e-14));

        const double nv = inf_norm(v);
        const double dn = static_cast<double>(n);
        CHECK(nv * nv <= dot(v, v) * (1 + 1e-14));
        CHECK(dot(v, w) <= dn * nv * inf_norm(w) * (1 + 1e-14));

        const Matrix sym = qtest::random_spd(rng, n);
        const auto [lo, hi] = sym_eig_extremes(sym);
        const double q = quad_form(sym, v);
        const double tol = 1e-12 * (std::abs(lo) + std::abs(hi) + 1.0) * dot(v, v);
        CHECK(lo * nv * nv <= q + tol);
        CHECK(q <= dn * hi * nv * nv + tol);
    }
}
