#pragma once

// Dense real-matrix kernel: induced infinity norms, matrix exponential,
// quadrature of s -> ||e^{As} D||, symmetric eigen-extremes, discrete
// Lyapunov solution and Schur-stability testing.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace qrate {

using Vector = std::vector<double>;

/// Execution policy for the data-parallel kernels. `serial` is the reference
/// path; `parallel` distributes independent work items with OpenMP and must
/// produce bit-identical results.
enum class Exec { serial, parallel };

/// Row-major dense matrix of finite doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diag(std::span<const double> d);
    static Matrix column(std::span<const double> v);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }

    [[nodiscard]] Matrix transpose() const;
    [[nodiscard]] bool all_finite() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> v);

// Small vector helpers; Vector is a plain std::vector so these are free functions.
Vector vec_sub(std::span<const double> a, std::span<const double> b);
Vector vec_add(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);
/// v^T M v
double quad_form(const Matrix& m, std::span<const double> v);

double inf_norm(std::span<const double> v);
double inf_norm(const Matrix& m);

/// e^{M t}; relative accuracy ~1e-12 in the infinity norm.
Matrix expm(const Matrix& m, double t = 1.0);

/// Composite Simpson quadrature of s -> ||e^{A s} D|| over [0, tau_s], doubling
/// the panel count until successive estimates agree to 1e-10 relative.
double phi_integral(const Matrix& a, const Matrix& d, double tau_s, Exec exec = Exec::parallel);

/// max_{0 <= s <= tau_s} ||e^{M s}|| over a grid refined until the maximum
/// changes by less than 1e-8 relative.
double max_norm_over_interval(const Matrix& m, double tau_s, Exec exec = Exec::parallel);

/// (lambda_min, lambda_max) of a symmetric matrix, cyclic Jacobi.
std::pair<double, double> sym_eig_extremes(const Matrix& m);

/// True iff the spectral radius is below 1 - 1e-9.
bool is_schur_stable(const Matrix& s);

/// Solves S^T P S - P = -Q for symmetric positive-definite P.
Matrix dlyap(const Matrix& s, const Matrix& q);

bool is_symmetric(const Matrix& m, double tol = 1e-10);

}  // namespace qrate
