#include "qrate/matnum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qrate {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw std::invalid_argument("Matrix: ragged initializer");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::diag(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        m(i, i) = d[i];
    }
    return m;
}

Matrix Matrix::column(std::span<const double> v) {
    Matrix m(v.size(), 1);
    std::copy(v.begin(), v.end(), m.data_.begin());
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            t(j, i) = (*this)(i, j);
        }
    }
    return t;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw std::invalid_argument("Matrix +=: dimension mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw std::invalid_argument("Matrix -=: dimension mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= other.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : data_) {
        x *= s;
    }
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("Matrix *: inner dimensions " + std::to_string(a.cols()) + " and " +
                                    std::to_string(b.rows()) + " differ");
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

Vector operator*(const Matrix& a, std::span<const double> v) {
    if (a.cols() != v.size()) {
        throw std::invalid_argument("Matrix * vector: dimension mismatch");
    }
    Vector out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            acc += a(i, j) * v[j];
        }
        out[i] = acc;
    }
    return out;
}

Vector vec_sub(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("vec_sub: dimension mismatch");
    }
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] - b[i];
    }
    return out;
}

Vector vec_add(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("vec_add: dimension mismatch");
    }
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] + b[i];
    }
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dot: dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double quad_form(const Matrix& m, std::span<const double> v) { return dot(v, m * v); }

double inf_norm(std::span<const double> v) {
    double best = 0.0;
    for (double x : v) {
        best = std::max(best, std::abs(x));
    }
    return best;
}

double inf_norm(const Matrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            row += std::abs(m(i, j));
        }
        best = std::max(best, row);
    }
    return best;
}

Matrix expm(const Matrix& m, double t) {
    if (!m.square()) {
        throw std::invalid_argument("expm: matrix must be square");
    }
    const std::size_t n = m.rows();
    Matrix x = m * t;
    const double norm = inf_norm(x);
    if (norm == 0.0) {
        return Matrix::identity(n);
    }

    // Scale so ||X / 2^s|| <= 1/4; the Taylor tail is then below 1e-17 after ~15 terms.
    int squarings = 0;
    if (norm > 0.25) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
        x *= std::ldexp(1.0, -squarings);
    }

    Matrix result = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= 40; ++k) {
        term = term * x;
        term *= 1.0 / k;
        result += term;
        if (inf_norm(term) <= 1e-18 * inf_norm(result)) {
            break;
        }
    }
    for (int i = 0; i < squarings; ++i) {
        result = result * result;
    }
    return result;
}

namespace {

// Cyclic Jacobi rotations on a symmetric copy; returns the diagonal once
// the off-diagonal mass is negligible.
Vector jacobi_eigenvalues(Matrix a) {
    const std::size_t n = a.rows();
    double scale = 0.0;
    for (double x : a.data()) {
        scale = std::max(scale, std::abs(x));
    }
    if (scale == 0.0) {
        return Vector(n, 0.0);
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += a(p, q) * a(p, q);
            }
        }
        if (std::sqrt(off) <= 1e-16 * scale) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Vector eig(n);
    for (std::size_t i = 0; i < n; ++i) {
        eig[i] = a(i, i);
    }
    return eig;
}

}  // namespace

bool is_symmetric(const Matrix& m, double tol) {
    if (!m.square()) {
        return false;
    }
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i + 1; j < m.cols(); ++j) {
            if (std::abs(m(i, j) - m(j, i)) > tol) {
                return false;
            }
        }
    }
    return true;
}

std::pair<double, double> sym_eig_extremes(const Matrix& m) {
    if (!is_symmetric(m)) {
        throw std::invalid_argument("sym_eig_extremes: matrix is not symmetric");
    }
    Matrix sym = m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i + 1; j < m.cols(); ++j) {
            const double avg = 0.5 * (m(i, j) + m(j, i));
            sym(i, j) = avg;
            sym(j, i) = avg;
        }
    }
    const Vector eig = jacobi_eigenvalues(std::move(sym));
    const auto [lo, hi] = std::minmax_element(eig.begin(), eig.end());
    return {*lo, *hi};
}

bool is_schur_stable(const Matrix& s) {
    if (!s.square()) {
        throw std::invalid_argument("is_schur_stable: matrix must be square");
    }
    constexpr double margin = 1e-9;
    // Track T^(2^m) = exp(log_scale) * U with ||U|| = 1, T = S / (1 - margin).
    // rho(T) < 1 iff some power has norm below one; 64 squarings settle any
    // radius farther than ~1e-19 from the threshold.
    Matrix u = s * (1.0 / (1.0 - margin));
    double norm = inf_norm(u);
    if (norm == 0.0) {
        return true;
    }
    double log_scale = std::log(norm);
    u *= 1.0 / norm;
    for (int m = 0; m < 64; ++m) {
        if (log_scale < 0.0) {
            return true;
        }
        u = u * u;
        norm = inf_norm(u);
        if (norm == 0.0) {
            return true;
        }
        log_scale = 2.0 * log_scale + std::log(norm);
        u *= 1.0 / norm;
    }
    return log_scale < 0.0;
}

Matrix dlyap(const Matrix& s, const Matrix& q) {
    if (!s.square() || !q.square() || s.rows() != q.rows()) {
        throw std::invalid_argument("dlyap: S and Q must be square of equal size");
    }
    if (!is_schur_stable(s)) {
        throw std::domain_error("dlyap: S is not Schur stable");
    }
    if (!is_symmetric(q) || sym_eig_extremes(q).first <= 0.0) {
        throw std::invalid_argument("dlyap: Q must be symmetric positive definite");
    }

    // Smith doubling: after j steps P holds the first 2^j terms of sum (S^T)^k Q S^k.
    Matrix p = q;
    Matrix a = s;
    for (int iter = 0; iter < 200; ++iter) {
        const Matrix term = a.transpose() * p * a;
        p += term;
        if (inf_norm(term) < 1e-14 * inf_norm(p)) {
            break;
        }
        a = a * a;
    }
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = i + 1; j < p.cols(); ++j) {
            const double avg = 0.5 * (p(i, j) + p(j, i));
            p(i, j) = avg;
            p(j, i) = avg;
        }
    }
    const Matrix residual = s.transpose() * p * s - p + q;
    if (inf_norm(residual) > 1e-10 * inf_norm(q)) {
        throw std::domain_error("dlyap: residual contract not met");
    }
    return p;
}

}  // namespace qrate
