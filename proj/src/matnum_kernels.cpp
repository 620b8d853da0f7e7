// Grid kernels over [0, tau_s]. Node evaluations are independent, so the
// parallel path fills the same node array with OpenMP; every reduction is
// done serially afterwards so both paths return identical bits.

#include "qrate/matnum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace qrate {

namespace {

using NodeFn = std::function<double(double)>;

// Evaluates f at a + (2i+1) h for i in [0, count).
void eval_odd_nodes(const NodeFn& f, double a, double h, std::int64_t count, std::vector<double>& out, Exec exec) {
    out.assign(static_cast<std::size_t>(count), 0.0);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < count; ++i) {
            out[static_cast<std::size_t>(i)] = f(a + static_cast<double>(2 * i + 1) * h);
        }
    } else {
        for (std::int64_t i = 0; i < count; ++i) {
            out[static_cast<std::size_t>(i)] = f(a + static_cast<double>(2 * i + 1) * h);
        }
    }
}

constexpr std::int64_t kMaxPanels = std::int64_t{1} << 22;

}  // namespace

double phi_integral(const Matrix& a, const Matrix& d, double tau_s, Exec exec) {
    if (!a.square() || a.cols() != d.rows()) {
        throw std::invalid_argument("phi_integral: A must be square with rows(D) == n_x");
    }
    if (!(tau_s > 0.0)) {
        throw std::invalid_argument("phi_integral: tau_s must be positive");
    }
    const NodeFn f = [&](double s) { return inf_norm(expm(a, s) * d); };

    // Nodes kept in two buckets: `ends` (f(0) + f(tau)), `even` interior sum and
    // `odd` interior sum. Doubling promotes odd to even and evaluates new odds.
    const double ends = f(0.0) + f(tau_s);
    std::int64_t panels = 2;
    double even = 0.0;
    std::vector<double> fresh;
    eval_odd_nodes(f, 0.0, tau_s / 2.0, 1, fresh, exec);
    double odd = fresh[0];
    double estimate = (tau_s / 6.0) * (ends + 4.0 * odd + 2.0 * even);

    while (panels < kMaxPanels) {
        panels *= 2;
        even += odd;
        const double h = tau_s / static_cast<double>(panels);
        eval_odd_nodes(f, 0.0, h, panels / 2, fresh, exec);
        odd = 0.0;
        for (double v : fresh) {
            odd += v;
        }
        const double refined = (h / 3.0) * (ends + 4.0 * odd + 2.0 * even);
        const bool converged = std::abs(refined - estimate) <= 1e-10 * std::abs(refined);
        estimate = refined;
        if (panels >= 16 && (converged || refined == 0.0)) {
            break;
        }
    }
    return estimate;
}

double max_norm_over_interval(const Matrix& m, double tau_s, Exec exec) {
    if (!m.square()) {
        throw std::invalid_argument("max_norm_over_interval: matrix must be square");
    }
    if (!(tau_s > 0.0)) {
        throw std::invalid_argument("max_norm_over_interval: tau_s must be positive");
    }
    const NodeFn f = [&](double s) { return inf_norm(expm(m, s)); };

    double best = std::max(f(0.0), f(tau_s));
    std::int64_t panels = 1;
    std::vector<double> fresh;
    while (panels < kMaxPanels) {
        panels *= 2;
        const double h = tau_s / static_cast<double>(panels);
        eval_odd_nodes(f, 0.0, h, panels / 2, fresh, exec);
        const double level = *std::max_element(fresh.begin(), fresh.end());
        const double previous = best;
        best = std::max(best, level);
        if (panels >= 64 && best - previous <= 1e-8 * best) {
            break;
        }
    }
    return best;
}

}  // namespace qrate
