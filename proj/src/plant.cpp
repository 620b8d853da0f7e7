#include "qrate/plant.hpp"

#include <cmath>
#include <stdexcept>

namespace qrate {

std::string_view to_string(EventKind e) noexcept {
    return e == EventKind::captured ? "Captured" : "Escaped";
}

ClosedLoopIntegrator::ClosedLoopIntegrator(const PlantModel& plant, int substeps)
    : plant_(plant), substeps_(substeps) {
    plant_.validate();
    if (substeps_ < 1) {
        throw std::invalid_argument("ClosedLoopIntegrator: substeps must be positive");
    }
    h_ = plant_.tau_s / substeps_;
    gen_stab_ = generator(true);
    gen_search_ = generator(false);
    step_stab_ = expm(gen_stab_, h_);
    step_search_ = expm(gen_search_, h_);
}

// Generator of z = [x; x_hat; d] with d held constant.
Matrix ClosedLoopIntegrator::generator(bool stabilizing) const {
    const std::size_t n = plant_.nx();
    const std::size_t nd = plant_.nd();
    Matrix g(2 * n + nd, 2 * n + nd);
    const Matrix bk = plant_.B * plant_.K;
    const Matrix aux = stabilizing ? plant_.A + bk : plant_.A;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            g(i, j) = plant_.A(i, j);
            g(i, n + j) = stabilizing ? bk(i, j) : 0.0;
            g(n + i, n + j) = aux(i, j);
        }
        for (std::size_t j = 0; j < nd; ++j) {
            g(i, 2 * n + j) = plant_.D(i, j);
        }
    }
    return g;
}

void ClosedLoopIntegrator::propagate_exact(Vector& z, const Matrix& gen, double len, std::span<const double> d) const {
    const std::size_t n = plant_.nx();
    std::copy(d.begin(), d.end(), z.begin() + static_cast<std::ptrdiff_t>(2 * n));
    z = expm(gen, len) * z;
}

IntervalResult ClosedLoopIntegrator::step(std::span<const double> x, std::span<const double> x_hat, bool stabilizing,
                                          const DisturbanceSignal& sig, double t_k, std::uint64_t k, int decimation,
                                          std::vector<DenseRecord>* dense) const {
    const std::size_t n = plant_.nx();
    const std::size_t nd = plant_.nd();
    if (x.size() != n || x_hat.size() != n) {
        throw std::invalid_argument("ClosedLoopIntegrator::step: state dimension mismatch");
    }
    if (sig.channels() != nd) {
        throw std::invalid_argument("ClosedLoopIntegrator::step: disturbance has the wrong channel count");
    }
    decimation = std::max(decimation, 1);

    const Matrix& gen = stabilizing ? gen_stab_ : gen_search_;
    const Matrix& step_h = stabilizing ? step_stab_ : step_search_;

    Vector z(2 * n + nd, 0.0);
    std::copy(x.begin(), x.end(), z.begin());
    std::copy(x_hat.begin(), x_hat.end(), z.begin() + static_cast<std::ptrdiff_t>(n));

    auto record = [&](double t) {
        if (dense == nullptr) {
            return;
        }
        DenseRecord r;
        r.k = k;
        r.t = t;
        r.x.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
        r.x_hat.assign(z.begin() + static_cast<std::ptrdiff_t>(n), z.begin() + static_cast<std::ptrdiff_t>(2 * n));
        r.u = stabilizing ? plant_.K * r.x_hat : Vector(plant_.nu(), 0.0);
        dense->push_back(std::move(r));
    };

    // z' = gen z with the d-slot refreshed at time t; only the first 2n rows matter.
    auto rhs = [&](const Vector& state, double t) {
        Vector zz = state;
        const Vector dv = sig.value(t);
        std::copy(dv.begin(), dv.end(), zz.begin() + static_cast<std::ptrdiff_t>(2 * n));
        Vector out = gen * zz;
        std::fill(out.begin() + static_cast<std::ptrdiff_t>(2 * n), out.end(), 0.0);
        return out;
    };

    record(t_k);
    for (int i = 0; i < substeps_; ++i) {
        const double s0 = t_k + i * h_;
        const double s1 = t_k + (i + 1) * h_;
        if (sig.piecewise_constant()) {
            const std::vector<double> cuts = sig.breakpoints(s0, s1);
            if (cuts.empty()) {
                const Vector dv = sig.value(0.5 * (s0 + s1));
                std::copy(dv.begin(), dv.end(), z.begin() + static_cast<std::ptrdiff_t>(2 * n));
                z = step_h * z;
            } else {
                double a = s0;
                for (std::size_t c = 0; c <= cuts.size(); ++c) {
                    const double b = c < cuts.size() ? cuts[c] : s1;
                    propagate_exact(z, gen, b - a, sig.value(0.5 * (a + b)));
                    a = b;
                }
            }
        } else {
            const Vector k1 = rhs(z, s0);
            Vector tmp(z.size());
            for (std::size_t j = 0; j < z.size(); ++j) tmp[j] = z[j] + 0.5 * h_ * k1[j];
            const Vector k2 = rhs(tmp, s0 + 0.5 * h_);
            for (std::size_t j = 0; j < z.size(); ++j) tmp[j] = z[j] + 0.5 * h_ * k2[j];
            const Vector k3 = rhs(tmp, s0 + 0.5 * h_);
            for (std::size_t j = 0; j < z.size(); ++j) tmp[j] = z[j] + h_ * k3[j];
            const Vector k4 = rhs(tmp, s1);
            for (std::size_t j = 0; j < z.size(); ++j) {
                z[j] += h_ / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        if ((i + 1) % decimation == 0 || i + 1 == substeps_) {
            record(s1);
        }
    }

    IntervalResult out;
    out.x_end.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
    out.x_hat_end.assign(z.begin() + static_cast<std::ptrdiff_t>(n), z.begin() + static_cast<std::ptrdiff_t>(2 * n));
    return out;
}

IntervalResult step_interval(const PlantModel& m, std::span<const double> x, std::span<const double> x_hat,
                             Stage stage, const DisturbanceSignal& sig, double t_k, int substeps,
                             std::vector<DenseRecord>* dense) {
    const ClosedLoopIntegrator integrator(m, substeps);
    return integrator.step(x, x_hat, stage == Stage::stabilizing, sig, t_k, 0, 1, dense);
}

TrajectoryLog run_closed_loop(const PlantModel& m, const DesignParams& p, const DerivedConstants& d,
                              const DisturbanceSignal& sig, std::span<const double> x0, double horizon,
                              const RunOptions& options) {
    m.validate();
    if (x0.size() != m.nx()) {
        throw std::invalid_argument("run_closed_loop: x0 has the wrong dimension");
    }
    if (d.nx != m.nx() || d.N != m.N || d.tau_s != m.tau_s) {
        throw std::invalid_argument("run_closed_loop: derived constants belong to a different plant");
    }
    if (!(horizon >= m.tau_s)) {
        throw std::invalid_argument("run_closed_loop: horizon must be at least one sampling period");
    }
    const auto samples = static_cast<std::uint64_t>(std::floor(horizon / m.tau_s + 1e-9));

    const Propagation prop = make_propagation(d, p);
    const CodecState init = initial_state(m.nx(), p.E0);
    Encoder encoder(prop, init);
    Decoder decoder(prop, init);
    const ClosedLoopIntegrator integrator(m, options.substeps);

    TrajectoryLog log;
    log.nx = m.nx();
    log.N = m.N;
    log.tau_s = m.tau_s;
    log.x0.assign(x0.begin(), x0.end());
    log.horizon = static_cast<double>(samples) * m.tau_s;
    log.samples.reserve(samples);

    Vector x(x0.begin(), x0.end());
    for (std::uint64_t k = 0; k < samples; ++k) {
        const double t_k = static_cast<double>(k) * m.tau_s;
        SampleRecord rec;
        rec.k = k;
        rec.t = t_k;
        rec.x = x;
        rec.x_star = decoder.state().x_star;
        rec.E = decoder.state().E;
        rec.V = lyapunov_value(prop, rec.x_star, rec.E);

        rec.symbol = encoder.sample(x);
        const std::optional<Vector> center = decoder.receive(rec.symbol);
        if (options.observer) {
            options.observer(encoder.state(), decoder.state());
        }
        if (encoder.state() != decoder.state()) {
            throw std::logic_error("run_closed_loop: encoder and decoder diverged at k = " + std::to_string(k));
        }

        const bool stabilizing = center.has_value();
        rec.stage = stabilizing ? Stage::stabilizing : Stage::searching;
        if (stabilizing) {
            rec.center = *center;
        }
        rec.x_hat = stabilizing ? *center : rec.x_star;

        if (k > 0) {
            const bool was_visible = log.samples.back().visible();
            if (was_visible != rec.visible()) {
                log.events.push_back({rec.visible() ? EventKind::captured : EventKind::escaped, k, t_k});
            }
            rec.d_sup_prev = sig.sup_norm_on(static_cast<double>(k - 1) * m.tau_s, t_k);
        }
        const double t_next = static_cast<double>(k + 1) * m.tau_s;
        rec.d_sup_next = sig.sup_norm_on(t_k, t_next);

        const IntervalResult r =
            integrator.step(x, rec.x_hat, stabilizing, sig, t_k, k, options.decimation, &log.dense);
        rec.x_end = r.x_end;
        rec.x_hat_end = r.x_hat_end;
        x = r.x_end;
        log.samples.push_back(std::move(rec));
    }
    return log;
}

}  // namespace qrate
