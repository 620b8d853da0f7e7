// Serial vs parallel timings for the OpenMP kernels. Every pair of results
// must be bit-identical; the program exits 1 otherwise.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qrate/batch.hpp"

using namespace qrate;

namespace {

template <class F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

bool failed = false;

void report(const std::string& name, double serial, double parallel, bool identical) {
    std::printf("%-28s serial %9.4f s   parallel %9.4f s   speedup %5.2fx   %s\n", name.c_str(), serial, parallel,
                serial / parallel, identical ? "identical" : "MISMATCH");
    if (!identical) failed = true;
}

PlantModel two_state() {
    PlantModel m;
    m.A = Matrix{{1.0, 0.0}, {0.0, -1.5}};
    m.B = Matrix{{1.0}, {0.5}};
    m.D = Matrix{{1.0}, {0.0}};
    m.K = Matrix{{-3.5, 0.0}};
    m.tau_s = 0.1;
    m.N = 5;
    return m;
}

DesignParams two_state_design() {
    DesignParams hints;
    hints.psi = 0.2;
    hints.phi = 0.01;
    return synthesize_design(two_state(), hints);
}

bool same_reports(const CheckReport& a, const CheckReport& b) {
    if (a.certified != b.certified || a.checks.size() != b.checks.size()) return false;
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
        const auto& x = a.checks[i];
        const auto& y = b.checks[i];
        if (x.name != y.name || x.samples_checked != y.samples_checked || x.verdict != y.verdict) return false;
        if (x.worst_margin != y.worst_margin && !(x.worst_margin != x.worst_margin && y.worst_margin != y.worst_margin))
            return false;
    }
    return true;
}

bool same_logs(const TrajectoryLog& a, const TrajectoryLog& b) {
    if (a.samples.size() != b.samples.size() || a.dense.size() != b.dense.size()) return false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const auto& x = a.samples[i];
        const auto& y = b.samples[i];
        if (x.x != y.x || x.x_star != y.x_star || x.symbol != y.symbol || x.E != y.E) return false;
    }
    for (std::size_t i = 0; i < a.dense.size(); ++i)
        if (a.dense[i].x != b.dense[i].x) return false;
    return true;
}

}  // namespace

int main() {
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-2.0, 2.0);

    {
        std::vector<Matrix> as;
        for (int i = 0; i < 50; ++i) {
            Matrix a(4, 4);
            for (auto& v : a.data()) v = u(rng);
            as.push_back(a);
        }
        const Matrix d = Matrix::identity(4);
        std::vector<double> rs(as.size()), rp(as.size());
        const double ts = best_of(3, [&] {
            for (std::size_t i = 0; i < as.size(); ++i) rs[i] = phi_integral(as[i], d, 0.5, Exec::serial);
        });
        const double tp = best_of(3, [&] {
            for (std::size_t i = 0; i < as.size(); ++i) rp[i] = phi_integral(as[i], d, 0.5, Exec::parallel);
        });
        report("phi_integral x50", ts, tp, rs == rp);

        const double ms = best_of(3, [&] {
            for (std::size_t i = 0; i < as.size(); ++i) rs[i] = max_norm_over_interval(as[i], 0.5, Exec::serial);
        });
        const double mp = best_of(3, [&] {
            for (std::size_t i = 0; i < as.size(); ++i) rp[i] = max_norm_over_interval(as[i], 0.5, Exec::parallel);
        });
        report("max_norm_over_interval x50", ms, mp, rs == rp);
    }

    const PlantModel m = two_state();
    const DesignParams p = two_state_design();
    const DerivedConstants d = derive_constants(m, p, Exec::serial);
    const GainConstants gc = gain_constants(d, p);
    const GainFunctions gf = iss_gains(d, p, gc);
    const Vector x0{1.0, 1.0};

    {
        const DisturbanceSignal sig(1, SeededUniformSignal{0.5, 7, 0.05});
        RunOptions opt;
        opt.substeps = 50;
        const TrajectoryLog log = run_closed_loop(m, p, d, sig, x0, 400.0, opt);
        CheckReport cs, cp;
        const double ts = best_of(3, [&] { cs = check_trajectory(log, d, p, gc, gf, sig, x0, Exec::serial); });
        const double tp = best_of(3, [&] { cp = check_trajectory(log, d, p, gc, gf, sig, x0, Exec::parallel); });
        report("check_trajectory 4000 smp", ts, tp, same_reports(cs, cp));
    }

    {
        std::vector<Scenario> scenarios;
        for (int i = 0; i < 32; ++i) {
            Scenario sc;
            sc.name = "run" + std::to_string(i);
            sc.plant = m;
            sc.design = p;
            sc.signal = DisturbanceSignal(1, SeededUniformSignal{0.2 + 0.02 * i, static_cast<std::uint64_t>(i), 0.1});
            sc.x0 = {u(rng), u(rng)};
            sc.horizon = 30.0;
            sc.substeps = 50;
            scenarios.push_back(sc);
        }
        std::vector<ScenarioResult> rs, rp;
        const double ts = best_of(1, [&] { rs = run_batch(scenarios, Exec::serial); });
        const double tp = best_of(1, [&] { rp = run_batch(scenarios, Exec::parallel); });
        bool same = rs.size() == rp.size();
        for (std::size_t i = 0; same && i < rs.size(); ++i) {
            same = rs[i].error == rp[i].error && same_logs(rs[i].log, rp[i].log) &&
                   rs[i].report.has_value() == rp[i].report.has_value() &&
                   (!rs[i].report || same_reports(*rs[i].report, *rp[i].report));
        }
        report("run_batch 32 scenarios", ts, tp, same);
    }
    return failed ? 1 : 0;
}
