#include "qrate/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qrate {

GainConstants gain_constants(const DerivedConstants& d, const DesignParams& p) {
    GainConstants g;
    const double n = static_cast<double>(d.nx);
    const double N = d.N;
    const double sqrt_rho = std::sqrt(p.rho);
    g.C1 = std::sqrt(n * d.lambda_max_P) + sqrt_rho;
    g.C2 = 1.0 / std::sqrt(d.lambda_min_P) + 1.0 / sqrt_rho;
    g.C3 = std::max(d.norm_S / std::sqrt(d.lambda_min_P), ((N - 1.0) * d.norm_S + d.Lambda_eff) / (N * sqrt_rho));
    g.H = 2.0 * d.norm_S + d.Lambda_eff;
    g.Gamma = std::max(1.0 / std::sqrt(p.rho * p.phi), g.C3 / std::sqrt(p.phi) + 1.0) * d.Phi;
    g.nu = d.nu;
    g.valid = d.nu > 0.0 && d.nu < 1.0;
    if (g.valid) {
        g.C = g.C1 * g.C3 / std::sqrt(d.nu);
        g.lambda = -0.5 * std::log(d.nu);
        // -1 / (2 log_nu H) with log_nu H = ln H / ln nu
        g.kappa = -std::log(d.nu) / (2.0 * std::log(g.H));
    }
    return g;
}

EtaFunctions::EtaFunctions(double eps, double r_eps) : log_base_(std::log1p(eps)), r_eps_(r_eps) {
    if (!(eps > 0.0) || !(r_eps > 1.0)) {
        throw std::invalid_argument("eta functions need eps > 0 and r_eps > 1");
    }
}

double EtaFunctions::eta_x(double s) const { return s > 1.0 ? std::ceil(std::log(s) / log_base_) : 0.0; }

double EtaFunctions::eta_d(double s) const {
    return s > 1.0 ? std::ceil(std::log(r_eps_ * s) / log_base_) : 0.0;
}

double EtaFunctions::eta_hat(double s) const {
    if (s > 1.0) {
        return std::log(r_eps_ * s) / log_base_ + 1.0;
    }
    return std::log(r_eps_) / log_base_ * s;
}

EtaFunctions eta_functions(const DerivedConstants& d, double eps) { return {eps, d.r_eps}; }

GainFunctions::GainFunctions(const DerivedConstants& d, const DesignParams& p, const GainConstants& g)
    : eta_(p.eps, d.r_eps),
      g_(g),
      Lambda_(d.Lambda_eff),
      Lambda_hat_(d.Lambda_hat),
      Phi_(d.Phi),
      N_(d.N),
      E0_(p.E0),
      delta_(p.delta),
      H_tilde_(d.H_tilde) {}

void GainFunctions::require_valid() const {
    if (!g_.valid) {
        throw std::domain_error("gain functions: nu >= 1, the stabilizing-stage gains are undefined");
    }
}

double GainFunctions::gamma0(double s, double r) const {
    const double L = std::pow(Lambda_, eta_.eta_hat(s / E0_) + eta_.eta_hat(r / delta_));
    return L * s + (L - 1.0) / (Lambda_ - 1.0) * Phi_ * r;
}

double GainFunctions::chi_E0(double E, double s, double r) const {
    const double L = std::pow(Lambda_hat_, eta_.eta_hat(s / E) + eta_.eta_hat(r / delta_));
    return L * E + (L - 1.0) / (Lambda_hat_ - 1.0) * Phi_ * delta_;
}

double GainFunctions::gamma(double s, double r) const {
    const double L = std::pow(Lambda_, 2.0 * eta_.eta_hat(r / delta_) + 1.0);
    return L * s + (L - 1.0) / (Lambda_ - 1.0) * Phi_ * r;
}

double GainFunctions::chi_E(double E, double s) const {
    const double L = std::pow(Lambda_hat_, 2.0 * eta_.eta_hat(s / delta_) + 1.0);
    return L * Lambda_ / N_ * E + (L - 1.0) / (Lambda_hat_ - 1.0) * Phi_ * delta_;
}

double GainFunctions::chi_x1(double E, double s) const {
    require_valid();
    return g_.C1 * g_.C2 * std::pow(s, g_.kappa / 2.0) * (s + E);
}

double GainFunctions::chi_x3(double s) const {
    require_valid();
    const double expo = g_.kappa * std::log(g_.H) / std::log(g_.nu) + 1.0;
    return g_.H / (g_.H - 1.0) * std::pow(s, expo);
}

double GainFunctions::chi_d1(double E, double s) const {
    require_valid();
    return g_.C1 * g_.C2 * std::pow(s, g_.kappa / 2.0) * (Phi_ * s + E);
}

double GainFunctions::chi_d3(double s) const { return Phi_ * chi_x3(s); }

double GainFunctions::chi_x(double E, double s) const { return std::max(chi_x1(E, s), chi_x3(s)); }

double GainFunctions::chi_d(double E, double s) const { return std::max(chi_d1(E, s), chi_d3(s)); }

double GainFunctions::chi(double E, double s, double r) const {
    const double e = chi_E0(E, s, r);
    return chi_x(e, gamma_hat_x0(s) + gamma_hat_d0(r)) + chi_d(e, r);
}

double GainFunctions::gamma_hat(double s) const { return gamma_hat_x(g_.Gamma * s) + gamma_hat_d(s); }

double GainFunctions::gamma_bar(double s) const {
    const double e = chi_E(g_.Gamma * s, s);
    return chi_x(e, gamma_hat(s)) + chi_d(e, s);
}

double GainFunctions::gamma1_sampled(double s) const { return std::max(gamma_hat_x0(s), chi_bar1(E0_, s)); }

double GainFunctions::gamma2_sampled(double s) const {
    return std::max({gamma_hat_d0(s), chi_bar2(E0_, s), gamma_hat(s), gamma_bar(s)});
}

double GainFunctions::gamma3_sampled(double s) const { return std::max({Phi_ * s, gamma_hat(s), gamma_bar(s)}); }

double GainFunctions::gamma1(double s) const { return H_tilde_ * gamma1_sampled(s); }

double GainFunctions::gamma2(double s) const { return H_tilde_ * gamma2_sampled(s) + Phi_ * s; }

double GainFunctions::gamma3(double s) const { return H_tilde_ * gamma3_sampled(s) + Phi_ * s; }

GainFunctions iss_gains(const DerivedConstants& d, const DesignParams& p, const GainConstants& g) {
    if (!g.valid) {
        throw std::domain_error("iss_gains: design not certified (nu >= 1); run validate first");
    }
    return {d, p, g};
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::not_certified: return "not_certified";
        case Verdict::vacuous: return "vacuous";
    }
    return "?";
}

bool CheckReport::passed() const noexcept {
    return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.verdict == Verdict::fail; });
}

const CheckResult* CheckReport::find(std::string_view name) const noexcept {
    for (const CheckResult& c : checks) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

namespace {

double margin_of(double lhs, double rhs) {
    if (rhs == 0.0) {
        return lhs <= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    return (rhs - lhs) / std::abs(rhs);
}

class Tally {
public:
    explicit Tally(std::string name) { result_.name = std::move(name); }

    void add(double lhs, double rhs) { add_margin(margin_of(lhs, rhs)); }

    void add_margin(double m, std::size_t count = 1) {
        if (count == 0) {
            return;
        }
        worst_ = std::min(worst_, m);
        result_.samples_checked += count;
    }

    CheckResult finish() {
        if (result_.samples_checked == 0) {
            result_.verdict = Verdict::vacuous;
            result_.worst_margin = 0.0;
        } else {
            result_.worst_margin = worst_;
            result_.verdict = worst_ >= -kCheckSlack ? Verdict::pass : Verdict::fail;
        }
        return result_;
    }

    static CheckResult not_certified(std::string name) {
        CheckResult r;
        r.name = std::move(name);
        r.verdict = Verdict::not_certified;
        return r;
    }

private:
    CheckResult result_;
    double worst_ = std::numeric_limits<double>::infinity();
};

// Minimum over an index range, evaluated in parallel into a buffer so the
// result does not depend on the thread count.
template <class F>
void parallel_margins(Tally& t, std::size_t count, Exec exec, F&& margin) {
    std::vector<double> buf(count);
    const auto n = static_cast<std::ptrdiff_t>(count);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            buf[static_cast<std::size_t>(i)] = margin(static_cast<std::size_t>(i));
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            buf[static_cast<std::size_t>(i)] = margin(static_cast<std::size_t>(i));
        }
    }
    for (double m : buf) {
        t.add_margin(m);
    }
}

struct Run {
    std::size_t first;
    std::size_t last;  // inclusive
};

std::vector<Run> stabilizing_runs(const TrajectoryLog& log) {
    std::vector<Run> out;
    const auto& s = log.samples;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k].stage != Stage::stabilizing) {
            continue;
        }
        if (!out.empty() && out.back().last + 1 == k) {
            out.back().last = k;
        } else {
            out.push_back({k, k});
        }
    }
    return out;
}

void require_match(bool cond, const char* what) {
    if (!cond) {
        throw std::invalid_argument(std::string("check_trajectory: ") + what);
    }
}

}  // namespace

CheckReport check_trajectory(const TrajectoryLog& log, const DerivedConstants& d, const DesignParams& p,
                             const GainConstants& g, const GainFunctions& f, const DisturbanceSignal& sig,
                             std::span<const double> x0, Exec exec) {
    require_match(log.nx == d.nx && log.N == d.N && log.tau_s == d.tau_s, "log was produced for a different plant");
    require_match(log.x0.size() == x0.size() && std::equal(x0.begin(), x0.end(), log.x0.begin()),
                  "initial state does not match the log");
    require_match(!log.samples.empty(), "empty log");
    require_match(g.nu == d.nu, "gain constants were computed for a different design");
    for (const SampleRecord& r : log.samples) {
        require_match(r.x.size() == d.nx && r.x_star.size() == d.nx, "sample record dimension mismatch");
    }

    const double N = d.N;
    const double psi_term = (1.0 + p.psi) * d.Lambda_eff * d.Lambda_eff / (N * N);
    const double rho_term = (N - 1.0) * (N - 1.0) / (N * N) * d.chi / p.rho + psi_term;
    const double nu_check =
        std::max(1.0 - d.lambda_min_Q / (2.0 * d.lambda_max_P), rho_term) + (1.0 + 1.0 / p.psi) * p.phi * p.rho;
    require_match(std::abs(nu_check - d.nu) <= 1e-12 * std::max(1.0, std::abs(d.nu)),
                  "design parameters do not match the derived constants");

    CheckReport report;
    report.certified = g.valid && d.Lambda < N && psi_term < 1.0 && rho_term < 1.0;

    const auto& s = log.samples;
    const std::size_t n = s.size();
    const double Lam = d.Lambda_eff;
    auto V = [&](const SampleRecord& r) { return quad_form(d.P, r.x_star) + p.rho * r.E * r.E; };

    // Quantization soundness: every symbol describes the sampled state.
    {
        Tally t("quantization_soundness");
        for (const SampleRecord& r : s) {
            const double dev = inf_norm(vec_sub(r.x, r.x_star));
            if (r.symbol.overflow()) {
                t.add(r.E, dev);  // lost: E < |x - x*|
                continue;
            }
            t.add(dev, r.E);
            if (r.symbol.near_origin()) {
                t.add(inf_norm(r.x), r.E / N);
            } else {
                t.add(inf_norm(vec_sub(r.x, r.center)), r.E / N);
                t.add(inf_norm(vec_sub(r.center, r.x_star)), (N - 1.0) * r.E / N);
            }
        }
        report.checks.push_back(t.finish());
    }

    // One-period error growth.
    {
        Tally stab("error_recursion_stabilizing");
        Tally search("error_recursion_searching");
        for (const SampleRecord& r : s) {
            const double e_end = inf_norm(vec_sub(r.x_end, r.x_hat_end));
            if (r.stage == Stage::stabilizing) {
                stab.add(e_end, Lam / N * r.E + d.Phi * r.d_sup_next);
            } else {
                search.add(e_end, Lam * inf_norm(vec_sub(r.x, r.x_hat)) + d.Phi * r.d_sup_next);
            }
        }
        report.checks.push_back(stab.finish());
        report.checks.push_back(search.finish());
    }

    const std::vector<Run> runs = stabilizing_runs(log);

    // Decay-dependent checks.
    if (!report.certified) {
        for (const char* name : {"lyapunov_decay", "lyapunov_upper", "lyapunov_lower", "one_step_growth",
                                 "exponential_envelope", "stage_gain"}) {
            report.checks.push_back(Tally::not_certified(name));
        }
    } else {
        Tally decay("lyapunov_decay");
        Tally upper("lyapunov_upper");
        Tally lower("lyapunov_lower");
        Tally growth("one_step_growth");
        for (std::size_t k = 0; k < n; ++k) {
            if (s[k].stage != Stage::stabilizing) {
                continue;
            }
            const double vk = V(s[k]);
            const double xk = inf_norm(s[k].x);
            if (k + 1 < n) {
                decay.add(V(s[k + 1]), g.nu * vk);
            }
            upper.add(std::sqrt(vk), g.C1 * (xk + s[k].E));
            lower.add(xk, g.C2 * std::sqrt(vk));
            growth.add(inf_norm(s[k].x_end), g.C3 * std::sqrt(vk) + d.Phi * s[k].d_sup_next);
        }
        report.checks.push_back(decay.finish());
        report.checks.push_back(upper.finish());
        report.checks.push_back(lower.finish());
        report.checks.push_back(growth.finish());

        // Pairwise bounds inside each stabilizing stage, one row per start index l.
        std::vector<std::size_t> starts;
        for (const Run& st : runs) {
            for (std::size_t l = st.first; l <= st.last; ++l) {
                starts.push_back(l);
            }
        }
        auto last_of = [&](std::size_t l) {
            for (const Run& st : runs) {
                if (st.first <= l && l <= st.last) {
                    return st.last;
                }
            }
            return l;
        };

        Tally expo("exponential_envelope");
        Tally stage_gain("stage_gain");
        std::vector<double> expo_min(starts.size()), gain_min(starts.size());
        std::vector<std::size_t> expo_cnt(starts.size()), gain_cnt(starts.size());
        auto row = [&](std::size_t idx) {
            const std::size_t l = starts[idx];
            const std::size_t last = last_of(l);
            const double xl = inf_norm(s[l].x);
            const double El = s[l].E;
            double em = std::numeric_limits<double>::infinity();
            double gm = em;
            double d_sup = sig.sup_norm_on(s[l].t, s[l].t);
            for (std::size_t k = l; k <= last; ++k) {
                if (k > l) {
                    d_sup = std::max(d_sup, s[k - 1].d_sup_next);
                    const double rhs = g.C * std::exp(-g.lambda * static_cast<double>(k - l)) * (xl + El) +
                                       d.Phi * s[k].d_sup_prev;
                    em = std::min(em, margin_of(inf_norm(s[k].x), rhs));
                }
                gm = std::min(gm, margin_of(inf_norm(s[k].x), f.chi_x(El, xl) + f.chi_d(El, d_sup)));
            }
            expo_min[idx] = em;
            expo_cnt[idx] = last - l;
            gain_min[idx] = gm;
            gain_cnt[idx] = last - l + 1;
        };
        const auto m = static_cast<std::ptrdiff_t>(starts.size());
        if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
            for (std::ptrdiff_t i = 0; i < m; ++i) {
                row(static_cast<std::size_t>(i));
            }
        } else {
            for (std::ptrdiff_t i = 0; i < m; ++i) {
                row(static_cast<std::size_t>(i));
            }
        }
        for (std::size_t i = 0; i < starts.size(); ++i) {
            expo.add_margin(expo_min[i], expo_cnt[i]);
            stage_gain.add_margin(gain_min[i], gain_cnt[i]);
        }
        report.checks.push_back(expo.finish());
        report.checks.push_back(stage_gain.finish());
    }

    // Escapes and (re)captures.
    {
        Tally esc_x("escape_state");
        Tally esc_E("escape_radius");
        Tally cap0("capture_index_initial");
        Tally first_x("first_search_state");
        Tally first_E("first_search_radius");
        Tally cap("capture_index_recapture");
        Tally re_x("recapture_state");
        Tally re_E("recapture_radius");

        const double x0n = inf_norm(x0);
        std::size_t pending_escape = n;  // index of the last unmatched escape
        bool first_capture_seen = s[0].visible();
        for (const Event& ev : log.events) {
            const auto k = static_cast<std::size_t>(ev.k);
            require_match(k < n && k > 0, "event index out of range");
            if (ev.kind == EventKind::escaped) {
                const double dj = s[k].d_sup_prev;
                esc_x.add(inf_norm(s[k].x), g.Gamma * dj);
                esc_E.add(s[k - 1].E, g.Gamma * dj);
                pending_escape = k;
                continue;
            }
            if (!first_capture_seen) {
                first_capture_seen = true;
                const double dn = sig.sup_norm_on(0.0, s[k].t);
                const double bound =
                    std::max(f.eta().eta_x(x0n / p.E0), f.eta().eta_d(dn / p.delta));
                cap0.add(static_cast<double>(k), bound);
                const double xb = f.gamma_hat_x0(x0n) + f.gamma_hat_d0(dn);
                for (std::size_t i = 0; i <= k; ++i) {
                    first_x.add(inf_norm(s[i].x), xb);
                }
                first_E.add(s[k].E, f.chi_E0(p.E0, x0n, dn));
            } else if (pending_escape < n) {
                const std::size_t j = pending_escape;
                pending_escape = n;
                const double dn = sig.sup_norm_on(s[j - 1].t, s[k].t);
                const double bound = static_cast<double>(j) + std::max(f.eta().eta_d(dn / p.delta), 1.0);
                cap.add(static_cast<double>(k), bound);
                const double xb = f.gamma_hat_x(inf_norm(s[j].x)) + f.gamma_hat_d(dn);
                for (std::size_t i = j; i <= k; ++i) {
                    re_x.add(inf_norm(s[i].x), xb);
                }
                re_E.add(s[k].E, f.chi_E(s[j - 1].E, dn));
            }
        }
        for (Tally* t : {&esc_x, &esc_E, &cap0, &first_x, &first_E, &cap, &re_x, &re_E}) {
            report.checks.push_back(t->finish());
        }
    }

    // Continuous-time envelopes on the dense records.
    {
        Tally inter("intersample_envelope");
        parallel_margins(inter, log.dense.size(), exec, [&](std::size_t i) {
            const DenseRecord& r = log.dense[i];
            const SampleRecord& sk = s.at(static_cast<std::size_t>(r.k));
            const double rhs = d.H_tilde * inf_norm(sk.x) + d.Phi * sig.sup_norm_on(sk.t, std::max(sk.t, r.t));
            return margin_of(inf_norm(r.x), rhs);
        });
        report.checks.push_back(inter.finish());

        if (!report.certified) {
            report.checks.push_back(Tally::not_certified("iss_envelope"));
        } else {
            Tally iss("iss_envelope");
            const double bound = f.gamma1(inf_norm(x0)) + f.gamma2(sig.sup_norm_on(0.0, log.horizon));
            parallel_margins(iss, log.dense.size(), exec,
                             [&](std::size_t i) { return margin_of(inf_norm(log.dense[i].x), bound); });
            report.checks.push_back(iss.finish());
        }
    }
    return report;
}

}  // namespace qrate
