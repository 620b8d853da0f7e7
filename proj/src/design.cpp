#include "qrate/design.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace qrate {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) {
        throw std::invalid_argument(what);
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Left-hand sides of the three design inequalities, all with Lambda_eff.
struct DesignLhs {
    double psi_term;  // (1 + psi) Lambda^2 / N^2
    double rho_term;  // (N-1)^2/N^2 chi/rho + psi_term
    double nu0;
    double nu;
};

DesignLhs design_lhs(const DerivedConstants& d, double psi, double rho, double phi) {
    const double n = d.N;
    const double psi_term = (1.0 + psi) * d.Lambda_eff * d.Lambda_eff / (n * n);
    const double rho_term = (n - 1.0) * (n - 1.0) / (n * n) * d.chi / rho + psi_term;
    const double nu0 = std::max(1.0 - d.lambda_min_Q / (2.0 * d.lambda_max_P), rho_term);
    const double nu = nu0 + (1.0 + 1.0 / psi) * phi * rho;
    return {psi_term, rho_term, nu0, nu};
}

}  // namespace

void PlantModel::validate() const {
    require(A.square() && A.rows() > 0, "plant.A must be a non-empty square matrix");
    const std::size_t n = A.rows();
    require(B.rows() == n && B.cols() > 0, "plant.B must have n_x rows");
    require(D.rows() == n && D.cols() > 0, "plant.D must have n_x rows");
    require(K.rows() == B.cols() && K.cols() == n, "plant.K must be n_u x n_x");
    require(A.all_finite() && B.all_finite() && D.all_finite() && K.all_finite(), "plant matrices must be finite");
    require(std::isfinite(tau_s) && tau_s > 0.0, "plant.tau_s must be positive");
    require(N >= 2, "plant.N must be at least 2");
}

Matrix DesignParams::q_or_identity(std::size_t n) const { return Q.empty() ? Matrix::identity(n) : Q; }

void DesignParams::validate(std::size_t nx) const {
    for (const auto& [name, v] : {std::pair{"E0", E0}, std::pair{"eps", eps}, std::pair{"delta", delta},
                                  std::pair{"psi", psi}, std::pair{"rho", rho}, std::pair{"phi", phi},
                                  std::pair{"eps_lambda", eps_lambda}}) {
        require(std::isfinite(v) && v > 0.0, std::string("design.") + name + " must be positive");
    }
    const Matrix q = q_or_identity(nx);
    require(q.rows() == nx && q.cols() == nx, "design.Q must be n_x x n_x");
    require(is_symmetric(q), "design.Q must be symmetric");
    require(sym_eig_extremes(q).first > 0.0, "design.Q must be positive definite");
}

double data_rate_bits(int N, std::size_t nx, double tau_s) {
    return std::log2(std::pow(static_cast<double>(N), static_cast<double>(nx)) + 2.0) / tau_s;
}

std::pair<bool, bool> check_assumptions(const PlantModel& m) {
    m.validate();
    const Matrix s = expm(m.A + m.B * m.K, m.tau_s);
    const double lambda = inf_norm(expm(m.A, m.tau_s));
    return {is_schur_stable(s), lambda < static_cast<double>(m.N)};
}

DerivedConstants derive_constants(const PlantModel& m, const DesignParams& p, Exec exec) {
    m.validate();
    p.validate(m.nx());

    DerivedConstants d;
    d.nx = m.nx();
    d.N = m.N;
    d.tau_s = m.tau_s;

    const Matrix closed = m.A + m.B * m.K;
    d.S = expm(closed, m.tau_s);
    d.S_hat = expm(m.A, m.tau_s);
    d.Q = p.q_or_identity(d.nx);
    d.P = dlyap(d.S, d.Q);

    d.Lambda = inf_norm(d.S_hat);
    d.Lambda_eff = std::max(d.Lambda, 1.0 + p.eps_lambda);
    d.Lambda_hat = (1.0 + p.eps) * d.Lambda_eff;
    d.Phi = phi_integral(m.A, m.D, m.tau_s, exec);
    d.r_eps = (d.Lambda_hat - 1.0) / (d.Lambda_eff - 1.0);
    d.data_rate_bits = data_rate_bits(m.N, d.nx, m.tau_s);

    d.norm_S = inf_norm(d.S);
    d.norm_StPS = inf_norm(d.S.transpose() * d.P * d.S);
    std::tie(d.lambda_min_P, d.lambda_max_P) = sym_eig_extremes(d.P);
    d.lambda_min_Q = sym_eig_extremes(d.Q).first;

    const double n = static_cast<double>(d.nx);
    d.chi = 2.0 * n * n * d.norm_StPS * d.norm_StPS / d.lambda_min_Q + n * d.norm_StPS;

    const DesignLhs lhs = design_lhs(d, p.psi, p.rho, p.phi);
    d.nu0 = lhs.nu0;
    d.nu = lhs.nu;

    d.Lambda_bar = max_norm_over_interval(closed, m.tau_s, exec);
    d.Lambda_tilde = max_norm_over_interval(m.A, m.tau_s, exec);
    d.H_tilde = 2.0 * d.Lambda_bar + d.Lambda_tilde;
    return d;
}

CertificateReport validate_design(const PlantModel& m, const DesignParams& p) {
    CertificateReport r;
    std::tie(r.assumption1_ok, r.assumption2_ok) = check_assumptions(m);
    if (!r.assumption1_ok) {
        r.messages.push_back("Assumption 1 fails: e^{(A+BK) tau_s} is not Schur stable (A+BK not Hurwitz)");
    }
    if (!r.assumption2_ok) {
        r.messages.push_back("Assumption 2 fails: ||e^{A tau_s}|| >= N");
    }
    if (!r.assumption1_ok) {
        r.messages.push_back("design inequalities not evaluated: no Lyapunov solution without a stabilizing K");
        return r;
    }
    const DerivedConstants d = derive_constants(m, p);
    const DesignLhs lhs = design_lhs(d, p.psi, p.rho, p.phi);
    r.lhs_psi = lhs.psi_term;
    r.lhs_rho = lhs.rho_term;
    r.nu = lhs.nu;
    r.psi_ok = lhs.psi_term < 1.0;
    r.rho_ok = lhs.rho_term < 1.0;
    r.nu_ok = lhs.nu < 1.0;
    if (!r.psi_ok) {
        r.messages.push_back("psi condition violated: (1+psi) Lambda^2/N^2 = " + fmt(lhs.psi_term) + " >= 1");
    }
    if (!r.rho_ok) {
        r.messages.push_back("rho condition violated: (N-1)^2/N^2 chi/rho + (1+psi) Lambda^2/N^2 = " +
                             fmt(lhs.rho_term) + " >= 1");
    }
    if (!r.nu_ok) {
        r.messages.push_back("contraction factor nu = " + fmt(lhs.nu) + " >= 1");
    }
    if (r.certified()) {
        r.messages.push_back("design certified: nu = " + fmt(lhs.nu));
    }
    return r;
}

DesignParams synthesize_design(const PlantModel& m, const DesignParams& hints) {
    const auto [a1, a2] = check_assumptions(m);
    if (!a1) {
        throw std::domain_error("synthesize_design: A + BK is not Hurwitz");
    }
    DerivedConstants d = derive_constants(m, hints);
    const double n = d.N;
    const double ratio = d.Lambda_eff * d.Lambda_eff / (n * n);
    if (!a2 || ratio >= 1.0) {
        throw std::domain_error("synthesize_design: data-rate assumption fails (Lambda >= N)");
    }

    DesignParams out = hints;
    const double psi_cap = 0.5 * (1.0 / ratio - 1.0);
    out.psi = std::min(hints.psi, psi_cap);
    const double psi_term = (1.0 + out.psi) * ratio;
    out.rho = d.chi * ((n - 1.0) * (n - 1.0) / (n * n)) / (kThetaRho * (1.0 - psi_term));
    const double nu0 = design_lhs(d, out.psi, out.rho, 0.0).nu0;
    out.phi = kThetaPhi * (1.0 - nu0) * out.psi / ((1.0 + out.psi) * out.rho);
    return out;
}

}  // namespace qrate
