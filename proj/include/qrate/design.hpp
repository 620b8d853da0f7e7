#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qrate/matnum.hpp"

namespace qrate {

/// The plant x' = A x + B u + D d with a fixed feedback gain K, sampled every
/// tau_s seconds and quantized with N cells per dimension.
struct PlantModel {
    Matrix A;
    Matrix B;
    Matrix D;
    Matrix K;
    double tau_s = 0.1;
    int N = 2;

    [[nodiscard]] std::size_t nx() const noexcept { return A.rows(); }
    [[nodiscard]] std::size_t nu() const noexcept { return B.cols(); }
    [[nodiscard]] std::size_t nd() const noexcept { return D.cols(); }

    /// Throws std::invalid_argument on inconsistent dimensions, non-finite
    /// entries, tau_s <= 0 or N < 2.
    void validate() const;
};

struct DesignParams {
    double E0 = 0.5;
    double eps = 0.2;
    double delta = 0.1;
    double psi = 0.2;
    double rho = 1.0;
    double phi = 0.01;
    Matrix Q;  // empty means identity
    double eps_lambda = 0.01;

    /// Q, or the n x n identity when Q was left empty.
    [[nodiscard]] Matrix q_or_identity(std::size_t n) const;
    void validate(std::size_t nx) const;
};

/// Every constant the protocol and its certificates need, derived once per
/// (plant, design) pair.
struct DerivedConstants {
    std::size_t nx = 0;
    int N = 2;
    double tau_s = 0.0;

    Matrix S;       // e^{(A+BK) tau_s}
    Matrix S_hat;   // e^{A tau_s}
    Matrix P;       // S^T P S - P = -Q
    Matrix Q;

    double Lambda = 0.0;      // ||e^{A tau_s}||
    double Lambda_eff = 0.0;  // max(Lambda, 1 + eps_lambda)
    double Lambda_hat = 0.0;  // (1 + eps) Lambda_eff
    double Phi = 0.0;
    double chi = 0.0;
    double nu = 0.0;
    double nu0 = 0.0;  // max-term of nu, without the (1 + 1/psi) phi rho part
    double Lambda_bar = 0.0;    // max_{s <= tau_s} ||e^{(A+BK)s}||
    double Lambda_tilde = 0.0;  // max_{s <= tau_s} ||e^{As}||
    double H_tilde = 0.0;       // 2 Lambda_bar + Lambda_tilde
    double r_eps = 0.0;
    double data_rate_bits = 0.0;

    double norm_S = 0.0;
    double norm_StPS = 0.0;
    double lambda_min_P = 0.0;
    double lambda_max_P = 0.0;
    double lambda_min_Q = 0.0;
};

struct CertificateReport {
    bool assumption1_ok = false;
    bool assumption2_ok = false;
    bool psi_ok = false;
    bool rho_ok = false;
    bool nu_ok = false;
    double lhs_psi = 0.0;  // (1 + psi) Lambda^2 / N^2
    double lhs_rho = 0.0;
    double nu = 0.0;
    std::vector<std::string> messages;

    [[nodiscard]] bool certified() const noexcept {
        return assumption1_ok && assumption2_ok && psi_ok && rho_ok && nu_ok;
    }
};

/// (A + BK Hurwitz via Schur stability of S, Lambda < N).
std::pair<bool, bool> check_assumptions(const PlantModel& m);

/// Throws std::domain_error when S is not Schur stable.
DerivedConstants derive_constants(const PlantModel& m, const DesignParams& p, Exec exec = Exec::parallel);

/// Evaluates the design inequalities for p; never throws on violations.
CertificateReport validate_design(const PlantModel& m, const DesignParams& p);

/// Picks (psi, rho, phi) satisfying the design inequalities with nu < 1,
/// copying every other field from `hints`.
DesignParams synthesize_design(const PlantModel& m, const DesignParams& hints);

inline constexpr double kThetaRho = 0.5;
inline constexpr double kThetaPhi = 0.5;

/// log2(N^nx + 2) / tau_s
double data_rate_bits(int N, std::size_t nx, double tau_s);

}  // namespace qrate
