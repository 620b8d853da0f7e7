#pragma once

// Certificate constants, the comparison functions that make up the ISS gains,
// and a checker that tests every stage-level inequality on a simulated log.

#include <string>
#include <string_view>
#include <vector>

#include "qrate/design.hpp"
#include "qrate/disturbance.hpp"
#include "qrate/plant.hpp"

namespace qrate {

struct GainConstants {
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double C = 0.0;       // C1 C3 nu^{-1/2}
    double lambda = 0.0;  // -ln(nu) / 2
    double H = 0.0;       // 2 ||S|| + Lambda
    double kappa = 0.0;   // -1 / (2 log_nu H)
    double Gamma = 0.0;
    double nu = 0.0;
    bool valid = false;  // nu < 1; C, lambda and kappa are 0 otherwise
};

GainConstants gain_constants(const DerivedConstants& d, const DesignParams& p);

/// Capture-index bounds. eta_x and eta_d are integer valued; eta_hat is the
/// continuous majorant used inside the gain constructions.
class EtaFunctions {
public:
    EtaFunctions(double eps, double r_eps);

    [[nodiscard]] double eta_x(double s) const;
    [[nodiscard]] double eta_d(double s) const;
    [[nodiscard]] double eta_hat(double s) const;

    [[nodiscard]] double r_eps() const noexcept { return r_eps_; }

private:
    double log_base_;  // ln(1 + eps)
    double r_eps_;
};

EtaFunctions eta_functions(const DerivedConstants& d, double eps);

/// Every comparison function of the stability proof, evaluable at any
/// nonnegative argument. Functions that depend on kappa throw
/// std::domain_error when the constants are not valid.
class GainFunctions {
public:
    GainFunctions(const DerivedConstants& d, const DesignParams& p, const GainConstants& g);

    [[nodiscard]] const EtaFunctions& eta() const noexcept { return eta_; }

    // first searching stage
    [[nodiscard]] double gamma0(double s, double r) const;
    [[nodiscard]] double chi_E0(double E, double s, double r) const;
    [[nodiscard]] double gamma_hat_x0(double s) const { return gamma0(s, s); }
    [[nodiscard]] double gamma_hat_d0(double s) const { return gamma0(s, s); }

    // searching stages after an escape
    [[nodiscard]] double gamma(double s, double r) const;
    [[nodiscard]] double chi_E(double E, double s) const;
    [[nodiscard]] double gamma_hat_x(double s) const { return gamma(s, s); }
    [[nodiscard]] double gamma_hat_d(double s) const { return gamma(s, s); }

    // stabilizing stages: both regimes and their max
    [[nodiscard]] double chi_x1(double E, double s) const;
    [[nodiscard]] double chi_x3(double s) const;
    [[nodiscard]] double chi_d1(double E, double s) const;
    [[nodiscard]] double chi_d3(double s) const;
    [[nodiscard]] double chi_x(double E, double s) const;
    [[nodiscard]] double chi_d(double E, double s) const;

    // compositions
    [[nodiscard]] double chi(double E, double s, double r) const;
    [[nodiscard]] double chi_bar1(double E, double s) const { return chi(E, s, s); }
    [[nodiscard]] double chi_bar2(double E, double s) const { return chi(E, s, s); }
    [[nodiscard]] double gamma_hat(double s) const;
    [[nodiscard]] double gamma_bar(double s) const;

    // ISS gains at sampling times
    [[nodiscard]] double gamma1_sampled(double s) const;
    [[nodiscard]] double gamma2_sampled(double s) const;
    [[nodiscard]] double gamma3_sampled(double s) const;

    // ISS gains for all t >= 0
    [[nodiscard]] double gamma1(double s) const;
    [[nodiscard]] double gamma2(double s) const;
    [[nodiscard]] double gamma3(double s) const;

    [[nodiscard]] const GainConstants& constants() const noexcept { return g_; }
    [[nodiscard]] double E0() const noexcept { return E0_; }

private:
    void require_valid() const;

    EtaFunctions eta_;
    GainConstants g_;
    double Lambda_;      // Lambda_eff
    double Lambda_hat_;  // (1 + eps) Lambda_eff
    double Phi_;
    double N_;
    double E0_;
    double delta_;
    double H_tilde_;
};

/// Validating factory: throws std::domain_error unless g.valid.
GainFunctions iss_gains(const DerivedConstants& d, const DesignParams& p, const GainConstants& g);

enum class Verdict { pass, fail, not_certified, vacuous };

std::string_view to_string(Verdict v) noexcept;

/// One inequality family. The margin of a single instance lhs <= rhs is
/// (rhs - lhs) / rhs (0 when both sides are 0, -inf when only rhs is 0);
/// worst_margin is the minimum over all instances, never clamped.
struct CheckResult {
    std::string name;
    std::size_t samples_checked = 0;
    double worst_margin = 0.0;
    Verdict verdict = Verdict::vacuous;
};

struct CheckReport {
    bool certified = false;
    std::vector<CheckResult> checks;

    /// No check failed. not_certified and vacuous rows do not count as failures.
    [[nodiscard]] bool passed() const noexcept;
    [[nodiscard]] const CheckResult* find(std::string_view name) const noexcept;
};

inline constexpr double kCheckSlack = 1e-9;

/// Runs every check on a log produced by run_closed_loop with the same
/// inputs. Throws std::invalid_argument when the log does not match them.
CheckReport check_trajectory(const TrajectoryLog& log, const DerivedConstants& d, const DesignParams& p,
                             const GainConstants& g, const GainFunctions& f, const DisturbanceSignal& sig,
                             std::span<const double> x0, Exec exec = Exec::parallel);

}  // namespace qrate
