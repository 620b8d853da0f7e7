#pragma once

// CSV tables and SVG plots for trajectories, checks and gains. All numbers are
// written with 17 significant digits so reruns are byte-identical.

#include <ostream>
#include <span>
#include <string>

#include "qrate/analysis.hpp"

namespace qrate {

/// k, t, x_1..x_n, xhat_1..xhat_n, symbol, stage, E, V, d_sup_prev
void write_samples_csv(std::ostream& os, const TrajectoryLog& log);

/// k, t, x_1.., xhat_1.., u_1..
void write_dense_csv(std::ostream& os, const TrajectoryLog& log);

/// kind, k, t
void write_events_csv(std::ostream& os, const TrajectoryLog& log);

/// name, samples_checked, worst_margin, verdict
void write_checks_csv(std::ostream& os, const CheckReport& report);

/// One row per grid point with every gain that vanishes at zero.
void write_gains_csv(std::ostream& os, const GainFunctions& f, std::span<const double> grid);

/// 0 followed by `points` log-spaced values in [s_min, s_max].
std::vector<double> gain_grid(double s_min, double s_max, int points);

/// |e(t)| (blue) and the step function E_k (red) on a log axis; disturbance
/// onsets dashed, searching stages shaded.
std::string plot_error_radius(const TrajectoryLog& log, const DisturbanceSignal& sig);

/// x_1(t) (blue) and xhat_1(t) (red), same markers.
std::string plot_state_aux(const TrajectoryLog& log, const DisturbanceSignal& sig);

}  // namespace qrate
