#pragma once

#include "aifdom/circuit_models.hpp"
#include "aifdom/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace aifdom {

struct IntegratorSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  /// Upper bound on the spacing between consecutive output samples.
  double max_step = 0.01;
  double initial_step = 1e-3;
  double min_step = 1e-13;
  long max_steps = 50'000'000;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::string model_tag;
  IntegratorSettings settings;

  [[nodiscard]] std::size_t size() const { return times.size(); }
  [[nodiscard]] int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
  /// Index of the first sample at or after t0 + fraction * (t_end - t0).
  [[nodiscard]] std::size_t window_start(double transient_fraction) const;
};

/// Adaptive Dormand-Prince 5(4) integration with embedded error control.
/// Stages that leave the nonnegative orthant cause the step to be rejected and
/// retried with a smaller step; accepted states within kNegativeStateTolerance
/// below zero are projected onto the boundary.
Trajectory integrate(const SystemModel& model, const Vector& x0, double t_end,
                     const IntegratorSettings& settings = {});

Trajectory integrate(const SystemModel& model, const Vector& x0, double t_end,
                     double rel_tol, double abs_tol);

/// Damped Newton polish of an equilibrium guess; the iterate is kept in the
/// nonnegative orthant. Returns xi with |f(xi)|_inf <= 1e-12 (1 + |xi|_inf).
Vector refine_equilibrium(const SystemModel& model, const Vector& guess,
                          int max_iterations = 200);

enum class AttractorKind { equilibrium, limit_cycle, undecided };

const char* to_string(AttractorKind kind);

struct ClassifyOptions {
  double transient_fraction = 0.5;
  double eq_tol = 1e-3;
  /// Relative closure residual of consecutive Poincare returns.
  double cycle_tol = 1e-3;
  /// Relative spread of return periods.
  double period_dispersion_tol = 0.01;
};

struct AttractorDiagnostics {
  double tail_variation = 0.0;
  double tail_speed = 0.0;
  int n_returns = 0;
  double period_dispersion = 0.0;
  double closure_residual = 0.0;
  std::size_t window_samples = 0;
};

struct AttractorReport {
  AttractorKind kind = AttractorKind::undecided;
  Vector location;             ///< equilibrium estimate (equilibrium only)
  double period = 0.0;         ///< mean return period (limit cycle only)
  std::vector<double> return_times;
  std::vector<Vector> cycle_samples;  ///< one period of samples (limit cycle only)
  AttractorDiagnostics diagnostics;
};

/// Empirical attractor classification of the post-transient part of `traj`.
AttractorReport classify_trajectory(const Trajectory& traj, const ClassifyOptions& opts = {});

/// CSV: header `t,xi_1,...,xi_n`, 17 significant digits, one row per sample.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace aifdom
