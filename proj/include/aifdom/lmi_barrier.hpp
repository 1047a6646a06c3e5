#pragma once

// Small dense semidefinite solver: maximize c'x subject to a list of linear
// matrix inequalities F_i(x) = F_i0 + sum_k x_k F_ik > 0, by a log-det
// barrier path-following method with damped Newton centering.
//
// Meant for problems with a handful of scalar variables and many tiny
// blocks, which is exactly the shape of vertex-relaxed dominance LMIs.

#include "aifdom/types.hpp"

#include <vector>

namespace aifdom {

struct LmiBlock {
  Matrix f0;
  std::vector<Matrix> fk;  ///< one symmetric coefficient per variable
};

struct BarrierOptions {
  double initial_weight = 1.0;
  double weight_growth = 20.0;
  /// Stop once the duality-gap bound m / weight drops below this.
  double gap_tol = 1e-10;
  int max_newton_per_center = 200;
  int max_outer = 60;
  /// Early exit: the optimum is provably below this value.
  std::optional<double> give_up_below;
};

struct BarrierResult {
  Vector x;
  double objective = 0.0;
  /// Upper bound on the optimal value (objective + m / weight).
  double upper_bound = 0.0;
  int newton_steps = 0;
  bool converged = false;
};

/// `x0` must be strictly feasible. Throws ConvergenceError when the centering
/// fails (numerical breakdown).
BarrierResult maximize_lmi(const Vector& cost, const std::vector<LmiBlock>& blocks,
                           const Vector& x0, const BarrierOptions& opts = {});

/// Smallest eigenvalue over all blocks at x (negative means infeasible).
double lmi_min_eigenvalue(const std::vector<LmiBlock>& blocks, const Vector& x);

}  // namespace aifdom
