#pragma once

// Antithetic integral feedback controller, plant variants, their closed-loop
// composition and analytic Jacobians.
//
// Closed-loop state ordering is xi = (z1, z2, x1, x2): controller species
// first, plant species second.

#include "aifdom/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace aifdom {

struct ControllerParams {
  double mu = 0.0;   ///< reference input rate
  double eta = 0.0;  ///< sequestration rate
  void validate() const;
};

/// First-order production plant. theta2 is the sensing gain used by the
/// closed loop (u_c = theta2 * y).
struct FopPlantParams {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double k = 0.0;
  double gamma = 0.0;
  void validate() const;
};

/// Saturating actuation theta1(u) = u^N / (k1 + k2 u^N).
struct HillParams {
  double k1 = 1.0;
  double k2 = 0.0;
  int n_exp = 1;
  void validate() const;
};

struct AllSeqPlantParams {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double theta1 = 0.0;
  double k = 0.0;
  void validate() const;
};

struct BistableParams {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double theta1 = 0.0;
  double eta = 0.0;
  double gamma = 0.0;
  void validate() const;
};

// ---------------------------------------------------------------------------
// Elementary vector fields. All of them reject negative concentrations.

/// (mu - eta z1 z2, u_c - eta z1 z2).
Eigen::Vector2d aif_vector_field(const Eigen::Vector2d& z, double u_c,
                                 const ControllerParams& p);

/// Jacobian of the controller w.r.t. z. Valid along any trajectory, not only
/// at equilibria. The input column for u_c is (0, 1).
Eigen::Matrix2d aif_jacobian(const Eigen::Vector2d& z, const ControllerParams& p);

/// (theta1 u - gamma x1, k x1 - gamma x2).
Eigen::Vector2d fop_vector_field(const Eigen::Vector2d& x, double u,
                                 const FopPlantParams& p);

struct HillValue {
  double value = 0.0;
  double slope = 0.0;
};

HillValue hill_value_and_derivative(double u, const HillParams& p);

struct HillPeak {
  double u = 0.0;
  double slope = 0.0;
};

/// Location and value of sup_{u >= 0} theta1'(u), from the stationary point of
/// the closed-form derivative.
HillPeak hill_max_slope(const HillParams& p);

/// Exact range of theta1'(u) for u in `u_range` (u_range.lo >= 0).
Interval hill_slope_range(const HillParams& p, Interval u_range);

/// (phi1 - theta1 x1 u, phi2 - k x1 x2).
Eigen::Vector2d all_seq_vector_field(const Eigen::Vector2d& x, double u,
                                     const AllSeqPlantParams& p);

/// Positive-feedback switch built on the sequestration pair.
Eigen::Vector2d bistable_vector_field(const Eigen::Vector2d& z,
                                      const BistableParams& p);

// ---------------------------------------------------------------------------
// Fragments and composition.

/// Single-input single-output open subsystem ds/dt = f(s, u), y = h(s).
struct Fragment {
  std::string tag;
  int state_dim = 2;
  int input_dim = 1;
  int output_dim = 1;

  std::function<Vector(const Vector& s, double u, const ParamPoint& pp)> f;
  std::function<Matrix(const Vector& s, double u, const ParamPoint& pp)> dfds;
  std::function<Vector(const Vector& s, double u, const ParamPoint& pp)> dfdu;
  std::function<double(const Vector& s)> output;
  std::function<RowVector(const Vector& s)> output_gradient;

  /// State indices the Jacobian blocks depend on.
  std::vector<int> jacobian_state_deps;
  /// True when the local actuation slope may be overridden by ParamPoint.
  bool actuation_slope_param = false;
  /// Range of the actuation slope for actuator inputs in the given interval.
  std::function<Interval(Interval)> actuation_slope_range;
};

Fragment aif_controller(const ControllerParams& p);

/// First-order production plant, optionally with Hill actuation replacing the
/// linear term theta1 * u.
Fragment fop_plant(const FopPlantParams& p, std::optional<HillParams> hill = {});

Fragment all_seq_plant(const AllSeqPlantParams& p);

/// Plant with no dynamics coupling: y == 0.
Fragment zero_plant();

/// Autonomous system with analytic Jacobian and a single-loop decomposition
///   A_cl(xi) = A_open(xi) - B * c(xi)
/// so that the frozen loop transfer function is G(xi, s) = c (sI - A_open)^-1 B
/// and closing the loop with unit gain reproduces the Jacobian.
class SystemModel {
 public:
  int dim = 0;
  std::string tag;
  std::string param_tag;

  std::function<Vector(const Vector&)> vector_field;
  std::function<Matrix(const Vector&, const ParamPoint&)> jacobian_fn;
  std::function<Matrix(const Vector&, const ParamPoint&)> open_loop_fn;
  Vector input_column;
  std::function<RowVector(const Vector&)> output_gradient_fn;

  /// State coordinates (besides the controller pair 0, 1) the Jacobian depends on.
  std::vector<int> jacobian_state_deps;
  bool supports_eta_param = false;
  bool actuation_slope_param = false;
  std::function<Interval(Interval)> actuation_slope_range;

  [[nodiscard]] Vector f(const Vector& xi) const { return vector_field(xi); }
  [[nodiscard]] Matrix jacobian(const Vector& xi, const ParamPoint& pp = {}) const {
    return jacobian_fn(xi, pp);
  }
  [[nodiscard]] Matrix open_loop_jacobian(const Vector& xi,
                                          const ParamPoint& pp = {}) const {
    return open_loop_fn(xi, pp);
  }
  [[nodiscard]] RowVector output_gradient(const Vector& xi) const {
    return output_gradient_fn(xi);
  }
};

/// Interconnects the controller with a plant: u = y_c = z1 (through the
/// plant's actuation map) and u_c = theta2 * y. The loop is broken at u_c with
/// output ybar = -theta2 * y, so that ubar = -ybar closes it.
SystemModel closed_loop(const Fragment& controller, const Fragment& plant,
                        double feedback_gain_theta2);

/// Linear-plant loop (or Hill-actuated when `hill` is set).
SystemModel fop_closed_loop(const ControllerParams& cp, const FopPlantParams& pp,
                            std::optional<HillParams> hill = {});

SystemModel all_seq_closed_loop(const ControllerParams& cp,
                                const AllSeqPlantParams& pp, double theta2);

SystemModel bistable_model(const BistableParams& p);

/// Exact Jacobian of the composed field. Same as model.jacobian(xi).
Matrix closed_loop_jacobian(const SystemModel& model, const Vector& xi);

/// Closed-form fixed point of the linear-plant loop:
/// [g^2 mu/(k th1 th2), k th1 th2/(g^2 eta), g mu/(k th2), mu/th2] with g = gamma.
Eigen::Vector4d fop_equilibrium(const ControllerParams& cp, const FopPlantParams& pp);

struct InstabilityIndicator {
  double lhs = 0.0;  ///< cbrt(theta1 theta2 k / 2)
  double rhs = 0.0;  ///< gamma
};

/// Both sides of the large-eta parametric condition. The caller decides how
/// to interpret them; eigenvalues of the Jacobian are the ground truth.
InstabilityIndicator large_eta_instability_indicator(const FopPlantParams& pp);

/// Throws DomainError when a component is below -kNegativeStateTolerance.
void require_nonnegative(const Vector& v, const char* what);

}  // namespace aifdom
