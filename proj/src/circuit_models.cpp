#include "aifdom/circuit_models.hpp"

#include "aifdom/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace aifdom {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be strictly positive");
  }
}

void require_nonneg_param(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be nonnegative");
  }
}

void require_nonneg_scalar(double v, const char* what) {
  if (!(v >= -kNegativeStateTolerance)) {
    std::ostringstream os;
    os << what << " must be nonnegative (got " << v << ")";
    throw DomainError(os.str());
  }
}

double eta_of(const ControllerParams& p, const ParamPoint& pp) {
  return pp.eta ? *pp.eta : p.eta;
}

}  // namespace

void require_nonnegative(const Vector& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] >= -kNegativeStateTolerance)) {
      std::ostringstream os;
      os << what << " component " << i << " is negative (" << v[i] << ")";
      throw DomainError(os.str());
    }
  }
}

void ControllerParams::validate() const {
  require_nonneg_param(mu, "mu");
  require_positive(eta, "eta");
}

void FopPlantParams::validate() const {
  require_positive(theta1, "theta1");
  require_positive(theta2, "theta2");
  require_positive(k, "k");
  require_positive(gamma, "gamma");
}

void HillParams::validate() const {
  require_positive(k1, "k1");
  require_nonneg_param(k2, "k2");
  if (n_exp < 1) throw DomainError("Hill coefficient must be >= 1");
}

void AllSeqPlantParams::validate() const {
  require_positive(phi1, "phi1");
  require_positive(phi2, "phi2");
  require_positive(theta1, "theta1");
  require_positive(k, "k");
}

void BistableParams::validate() const {
  require_nonneg_param(mu1, "mu1");
  require_nonneg_param(mu2, "mu2");
  require_nonneg_param(theta1, "theta1");
  require_positive(eta, "eta");
  require_positive(gamma, "gamma");
}

Eigen::Vector2d aif_vector_field(const Eigen::Vector2d& z, double u_c,
                                 const ControllerParams& p) {
  require_nonnegative(z, "controller state");
  require_nonneg_scalar(u_c, "controller input u_c");
  const double bind = p.eta * z[0] * z[1];
  return {p.mu - bind, u_c - bind};
}

Eigen::Matrix2d aif_jacobian(const Eigen::Vector2d& z, const ControllerParams& p) {
  Eigen::Matrix2d j;
  j << -p.eta * z[1], -p.eta * z[0], -p.eta * z[1], -p.eta * z[0];
  return j;
}

Eigen::Vector2d fop_vector_field(const Eigen::Vector2d& x, double u,
                                 const FopPlantParams& p) {
  require_nonnegative(x, "plant state");
  return {p.theta1 * u - p.gamma * x[0], p.k * x[0] - p.gamma * x[1]};
}

HillValue hill_value_and_derivative(double u, const HillParams& p) {
  require_nonneg_scalar(u, "Hill input");
  u = std::max(u, 0.0);
  const int n = p.n_exp;
  const double un = std::pow(u, n);
  const double den = p.k1 + p.k2 * un;
  const double un1 = n == 1 ? 1.0 : std::pow(u, n - 1);
  return {un / den, n * p.k1 * un1 / (den * den)};
}

HillPeak hill_max_slope(const HillParams& p) {
  if (p.n_exp == 1) {
    return {0.0, 1.0 / p.k1};
  }
  if (p.k2 == 0.0) {
    return {std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  }
  const double n = p.n_exp;
  // d/du [u^(N-1) / (k1 + k2 u^N)^2] = 0  <=>  u^N = (N-1) k1 / ((N+1) k2)
  const double u = std::pow((n - 1.0) * p.k1 / ((n + 1.0) * p.k2), 1.0 / n);
  return {u, hill_value_and_derivative(u, p).slope};
}

Interval hill_slope_range(const HillParams& p, Interval u_range) {
  if (u_range.empty()) throw DomainError("empty actuation range");
  const double a = hill_value_and_derivative(u_range.lo, p).slope;
  const double b = hill_value_and_derivative(u_range.hi, p).slope;
  // theta1' is unimodal on u >= 0, so the minimum sits at an endpoint.
  Interval r{std::min(a, b), std::max(a, b)};
  const HillPeak peak = hill_max_slope(p);
  if (std::isfinite(peak.u) && u_range.contains(peak.u)) r.hi = peak.slope;
  return r;
}

Eigen::Vector2d all_seq_vector_field(const Eigen::Vector2d& x, double u,
                                     const AllSeqPlantParams& p) {
  require_nonnegative(x, "plant state");
  require_nonneg_scalar(u, "plant input");
  return {p.phi1 - p.theta1 * x[0] * u, p.phi2 - p.k * x[0] * x[1]};
}

Eigen::Vector2d bistable_vector_field(const Eigen::Vector2d& z,
                                      const BistableParams& p) {
  require_nonnegative(z, "switch state");
  const double bind = p.eta * z[0] * z[1];
  const double feedback = p.theta1 * z[0] / (1.0 + p.theta1 * z[0]);
  return {p.mu1 + feedback - bind - p.gamma * z[0], p.mu2 - bind};
}

Fragment aif_controller(const ControllerParams& p) {
  p.validate();
  Fragment c;
  c.tag = "aif";
  c.f = [p](const Vector& s, double u, const ParamPoint& pp) -> Vector {
    ControllerParams q = p;
    q.eta = eta_of(p, pp);
    return aif_vector_field(s.head<2>(), u, q);
  };
  c.dfds = [p](const Vector& s, double, const ParamPoint& pp) -> Matrix {
    ControllerParams q = p;
    q.eta = eta_of(p, pp);
    return aif_jacobian(s.head<2>(), q);
  };
  c.dfdu = [](const Vector&, double, const ParamPoint&) -> Vector {
    return Eigen::Vector2d(0.0, 1.0);
  };
  c.output = [](const Vector& s) { return s[0]; };
  c.output_gradient = [](const Vector&) -> RowVector {
    return Eigen::RowVector2d(1.0, 0.0);
  };
  c.jacobian_state_deps = {0, 1};
  return c;
}

Fragment fop_plant(const FopPlantParams& p, std::optional<HillParams> hill) {
  p.validate();
  if (hill) hill->validate();
  Fragment pl;
  pl.tag = hill ? "fop_hill" : "fop";
  pl.f = [p, hill](const Vector& x, double u, const ParamPoint&) -> Vector {
    if (!hill) return fop_vector_field(x.head<2>(), u, p);
    require_nonnegative(x, "plant state");
    const double act = hill_value_and_derivative(u, *hill).value;
    return Eigen::Vector2d(act - p.gamma * x[0], p.k * x[0] - p.gamma * x[1]);
  };
  pl.dfds = [p](const Vector&, double, const ParamPoint&) -> Matrix {
    Eigen::Matrix2d j;
    j << -p.gamma, 0.0, p.k, -p.gamma;
    return j;
  };
  pl.dfdu = [p, hill](const Vector&, double u, const ParamPoint& pp) -> Vector {
    double slope = p.theta1;
    if (hill) slope = pp.actuation_slope ? *pp.actuation_slope
                                         : hill_value_and_derivative(u, *hill).slope;
    return Eigen::Vector2d(slope, 0.0);
  };
  pl.output = [](const Vector& x) { return x[1]; };
  pl.output_gradient = [](const Vector&) -> RowVector {
    return Eigen::RowVector2d(0.0, 1.0);
  };
  if (hill) {
    pl.actuation_slope_param = true;
    pl.actuation_slope_range = [h = *hill](Interval u) { return hill_slope_range(h, u); };
  }
  return pl;
}

Fragment all_seq_plant(const AllSeqPlantParams& p) {
  p.validate();
  Fragment pl;
  pl.tag = "all_seq";
  pl.f = [p](const Vector& x, double u, const ParamPoint&) -> Vector {
    return all_seq_vector_field(x.head<2>(), u, p);
  };
  pl.dfds = [p](const Vector& x, double u, const ParamPoint&) -> Matrix {
    Eigen::Matrix2d j;
    j << -p.theta1 * u, 0.0, -p.k * x[1], -p.k * x[0];
    return j;
  };
  pl.dfdu = [p](const Vector& x, double, const ParamPoint&) -> Vector {
    return Eigen::Vector2d(-p.theta1 * x[0], 0.0);
  };
  pl.output = [](const Vector& x) { return x[1]; };
  pl.output_gradient = [](const Vector&) -> RowVector {
    return Eigen::RowVector2d(0.0, 1.0);
  };
  pl.jacobian_state_deps = {0, 1};
  return pl;
}

Fragment zero_plant() {
  Fragment pl;
  pl.tag = "zero";
  pl.f = [](const Vector& x, double, const ParamPoint&) -> Vector {
    require_nonnegative(x, "plant state");
    return Vector::Zero(2);
  };
  pl.dfds = [](const Vector&, double, const ParamPoint&) -> Matrix {
    return Matrix::Zero(2, 2);
  };
  pl.dfdu = [](const Vector&, double, const ParamPoint&) -> Vector {
    return Vector::Zero(2);
  };
  pl.output = [](const Vector&) { return 0.0; };
  pl.output_gradient = [](const Vector&) -> RowVector { return RowVector::Zero(2); };
  return pl;
}

SystemModel closed_loop(const Fragment& controller, const Fragment& plant,
                        double feedback_gain_theta2) {
  if (controller.output_dim != plant.input_dim || plant.output_dim != controller.input_dim ||
      controller.output_dim != 1 || plant.output_dim != 1) {
    throw CompositionError("closed_loop requires a scalar interconnection (controller " +
                           controller.tag + ", plant " + plant.tag + ")");
  }
  if (!(feedback_gain_theta2 > 0.0)) throw DomainError("theta2 must be strictly positive");

  const int nc = controller.state_dim;
  const int np = plant.state_dim;
  const double th2 = feedback_gain_theta2;

  SystemModel m;
  m.dim = nc + np;
  m.tag = controller.tag + "+" + plant.tag;

  m.vector_field = [controller, plant, nc, np, th2](const Vector& xi) -> Vector {
    const Vector z = xi.head(nc);
    const Vector x = xi.segment(nc, np);
    const ParamPoint nominal;
    Vector out(nc + np);
    out.head(nc) = controller.f(z, th2 * plant.output(x), nominal);
    out.segment(nc, np) = plant.f(x, controller.output(z), nominal);
    return out;
  };

  auto assemble = [controller, plant, nc, np, th2](const Vector& xi, const ParamPoint& pp,
                                                   bool close) -> Matrix {
    const Vector z = xi.head(nc);
    const Vector x = xi.segment(nc, np);
    const double u_c = th2 * plant.output(x);
    const double u = controller.output(z);
    Matrix a = Matrix::Zero(nc + np, nc + np);
    a.topLeftCorner(nc, nc) = controller.dfds(z, u_c, pp);
    a.bottomRightCorner(np, np) = plant.dfds(x, u, pp);
    a.bottomLeftCorner(np, nc) = plant.dfdu(x, u, pp) * controller.output_gradient(z);
    if (close) {
      a.topRightCorner(nc, np) =
          th2 * controller.dfdu(z, u_c, pp) * plant.output_gradient(x);
    }
    return a;
  };
  m.jacobian_fn = [assemble](const Vector& xi, const ParamPoint& pp) {
    return assemble(xi, pp, true);
  };
  m.open_loop_fn = [assemble](const Vector& xi, const ParamPoint& pp) {
    return assemble(xi, pp, false);
  };

  m.input_column = Vector::Zero(nc + np);
  m.input_column.head(nc) = controller.dfdu(Vector::Zero(nc), 0.0, ParamPoint{});
  m.output_gradient_fn = [plant, nc, np, th2](const Vector& xi) -> RowVector {
    RowVector c = RowVector::Zero(nc + np);
    c.segment(nc, np) = -th2 * plant.output_gradient(xi.segment(nc, np));
    return c;
  };

  for (int i : plant.jacobian_state_deps) m.jacobian_state_deps.push_back(nc + i);
  m.supports_eta_param = controller.tag == "aif";
  m.actuation_slope_param = plant.actuation_slope_param;
  m.actuation_slope_range = plant.actuation_slope_range;
  return m;
}

namespace {

std::string fmt_params(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [k, v] : kv) {
    if (!first) os << ',';
    os << k << '=' << v;
    first = false;
  }
  return os.str();
}

}  // namespace

SystemModel fop_closed_loop(const ControllerParams& cp, const FopPlantParams& pp,
                            std::optional<HillParams> hill) {
  SystemModel m = closed_loop(aif_controller(cp), fop_plant(pp, hill), pp.theta2);
  m.param_tag = fmt_params({{"mu", cp.mu}, {"eta", cp.eta}, {"theta1", pp.theta1},
                            {"theta2", pp.theta2}, {"k", pp.k}, {"gamma", pp.gamma}});
  if (hill) {
    m.param_tag += "," + fmt_params({{"k1", hill->k1}, {"k2", hill->k2},
                                     {"N", static_cast<double>(hill->n_exp)}});
  }
  return m;
}

SystemModel all_seq_closed_loop(const ControllerParams& cp, const AllSeqPlantParams& pp,
                                double theta2) {
  SystemModel m = closed_loop(aif_controller(cp), all_seq_plant(pp), theta2);
  m.param_tag = fmt_params({{"mu", cp.mu}, {"eta", cp.eta}, {"phi1", pp.phi1},
                            {"phi2", pp.phi2}, {"theta1", pp.theta1}, {"k", pp.k},
                            {"theta2", theta2}});
  return m;
}

SystemModel bistable_model(const BistableParams& p) {
  p.validate();
  SystemModel m;
  m.dim = 2;
  m.tag = "bistable";
  m.param_tag = fmt_params({{"mu1", p.mu1}, {"mu2", p.mu2}, {"theta1", p.theta1},
                            {"eta", p.eta}, {"gamma", p.gamma}});
  m.vector_field = [p](const Vector& z) -> Vector {
    return bistable_vector_field(z.head<2>(), p);
  };
  m.jacobian_fn = [p](const Vector& z, const ParamPoint& pp) -> Matrix {
    const double eta = pp.eta ? *pp.eta : p.eta;
    const double d = 1.0 + p.theta1 * z[0];
    Eigen::Matrix2d j;
    j << p.theta1 / (d * d) - eta * z[1] - p.gamma, -eta * z[0], -eta * z[1], -eta * z[0];
    return j;
  };
  // No feedback channel: the open loop is the system itself.
  m.open_loop_fn = m.jacobian_fn;
  m.input_column = Eigen::Vector2d(0.0, 1.0);
  m.output_gradient_fn = [](const Vector&) -> RowVector { return RowVector::Zero(2); };
  m.supports_eta_param = true;
  return m;
}

Matrix closed_loop_jacobian(const SystemModel& model, const Vector& xi) {
  return model.jacobian(xi);
}

Eigen::Vector4d fop_equilibrium(const ControllerParams& cp, const FopPlantParams& pp) {
  require_positive(cp.mu, "mu");
  require_positive(cp.eta, "eta");
  pp.validate();
  // theta2 * y = mu, then back-substitute through the plant and the controller.
  const double g = pp.gamma;
  const double y = cp.mu / pp.theta2;
  const double x1 = g * y / pp.k;
  const double z1 = g * x1 / pp.theta1;
  return {z1, cp.mu / (cp.eta * z1), x1, y};
}

InstabilityIndicator large_eta_instability_indicator(const FopPlantParams& pp) {
  pp.validate();
  return {std::cbrt(pp.theta1 * pp.theta2 * pp.k / 2.0), pp.gamma};
}

}  // namespace aifdom
