#include "aifdom/ode_sim.hpp"

#include "aifdom/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace aifdom {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

bool in_orthant(const Vector& v) {
  return (v.array() >= -kNegativeStateTolerance).all();
}

}  // namespace

std::size_t Trajectory::window_start(double transient_fraction) const {
  if (times.empty()) return 0;
  const double t_cut = times.front() + transient_fraction * (times.back() - times.front());
  const auto it = std::lower_bound(times.begin(), times.end(), t_cut);
  return static_cast<std::size_t>(it - times.begin());
}

Trajectory integrate(const SystemModel& model, const Vector& x0, double t_end,
                     double rel_tol, double abs_tol) {
  IntegratorSettings s;
  s.rel_tol = rel_tol;
  s.abs_tol = abs_tol;
  return integrate(model, x0, t_end, s);
}

Trajectory integrate(const SystemModel& model, const Vector& x0, double t_end,
                     const IntegratorSettings& settings) {
  if (x0.size() != model.dim) throw DomainError("initial state has wrong dimension");
  require_nonnegative(x0, "initial state");
  if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
  if (!(settings.rel_tol > 0.0) || !(settings.abs_tol > 0.0)) {
    throw DomainError("integrator tolerances must be positive");
  }

  Trajectory traj;
  traj.model_tag = model.tag;
  traj.settings = settings;

  Vector y = x0.cwiseMax(0.0);
  double t = 0.0;
  traj.times.push_back(t);
  traj.states.push_back(y);

  Vector k1 = model.f(y);
  double h = std::min({settings.initial_step, settings.max_step, t_end});
  long steps = 0;

  while (t < t_end) {
    if (++steps > settings.max_steps) throw IntegratorFault("maximum number of steps exceeded");
    bool last = false;
    if (t + h >= t_end) {
      h = t_end - t;
      last = true;
    }

    Vector y_new, k7;
    double err_norm = 0.0;
    bool orthant_ok = true;
    try {
      const Vector k2 = model.f(y + h * (a21 * k1));
      const Vector k3 = model.f(y + h * (a31 * k1 + a32 * k2));
      const Vector k4 = model.f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const Vector k5 = model.f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Vector k6 =
          model.f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      orthant_ok = in_orthant(y_new);
      if (orthant_ok) {
        k7 = model.f(y_new);
        const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const Vector scale = (settings.abs_tol +
                              settings.rel_tol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array())
                                 .matrix();
        err_norm = std::sqrt((err.array() / scale.array()).square().mean());
      }
    } catch (const DomainError&) {
      orthant_ok = false;
    }

    if (!orthant_ok) {
      h *= 0.25;
      if (h < settings.min_step) {
        std::ostringstream os;
        os << "trajectory leaves the nonnegative orthant at t=" << t;
        throw IntegratorFault(os.str());
      }
      continue;
    }
    if (!std::isfinite(err_norm)) {
      throw IntegratorFault("non-finite state during integration");
    }

    if (err_norm <= 1.0) {
      t = last ? t_end : t + h;
      y = y_new.cwiseMax(0.0);
      k1 = k7;
      traj.times.push_back(t);
      traj.states.push_back(y);
      const double factor =
          err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
      h = std::min(h * factor, settings.max_step);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      if (h < settings.min_step) {
        std::ostringstream os;
        os << "step size underflow at t=" << t << " (stiff dynamics?)";
        throw StiffnessError(os.str());
      }
    }
  }
  return traj;
}

Vector refine_equilibrium(const SystemModel& model, const Vector& guess, int max_iterations) {
  if (guess.size() != model.dim) throw DomainError("guess has wrong dimension");
  Vector xi = guess.cwiseMax(0.0);
  auto tol_of = [](const Vector& v) { return 1e-12 * (1.0 + v.cwiseAbs().maxCoeff()); };
  Vector fx = model.f(xi);

  for (int it = 0; it < max_iterations; ++it) {
    if (fx.cwiseAbs().maxCoeff() <= tol_of(xi)) return xi;
    const Matrix jac = model.jacobian(xi);
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) {
      throw ConvergenceError("singular Jacobian during equilibrium refinement");
    }
    const Vector step = -lu.solve(fx);
    const double f0 = fx.norm();
    double alpha = 1.0;
    bool accepted = false;
    while (alpha > 1e-12) {
      const Vector cand = xi + alpha * step;
      if (in_orthant(cand)) {
        const Vector fc = model.f(cand);
        if (fc.norm() <= (1.0 - 1e-4 * alpha) * f0) {
          xi = cand.cwiseMax(0.0);
          fx = fc;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Roundoff floor: a full Newton step that cannot reduce the residual.
      if (fx.cwiseAbs().maxCoeff() <= 1e3 * tol_of(xi)) {
        const Vector cand = xi + step;
        if (in_orthant(cand) && model.f(cand).cwiseAbs().maxCoeff() <= tol_of(cand)) {
          return cand;
        }
      }
      throw ConvergenceError("Newton line search failed during equilibrium refinement");
    }
  }
  if (fx.cwiseAbs().maxCoeff() <= tol_of(xi)) return xi;
  throw ConvergenceError("equilibrium refinement did not converge");
}

const char* to_string(AttractorKind kind) {
  switch (kind) {
    case AttractorKind::equilibrium:
      return "equilibrium";
    case AttractorKind::limit_cycle:
      return "limit_cycle";
    case AttractorKind::undecided:
      return "undecided";
  }
  return "undecided";
}

namespace {

// Cubic Lagrange interpolation of the trajectory around [t_i, t_{i+1}].
struct LocalCubic {
  std::array<double, 4> t{};
  std::array<const Vector*, 4> x{};
  int n = 0;

  LocalCubic(const Trajectory& traj, std::size_t i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(traj.size() - 1, lo + 3);
    const std::size_t start = hi >= 3 ? std::min(lo, hi - 3) : 0;
    for (std::size_t j = start; j <= hi && n < 4; ++j) {
      t[n] = traj.times[j];
      x[n] = &traj.states[j];
      ++n;
    }
  }

  Vector operator()(double tau) const {
    Vector out = Vector::Zero(x[0]->size());
    for (int a = 0; a < n; ++a) {
      double w = 1.0;
      for (int b = 0; b < n; ++b) {
        if (b != a) w *= (tau - t[b]) / (t[a] - t[b]);
      }
      out += w * *x[a];
    }
    return out;
  }
};

}  // namespace

AttractorReport classify_trajectory(const Trajectory& traj, const ClassifyOptions& opts) {
  if (traj.size() < 2) throw InsufficientDataError("trajectory has fewer than two samples");
  const std::size_t w0 = std::min(traj.window_start(opts.transient_fraction), traj.size() - 2);
  const std::size_t nw = traj.size() - w0;
  const int n = traj.dim();

  AttractorReport rep;
  rep.diagnostics.window_samples = nw;

  // Equilibrium: the final fifth of the window is flat and slow.
  const std::size_t tail0 = w0 + (nw * 4) / 5;
  Vector lo = traj.states[tail0], hi = traj.states[tail0];
  for (std::size_t i = tail0; i < traj.size(); ++i) {
    lo = lo.cwiseMin(traj.states[i]);
    hi = hi.cwiseMax(traj.states[i]);
  }
  const std::size_t last = traj.size() - 1;
  const double dt = traj.times[last] - traj.times[last - 1];
  rep.diagnostics.tail_variation = (hi - lo).maxCoeff();
  rep.diagnostics.tail_speed =
      dt > 0.0 ? (traj.states[last] - traj.states[last - 1]).cwiseAbs().maxCoeff() / dt : 0.0;

  const bool flat = rep.diagnostics.tail_variation <= opts.eq_tol &&
                    rep.diagnostics.tail_speed <= opts.eq_tol;

  // Poincare section through the window mean, normal to the principal
  // direction of the window samples.
  Vector mean = Vector::Zero(n);
  for (std::size_t i = w0; i < traj.size(); ++i) mean += traj.states[i];
  mean /= static_cast<double>(nw);
  Matrix cov = Matrix::Zero(n, n);
  Vector wlo = traj.states[w0], whi = traj.states[w0];
  for (std::size_t i = w0; i < traj.size(); ++i) {
    const Vector d = traj.states[i] - mean;
    cov += d * d.transpose();
    wlo = wlo.cwiseMin(traj.states[i]);
    whi = whi.cwiseMax(traj.states[i]);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const Vector normal = es.eigenvectors().col(n - 1);
  const double scale = (whi - wlo).norm();

  std::vector<Vector> returns;
  if (!flat && scale > 0.0) {
    auto section = [&](const Vector& v) { return normal.dot(v - mean); };
    for (std::size_t i = w0; i + 1 < traj.size(); ++i) {
      const double s0 = section(traj.states[i]);
      const double s1 = section(traj.states[i + 1]);
      if (!(s0 < 0.0 && s1 >= 0.0)) continue;
      const LocalCubic cubic(traj, i);
      double ta = traj.times[i], tb = traj.times[i + 1];
      double fa = s0;
      for (int it = 0; it < 60 && tb - ta > 1e-15 * (1.0 + std::abs(tb)); ++it) {
        const double tm = 0.5 * (ta + tb);
        const double fm = section(cubic(tm));
        if ((fm < 0.0) == (fa < 0.0)) {
          ta = tm;
          fa = fm;
        } else {
          tb = tm;
        }
      }
      const double tc = 0.5 * (ta + tb);
      rep.return_times.push_back(tc);
      returns.push_back(cubic(tc));
    }
  }

  if (nw < 100 && returns.size() < 10) {
    throw InsufficientDataError("post-transient window holds fewer than 100 samples");
  }

  if (flat) {
    rep.kind = AttractorKind::equilibrium;
    rep.location = traj.states.back();
    return rep;
  }

  rep.diagnostics.n_returns = static_cast<int>(returns.size());
  if (returns.size() >= 3) {
    std::vector<double> periods;
    for (std::size_t i = 1; i < rep.return_times.size(); ++i) {
      periods.push_back(rep.return_times[i] - rep.return_times[i - 1]);
    }
    const auto [pmin, pmax] = std::minmax_element(periods.begin(), periods.end());
    double pmean = 0.0;
    for (double p : periods) pmean += p;
    pmean /= static_cast<double>(periods.size());
    double closure = 0.0;
    for (std::size_t i = 1; i < returns.size(); ++i) {
      closure = std::max(closure, (returns[i] - returns[i - 1]).norm() / scale);
    }
    rep.diagnostics.period_dispersion = (*pmax - *pmin) / pmean;
    rep.diagnostics.closure_residual = closure;
    if (pmean > 0.0 && rep.diagnostics.period_dispersion <= opts.period_dispersion_tol &&
        closure <= opts.cycle_tol) {
      rep.kind = AttractorKind::limit_cycle;
      rep.period = pmean;
      const double t_a = rep.return_times[rep.return_times.size() - 2];
      const double t_b = rep.return_times.back();
      for (std::size_t i = w0; i < traj.size(); ++i) {
        if (traj.times[i] >= t_a && traj.times[i] <= t_b) rep.cycle_samples.push_back(traj.states[i]);
      }
      return rep;
    }
  }
  rep.kind = AttractorKind::undecided;
  return rep;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (int i = 1; i <= traj.dim(); ++i) os << ",xi_" << i;
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << traj.times[i];
    for (Eigen::Index j = 0; j < traj.states[i].size(); ++j) os << ',' << traj.states[i][j];
    os << '\n';
  }
}

}  // namespace aifdom
