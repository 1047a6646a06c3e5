#include "aifdom/spectral.hpp"

#include "aifdom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace aifdom {

namespace {

std::array<int, 3> split_counts(const ComplexVector& ev, double lambda) {
  std::array<int, 3> c{0, 0, 0};
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double d = ev[i].real() + lambda;
    if (std::abs(d) <= kSplitTolerance) {
      ++c[2];
    } else if (d > 0.0) {
      ++c[0];
    } else {
      ++c[1];
    }
  }
  return c;
}

}  // namespace

SpectrumSample spectrum_of(const Matrix& a, double lambda) {
  if (!a.allFinite()) throw DomainError("spectrum of a non-finite matrix");
  SpectrumSample s;
  s.lambda = lambda;
  s.eigenvalues = Eigen::EigenSolver<Matrix>(a, false).eigenvalues();
  const auto c = split_counts(s.eigenvalues, lambda);
  if (c[2] > 0) {
    std::ostringstream os;
    os << c[2] << " eigenvalue(s) within " << kSplitTolerance << " of Re(s) = " << -lambda;
    throw BoundarySplitError(os.str());
  }
  s.n_right = c[0];
  s.n_left = c[1];
  return s;
}

SpectrumSample spectrum(const SystemModel& model, const Vector& xi, double lambda,
                        const ParamPoint& params) {
  if (!xi.allFinite()) throw DomainError("spectrum at a non-finite state");
  SpectrumSample s = spectrum_of(model.jacobian(xi, params), lambda);
  s.xi = xi;
  return s;
}

Complex frozen_transfer_function(const Eigen::Vector2d& z, Complex s, const ControllerParams& cp,
                                 const FopPlantParams& pp, const std::optional<HillParams>& hill) {
  const double scale = 1.0 + std::abs(s);
  const Complex p_int = s;
  const Complex p_plant = pp.gamma + s;
  const Complex p_seq = s + cp.eta * (z[0] + z[1]);
  const double tol = 1e-14 * scale;
  if (std::abs(p_int) <= tol || std::abs(p_plant) <= tol || std::abs(p_seq) <= tol) {
    throw ContourError("frozen transfer function evaluated at a pole");
  }
  const double actuation = hill ? hill_value_and_derivative(z[0], *hill).slope : pp.theta1;
  const double gain = actuation * pp.theta2 * cp.eta * pp.k * z[0];
  return gain / (p_int * p_plant * p_plant * p_seq);
}

Complex FrozenLoop::eval(Complex s) const {
  Eigen::MatrixXcd m = -a.cast<Complex>();
  m.diagonal().array() += s;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  const Eigen::VectorXcd x = lu.solve(b.cast<Complex>());
  const Complex g = (c.cast<Complex>() * x)(0);
  if (!std::isfinite(g.real()) || !std::isfinite(g.imag())) {
    throw ContourError("transfer function evaluated at a pole");
  }
  return g;
}

ComplexVector FrozenLoop::poles() const { return Eigen::EigenSolver<Matrix>(a, false).eigenvalues(); }

FrozenLoop frozen_loop(const SystemModel& model, const Vector& xi, const ParamPoint& params) {
  return {model.open_loop_jacobian(xi, params), model.input_column, model.output_gradient(xi)};
}

namespace {

double phase_step(Complex a, Complex b) { return std::arg(b / a); }

// Portion of the Nyquist contour: a segment of the shifted axis
// (parameter omega) or a right-hand indentation arc (parameter phi).
struct Piece {
  bool line = true;
  double center = 0.0;
  std::vector<double> params;
  std::vector<Complex> values;
};

}  // namespace

FrequencyLocus nyquist_locus(const FrozenLoop& loop, double lambda, double loop_gain,
                             const NyquistOptions& opts) {
  if (!(loop_gain > 0.0)) throw DomainError("loop gain must be positive");
  FrequencyLocus out;
  out.lambda = lambda;
  out.loop_gain = loop_gain;
  out.critical_point = Complex(-1.0 / loop_gain, 0.0);
  out.open_loop_poles = loop.poles();

  {
    // G vanishes identically iff every Markov parameter c A^k b does.
    double markov = 0.0;
    Vector v = loop.b;
    for (Eigen::Index k = 0; k < loop.a.rows(); ++k) {
      markov = std::max(markov, std::abs(loop.c.dot(v)));
      v = loop.a * v;
    }
    out.degenerate_numerator = markov < 1e-12;
  }

  std::vector<double> centers;  // |imag| of poles on the shifted axis
  for (Eigen::Index i = 0; i < out.open_loop_poles.size(); ++i) {
    const Complex p = out.open_loop_poles[i];
    const double d = p.real() + lambda;
    if (std::abs(d) <= opts.pole_tol * (1.0 + std::abs(p))) {
      if (!opts.indent) throw ContourError("open-loop pole on the shifted axis; enable indentation");
      ++out.marginal_poles;
      const double w = std::abs(p.imag()) <= opts.indent_radius ? 0.0 : std::abs(p.imag());
      const bool known = std::any_of(centers.begin(), centers.end(),
                                     [&](double c) { return std::abs(c - w) <= opts.indent_radius; });
      if (!known) centers.push_back(w);
    } else if (d > 0.0) {
      ++out.q;
    }
  }
  std::sort(centers.begin(), centers.end());
  const double rho = opts.indent_radius;
  for (std::size_t i = 1; i < centers.size(); ++i) {
    if (centers[i] - centers[i - 1] < 2.0 * rho) {
      throw ContourError("indentations around shifted-axis poles overlap");
    }
  }

  // Past omega_max, |kappa G| < 1/2: no winding can occur there or on the
  // closing arc at infinity.
  double omega_max = std::max(opts.omega_max, 1.0);
  omega_max = std::max(omega_max, loop.a.norm() + std::abs(lambda) +
                                      2.0 * loop_gain * loop.b.norm() * loop.c.norm() + 1.0);
  if (!centers.empty()) omega_max = std::max(omega_max, centers.back() + 2.0 * rho + 1.0);
  out.omega_max = omega_max;

  const Complex one(1.0, 0.0);
  const Complex shift(-lambda, 0.0);
  auto w_of = [&](Complex g) { return one + loop_gain * g; };
  auto eval_checked = [&](Complex s) {
    const Complex g = loop.eval(s);
    if (std::abs(g - out.critical_point) <= opts.wind_tol) {
      throw MarginalWindingError("locus passes within wind_tol of the critical point");
    }
    return g;
  };

  // Bisect until both G and 1 + kappa G turn by less than max_phase_step
  // between consecutive samples.
  auto refine = [&](const std::function<Complex(double)>& s_of, const std::vector<double>& grid) {
    Piece piece;
    piece.params.push_back(grid.front());
    piece.values.push_back(eval_checked(s_of(grid.front())));
    for (std::size_t i = 1; i < grid.size(); ++i) {
      std::vector<std::pair<double, Complex>> stack;
      stack.emplace_back(grid[i], eval_checked(s_of(grid[i])));
      while (!stack.empty()) {
        const double t0 = piece.params.back();
        const Complex g0 = piece.values.back();
        const auto [t1, g1] = stack.back();
        const double dw = std::abs(phase_step(w_of(g0), w_of(g1)));
        const double dg = (g0 == Complex{} || g1 == Complex{}) ? 0.0 : std::abs(phase_step(g0, g1));
        const bool tiny = t1 - t0 <= 1e-13 * std::max(1.0, std::abs(t1));
        if ((dw < opts.max_phase_step && dg < opts.max_phase_step) || tiny) {
          if (dw >= std::numbers::pi / 2.0) {
            throw MarginalWindingError("phase increment unresolved near the critical point");
          }
          piece.params.push_back(t1);
          piece.values.push_back(g1);
          stack.pop_back();
        } else {
          const double tm = 0.5 * (t0 + t1);
          stack.emplace_back(tm, eval_checked(s_of(tm)));
        }
      }
    }
    return piece;
  };

  const int n_half = std::max(opts.n_samples / 2, 16);
  auto line_grid = [n_half](double a, double b) {
    std::vector<double> g;
    const int nu = n_half / 2;
    for (int i = 0; i <= nu; ++i) g.push_back(a + (b - a) * i / nu);
    const double la = std::log(std::max(a, 1e-6 * b));
    const double lb = std::log(b);
    for (int i = 0; i <= nu; ++i) {
      const double v = std::exp(la + (lb - la) * i / nu);
      if (v > a && v < b) g.push_back(v);
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
  };
  std::vector<double> arc_grid;
  for (int i = 0; i <= 64; ++i) arc_grid.push_back(-std::numbers::pi / 2.0 + std::numbers::pi * i / 64);

  auto line_s = [shift](double w) { return shift + Complex(0.0, w); };
  auto arc_s = [shift, rho](double c) {
    return [shift, rho, c](double phi) { return shift + Complex(0.0, c) + rho * std::polar(1.0, phi); };
  };

  // Upper half (omega >= 0) in increasing omega.
  std::optional<Piece> arc_zero;
  std::vector<Piece> upper;
  double start = 0.0;
  for (double c : centers) {
    if (c == 0.0) {
      Piece p = refine(arc_s(0.0), arc_grid);
      p.line = false;
      arc_zero = std::move(p);
      start = rho;
      continue;
    }
    upper.push_back(refine(line_s, line_grid(start, c - rho)));
    Piece p = refine(arc_s(c), arc_grid);
    p.line = false;
    p.center = c;
    upper.push_back(std::move(p));
    start = c + rho;
  }
  upper.push_back(refine(line_s, line_grid(start, omega_max)));

  // Lower half, evaluated directly at the mirrored points and traversed upward.
  std::vector<Piece> lower;
  for (auto it = upper.rbegin(); it != upper.rend(); ++it) {
    Piece m;
    m.line = it->line;
    m.center = -it->center;
    for (auto p = it->params.rbegin(); p != it->params.rend(); ++p) {
      if (it->line && *p == 0.0) continue;
      m.params.push_back(-*p);
      const Complex s = it->line ? line_s(-*p) : shift + Complex(0.0, -it->center) +
                                                     rho * std::polar(1.0, -*p);
      m.values.push_back(eval_checked(s));
    }
    lower.push_back(std::move(m));
  }

  std::vector<Complex> contour;
  auto emit = [&](const Piece& p) {
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      contour.push_back(p.values[i]);
      if (p.line) {
        out.omega.push_back(p.params[i]);
        out.values.push_back(p.values[i]);
      } else {
        out.indentation_values.push_back(p.values[i]);
      }
    }
  };
  for (const auto& p : lower) emit(p);
  if (arc_zero) emit(*arc_zero);
  for (const auto& p : upper) emit(p);

  double total = 0.0;
  for (std::size_t i = 1; i < contour.size(); ++i) {
    total += phase_step(w_of(contour[i - 1]), w_of(contour[i]));
  }
  total += phase_step(w_of(contour.back()), w_of(contour.front()));
  // Upward traversal encloses the right region clockwise.
  out.encirclements = -static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
  return out;
}

FrequencyLocus nyquist_locus(const SystemModel& model, const Vector& xi, double lambda,
                             double loop_gain, const NyquistOptions& opts, const ParamPoint& params) {
  FrequencyLocus l = nyquist_locus(frozen_loop(model, xi, params), lambda, loop_gain, opts);
  l.xi = xi;
  return l;
}

namespace {

Vector fop_state(const Eigen::Vector2d& z) {
  Vector xi = Vector::Zero(4);
  xi.head<2>() = z;
  return xi;
}

}  // namespace

FrequencyLocus nyquist_locus(const Eigen::Vector2d& z, double lambda, double loop_gain,
                             const ControllerParams& cp, const FopPlantParams& pp,
                             const std::optional<HillParams>& hill, double omega_max,
                             int n_samples) {
  NyquistOptions opts;
  opts.omega_max = omega_max;
  opts.n_samples = n_samples;
  return nyquist_locus(fop_closed_loop(cp, pp, hill), fop_state(z), lambda, loop_gain, opts);
}

RootLocus root_locus(const FrozenLoop& loop, const std::vector<double>& gain_grid, double lambda) {
  if (gain_grid.empty()) throw DomainError("gain grid is empty");
  RootLocus rl;
  rl.lambda = lambda;
  rl.gains = gain_grid;
  rl.open_loop_poles = loop.poles();
  const auto n = static_cast<int>(loop.a.rows());

  for (double kappa : gain_grid) {
    ComplexVector ev = Eigen::EigenSolver<Matrix>(loop.closed(kappa), false).eigenvalues();
    const ComplexVector& prev = rl.poles.empty() ? rl.open_loop_poles : rl.poles.back();
    // Order the new eigenvalues to continue the previous traces: exhaustive
    // matching for small systems, greedy otherwise.
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    if (n <= 7) {
      double best_cost = std::numeric_limits<double>::infinity();
      do {
        double cost = 0.0;
        for (int i = 0; i < n; ++i) cost += std::abs(prev[i] - ev[perm[i]]);
        if (cost < best_cost) {
          best_cost = cost;
          best = perm;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
      std::vector<bool> used(n, false);
      for (int i = 0; i < n; ++i) {
        int arg = -1;
        double d = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
          if (!used[j] && std::abs(prev[i] - ev[j]) < d) {
            d = std::abs(prev[i] - ev[j]);
            arg = j;
          }
        }
        used[arg] = true;
        best[i] = arg;
      }
    }
    ComplexVector ordered(n);
    for (int i = 0; i < n; ++i) ordered[i] = ev[best[i]];
    rl.poles.push_back(ordered);
    rl.split.push_back(split_counts(ordered, lambda));
  }
  return rl;
}

RootLocus root_locus(const Eigen::Vector2d& z, const std::vector<double>& gain_grid, double lambda,
                     const ControllerParams& cp, const FopPlantParams& pp,
                     const std::optional<HillParams>& hill) {
  return root_locus(frozen_loop(fop_closed_loop(cp, pp, hill), fop_state(z)), gain_grid, lambda);
}

}  // namespace aifdom
