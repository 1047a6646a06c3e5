#include "aifdom/dominance.hpp"

#include "aifdom/lmi_barrier.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace aifdom {

Matrix lmi_residual(const Matrix& a, const Matrix& p, double lambda) {
  Matrix r = a.transpose() * p + p * a + 2.0 * lambda * p;
  return 0.5 * (r + r.transpose());
}

InertiaTriple inertia(const Matrix& m, double rel_zero_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double scale = ev.size() > 0 ? ev.cwiseAbs().maxCoeff() : 0.0;
  const double tol = rel_zero_tol * scale;
  InertiaTriple t;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > tol) {
      ++t.n_pos;
    } else if (ev[i] < -tol) {
      ++t.n_neg;
    } else {
      ++t.n_zero;
    }
  }
  return t;
}

namespace {

double max_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[es.eigenvalues().size() - 1];
}

double spectral_norm(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()[0];
}

void check_symmetric(const Matrix& p) {
  if (p.rows() != p.cols()) throw DomainError("P must be square");
  const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError("P must be symmetric");
  }
}

// Basis of symmetric matrices: E_ij = e_i e_j' + e_j e_i' (i < j), E_ii = e_i e_i'.
std::vector<Matrix> symmetric_basis(int n) {
  std::vector<Matrix> basis;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Matrix e = Matrix::Zero(n, n);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      basis.push_back(std::move(e));
    }
  }
  return basis;
}

Matrix from_basis(const std::vector<Matrix>& basis, const Vector& x, int n) {
  Matrix p = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < basis.size(); ++k) p += x[static_cast<Eigen::Index>(k)] * basis[k];
  return p;
}

struct VertexJacobian {
  Matrix a;
  Vector xi;
  ParamPoint params;
};

// Maximises t subject to A_v' P + P A_v + 2 lambda P <= -t I, -I <= P <= I.
Matrix solve_vertices(const std::vector<VertexJacobian>& verts, double lambda,
                      const SolveOptions& opts, double& eps_out) {
  if (verts.empty()) throw RegionError("region has no vertices");
  const int n = static_cast<int>(verts.front().a.rows());
  double norm = 0.0;
  for (const auto& v : verts) norm = std::max(norm, spectral_norm(v.a));
  const double eps = opts.epsilon ? *opts.epsilon : 1e-6 * std::max(norm, 1.0);
  eps_out = eps;

  const auto basis = symmetric_basis(n);
  const auto nb = static_cast<Eigen::Index>(basis.size());
  const Eigen::Index nv = nb + 1;
  const Matrix id = Matrix::Identity(n, n);
  const Matrix zero = Matrix::Zero(n, n);

  std::vector<LmiBlock> blocks;
  for (const auto& v : verts) {
    LmiBlock b;
    b.f0 = zero;
    for (const auto& e : basis) b.fk.push_back(-lmi_residual(v.a, e, lambda));
    b.fk.push_back(-id);
    blocks.push_back(std::move(b));
  }
  for (double sign : {1.0, -1.0}) {
    LmiBlock b;
    b.f0 = id;
    for (const auto& e : basis) b.fk.push_back(-sign * e);
    b.fk.push_back(zero);
    blocks.push_back(std::move(b));
  }

  Vector cost = Vector::Zero(nv);
  cost[nb] = 1.0;
  Vector x0 = Vector::Zero(nv);
  x0[nb] = -1.0;

  BarrierOptions bo;
  bo.give_up_below = eps;
  const BarrierResult res = maximize_lmi(cost, blocks, x0, bo);
  const Matrix p = from_basis(basis, res.x, n);
  const double t = res.x[nb];

  if (t < eps) {
    std::optional<LmiWitness> worst;
    for (const auto& v : verts) {
      const double m = max_eigenvalue(lmi_residual(v.a, p, lambda));
      if (!worst || m > worst->max_eigenvalue) worst = LmiWitness{v.xi, v.params, m, true};
    }
    std::ostringstream os;
    os << "dominance LMI infeasible at rate " << lambda << " (best margin " << t
       << ", upper bound " << res.upper_bound << ", target " << eps << ")";
    throw InfeasibleError(os.str(), worst, t);
  }

  const InertiaTriple in = inertia(p, opts.rel_zero_tol);
  if (in.n_zero > 0) throw DegenerateCertificateError("certificate P has a zero eigenvalue");
  return p;
}

std::vector<VertexJacobian> vertex_jacobians(const SystemModel& model, const Region& region) {
  std::vector<VertexJacobian> out;
  for (const auto& v : vertices(region, model)) {
    out.push_back({model.jacobian(v.xi, v.params), v.xi, v.params});
  }
  return out;
}

DominanceCertificate certify(const SystemModel& model, const Region& region, double lambda,
                             const SolveOptions& opts) {
  region.validate();
  const Region resolved = resolve_params(region, model);
  double eps = 0.0;
  const Matrix p = solve_vertices(vertex_jacobians(model, resolved), lambda, opts, eps);
  const int p_degree = inertia(p, opts.rel_zero_tol).n_neg;
  const VerificationReport rep =
      verify_certificate(model, resolved, p, lambda, p_degree, opts.sample_density);
  if (!rep.passed) {
    throw InfeasibleError("solver output failed independent re-verification", rep.witness,
                          -rep.residual_margin);
  }
  DominanceCertificate cert;
  cert.p = p;
  cert.lambda = lambda;
  cert.epsilon = rep.epsilon;
  cert.p_degree = p_degree;
  cert.region = rep.region;
  cert.residual_margin = rep.residual_margin;
  cert.checked_points = rep.checked_points;
  return cert;
}

}  // namespace

VerificationReport verify_certificate(const SystemModel& model, const Region& region,
                                      const Matrix& p, double lambda, int p_degree,
                                      int sample_density) {
  check_symmetric(p);
  if (p.rows() != model.dim) throw DomainError("P has the wrong dimension for the model");
  region.validate();

  VerificationReport rep;
  rep.region = resolve_params(region, model);
  rep.lambda = lambda;
  rep.p_degree = p_degree;
  rep.inertia = inertia(p);
  const InertiaTriple expected{p_degree, 0, model.dim - p_degree};
  const bool inertia_ok = rep.inertia == expected;

  double worst = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& xi, const ParamPoint& pp, bool is_vertex) {
    const double m = max_eigenvalue(lmi_residual(model.jacobian(xi, pp), p, lambda));
    if (m > worst) {
      worst = m;
      rep.witness = LmiWitness{xi, pp, m, is_vertex};
    }
  };

  const auto verts = vertices(rep.region, model);
  for (const auto& v : verts) consider(v.xi, v.params, true);
  rep.checked_vertices = static_cast<int>(verts.size());

  // Interior spot check at the true (unrelaxed) Jacobian. Bounded extra
  // coordinates follow a golden-ratio sequence through their interval.
  std::set<int> extra;
  for (int c : model.jacobian_state_deps) {
    if (c != rep.region.coords[0] && c != rep.region.coords[1]) extra.insert(c);
  }
  Vector base = Vector::Zero(model.dim);
  for (const auto& [idx, iv] : rep.region.x_box) {
    if (idx >= 0 && idx < model.dim) base[idx] = iv.mid();
  }
  const double golden = 0.6180339887498949;
  int interior = 0;
  for (const auto& z : interior_grid(rep.region, sample_density)) {
    Vector xi = base;
    xi[rep.region.coords[0]] = z.x();
    xi[rep.region.coords[1]] = z.y();
    int j = 0;
    for (int c : extra) {
      const Interval& iv = rep.region.x_box.at(c);
      const double frac = std::fmod((interior + 1) * golden * (j + 1), 1.0);
      xi[c] = iv.lo + frac * iv.width();
      ++j;
    }
    ParamPoint pp;
    if (rep.region.params.eta) {
      pp.eta = (interior % 2 == 0) ? rep.region.params.eta->lo : rep.region.params.eta->hi;
    }
    consider(xi, pp, false);
    ++interior;
  }
  rep.checked_points = rep.checked_vertices + interior;
  rep.residual_margin = worst;
  if (!inertia_ok) {
    rep.failure = VerificationFailure::inertia_mismatch;
  } else if (worst < 0.0) {
    rep.passed = true;
    rep.epsilon = -worst;
  } else {
    rep.failure = VerificationFailure::lmi_violation;
  }
  return rep;
}

DominanceCertificate solve_dominance_lmi(const SystemModel& model, const Region& region,
                                         double lambda, const SolveOptions& opts) {
  Region nominal = region;
  nominal.params.eta.reset();
  return certify(model, nominal, lambda, opts);
}

DominanceCertificate solve_robust_dominance(const SystemModel& model, const Region& region,
                                            double lambda, const SolveOptions& opts) {
  return certify(model, region, lambda, opts);
}

DominanceCertificate solve_dominance_lmi(const Matrix& a, double lambda, const SolveOptions& opts) {
  if (a.rows() != a.cols() || a.rows() == 0) throw DomainError("A must be square");
  double eps = 0.0;
  const Matrix p = solve_vertices({VertexJacobian{a, Vector::Zero(a.rows()), {}}}, lambda, opts, eps);
  const double margin = max_eigenvalue(lmi_residual(a, p, lambda));
  if (!(margin < 0.0)) {
    throw InfeasibleError("solver output failed independent re-verification",
                          LmiWitness{Vector::Zero(a.rows()), {}, margin, true}, -margin);
  }
  DominanceCertificate cert;
  cert.p = p;
  cert.lambda = lambda;
  cert.epsilon = -margin;
  cert.p_degree = inertia(p, opts.rel_zero_tol).n_neg;
  cert.residual_margin = margin;
  cert.checked_points = 1;
  return cert;
}

const char* to_string(AttractorClass c) {
  switch (c) {
    case AttractorClass::unique_fixed_point: return "unique_fixed_point";
    case AttractorClass::fixed_point: return "fixed_point";
    case AttractorClass::simple_attractor: return "simple_attractor";
    case AttractorClass::limit_cycle: return "limit_cycle";
  }
  return "unknown";
}

Classification classify(const DominanceCertificate& cert, const std::vector<EquilibriumInfo>& equilibria) {
  Classification out;
  std::vector<const EquilibriumInfo*> inside;
  for (const auto& e : equilibria) {
    if (contains(cert.region, e.point)) inside.push_back(&e);
  }
  out.equilibria_in_region = static_cast<int>(inside.size());

  if (cert.p_degree == 0) {
    out.kind = AttractorClass::unique_fixed_point;
    if (inside.size() == 1) out.fixed_point = inside.front()->point;
    out.statement = "0-dominant: every bounded trajectory in the region converges to a unique fixed point";
    return out;
  }
  if (cert.p_degree == 1) {
    out.kind = AttractorClass::fixed_point;
    if (inside.size() == 1) out.fixed_point = inside.front()->point;
    out.statement = "1-dominant: every bounded trajectory in the region converges to a fixed point";
    return out;
  }
  if (cert.p_degree != 2) {
    throw UnsupportedDegreeError("no attractor classification for p = " +
                                 std::to_string(cert.p_degree));
  }
  out.kind = AttractorClass::simple_attractor;
  out.statement =
      "2-dominant: bounded trajectories in the region converge to a simple attractor (fixed "
      "point, connected fixed points or limit cycle)";
  const bool all_unstable =
      !inside.empty() && std::all_of(inside.begin(), inside.end(),
                                     [](const EquilibriumInfo* e) { return e->spectrum.n_right > 0; });
  if (all_unstable) {
    out.kind = AttractorClass::limit_cycle;
    if (inside.size() == 1) out.fixed_point = inside.front()->point;
    out.statement =
        "2-dominant and every equilibrium in the region is unstable: bounded trajectories off "
        "the stable manifolds converge to a limit cycle";
  }
  return out;
}

Region build_proxy_region(const Trajectory& traj, const ProxyRegionSpec& spec, int halvings) {
  const double scale = std::ldexp(1.0, -halvings);
  const double z_margin =
      (spec.margin ? *spec.margin
                   : spec.margin_fraction * projected_diagonal(traj, spec.coords, spec.transient_fraction)) *
      scale;
  Region r = hull_of_trajectory(traj, spec.coords, z_margin, spec.transient_fraction);
  // Dense trajectories give hulls with thousands of vertices; a circumscribing
  // polygon keeps the vertex relaxation small and still contains the hull.
  if (r.z_polytope.size() >= 3) {
    auto poly = circumscribed_polygon(r.z_polytope, spec.polygon_directions);
    poly = convex_hull(clip_to_nonnegative(clip_to_nonnegative(poly, 0), 1));
    r.z_polytope = std::move(poly);
  }
  if (!spec.box_coords.empty()) {
    double box_margin = z_margin;
    if (!spec.margin) {
      const auto raw = box_of_trajectory(traj, spec.box_coords, 0.0, spec.transient_fraction);
      double d2 = 0.0;
      for (const auto& [c, iv] : raw) d2 += iv.width() * iv.width();
      box_margin = spec.margin_fraction * std::sqrt(d2) * scale;
    }
    r.x_box = box_of_trajectory(traj, spec.box_coords, box_margin, spec.transient_fraction);
  }
  r.params = spec.params;
  return r;
}

namespace {

double proxy_margin(const Trajectory& traj, const ProxyRegionSpec& spec, int halvings) {
  const double m = spec.margin ? *spec.margin
                               : spec.margin_fraction *
                                     projected_diagonal(traj, spec.coords, spec.transient_fraction);
  return std::ldexp(m, -halvings);
}

}  // namespace

ProxyOutcome certify_on_proxy(const SystemModel& model, const Trajectory& traj,
                              const ProxyRegionSpec& spec, double lambda, bool robust,
                              const SolveOptions& opts) {
  ProxyOutcome out;
  for (int h = 0; h <= spec.max_halvings; ++h) {
    out.halvings = h;
    out.margin = proxy_margin(traj, spec, h);
    out.region = build_proxy_region(traj, spec, h);
    try {
      DominanceCertificate cert = robust ? solve_robust_dominance(model, out.region, lambda, opts)
                                         : solve_dominance_lmi(model, out.region, lambda, opts);
      out.verification = verify_certificate(model, cert.region, cert.p, lambda, cert.p_degree,
                                            opts.sample_density);
      out.region = cert.region;
      out.certificate = std::move(cert);
      out.failure.clear();
      return out;
    } catch (const InfeasibleError& e) {
      out.failure = e.what();
    } catch (const DegenerateCertificateError& e) {
      out.failure = e.what();
    } catch (const BoundarySplitError& e) {
      out.failure = e.what();
    }
  }
  return out;
}

ProxyOutcome verify_on_proxy(const SystemModel& model, const Trajectory& traj,
                             const ProxyRegionSpec& spec, const Matrix& p, double lambda,
                             int p_degree, int sample_density) {
  ProxyOutcome out;
  for (int h = 0; h <= spec.max_halvings; ++h) {
    out.halvings = h;
    out.margin = proxy_margin(traj, spec, h);
    out.region = build_proxy_region(traj, spec, h);
    VerificationReport rep = verify_certificate(model, out.region, p, lambda, p_degree, sample_density);
    out.region = rep.region;
    const bool ok = rep.passed;
    out.verification = std::move(rep);
    if (ok) {
      out.failure.clear();
      return out;
    }
    out.failure = out.verification->failure == VerificationFailure::inertia_mismatch
                      ? "inertia mismatch"
                      : "LMI violated";
    if (out.verification->failure == VerificationFailure::inertia_mismatch) return out;
  }
  return out;
}

}  // namespace aifdom
