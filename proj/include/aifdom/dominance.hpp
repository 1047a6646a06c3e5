#pragma once

// Dominance certificates: the rate-lambda Lyapunov-like inequality
//   A' P + P A + 2 lambda P <= -eps I
// with P of inertia (p, 0, n - p), checked over the vertex Jacobians of a
// region, and the attractor classification it implies.

#include "aifdom/circuit_models.hpp"
#include "aifdom/errors.hpp"
#include "aifdom/ode_sim.hpp"
#include "aifdom/regions.hpp"
#include "aifdom/spectral.hpp"
#include "aifdom/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aifdom {

struct InertiaTriple {
  int n_neg = 0;
  int n_zero = 0;
  int n_pos = 0;
  friend bool operator==(const InertiaTriple&, const InertiaTriple&) = default;
};

/// A' P + P A + 2 lambda P, symmetrised.
Matrix lmi_residual(const Matrix& a, const Matrix& p, double lambda);

/// Eigenvalue counts of a symmetric matrix; eigenvalues within
/// zero_tol = rel_zero_tol * spectral norm of zero count as zero.
InertiaTriple inertia(const Matrix& m, double rel_zero_tol = 1e-9);

struct DominanceCertificate {
  Matrix p;
  double lambda = 0.0;
  double epsilon = 0.0;
  int p_degree = 0;
  Region region;
  /// Largest residual eigenvalue over all checked points; <= -epsilon.
  double residual_margin = 0.0;
  int checked_points = 0;
};

struct LmiWitness {
  Vector xi;
  ParamPoint params;
  double max_eigenvalue = 0.0;
  bool is_vertex = true;
};

enum class VerificationFailure { none, inertia_mismatch, lmi_violation };

struct VerificationReport {
  bool passed = false;
  VerificationFailure failure = VerificationFailure::none;
  InertiaTriple inertia;
  int p_degree = 0;
  double lambda = 0.0;
  double residual_margin = 0.0;
  double epsilon = 0.0;  ///< |residual_margin| when passing
  int checked_vertices = 0;
  int checked_points = 0;
  std::optional<LmiWitness> witness;  ///< worst point (failing point on failure)
  Region region;                      ///< region with resolved parameter intervals
};

/// Independent re-check of a candidate P: inertia, then the residual's
/// largest eigenvalue at every region vertex and on a density x density grid
/// of interior points (soundness spot-check beyond the affine vertex
/// relaxation).
VerificationReport verify_certificate(const SystemModel& model, const Region& region,
                                      const Matrix& p, double lambda, int p_degree,
                                      int sample_density = 10);

struct SolveOptions {
  /// Target margin; defaults to 1e-6 * largest vertex Jacobian spectral norm.
  std::optional<double> epsilon;
  int sample_density = 10;
  /// Relative tolerance for a zero eigenvalue of P.
  double rel_zero_tol = 1e-9;
};

/// Certification failure: the LMI is infeasible (with the most violating
/// vertex), the solution is degenerate, or re-verification fails.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::optional<LmiWitness> w, double best_margin)
      : Error(what), witness(std::move(w)), best_margin(best_margin) {}
  std::optional<LmiWitness> witness;
  double best_margin;
};

class DegenerateCertificateError : public Error {
 public:
  using Error::Error;
};

/// Maximum-margin P with -I <= P <= I over the vertex Jacobians of the region
/// at nominal parameters (any eta interval in the region is ignored; a
/// saturating actuator's slope interval is kept). p is read off the inertia.
DominanceCertificate solve_dominance_lmi(const SystemModel& model, const Region& region,
                                         double lambda, const SolveOptions& opts = {});

/// Same over every vertex x parameter-corner Jacobian of the region's
/// parameter box.
DominanceCertificate solve_robust_dominance(const SystemModel& model, const Region& region,
                                            double lambda, const SolveOptions& opts = {});

/// Frozen-matrix variant: the region is a single point with Jacobian `a`.
DominanceCertificate solve_dominance_lmi(const Matrix& a, double lambda,
                                         const SolveOptions& opts = {});

enum class AttractorClass { unique_fixed_point, fixed_point, simple_attractor, limit_cycle };

const char* to_string(AttractorClass c);

struct EquilibriumInfo {
  Vector point;
  SpectrumSample spectrum;  ///< split at lambda = 0
};

struct Classification {
  AttractorClass kind = AttractorClass::simple_attractor;
  std::optional<Vector> fixed_point;
  int equilibria_in_region = 0;
  std::string statement;
};

/// Asymptotic behaviour implied by a certificate. `equilibria` are candidate
/// equilibria (only those inside the certificate's region are used).
Classification classify(const DominanceCertificate& cert, const std::vector<EquilibriumInfo>& equilibria);

// ---------------------------------------------------------------------------
// Proxy regions built from simulated attractors.

struct ProxyRegionSpec {
  std::array<int, 2> coords{0, 1};
  double transient_fraction = 0.5;
  /// Initial margin as a fraction of the projected bounding-box diagonal.
  double margin_fraction = 0.25;
  /// Fixed initial margin, overriding margin_fraction.
  std::optional<double> margin;
  int max_halvings = 3;
  /// Support directions of the circumscribing polygon.
  int polygon_directions = 32;
  /// Extra state coordinates bounded by the inflated post-transient box.
  std::vector<int> box_coords;
  ParamBox params;
};

/// Builds the proxy region with the given number of margin halvings applied.
Region build_proxy_region(const Trajectory& traj, const ProxyRegionSpec& spec, int halvings);

struct ProxyOutcome {
  Region region;
  double margin = 0.0;
  int halvings = 0;
  std::optional<DominanceCertificate> certificate;
  std::optional<VerificationReport> verification;
  std::string failure;
};

/// Solves on the proxy region, halving the margin up to spec.max_halvings
/// times while the problem is infeasible.
ProxyOutcome certify_on_proxy(const SystemModel& model, const Trajectory& traj,
                              const ProxyRegionSpec& spec, double lambda, bool robust,
                              const SolveOptions& opts = {});

/// Verifies a fixed P on the proxy region with the same halving policy.
ProxyOutcome verify_on_proxy(const SystemModel& model, const Trajectory& traj,
                             const ProxyRegionSpec& spec, const Matrix& p, double lambda,
                             int p_degree, int sample_density = 10);

}  // namespace aifdom
