#pragma once

// Necessary-condition diagnostics for p-dominance: eigenvalue splitting about
// Re(s) = -lambda, frozen state-dependent transfer functions, Nyquist loci on
// the shifted imaginary axis and root-locus traces.

#include "aifdom/circuit_models.hpp"
#include "aifdom/types.hpp"

#include <array>
#include <optional>
#include <vector>

namespace aifdom {

inline constexpr double kSplitTolerance = 1e-9;

struct SpectrumSample {
  Vector xi;
  double lambda = 0.0;
  ComplexVector eigenvalues;
  int n_right = 0;  ///< real part > -lambda
  int n_left = 0;   ///< real part < -lambda
};

/// Eigenvalues of the closed-loop Jacobian at xi and their split about
/// -lambda. Throws BoundarySplitError if an eigenvalue lies within
/// kSplitTolerance of the dividing line.
SpectrumSample spectrum(const SystemModel& model, const Vector& xi, double lambda,
                        const ParamPoint& params = {});

/// Split of an arbitrary matrix; same contract as spectrum().
SpectrumSample spectrum_of(const Matrix& a, double lambda);

/// Closed form theta1 theta2 eta k z1 / (s (gamma+s)^2 (s + eta (z1+z2))) for
/// the first-order production loop; theta1 becomes theta1'(z1) with Hill
/// actuation. Throws ContourError at a pole.
Complex frozen_transfer_function(const Eigen::Vector2d& z, Complex s, const ControllerParams& cp,
                                 const FopPlantParams& pp,
                                 const std::optional<HillParams>& hill = {});

/// State-space realisation of the loop frozen at one state:
/// G(s) = c (sI - A)^-1 b, closed-loop matrix A - kappa b c.
struct FrozenLoop {
  Matrix a;
  Vector b;
  RowVector c;

  [[nodiscard]] Complex eval(Complex s) const;
  [[nodiscard]] Matrix closed(double kappa) const { return a - kappa * b * c; }
  [[nodiscard]] ComplexVector poles() const;
};

FrozenLoop frozen_loop(const SystemModel& model, const Vector& xi, const ParamPoint& params = {});

struct NyquistOptions {
  /// Frequency range of the sampled locus. Extended automatically until the
  /// loop gain is below 1/2 beyond it.
  double omega_max = 100.0;
  int n_samples = 2000;
  /// Indent around open-loop poles on the shifted axis (right detour).
  bool indent = true;
  double indent_radius = 1e-3;
  /// Poles whose real part is within this distance of -lambda are treated as
  /// lying on the shifted axis. Loose enough to absorb the O(sqrt(eps))
  /// perturbation of repeated eigenvalues.
  double pole_tol = 1e-6;
  /// Minimum distance between the locus and the critical point.
  double wind_tol = 1e-9;
  /// Maximum |arg| increment of 1 + kappa G between consecutive samples.
  double max_phase_step = 0.7853981633974483;
};

struct FrequencyLocus {
  Vector xi;
  double lambda = 0.0;
  double loop_gain = 1.0;
  Complex critical_point{-1.0, 0.0};
  double omega_max = 0.0;
  /// Samples on the shifted axis s = -lambda + j omega, symmetric about 0.
  std::vector<double> omega;
  std::vector<Complex> values;
  /// Samples on the indentation detours (contour order).
  std::vector<Complex> indentation_values;
  ComplexVector open_loop_poles;
  int q = 0;                ///< open-loop poles strictly right of the (indented) axis
  int marginal_poles = 0;   ///< poles on the shifted axis, bypassed on the right
  int encirclements = 0;    ///< clockwise positive
  bool degenerate_numerator = false;
};

/// Nyquist locus of G on the shifted axis and signed clockwise winding number
/// about -1/loop_gain.
FrequencyLocus nyquist_locus(const FrozenLoop& loop, double lambda, double loop_gain,
                             const NyquistOptions& opts = {});

FrequencyLocus nyquist_locus(const SystemModel& model, const Vector& xi, double lambda,
                             double loop_gain, const NyquistOptions& opts = {},
                             const ParamPoint& params = {});

/// First-order production loop at controller state z (plant state is
/// irrelevant to the frozen transfer function).
FrequencyLocus nyquist_locus(const Eigen::Vector2d& z, double lambda, double loop_gain,
                             const ControllerParams& cp, const FopPlantParams& pp,
                             const std::optional<HillParams>& hill, double omega_max,
                             int n_samples);

struct RootLocus {
  double lambda = 0.0;
  std::vector<double> gains;
  /// poles[g][i]: trace i at gains[g]; traces matched by nearest neighbour.
  std::vector<ComplexVector> poles;
  /// (right of -lambda, left of -lambda, within kSplitTolerance) per gain.
  std::vector<std::array<int, 3>> split;
  ComplexVector open_loop_poles;
};

RootLocus root_locus(const FrozenLoop& loop, const std::vector<double>& gain_grid, double lambda);

RootLocus root_locus(const Eigen::Vector2d& z, const std::vector<double>& gain_grid, double lambda,
                     const ControllerParams& cp, const FopPlantParams& pp,
                     const std::optional<HillParams>& hill = {});

}  // namespace aifdom
