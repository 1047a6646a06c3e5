#include "aifdom/errors.hpp"
#include "aifdom/spectral.hpp"
#include "support/properties.hpp"
#include "support/scenarios.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace aifdom;
using namespace aifdom::testing;

namespace {
const FopPlantParams kUnit{1.0, 1.0, 1.0, 1.0};
}

TEST(Spectrum, RegulationEquilibriumStable) {
  const SystemModel m = fop_closed_loop(kController, kUnit);
  const SpectrumSample s = spectrum(m, fop_equilibrium(kController, kUnit), 0.0);
  EXPECT_EQ(s.n_right, 0);
  EXPECT_EQ(s.n_left, 4);
}

TEST(Spectrum, OscillatoryEquilibriumUnstable) {
  const FopPlantParams pp = fop_params(4.0, 1.0);
  const SystemModel m = fop_closed_loop(kController, pp);
  const SpectrumSample s = spectrum(m, fop_equilibrium(kController, pp), 0.0);
  EXPECT_GE(s.n_right, 2);
}

TEST(Spectrum, SplitTwoTwoOnCycle) {
  const Scenario s = oscillatory_scenario(4.0, 1.0);
  const std::size_t w0 = s.traj.window_start(0.5);
  for (std::size_t i = w0; i < s.traj.size(); i += 50) {
    const SpectrumSample sp = spectrum(s.model, s.traj.states[i], 1.0);
    EXPECT_EQ(sp.n_right, 2);
    EXPECT_EQ(sp.n_left, 2);
  }
}

TEST(Spectrum, BoundaryEigenvalueRaises) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = -1.0;
  a(1, 1) = -3.0;
  EXPECT_THROW(spectrum_of(a, 1.0), BoundarySplitError);
  EXPECT_EQ(spectrum_of(a, 2.0).n_right, 1);
}

TEST(FrozenTransferFunction, DirectValue) {
  const Complex g = frozen_transfer_function({2.0, 0.1}, Complex(1.0, 0.0), kController, kUnit);
  EXPECT_NEAR(g.real(), 20.0 / 88.0, 1e-14);
  EXPECT_NEAR(g.imag(), 0.0, 1e-14);
}

TEST(FrozenTransferFunction, ConjugateSymmetryAndDecay) {
  const Complex s(-0.3, 1.7);
  const Complex a = frozen_transfer_function({1.0, 0.5}, s, kController, kUnit);
  const Complex b = frozen_transfer_function({1.0, 0.5}, std::conj(s), kController, kUnit);
  EXPECT_NEAR(std::abs(a - std::conj(b)), 0.0, 1e-14);
  EXPECT_LT(std::abs(frozen_transfer_function({1.0, 0.5}, Complex(0, 1e4), kController, kUnit)), 1e-12);
  EXPECT_EQ(frozen_transfer_function({0.0, 0.5}, Complex(1, 1), kController, kUnit), Complex(0, 0));
  EXPECT_THROW(frozen_transfer_function({1.0, 0.5}, Complex(0, 0), kController, kUnit), ContourError);
}

TEST(FrozenLoop, StateSpaceMatchesClosedForm) {
  const SystemModel m = fop_closed_loop(kController, fop_params(4.0, 1.0));
  Vector xi(4);
  xi << 0.7, 0.3, 1.0, 1.0;
  const FrozenLoop loop = frozen_loop(m, xi);
  for (const Complex s : {Complex(0.5, 0.2), Complex(-0.4, 3.0), Complex(2.0, -1.0)}) {
    const Complex ref = frozen_transfer_function({0.7, 0.3}, s, kController, fop_params(4.0, 1.0));
    EXPECT_NEAR(std::abs(loop.eval(s) - ref), 0.0, 1e-12 * (1.0 + std::abs(ref)));
  }
  EXPECT_TRUE(loop.closed(1.0).isApprox(m.jacobian(xi), 1e-12));
}

TEST(Nyquist, EncirclementsAtLowAndHighGain) {
  const Vector xe = fop_equilibrium(kController, kUnit);
  const SystemModel m = fop_closed_loop(kController, kUnit);
  const FrequencyLocus low = nyquist_locus(m, xe, 0.0, 1.0);
  EXPECT_EQ(low.encirclements, 0);
  EXPECT_EQ(low.q, 0);
  EXPECT_EQ(low.marginal_poles, 1);
  const FrequencyLocus high = nyquist_locus(m, xe, 0.0, 4.0);
  EXPECT_EQ(high.encirclements, 2);
}

TEST(Nyquist, ShiftedAxisDoublePole) {
  const FopPlantParams pp = fop_params(4.0, 1.0);
  const SystemModel m = fop_closed_loop(kController, pp);
  Vector xi(4);
  xi << 0.5, 0.4, 1.0, 1.0;
  const FrequencyLocus l = nyquist_locus(m, xi, 1.0, 1.0);
  EXPECT_EQ(l.marginal_poles, 2);
  const SpectrumSample sp = spectrum(m, xi, 1.0);
  EXPECT_EQ(l.encirclements, sp.n_right - l.q);
}

TEST(Nyquist, WindingMatchesEigenvalues) {
  const SuiteResult r = winding_suite(30, 17);
  EXPECT_EQ(r.failures, 0) << r.first_failure;
}

TEST(Nyquist, RejectsNonPositiveGain) {
  const SystemModel m = fop_closed_loop(kController, kUnit);
  EXPECT_THROW(nyquist_locus(m, fop_equilibrium(kController, kUnit), 0.0, 0.0), DomainError);
}

TEST(RootLocus, SmallGainApproachesOpenLoopPoles) {
  const RootLocus rl = root_locus({2.0, 0.1}, {1e-8}, 0.5, kController, kUnit);
  std::vector<double> got;
  for (Eigen::Index i = 0; i < rl.poles[0].size(); ++i) got.push_back(rl.poles[0][i].real());
  std::sort(got.begin(), got.end());
  const std::vector<double> expected{-21.0, -1.0, -1.0, 0.0};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(got[i], expected[i], 1e-3);
}

TEST(RootLocus, AsymptoteAngles) {
  const double kappa = 1e8;
  const RootLocus rl = root_locus({2.0, 0.1}, {kappa}, 0.5, kController, kUnit);
  const ComplexVector& p = rl.poles[0];
  const Complex centroid = p.sum() / 4.0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double ang = std::arg(p[i] - centroid);
    const double k = (ang - M_PI / 4) / (M_PI / 2);
    EXPECT_NEAR(k, std::round(k), 0.02);
  }
}

TEST(RootLocus, SplitAtOscillatoryGain) {
  const RootLocus rl = root_locus({0.5, 0.4}, {4.0}, 1.0, kController, kUnit);
  EXPECT_EQ(rl.split[0][0], 2);
  EXPECT_EQ(rl.split[0][1], 2);
  EXPECT_THROW(root_locus({0.5, 0.4}, {}, 1.0, kController, kUnit), DomainError);
}
