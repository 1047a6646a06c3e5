#include "aifdom/circuit_models.hpp"
#include "aifdom/errors.hpp"
#include "support/properties.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace aifdom;

namespace {
const ControllerParams kCp{2.0, 10.0};
const FopPlantParams kUnit{1.0, 1.0, 1.0, 1.0};
}  // namespace

TEST(AifVectorField, OriginAndEquilibrium) {
  EXPECT_TRUE(aif_vector_field({0.0, 0.0}, 0.0, kCp).isApprox(Eigen::Vector2d(2.0, 0.0)));
  EXPECT_NEAR(aif_vector_field({2.0, 0.1}, 2.0, kCp).norm(), 0.0, 1e-14);
  EXPECT_THROW(aif_vector_field({-1.0, 0.0}, 0.0, kCp), DomainError);
}

TEST(AifJacobian, ValuesAndRank) {
  EXPECT_TRUE(aif_jacobian({0.0, 0.0}, kCp).isZero());
  Eigen::Matrix2d expected;
  expected << -1.0, -20.0, -1.0, -20.0;
  EXPECT_TRUE(aif_jacobian({2.0, 0.1}, kCp).isApprox(expected));
  EXPECT_NEAR(aif_jacobian({0.7, 3.1}, kCp).determinant(), 0.0, 1e-12);
}

TEST(FopVectorField, Examples) {
  EXPECT_TRUE(fop_vector_field({0.0, 0.0}, 0.0, kUnit).isZero());
  EXPECT_TRUE(fop_vector_field({2.0, 2.0}, 2.0, kUnit).isZero());
  EXPECT_TRUE(fop_vector_field({1.0, 0.0}, 0.0, FopPlantParams{1.0, 1.0, 2.0, 1.0})
                  .isApprox(Eigen::Vector2d(-1.0, 2.0)));
  EXPECT_THROW(fop_vector_field({-0.5, 0.0}, 0.0, kUnit), DomainError);
}

TEST(Hill, ValueAndPeaks) {
  const HillValue zero = hill_value_and_derivative(0.0, HillParams{0.1, 1.0, 2});
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_EQ(zero.slope, 0.0);

  const HillPeak a = hill_max_slope(HillParams{1.0, 0.2, 1});
  EXPECT_NEAR(a.slope, 1.0, 1e-12);
  EXPECT_NEAR(a.u, 0.0, 1e-12);

  const HillPeak b = hill_max_slope(HillParams{0.1, 1.0, 2});
  EXPECT_NEAR(b.u, std::sqrt(0.1 / 3.0), 1e-9);
  // closed form slope 2 k1 u / (k1 + u^2)^2 at that point
  const double u = std::sqrt(0.1 / 3.0);
  EXPECT_NEAR(b.slope, 2.0 * 0.1 * u / std::pow(0.1 + u * u, 2), 1e-9);
  EXPECT_GT(b.slope, 2.0);

  EXPECT_THROW(hill_value_and_derivative(-1.0, HillParams{1.0, 0.2, 1}), DomainError);
}

TEST(Hill, DerivativeMatchesDifferences) {
  const HillParams p{0.1, 1.0, 3};
  for (double u : {0.05, 0.3, 1.0, 4.0}) {
    const double h = 1e-6;
    const double fd = (hill_value_and_derivative(u + h, p).value -
                       hill_value_and_derivative(u - h, p).value) / (2 * h);
    EXPECT_NEAR(hill_value_and_derivative(u, p).slope, fd, 1e-6);
  }
}

TEST(Hill, SlopeRangeCoversSamples) {
  const HillParams p{0.1, 1.0, 2};
  const Interval r = hill_slope_range(p, {0.05, 1.5});
  for (int i = 0; i <= 100; ++i) {
    const double u = 0.05 + 1.45 * i / 100.0;
    EXPECT_TRUE(r.contains(hill_value_and_derivative(u, p).slope, 1e-12));
  }
}

TEST(AllSeq, Examples) {
  const AllSeqPlantParams p{1.0, 1.0, 1.0, 1.0};
  EXPECT_TRUE(all_seq_vector_field({1.0, 1.0}, 1.0, p).isZero());
  EXPECT_TRUE(all_seq_vector_field({0.0, 5.0}, 3.0, p).isApprox(Eigen::Vector2d(1.0, 1.0)));
  EXPECT_THROW(all_seq_vector_field({1.0, 1.0}, -1.0, p), DomainError);
}

TEST(Bistable, Examples) {
  EXPECT_TRUE(bistable_vector_field({0.0, 3.0}, BistableParams{0.0, 0.0, 1.0, 1.0, 1.0}).isZero());
  EXPECT_TRUE(bistable_vector_field({1.0, 1.0}, BistableParams{0.0, 1.0, 1.0, 1.0, 0.0})
                  .isApprox(Eigen::Vector2d(-0.5, 0.0)));
}

TEST(ClosedLoop, EquilibriumAndJacobian) {
  const SystemModel m = fop_closed_loop(kCp, kUnit);
  EXPECT_EQ(m.dim, 4);
  const Eigen::Vector4d xe = fop_equilibrium(kCp, kUnit);
  EXPECT_TRUE(xe.isApprox(Eigen::Vector4d(2.0, 0.1, 2.0, 2.0)));
  EXPECT_NEAR(m.f(xe).norm(), 0.0, 1e-12);

  Matrix expected(4, 4);
  expected << -1, -20, 0, 0,
              -1, -20, 0, 1,
               1, 0, -1, 0,
               0, 0, 1, -1;
  EXPECT_TRUE(closed_loop_jacobian(m, xe).isApprox(expected, 1e-12));
}

TEST(ClosedLoop, OscillatoryEquilibrium) {
  const Eigen::Vector4d xe = fop_equilibrium(kCp, FopPlantParams{1.0, 4.0, 1.0, 1.0});
  EXPECT_NEAR(xe[0], 0.5, 1e-12);
  EXPECT_NEAR(xe[1], 0.4, 1e-12);
}

TEST(ClosedLoop, OutputSteadyState) {
  const FopPlantParams pp{1.5, 3.0, 2.0, 0.7};
  const Eigen::Vector4d xe = fop_equilibrium(kCp, pp);
  EXPECT_NEAR(pp.theta2 * xe[3], kCp.mu, 1e-12);
  EXPECT_NEAR(fop_closed_loop(kCp, pp).f(xe).norm(), 0.0, 1e-12);
}

TEST(ClosedLoop, HillActuationCouplingVanishesAtZero) {
  const SystemModel m = fop_closed_loop(kCp, kUnit, HillParams{0.1, 1.0, 2});
  Vector xi(4);
  xi << 0.0, 1.0, 1.0, 1.0;
  EXPECT_EQ(m.jacobian(xi)(2, 0), 0.0);
}

TEST(ClosedLoop, ZeroPlantIntegratesReference) {
  const SystemModel m = closed_loop(aif_controller(kCp), zero_plant(), 1.0);
  Vector xi = Vector::Zero(m.dim);
  xi[0] = 1.0;
  EXPECT_NEAR(m.f(xi)[0], kCp.mu, 1e-14);
}

TEST(ClosedLoop, VirtualIntegratorIdentity) {
  const SystemModel m = fop_closed_loop(kCp, FopPlantParams{1.0, 4.0, 1.0, 1.0});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    Vector xi(4);
    for (int c = 0; c < 4; ++c) xi[c] = d(rng);
    const Vector f = m.f(xi);
    EXPECT_NEAR(f[0] - f[1], kCp.mu - 4.0 * xi[3], 1e-12);
  }
}

TEST(ClosedLoop, BoundaryFlowPointsInward) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  for (const auto& [name, model] : aifdom::testing::property_models()) {
    for (int i = 0; i < 50; ++i) {
      Vector xi(model.dim);
      for (int c = 0; c < model.dim; ++c) xi[c] = d(rng);
      const int zero = i % model.dim;
      xi[zero] = 0.0;
      EXPECT_GE(model.f(xi)[zero], -1e-12) << name << " coordinate " << zero;
    }
  }
}

TEST(ClosedLoop, JacobianMatchesFiniteDifferences) {
  for (const auto& [name, model] : aifdom::testing::property_models()) {
    const aifdom::testing::SuiteResult r = aifdom::testing::jacobian_fd_suite(model, 200, 5);
    EXPECT_EQ(r.failures, 0) << name << ": " << r.first_failure;
  }
}

TEST(ClosedLoop, RejectsBadParameters) {
  EXPECT_THROW(fop_closed_loop(kCp, FopPlantParams{1.0, 0.0, 1.0, 1.0}), DomainError);
  EXPECT_THROW(fop_equilibrium(ControllerParams{2.0, 0.0}, kUnit), DomainError);
}

TEST(Indicator, Values) {
  const InstabilityIndicator a = large_eta_instability_indicator(kUnit);
  EXPECT_NEAR(a.lhs, std::cbrt(0.5), 1e-12);
  EXPECT_EQ(a.rhs, 1.0);
  const InstabilityIndicator b = large_eta_instability_indicator({1.0, 4.0, 1.0, 1.0});
  EXPECT_NEAR(b.lhs, std::cbrt(2.0), 1e-12);
  const InstabilityIndicator c = large_eta_instability_indicator({1.0, 2.0, 1.0, 1.0});
  EXPECT_NEAR(c.lhs, c.rhs, 1e-12);
}
