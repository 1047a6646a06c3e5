#include "aifdom/lmi_barrier.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace aifdom;

TEST(MaximizeLmi, ScalarBounds) {
  LmiBlock upper{Matrix::Ones(1, 1), {-Matrix::Ones(1, 1)}};  // 1 - x >= 0
  LmiBlock lower{Matrix::Ones(1, 1), {Matrix::Ones(1, 1)}};   // 1 + x >= 0
  Vector cost(1);
  cost << 1.0;
  const BarrierResult r = maximize_lmi(cost, {upper, lower}, Vector::Zero(1));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-8);
  EXPECT_GE(r.upper_bound, r.objective);
}

TEST(MaximizeLmi, SmallestEigenvalue) {
  Matrix a(3, 3);
  a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  LmiBlock b{a, {-Matrix::Identity(3, 3)}};
  Vector cost(1);
  cost << 1.0;
  Vector x0(1);
  x0 << 0.0;
  const BarrierResult r = maximize_lmi(cost, {b}, x0);
  const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues()[0];
  EXPECT_NEAR(r.objective, lmin, 1e-7);
  EXPECT_GE(lmi_min_eigenvalue({b}, r.x), 0.0);
}

TEST(MaximizeLmi, GiveUpBelow) {
  LmiBlock upper{Matrix::Ones(1, 1), {-Matrix::Ones(1, 1)}};
  LmiBlock lower{Matrix::Ones(1, 1), {Matrix::Ones(1, 1)}};
  Vector cost(1);
  cost << 1.0;
  BarrierOptions opts;
  opts.give_up_below = 2.0;
  const BarrierResult r = maximize_lmi(cost, {upper, lower}, Vector::Zero(1), opts);
  EXPECT_LT(r.upper_bound, 2.0);
  EXPECT_LE(r.objective, 1.0);
}

TEST(LmiMinEigenvalue, Sign) {
  LmiBlock b{Matrix::Identity(2, 2), {-Matrix::Identity(2, 2)}};
  Vector x(1);
  x << 0.5;
  EXPECT_NEAR(lmi_min_eigenvalue({b}, x), 0.5, 1e-14);
  x << 2.0;
  EXPECT_NEAR(lmi_min_eigenvalue({b}, x), -1.0, 1e-14);
}
