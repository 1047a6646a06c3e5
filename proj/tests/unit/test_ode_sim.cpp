#include "aifdom/circuit_models.hpp"
#include "aifdom/errors.hpp"
#include "aifdom/ode_sim.hpp"
#include "support/scenarios.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

using namespace aifdom;
using namespace aifdom::testing;

namespace {

SystemModel linear_model(const Matrix& a) {
  SystemModel m;
  m.dim = static_cast<int>(a.rows());
  m.tag = "linear";
  m.vector_field = [a](const Vector& x) { return Vector(a * x); };
  m.jacobian_fn = [a](const Vector&, const ParamPoint&) { return a; };
  m.open_loop_fn = m.jacobian_fn;
  m.input_column = Vector::Zero(m.dim);
  m.output_gradient_fn = [n = m.dim](const Vector&) { return RowVector(RowVector::Zero(n)); };
  return m;
}

Vector expm_apply(const Matrix& a, double t, const Vector& x0) {
  Eigen::EigenSolver<Matrix> es(a);
  const Eigen::MatrixXcd v = es.eigenvectors();
  const Eigen::VectorXcd d = (es.eigenvalues() * t).array().exp().matrix();
  return (v * d.asDiagonal() * v.inverse() * x0.cast<Complex>()).real();
}

}  // namespace

TEST(Integrate, MatchesMatrixExponential) {
  Matrix a(2, 2);
  a << -1.0, 0.5, 0.3, -2.0;
  Vector x0(2);
  x0 << 1.0, 2.0;
  const Trajectory tr = integrate(linear_model(a), x0, 5.0);
  EXPECT_NEAR(tr.times.back(), 5.0, 1e-12);
  EXPECT_LT((tr.states.back() - expm_apply(a, 5.0, x0)).norm(), 1e-7);
}

TEST(Integrate, ErrorShrinksWithTolerance) {
  Matrix a(2, 2);
  a << -1.0, 0.5, 0.3, -2.0;
  Vector x0(2);
  x0 << 1.0, 2.0;
  const Vector exact = expm_apply(a, 3.0, x0);
  IntegratorSettings loose;
  loose.rel_tol = 1e-4;
  loose.abs_tol = 1e-6;
  loose.max_step = 1.0;
  IntegratorSettings tight;
  tight.rel_tol = 1e-10;
  tight.abs_tol = 1e-12;
  tight.max_step = 1.0;
  const double e_loose = (integrate(linear_model(a), x0, 3.0, loose).states.back() - exact).norm();
  const double e_tight = (integrate(linear_model(a), x0, 3.0, tight).states.back() - exact).norm();
  EXPECT_LT(e_tight, e_loose);
  EXPECT_LT(e_tight, 1e-8);
}

TEST(Integrate, RegulationSettles) {
  const SystemModel m = fop_closed_loop(kController, fop_params(1.0, 1.0));
  const Trajectory tr = integrate(m, ones4(), 100.0);
  Vector xe(4);
  xe << 2.0, 0.1, 2.0, 2.0;
  EXPECT_LT((tr.states.back() - xe).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Integrate, EquilibriumStaysPut) {
  const SystemModel m = fop_closed_loop(kController, fop_params(1.0, 1.0));
  const Vector xe = fop_equilibrium(kController, fop_params(1.0, 1.0));
  const Trajectory tr = integrate(m, xe, 20.0);
  for (const Vector& s : tr.states) EXPECT_LT((s - xe).norm(), 1e-8);
  const AttractorReport rep = classify_trajectory(tr);
  EXPECT_EQ(rep.kind, AttractorKind::equilibrium);
  EXPECT_LT((rep.location - xe).norm(), 1e-8);
}

TEST(Integrate, RejectsBadInput) {
  const SystemModel m = fop_closed_loop(kController, fop_params(1.0, 1.0));
  EXPECT_THROW(integrate(m, Vector::Ones(3), 1.0), DomainError);
  EXPECT_THROW(integrate(m, ones4(), -1.0), DomainError);
}

TEST(RefineEquilibrium, ClosedFormIsFixed) {
  const SystemModel m = fop_closed_loop(kController, fop_params(1.0, 1.0));
  const Vector xe = fop_equilibrium(kController, fop_params(1.0, 1.0));
  EXPECT_LT((refine_equilibrium(m, xe) - xe).norm(), 1e-12);
}

TEST(RefineEquilibrium, UnstableOscillatoryEquilibrium) {
  const SystemModel m = fop_closed_loop(kController, fop_params(4.0, 1.0));
  Vector guess(4);
  guess << 0.45, 0.45, 0.4, 0.4;
  const Vector xe = refine_equilibrium(m, guess);
  EXPECT_NEAR(xe[0], 0.5, 1e-9);
  EXPECT_NEAR(xe[1], 0.4, 1e-9);
}

TEST(RefineEquilibrium, HillShiftedFixedPoint) {
  const SystemModel m = fop_closed_loop(kController, fop_params(1.0, 1.0), kHillA);
  Vector guess(4);
  guess << 4.0, 0.2, 3.0, 3.0;
  const Vector xe = refine_equilibrium(m, guess);
  EXPECT_LT(m.f(xe).norm(), 1e-10);
  // steady state: theta1(z1) = x1 = mu / (k theta2) = 2
  EXPECT_NEAR(hill_value_and_derivative(xe[0], kHillA).value, 2.0, 1e-9);
}

TEST(ClassifyTrajectory, RegulationIsEquilibrium) {
  const Scenario s = regulation_scenario();
  const AttractorReport rep = classify_trajectory(s.traj);
  ASSERT_EQ(rep.kind, AttractorKind::equilibrium);
  Vector xe(4);
  xe << 2.0, 0.1, 2.0, 2.0;
  EXPECT_LT((rep.location - xe).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(ClassifyTrajectory, OscillationIsLimitCycle) {
  const Scenario s = oscillatory_scenario(4.0, 1.0);
  const AttractorReport rep = classify_trajectory(s.traj);
  ASSERT_EQ(rep.kind, AttractorKind::limit_cycle);
  EXPECT_GT(rep.period, 0.0);
  EXPECT_FALSE(rep.cycle_samples.empty());
}

TEST(ClassifyTrajectory, ConstantTrajectory) {
  Trajectory tr;
  Vector c(2);
  c << 1.5, 0.25;
  for (int i = 0; i < 1000; ++i) {
    tr.times.push_back(0.01 * i);
    tr.states.push_back(c);
  }
  const AttractorReport rep = classify_trajectory(tr);
  EXPECT_EQ(rep.kind, AttractorKind::equilibrium);
  EXPECT_EQ(rep.location, c);
}

TEST(ClassifyTrajectory, TooShort) {
  Trajectory tr;
  tr.times = {0.0};
  tr.states = {Vector::Zero(2)};
  EXPECT_THROW(classify_trajectory(tr), InsufficientDataError);
}

TEST(TrajectoryCsv, HeaderAndRows) {
  Trajectory tr;
  tr.times = {0.0, 0.5};
  tr.states = {Vector::Zero(4), Vector::Ones(4)};
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,xi_1,xi_2,xi_3,xi_4");
  std::getline(is, line);
  EXPECT_EQ(line, "0,0,0,0,0");
  std::getline(is, line);
  EXPECT_EQ(line, "0.5,1,1,1,1");
}
