/*
 Copyright 2026 The koopman-hj Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "khj/procedure1.hpp"
#include "khj/simulate.hpp"

using namespace khj;

namespace {

Box box2(double h) { return Box::symmetric(Vec::Constant(2, h)); }

}  // namespace

TEST(Procedure1, R1Q1HandValues) {
  // Vt = [[1,-2],[1,1]], R0 = diag(1,0), Q0 = [[2,-1],[-1,5]] by hand: R1 = ones, Q1 = I
  const Linearization lin = linearize(builtin_example1());
  Mat Vt(2, 2);
  Vt << 1, -2, 1, 1;
  const R1Q1 rq = compute_R1_Q1(lin, Vt);
  EXPECT_LE((rq.R1 - Mat::Ones(2, 2)).norm(), 1e-14);
  EXPECT_LE((rq.Q1 - Mat::Identity(2, 2)).norm(), 1e-14);
}

TEST(Procedure1, Example1AnalyticEmbedsLQR) {
  const ControlAffineSystem sys = builtin_example1();
  const HJSolution1 sol = procedure1_solve(sys, example1_analytic_eigenfunctions(box2(1.0)));
  EXPECT_LE(sol.riccati_residual(), 1e-12);
  const Mat& Vt = sol.eig().Vt;
  const LQRGain lqr = lqr_controller(linearize(sys));
  EXPECT_LE((Vt.transpose() * sol.L() * Vt - lqr.P).norm(), 1e-12);
  EXPECT_NEAR(sol.L()(0, 0), 0.49, 1e-2);
  EXPECT_NEAR(sol.L()(0, 1), -0.62, 1e-2);
  EXPECT_NEAR(sol.L()(1, 1), 5.35, 1e-2);
}

TEST(Procedure1, Example1ControlHasClosedForm) {
  // u = -dV/dx1 = -[(L11 + L21) phi1 + (L12 + L22) phi2]
  const ControlAffineSystem sys = builtin_example1();
  const HJSolution1 sol = procedure1_solve(sys, example1_analytic_eigenfunctions(box2(1.0)));
  const Mat& L = sol.L();
  const double a = L(0, 0) + L(1, 0), b = L(0, 1) + L(1, 1);
  const SampleSet s = sample_domain(box2(1.0), 20, 3);
  for (Eigen::Index k = 0; k < s.L; ++k) {
    const Vec x = s.point(k);
    const double want = -(a * (x(0) - 2.0 * x(1)) + b * (x(0) + std::sin(x(1))));
    EXPECT_NEAR(sol.control(x)(0), want, 1e-12);
  }
  EXPECT_NEAR(a + b, 4.6056, 1e-3);       // x1 coefficient, sign flipped
  EXPECT_NEAR(-2.0 * a, 0.263, 1e-3);     // x2
  EXPECT_NEAR(b, 4.737, 1e-3);            // sin x2
}

TEST(Procedure1, GradientMatchesFiniteDifferences) {
  const ControlAffineSystem sys = builtin_example1();
  auto basis = std::make_shared<const MonomialBasis>(monomial_basis(2, 2, 5));
  const EigenfunctionSet eig = approximate_eigenfunction_set(
      sys.f, linearize(sys).A, basis, sample_domain(box2(1.0), 10000, 1));
  const HJSolution1 sol = procedure1_solve(sys, eig);
  const SampleSet s = sample_domain(box2(1.0), 20, 5);
  for (Eigen::Index k = 0; k < s.L; ++k) {
    const Vec x = s.point(k);
    const Vec g = fd_gradient([&](const Vec& y) { return sol.value(y); }, x);
    EXPECT_LE((sol.grad_value(x) - g).norm(), 1e-6);
  }
}

TEST(Procedure1, GalerkinApproachesAnalytic) {
  const ControlAffineSystem sys = builtin_example1();
  auto basis = std::make_shared<const MonomialBasis>(monomial_basis(2, 2, 5));
  const EigenfunctionSet eig = approximate_eigenfunction_set(
      sys.f, linearize(sys).A, basis, sample_domain(box2(1.0), 10000, 2));
  const HJSolution1 g = procedure1_solve(sys, eig);
  const HJSolution1 a = procedure1_solve(sys, example1_analytic_eigenfunctions(box2(1.0)));
  const Mat grid = uniform_grid(box2(1.0), 11);
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    const Vec x = grid.row(i).transpose();
    EXPECT_NEAR(g.value(x), a.value(x), 2e-3 * (1.0 + a.value(x)));
  }
}

TEST(Procedure1, LinearSystemsReduceToRiccati) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 10; ++t) {
    const int n = 1 + t % 4;
    Mat A(n, n), B(n, 1), C(n, n);
    for (int i = 0; i < n; ++i) {
      B(i, 0) = nd(rng);
      for (int j = 0; j < n; ++j) {
        A(i, j) = nd(rng);
        C(i, j) = nd(rng);
      }
    }
    const Mat Q = C * C.transpose() + 0.1 * Mat::Identity(n, n);
    const ControlAffineSystem sys = linear_quadratic_system(A, B, Q, Mat::Identity(1, 1));
    const HJSolution1 sol =
        procedure1_solve(sys, linear_eigenfunctions(A, Box::symmetric(Vec::Ones(n))));
    const LQRGain lqr = lqr_controller(linearize(sys));
    const Mat P = sol.eig().Vt.transpose() * sol.L() * sol.eig().Vt;
    EXPECT_LE((P - lqr.P).norm(), 1e-8 * (1.0 + lqr.P.norm())) << "instance " << t;
    EXPECT_LE(sol.riccati_residual(), 1e-8 * (1.0 + sol.L().squaredNorm()));
  }
}

TEST(Procedure1, Cubic1dClosedForm) {
  // phi = x / sqrt(1 - x^2), L = sqrt(2) - 1, V = (sqrt(2)-1)/2 x^2 / (1 - x^2)
  const ControlAffineSystem sys = builtin_cubic1d();
  const Box b = Box::symmetric(Vec::Constant(1, 0.5));
  const HJSolution1 sol = procedure1_solve(sys, cubic1d_analytic_eigenfunction(b));
  EXPECT_NEAR(sol.L()(0, 0), std::sqrt(2.0) - 1.0, 1e-14);
  for (double x : {-0.4, -0.1, 0.0, 0.2, 0.45}) {
    const Vec v = Vec::Constant(1, x);
    EXPECT_NEAR(sol.value(v), 0.5 * (std::sqrt(2.0) - 1.0) * x * x / (1.0 - x * x), 1e-14);
  }
}

TEST(Procedure1, NominalFlowIsIntegrable) {
  const ControlAffineSystem sys = builtin_example1();
  const EigenfunctionSet eig = example1_analytic_eigenfunctions(box2(5.0));
  const SampleSet s = sample_domain(Box::symmetric(Vec::Constant(4, 0.5)), 10, 4);
  const IntegrabilityReport rep =
      verify_nominal_integrability(eig, sys, s, {0.0, 0.25, 0.5, 1.0}, 1e-3);
  EXPECT_EQ(rep.used + rep.excluded, 10);
  EXPECT_GE(rep.used, 8);
  EXPECT_LE(rep.max_H0_drift, 1e-6);
  EXPECT_LE(rep.max_X_drift, 1e-4);
  EXPECT_LE(rep.max_P_drift, 1e-4);
}

TEST(Procedure1, IntegrabilityDetectsWrongEigenvalue) {
  const ControlAffineSystem sys = builtin_example1();
  EigenfunctionSet eig = example1_analytic_eigenfunctions(box2(5.0));
  eig.Lambda(1, 1) = 2.5;
  const SampleSet s = sample_domain(Box::symmetric(Vec::Constant(4, 0.5)), 5, 4);
  const IntegrabilityReport rep = verify_nominal_integrability(eig, sys, s, {0.0, 1.0}, 1e-3);
  EXPECT_GT(rep.max_X_drift, 1e-2);
}

TEST(Procedure1, GeneratingFunctionSolvesPDE) {
  const ControlAffineSystem sys = builtin_example1();
  const EigenfunctionSet eig = example1_analytic_eigenfunctions(box2(1.0));
  Vec P(2);
  P << 0.7, -1.3;
  const SampleSet s = sample_domain(box2(1.0), 50, 6);
  EXPECT_LE(verify_generating_function(eig, sys, P, s, {0.0, 0.3, 1.0}), 1e-10);
}
