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

#include "khj/sampling.hpp"
#include "khj/spectral_linalg.hpp"
#include "khj/system_model.hpp"

using namespace khj;

namespace {

std::vector<Vec> random_points(int n, int count, double half, std::uint64_t seed) {
  SampleSet s = sample_domain(Box::symmetric(Vec::Constant(n, half)), count, seed);
  std::vector<Vec> out;
  for (int k = 0; k < count; ++k) out.push_back(s.point(k));
  return out;
}

}  // namespace

TEST(SystemModel, Example1AnalyticJacobianMatchesFiniteDifferences) {
  const ControlAffineSystem sys = builtin_example1();
  for (const Vec& x : random_points(2, 20, 1.5, 1)) {
    const Mat J = sys.jacobian_f(x);
    const Mat Jfd = fd_jacobian(sys.f, x);
    EXPECT_LE((J - Jfd).cwiseAbs().maxCoeff(), 1e-7) << format_vec(x);
  }
}

TEST(SystemModel, Example1Linearization) {
  // central-difference oracle at the origin
  const ControlAffineSystem sys = builtin_example1();
  const Linearization lin = linearize(sys);
  Mat A(2, 2);
  A << 1, 2, 1, 0;
  EXPECT_LE((lin.A - A).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((fd_jacobian(sys.f, Vec::Zero(2)) - A).cwiseAbs().maxCoeff(), 1e-8);
  Mat B(2, 1);
  B << 1, 0;
  EXPECT_EQ(lin.B, B);
  Mat Q0(2, 2);
  Q0 << 2, -1, -1, 5;
  EXPECT_LE((lin.Q0 - Q0).norm(), 1e-12);
  // Hessian of q by differences of the gradient
  const Mat Hfd = fd_jacobian([&](const Vec& x) { return sys.dq(x); }, Vec::Zero(2));
  EXPECT_LE((Hfd - Q0).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_DOUBLE_EQ(lin.R0(0, 0), 1.0);
}

TEST(SystemModel, PendulumJacobianAndEquilibrium) {
  const ControlAffineSystem sys = builtin_pendulum();
  EXPECT_EQ(sys.n, 3);
  EXPECT_LE(sys.f(Vec::Zero(3)).norm(), 1e-13);  // sin(-pi) is not exactly 0
  for (const Vec& x : random_points(3, 20, 3.0, 2)) {
    EXPECT_LE((sys.jacobian_f(x) - fd_jacobian(sys.f, x)).cwiseAbs().maxCoeff(), 1e-6)
        << format_vec(x);
  }
  const Linearization lin = linearize(sys);
  const RealSpectralDecomposition sd = real_spectral_decomposition(lin.A);
  std::vector<double> re;
  for (auto e : sd.eigenvalues) re.push_back(e.real());
  ASSERT_EQ(re.size(), 3u);
  EXPECT_NEAR(re[0], -5.607, 2e-3);
  EXPECT_NEAR(re[1], -0.143, 2e-3);
  EXPECT_NEAR(re[2], 5.568, 2e-3);
}

TEST(SystemModel, PendulumMassMatrix) {
  // at theta = 0: [[-ml, M+m], [I+ml^2, -ml]]
  PendulumParams prm;
  Mat want(2, 2);
  want << -0.06, 0.7, 0.024, -0.06;
  EXPECT_LE((pendulum_mass_matrix(prm, 0.0) - want).norm(), 1e-15);
  // det = (ml cos)^2 - (M+m)(I+ml^2) < 0 for every theta
  for (double th = -3.0; th <= 3.0; th += 0.25)
    EXPECT_LT(pendulum_mass_matrix(prm, th).determinant(), -0.01);
}

TEST(SystemModel, HamiltonianFieldIsCanonical) {
  // F = (dH/dp, -dH/dx) with H = p'f - p'Rp/2 + q
  const ControlAffineSystem sys = builtin_example1();
  const HamiltonianSystemModel ham = hamiltonian_vector_field(sys);
  for (const Vec& z : random_points(4, 10, 1.0, 3)) {
    const Vec x = z.head(2), p = z.tail(2);
    const Vec dHdx = fd_gradient([&](const Vec& y) { return hamiltonian_value(sys, y, p); }, x);
    const Vec dHdp = fd_gradient([&](const Vec& y) { return hamiltonian_value(sys, x, y); }, p);
    const Vec F = ham.F(z);
    EXPECT_LE((F.head(2) - dHdp).norm(), 1e-7);
    EXPECT_LE((F.tail(2) + dHdx).norm(), 1e-6);
  }
}

TEST(SystemModel, HamiltonianLinearPartMatchesHamiltonianMatrix) {
  const ControlAffineSystem sys = builtin_example1();
  const HamiltonianSystemModel ham = hamiltonian_vector_field(sys);
  const Linearization lin = linearize(sys);
  EXPECT_LE((ham.H0 - hamiltonian_matrix(lin.A, lin.R0, lin.Q0)).norm(), 1e-14);
  const Mat Hfd = fd_jacobian(ham.F, Vec::Zero(4));
  EXPECT_LE((Hfd - ham.H0).cwiseAbs().maxCoeff(), 1e-6);
  // F_n is purely nonlinear: vanishes with its derivative at 0
  const double eps = 1e-3;
  const Vec z = Vec::Constant(4, eps);
  EXPECT_LE(ham.Fn(z).norm(), 50.0 * eps * eps);
}

TEST(SystemModel, LinearQuadraticHJResidualVanishesAtRiccatiSolution) {
  Mat A(2, 2), B(2, 1), Q(2, 2), D(1, 1);
  A << 0, 1, 2, -1;
  B << 0, 1;
  Q << 2, 0, 0, 1;
  D << 0.5;
  const ControlAffineSystem sys = linear_quadratic_system(A, B, Q, D);
  sys.validate();
  const Linearization lin = linearize(sys);
  const RiccatiSolution ric = solve_riccati(lin.A, lin.R0, lin.Q0);
  for (const Vec& x : random_points(2, 10, 2.0, 4)) {
    const double r = hj_residual(sys, [&](const Vec& y) { return Vec(ric.P * y); }, x);
    EXPECT_LE(std::abs(r), 1e-12 * (1.0 + x.squaredNorm()));
  }
}

TEST(SystemModel, Cubic1d) {
  const ControlAffineSystem sys = builtin_cubic1d();
  Vec x(1);
  x << 0.3;
  EXPECT_NEAR(sys.f(x)(0), -0.3 + 0.027, 1e-15);
  EXPECT_NEAR(sys.q(x), 0.045, 1e-15);
  EXPECT_DOUBLE_EQ(linearize(sys).A(0, 0), -1.0);
}

TEST(SystemModel, PolynomialSystemEvaluates) {
  PolynomialSpec spec;
  spec.n = 2;
  // f1 = x2, f2 = -x1 + 3 x1^2 x2
  spec.f = {{{{0, 1}, 1.0}}, {{{1, 0}, -1.0}, {{2, 1}, 3.0}}};
  spec.B = Mat::Zero(2, 1);
  spec.B(1, 0) = 1.0;
  spec.Q = Mat::Identity(2, 2);
  spec.D = Mat::Identity(1, 1);
  const ControlAffineSystem sys = polynomial_system(spec);
  sys.validate();
  Vec x(2);
  x << 0.5, -2.0;
  const Vec f = sys.f(x);
  EXPECT_DOUBLE_EQ(f(0), -2.0);
  EXPECT_DOUBLE_EQ(f(1), -0.5 + 3.0 * 0.25 * -2.0);
  EXPECT_LE((sys.jac_f(x) - fd_jacobian(sys.f, x)).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_NEAR(sys.q(x), 0.5 * x.squaredNorm(), 1e-15);
}

TEST(SystemModel, ValidateRejectsBadControlWeight) {
  ControlAffineSystem sys = builtin_example1();
  sys.D = Mat::Zero(1, 1);
  EXPECT_THROW(sys.validate(), NumericalError);
  sys.D = Mat::Identity(2, 2);
  EXPECT_THROW(sys.validate(), ConfigError);
}

TEST(SystemModel, ValidateRejectsNonzeroDriftAtOrigin) {
  ControlAffineSystem sys = builtin_example1();
  sys.f = [](const Vec& x) { return Vec(x.array() + 1.0); };
  EXPECT_THROW(sys.validate(), ConfigError);
}
