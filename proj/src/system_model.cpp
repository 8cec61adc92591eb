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

#include "khj/system_model.hpp"

#include <cmath>
#include <numbers>

namespace khj {

double fd_step(const Vec& x) { return 1e-6 * std::max(1.0, x.norm()); }

Mat fd_jacobian(const VecField& fn, const Vec& x) {
  const double h = fd_step(x);
  Vec xp = x, xm = x;
  Mat J;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    Vec d = (fn(xp) - fn(xm)) / (2.0 * h);
    if (j == 0) J.resize(d.size(), x.size());
    J.col(j) = d;
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return J;
}

Vec fd_gradient(const ScalarField& fn, const Vec& x) {
  const double h = fd_step(x);
  Vec grad(x.size());
  Vec xp = x, xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    grad(j) = (fn(xp) - fn(xm)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return grad;
}

Mat ControlAffineSystem::jac_f(const Vec& x) const {
  if (jacobian_f) return jacobian_f(x);
  return fd_jacobian(f, x);
}

Vec ControlAffineSystem::dq(const Vec& x) const {
  if (grad_q) return grad_q(x);
  return fd_gradient(q, x);
}

Mat ControlAffineSystem::R(const Vec& x) const {
  Mat G = g(x);
  return G * D.ldlt().solve(G.transpose());
}

Vec ControlAffineSystem::closed_loop(const Vec& x, const Vec& u) const {
  return f(x) + g(x) * u;
}

void ControlAffineSystem::validate() const {
  require(n > 0 && p > 0, "system dimensions must be positive");
  require(static_cast<bool>(f) && static_cast<bool>(g) && static_cast<bool>(q),
          "system is missing f, g or q");
  require(D.rows() == p && D.cols() == p, "D must be p x p");
  require((D - D.transpose()).norm() <= 1e-12 * (1.0 + D.norm()), "D must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(D);
  if (es.eigenvalues().minCoeff() <= 0.0) throw NumericalError("control weight not invertible");
  const Vec z = Vec::Zero(n);
  require(f(z).size() == n, "f returns the wrong dimension");
  require(f(z).norm() <= 1e-12, "f(0) must vanish");
  Mat G = g(z);
  require(G.rows() == n && G.cols() == p, "g must return an n x p matrix");
  require(std::abs(q(z)) <= 1e-12, "q(0) must vanish");
  require(dq(z).norm() <= (grad_q ? 1e-12 : 1e-8), "grad q(0) must vanish");
  require(hess_q0.rows() == n && hess_q0.cols() == n, "hess_q0 must be n x n");
  require((hess_q0 - hess_q0.transpose()).norm() <= 1e-10 * (1.0 + hess_q0.norm()),
          "hess_q0 must be symmetric");
}

Linearization linearize(const ControlAffineSystem& sys) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sys.D);
  if (sys.D.rows() != sys.p || es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("control weight not invertible");
  const Vec z = Vec::Zero(sys.n);
  Linearization lin;
  lin.A = sys.jac_f(z);
  lin.B = sys.g(z);
  lin.D = sys.D;
  lin.R0 = lin.B * sys.D.ldlt().solve(lin.B.transpose());
  lin.R0 = 0.5 * (lin.R0 + lin.R0.transpose());
  lin.Q0 = sys.hess_q0;
  return lin;
}

double hamiltonian_value(const ControlAffineSystem& sys, const Vec& x, const Vec& p) {
  require(x.size() == sys.n && p.size() == sys.n, "hamiltonian_value: dimension mismatch");
  return sys.f(x).dot(p) - 0.5 * p.dot(sys.R(x) * p) + sys.q(x);
}

HamiltonianSystemModel hamiltonian_vector_field(const ControlAffineSystem& sys) {
  HamiltonianSystemModel ham;
  ham.base = sys;
  const int n = sys.n;
  ham.F = [sys, n](const Vec& z) {
    Vec x = z.head(n), p = z.tail(n);
    Vec out(2 * n);
    out.head(n) = sys.f(x) - sys.R(x) * p;
    // d(p' R(x) p)/dx by central differences on x
    const double h = fd_step(x);
    Vec dRp(n);
    Vec xp = x, xm = x;
    for (int j = 0; j < n; ++j) {
      xp(j) = x(j) + h;
      xm(j) = x(j) - h;
      dRp(j) = (p.dot(sys.R(xp) * p) - p.dot(sys.R(xm) * p)) / (2.0 * h);
      xp(j) = x(j);
      xm(j) = x(j);
    }
    out.tail(n) = -sys.jac_f(x).transpose() * p + 0.5 * dRp - sys.dq(x);
    return out;
  };
  Linearization lin = linearize(sys);
  ham.H0.resize(2 * n, 2 * n);
  ham.H0 << lin.A, -lin.R0, -lin.Q0, -lin.A.transpose();
  Mat H0 = ham.H0;
  VecField F = ham.F;
  ham.Fn = [F, H0](const Vec& z) { return Vec(F(z) - H0 * z); };
  return ham;
}

VecField nominal_hamiltonian_field(const ControlAffineSystem& sys) {
  const int n = sys.n;
  return [sys, n](const Vec& z) {
    Vec x = z.head(n), p = z.tail(n);
    Vec out(2 * n);
    out.head(n) = sys.f(x);
    out.tail(n) = -sys.jac_f(x).transpose() * p;
    return out;
  };
}

double hj_residual(const ControlAffineSystem& sys, const VecField& V_grad, const Vec& x) {
  Vec dV = V_grad(x);
  return dV.dot(sys.f(x)) - 0.5 * dV.dot(sys.R(x) * dV) + sys.q(x);
}

ControlAffineSystem builtin_example1() {
  ControlAffineSystem sys;
  sys.name = "example1";
  sys.n = 2;
  sys.p = 1;
  sys.f = [](const Vec& x) {
    const double c = std::cos(x(1)), s = std::sin(x(1));
    const double a = 1.0 / (c + 2.0);
    Vec out(2);
    out(0) = a * (-c * (x(0) - 2.0 * x(1)) + 4.0 * (x(0) + s));
    out(1) = a * (x(0) - 2.0 * x(1) + 2.0 * (x(0) + s));
    return out;
  };
  sys.jacobian_f = [](const Vec& x) {
    const double c = std::cos(x(1)), s = std::sin(x(1));
    const double a = 1.0 / (c + 2.0);
    const double da = s * a * a;
    const double h1 = -c * (x(0) - 2.0 * x(1)) + 4.0 * (x(0) + s);
    const double h2 = 3.0 * x(0) - 2.0 * x(1) + 2.0 * s;
    Mat J(2, 2);
    J(0, 0) = a * (4.0 - c);
    J(0, 1) = a * (s * (x(0) - 2.0 * x(1)) + 6.0 * c) + da * h1;
    J(1, 0) = 3.0 * a;
    J(1, 1) = a * (2.0 * c - 2.0) + da * h2;
    return J;
  };
  sys.g = [](const Vec&) {
    Mat G(2, 1);
    G << 1.0, 0.0;
    return G;
  };
  sys.D = Mat::Identity(1, 1);
  sys.q = [](const Vec& x) {
    const double a = x(0) - 2.0 * x(1), b = x(0) + std::sin(x(1));
    return 0.5 * (a * a + b * b);
  };
  sys.grad_q = [](const Vec& x) {
    const double a = x(0) - 2.0 * x(1), b = x(0) + std::sin(x(1));
    Vec d(2);
    d(0) = a + b;
    d(1) = -2.0 * a + std::cos(x(1)) * b;
    return d;
  };
  sys.hess_q0.resize(2, 2);
  sys.hess_q0 << 2.0, -1.0, -1.0, 5.0;
  return sys;
}

Mat pendulum_mass_matrix(const PendulumParams& prm, double theta) {
  const double c = std::cos(theta - std::numbers::pi);
  Mat Mm(2, 2);
  Mm << prm.m * prm.l * c, prm.M + prm.m, prm.I + prm.m * prm.l * prm.l, prm.m * prm.l * c;
  return Mm;
}

namespace {

Eigen::Matrix2d checked_inverse(const PendulumParams& prm, double theta) {
  Eigen::Matrix2d Mm = pendulum_mass_matrix(prm, theta);
  const double det = Mm.determinant();
  if (!(std::abs(det) > 1e-12)) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "pendulum mass matrix singular at theta = %.17g", theta);
    throw NumericalError(buf);
  }
  return Mm.inverse();
}

}  // namespace

ControlAffineSystem builtin_pendulum(double g_gravity) {
  require(g_gravity > 0.0, "pendulum gravity must be positive");
  PendulumParams prm;
  prm.gravity = g_gravity;
  ControlAffineSystem sys;
  sys.name = "pendulum";
  sys.n = 3;
  sys.p = 1;
  sys.f = [prm](const Vec& x) {
    const double s = std::sin(x(0) - std::numbers::pi);
    Eigen::Matrix2d Mi = checked_inverse(prm, x(0));
    Eigen::Vector2d r(-prm.b * x(2) + prm.m * prm.l * x(1) * x(1) * s,
                      -prm.m * prm.gravity * prm.l * s);
    Eigen::Vector2d y = Mi * r;
    Vec out(3);
    out << x(1), y(0), y(1);
    return out;
  };
  sys.jacobian_f = [prm](const Vec& x) {
    const double s = std::sin(x(0) - std::numbers::pi), c = std::cos(x(0) - std::numbers::pi);
    const double ml = prm.m * prm.l;
    Eigen::Matrix2d Mi = checked_inverse(prm, x(0));
    Eigen::Vector2d r(-prm.b * x(2) + ml * x(1) * x(1) * s, -prm.m * prm.gravity * prm.l * s);
    Eigen::Vector2d y = Mi * r;
    // d(M^-1 r) = M^-1 (dr - dM y), dM/dtheta = -ml sin(theta - pi) I
    Eigen::Vector2d dr_th(ml * x(1) * x(1) * c, -prm.m * prm.gravity * prm.l * c);
    Eigen::Vector2d dy_th = Mi * (dr_th + ml * s * y);
    Eigen::Vector2d dy_psi = Mi * Eigen::Vector2d(2.0 * ml * x(1) * s, 0.0);
    Eigen::Vector2d dy_v = Mi * Eigen::Vector2d(-prm.b, 0.0);
    Mat J = Mat::Zero(3, 3);
    J(0, 1) = 1.0;
    J.block(1, 0, 2, 1) = dy_th;
    J.block(1, 1, 2, 1) = dy_psi;
    J.block(1, 2, 2, 1) = dy_v;
    return J;
  };
  sys.g = [prm](const Vec& x) {
    Eigen::Matrix2d Mi = checked_inverse(prm, x(0));
    Mat G(3, 1);
    G << 0.0, Mi(0, 0), Mi(1, 0);
    return G;
  };
  // cost x'x + u^2 written as q + 1/2 u' D u
  sys.D = 2.0 * Mat::Identity(1, 1);
  sys.q = [](const Vec& x) { return x.squaredNorm(); };
  sys.grad_q = [](const Vec& x) { return Vec(2.0 * x); };
  sys.hess_q0 = 2.0 * Mat::Identity(3, 3);
  return sys;
}

ControlAffineSystem builtin_cubic1d() {
  ControlAffineSystem sys;
  sys.name = "cubic1d";
  sys.n = 1;
  sys.p = 1;
  sys.f = [](const Vec& x) { return Vec::Constant(1, -x(0) + x(0) * x(0) * x(0)); };
  sys.jacobian_f = [](const Vec& x) { return Mat::Constant(1, 1, -1.0 + 3.0 * x(0) * x(0)); };
  sys.g = [](const Vec&) { return Mat::Ones(1, 1); };
  sys.D = Mat::Identity(1, 1);
  sys.q = [](const Vec& x) { return 0.5 * x(0) * x(0); };
  sys.grad_q = [](const Vec& x) { return Vec(x); };
  sys.hess_q0 = Mat::Identity(1, 1);
  return sys;
}

ControlAffineSystem linear_quadratic_system(const Mat& A, const Mat& B, const Mat& Q,
                                            const Mat& D) {
  require(A.rows() == A.cols() && B.rows() == A.rows() && Q.rows() == A.rows() &&
              Q.cols() == A.rows() && D.rows() == B.cols() && D.cols() == B.cols(),
          "linear_quadratic_system: dimension mismatch");
  ControlAffineSystem sys;
  sys.name = "linear";
  sys.n = static_cast<int>(A.rows());
  sys.p = static_cast<int>(B.cols());
  sys.f = [A](const Vec& x) { return Vec(A * x); };
  sys.jacobian_f = [A](const Vec&) { return A; };
  sys.g = [B](const Vec&) { return B; };
  sys.D = D;
  Mat Qs = 0.5 * (Q + Q.transpose());
  sys.q = [Qs](const Vec& x) { return 0.5 * x.dot(Qs * x); };
  sys.grad_q = [Qs](const Vec& x) { return Vec(Qs * x); };
  sys.hess_q0 = Qs;
  return sys;
}

namespace {

double monomial(const std::vector<int>& e, const Vec& x) {
  double v = 1.0;
  for (size_t i = 0; i < e.size(); ++i)
    for (int k = 0; k < e[i]; ++k) v *= x(static_cast<Eigen::Index>(i));
  return v;
}

}  // namespace

ControlAffineSystem polynomial_system(const PolynomialSpec& spec) {
  const int n = spec.n;
  require(n > 0, "polynomial system: n must be positive");
  require(static_cast<int>(spec.f.size()) == n, "polynomial system: need one term list per state");
  for (const auto& row : spec.f)
    for (const auto& t : row) {
      require(static_cast<int>(t.exponent.size()) == n, "polynomial term exponent has wrong length");
      for (int e : t.exponent) require(e >= 0, "polynomial exponents must be non-negative");
    }
  Mat Q0 = Mat::Zero(n, n);
  if (spec.Q.size() > 0) Q0 = spec.Q;
  ControlAffineSystem sys = linear_quadratic_system(Mat::Zero(n, n), spec.B, Q0, spec.D);
  sys.name = "polynomial";
  auto terms = spec.f;
  sys.f = [terms, n](const Vec& x) {
    Vec out = Vec::Zero(n);
    for (int i = 0; i < n; ++i)
      for (const auto& t : terms[i]) out(i) += t.coeff * monomial(t.exponent, x);
    return out;
  };
  sys.jacobian_f = [terms, n](const Vec& x) {
    Mat J = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (const auto& t : terms[i])
        for (int j = 0; j < n; ++j) {
          if (t.exponent[j] == 0) continue;
          std::vector<int> e = t.exponent;
          e[j] -= 1;
          J(i, j) += t.coeff * t.exponent[j] * monomial(e, x);
        }
    return J;
  };
  return sys;
}

}  // namespace khj
