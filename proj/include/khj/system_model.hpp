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

#ifndef KHJ_SYSTEM_MODEL_HPP
#define KHJ_SYSTEM_MODEL_HPP

#include <string>
#include <vector>

#include "khj/types.hpp"

namespace khj {

/// xdot = f(x) + g(x) u with running cost q(x) + 1/2 u' D u.
/// jacobian_f and grad_q may be left empty; central differences are used then.
struct ControlAffineSystem {
  int n = 0;
  int p = 0;
  VecField f;
  MatField g;
  Mat D;
  ScalarField q;
  MatField jacobian_f;
  VecField grad_q;
  Mat hess_q0;
  std::string name;

  Mat jac_f(const Vec& x) const;
  Vec dq(const Vec& x) const;
  /// R(x) = g(x) D^-1 g(x)'
  Mat R(const Vec& x) const;
  Vec closed_loop(const Vec& x, const Vec& u) const;

  /// Throws ConfigError if an invariant (f(0)=0, D > 0, ...) is violated.
  void validate() const;
};

struct Linearization {
  Mat A;
  Mat B;
  Mat R0;
  Mat Q0;
  Mat D;
};

struct HamiltonianSystemModel {
  ControlAffineSystem base;
  VecField F;
  Mat H0;
  VecField Fn;
};

/// Central-difference Jacobian, step 1e-6 * max(1, |x|).
Mat fd_jacobian(const VecField& fn, const Vec& x);
Vec fd_gradient(const ScalarField& fn, const Vec& x);
double fd_step(const Vec& x);

Linearization linearize(const ControlAffineSystem& sys);

double hamiltonian_value(const ControlAffineSystem& sys, const Vec& x, const Vec& p);

/// Canonical equations for the optimal-control Hamiltonian on z = (x, p).
HamiltonianSystemModel hamiltonian_vector_field(const ControlAffineSystem& sys);

/// z = (x, p) -> (f(x), -f_x(x)' p): the flow of H0(x, p) = p' f(x).
VecField nominal_hamiltonian_field(const ControlAffineSystem& sys);

double hj_residual(const ControlAffineSystem& sys, const VecField& V_grad, const Vec& x);

ControlAffineSystem builtin_example1();

struct PendulumParams {
  double M = 0.5;
  double m = 0.2;
  double b = 0.1;
  double l = 0.3;
  double I = 0.006;
  double gravity = 9.81;
};

/// Reduced cart-pendulum in (theta, theta_dot, cart velocity), upright at 0.
ControlAffineSystem builtin_pendulum(double g_gravity = 9.81);
Mat pendulum_mass_matrix(const PendulumParams& prm, double theta);

/// xdot = -x + x^3 + u, q = x^2 / 2, D = 1.
ControlAffineSystem builtin_cubic1d();

/// xdot = A x + B u, q = 1/2 x' Q x.
ControlAffineSystem linear_quadratic_system(const Mat& A, const Mat& B, const Mat& Q, const Mat& D);

struct PolyTerm {
  std::vector<int> exponent;
  double coeff = 0.0;
};

/// Polynomial drift, constant input matrix, quadratic state cost.
struct PolynomialSpec {
  int n = 0;
  std::vector<std::vector<PolyTerm>> f;
  Mat B;
  Mat Q;
  Mat D;
};

ControlAffineSystem polynomial_system(const PolynomialSpec& spec);

}  // namespace khj

#endif  // KHJ_SYSTEM_MODEL_HPP
