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

#ifndef KHJ_PROCEDURE1_HPP
#define KHJ_PROCEDURE1_HPP

#include <vector>

#include "khj/galerkin.hpp"
#include "khj/system_model.hpp"

namespace khj {

struct R1Q1 {
  Mat R1;
  Mat Q1;
};

/// R1 = Vt R0 Vt', Q1 = Vt^-T Q0 Vt^-1 (constant-coefficient form of R and
/// q in eigenfunction coordinates Phi ~ Vt x).
R1Q1 compute_R1_Q1(const Linearization& lin, const Mat& Vt);

/// V(x) = 1/2 Phi' L Phi with L from Lambda' L + L Lambda - L R1 L + Q1 = 0.
class HJSolution1 {
 public:
  HJSolution1(ControlAffineSystem sys, EigenfunctionSet eig, Mat L, Mat R1, Mat Q1,
              double riccati_residual);

  double value(const Vec& x) const;
  /// p(x) = dPhi/dx' L Phi
  Vec grad_value(const Vec& x) const;
  /// u*(x) = -D^-1 g(x)' p(x)
  Vec control(const Vec& x) const;

  const ControlAffineSystem& system() const { return sys_; }
  const EigenfunctionSet& eig() const { return eig_; }
  const Mat& L() const { return L_; }
  const Mat& R1() const { return R1_; }
  const Mat& Q1() const { return Q1_; }
  double riccati_residual() const { return riccati_residual_; }

 private:
  ControlAffineSystem sys_;
  EigenfunctionSet eig_;
  Mat L_, R1_, Q1_;
  double riccati_residual_;
};

HJSolution1 procedure1_solve(const ControlAffineSystem& sys, const EigenfunctionSet& eig);

struct IntegrabilityReport {
  double max_H0_drift = 0.0;
  double max_X_drift = 0.0;  // relative to 1 + |X(0)|
  double max_P_drift = 0.0;  // relative to 1 + |P(0)|
  int used = 0;
  int excluded = 0;  // trajectories that left the box
};

/// Integrates the nominal flow xdot = f, pdot = -f_x' p (RK4, step dt) from
/// each (x, p) row of samples and checks that X = e^{-Lambda t} Phi(x) and
/// P = e^{Lambda' t} (dPhi/dx')^-1 p stay constant at the t_grid times.
IntegrabilityReport verify_nominal_integrability(const EigenfunctionSet& eig,
                                                 const ControlAffineSystem& sys,
                                                 const SampleSet& samples,
                                                 const std::vector<double>& t_grid,
                                                 double dt = 1e-4);

/// max |H0(x, dW/dx') + dW/dt| for W(x, t) = P' e^{-Lambda t} Phi(x).
double verify_generating_function(const EigenfunctionSet& eig, const ControlAffineSystem& sys,
                                  const Vec& P_vec, const SampleSet& samples,
                                  const std::vector<double>& t_grid);

/// phi = (x1 - 2 x2, x1 + sin x2), Lambda = diag(-1, 2).
EigenfunctionSet example1_analytic_eigenfunctions(const Box& box);

/// phi = x / sqrt(1 - x^2) for xdot = -x + x^3, Lambda = -1, |x| < 1.
EigenfunctionSet cubic1d_analytic_eigenfunction(const Box& box);

/// Phi = Vt x from the spectral decomposition of A.
EigenfunctionSet linear_eigenfunctions(const Mat& A, const Box& box);

}  // namespace khj

#endif  // KHJ_PROCEDURE1_HPP
