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

#ifndef KHJ_PROCEDURE2_HPP
#define KHJ_PROCEDURE2_HPP

#include <optional>
#include <vector>

#include "khj/galerkin.hpp"
#include "khj/system_model.hpp"

namespace khj {

/// Psi_u(z) = Wu_t z + U Gamma(z): unstable principal eigenfunctions of the
/// Hamiltonian system. Their joint zero-level set is the stable manifold.
struct UnstableEigenfunctions {
  int n = 0;
  Mat Wu_t;  // n x 2n
  Mat U;     // n x M
  Procedure2Basis basis;
  Mat Lambda_u;
  std::vector<int> block_start;
  std::vector<int> block_size;
  std::vector<double> residual_rms;  // per block, held-out
  std::vector<double> cond_J;
  Box box;  // (x, p) sampling box

  Mat Wu1_t() const { return Wu_t.leftCols(n); }
  Mat Wu2_t() const { return Wu_t.rightCols(n); }
  Mat U11() const { return U.leftCols(basis.N); }
  Mat U12() const { return U.rightCols(basis.M() - basis.N); }
  Vec psi(const Vec& z) const { return Wu_t * z + U * basis.full.eval(z); }
  Mat psi_jac(const Vec& z) const { return Wu_t + U * basis.full.jacobian(z); }
};

UnstableEigenfunctions unstable_eigfns(const HamiltonianSystemModel& ham,
                                       const Procedure2Basis& basis, const SampleSet& samples,
                                       Assembly mode = Assembly::Parallel);

/// Jl = -(Wu2')^-1 Wu1', symmetrized; the asymmetry is written to *asymmetry.
Mat linear_manifold(const UnstableEigenfunctions& eigs, double* asymmetry = nullptr);

struct JnFit {
  Mat Jn;                       // least-squares solution
  Mat Jn_psd;                   // eigenvalue-clipped
  double fit_residual = 0.0;    // RMS |grad V - p*| with Jn
  double fit_residual_psd = 0.0;
  double objective = 0.0;       // RMS of G2 (Xi3bar j) + G1, the fitted objective
  double objective_psd = 0.0;
};

class HJSolution2 {
 public:
  HJSolution2(ControlAffineSystem sys, UnstableEigenfunctions eigs);

  Vec G1(const Vec& x) const;
  Mat G2(const Vec& x) const;
  /// p_n = -G2^-1 G1; throws NumericalError naming x if G2 is singular.
  Vec p_n(const Vec& x) const;
  Vec p_star(const Vec& x) const { return Jl_ * x + p_n(x); }
  Vec control(const Vec& x) const;

  /// Value function support after fit_value_Jn.
  bool has_value() const { return Jn_.has_value(); }
  double value(const Vec& x) const;
  Vec value_grad(const Vec& x) const;
  void set_value(const MonomialBasis& xi3, const Mat& Jn);

  const ControlAffineSystem& system() const { return sys_; }
  const UnstableEigenfunctions& eigs() const { return eigs_; }
  const Mat& Jl() const { return Jl_; }
  double Jl_asymmetry() const { return asym_; }
  const std::optional<Mat>& Jn() const { return Jn_; }
  const MonomialBasis& xi3() const { return xi3_; }

 private:
  ControlAffineSystem sys_;
  UnstableEigenfunctions eigs_;
  Mat Jl_;
  double asym_ = 0.0;
  std::optional<Mat> Jn_;
  MonomialBasis xi3_;
};

Vec nonlinear_manifold(const HJSolution2& sol, const Vec& x);

Vec control2(const HJSolution2& sol, const Vec& x);

/// n x m map from the half-vectorization of symmetric Jn (upper triangle,
/// row-major) to d(1/2 Xi3' Jn Xi3)/dx.
Mat xi3_bar(const MonomialBasis& xi3, const Vec& x);

Mat unpack_symmetric(const Vec& j, int m);

JnFit fit_value_Jn(const HJSolution2& sol, const MonomialBasis& xi3, const SampleSet& x_samples);

struct Procedure2Options {
  int d1 = 7;
  int d2 = 6;
  int d3 = 2;
  Eigen::Index L = 20000;
  std::uint64_t seed = 0;
  double p_scale = 2.0;
  Eigen::Index L_fit = 2000;
  bool fit_value = true;
  bool use_psd = false;
  Assembly mode = Assembly::Parallel;
};

/// (x, p) box: x_box times |p_i| <= p_scale ||Jl_lin||_2 max|x_i|, with Jl_lin
/// the linear-Hamiltonian estimate.
Box procedure2_box(const Mat& H0, const Box& x_box, double p_scale);

struct Procedure2Result {
  HJSolution2 solution;
  std::optional<JnFit> fit;
};

Procedure2Result procedure2_solve(const ControlAffineSystem& sys, const Box& x_box,
                                  const Procedure2Options& opt);

}  // namespace khj

#endif  // KHJ_PROCEDURE2_HPP
