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

#ifndef KHJ_GALERKIN_HPP
#define KHJ_GALERKIN_HPP

#include <memory>
#include <vector>

#include "khj/basis.hpp"
#include "khj/sampling.hpp"
#include "khj/spectral_linalg.hpp"

namespace khj {

/// Samples per reduction chunk. Fixed so results do not depend on threads.
inline constexpr Eigen::Index kChunk = 1024;

enum class Assembly {
  Parallel,       // OpenMP over chunks
  SerialChunked,  // same chunk tree, one thread; bitwise equal to Parallel
  Naive,          // one running sum, kept as a reference
};

/// Sample averages shared by every eigenvalue block:
///   Jbase = <Gamma, (dGamma F)'>, G = <Gamma, Gamma'>, C = <Gamma, Fn'>
/// with Fn(z) = F(z) - E z.
struct GalerkinMoments {
  Mat Jbase;
  Mat G;
  Mat C;
  Eigen::Index L = 0;
};

GalerkinMoments assemble_moments(const VecField& F, const Mat& E, const MonomialBasis& basis,
                                 const SampleSet& samples,
                                 Assembly mode = Assembly::Parallel);

/// J Theta = -b for one block. Real blocks: M unknowns. Pairs: 2M unknowns,
/// component-major (Theta_1 then Theta_2).
struct GalerkinProblem {
  Mat J;
  Vec b;
  Vec Theta;
  double cond_J = 0.0;
  double solve_residual = 0.0;
  int block_size = 1;
};

/// Forms the block system from shared moments. W rows are the linear parts
/// (left eigenvector rows satisfying W E = block W).
GalerkinProblem form_problem(const GalerkinMoments& mom, const Mat& block, const Mat& W);

/// One-shot assembly; checks W E = block W first.
GalerkinProblem assemble_galerkin(const VecField& F, const Mat& E, const MonomialBasis& basis,
                                  const Mat& block, const Mat& W, const SampleSet& samples,
                                  Assembly mode = Assembly::Parallel);

/// Column-pivoted QR solve of J Theta = -b; records the residual in prob.
Vec solve_coefficients(GalerkinProblem& prob);

/// Stacked principal eigenfunctions Phi(z) with block eigenmatrix Lambda.
/// Either Galerkin-based (Vt z + Theta Gamma(z)) or analytic.
class EigenfunctionSet {
 public:
  EigenfunctionSet() = default;
  static EigenfunctionSet galerkin(const Mat& Vt, const Mat& Lambda,
                                   std::shared_ptr<const MonomialBasis> basis, const Mat& Theta,
                                   const Box& box);
  static EigenfunctionSet analytic(const Mat& Vt, const Mat& Lambda, VecField phi,
                                   MatField jac, const Box& box);

  int n() const { return static_cast<int>(Vt.rows()); }
  Vec phi(const Vec& z) const;
  Mat jac(const Vec& z) const;
  bool has_basis() const { return static_cast<bool>(basis); }

  Mat Vt;
  Mat Lambda;
  Box box;
  std::shared_ptr<const MonomialBasis> basis;
  Mat Theta;  // rows match Vt rows
  std::vector<int> block_start;
  std::vector<int> block_size;
  std::vector<double> residual_rms;  // per block, held-out
  std::vector<double> cond_J;        // per block

 private:
  VecField phi_;
  MatField jac_;
};

/// RMS over samples of |dPhi/dz F - Lambda Phi| for rows [r0, r0 + k).
double eigen_residual_rms(const EigenfunctionSet& eig, const VecField& F, const SampleSet& s,
                          int r0, int k);

struct EigfunOptions {
  Assembly mode = Assembly::Parallel;
  bool held_out = true;  // residual on a fresh L/5 sample
};

EigenfunctionSet approximate_eigenfunction_set(const VecField& F, const Mat& E,
                                               std::shared_ptr<const MonomialBasis> basis,
                                               const SampleSet& samples,
                                               const EigfunOptions& opt = {});

struct ConvergenceRow {
  Eigen::Index L;
  int trial;
  double error;
};

struct ConvergenceSummary {
  Eigen::Index L;
  double mean, q25, median, q75;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceSummary> summary;
  double slope_mean = 0.0;    // log(mean error) vs log L
  double slope_median = 0.0;  // log(median error) vs log L
  Eigen::Index reference_points = 0;
};

struct ConvergenceOptions {
  std::vector<Eigen::Index> L_list;
  int trials = 20;
  std::uint64_t seed = 0;
  int block = 0;           // block index in the spectral decomposition of E
  int eval_per_axis = 41;  // evaluation grid
  // Reference: analytic if set, else midpoint-grid quadrature with at least
  // 100 * max(L_list) points.
  VecField analytic_reference;
  Mat analytic_W;  // linear part rows of the analytic reference
};

ConvergenceTable convergence_study(const VecField& F, const Mat& E,
                                   const MonomialBasis& basis, const Box& box,
                                   const ConvergenceOptions& opt);

/// numpy-style linear-interpolated quantile of an unsorted sample.
double quantile(std::vector<double> v, double q);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace khj

#endif  // KHJ_GALERKIN_HPP
