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

#ifndef KHJ_SPECTRAL_LINALG_HPP
#define KHJ_SPECTRAL_LINALG_HPP

#include <vector>

#include "khj/types.hpp"

namespace khj {

/// Vt A = Lambda Vt with Lambda real block diagonal: 1x1 blocks for real
/// eigenvalues, [[a, -b], [b, a]] (b > 0) for a +- ib. Blocks sorted by
/// real part, then imaginary part.
struct RealSpectralDecomposition {
  Mat Lambda;
  Mat Vt;
  double cond_V = 0.0;
  std::vector<std::complex<double>> eigenvalues;  // one entry per block
  std::vector<int> block_start;
  std::vector<int> block_size;
};

struct UnstableSubspace {
  Mat D_full;  // orthonormal rows spanning the left-unstable subspace
  Mat D1;
  Mat D2;
  Mat Lambda_u;     // block eigenmatrix, pairs with eigen_rows
  Mat eigen_rows;   // real-block left eigenvectors: eigen_rows H = Lambda_u eigen_rows
  Mat restricted;   // D_full H D_full'
  std::vector<std::complex<double>> eigenvalues;
  std::vector<int> block_start;
  std::vector<int> block_size;
};

struct RiccatiSolution {
  Mat P;
  double residual = 0.0;
  std::vector<std::complex<double>> closed_loop_spectrum;
};

RealSpectralDecomposition real_spectral_decomposition(const Mat& A);

UnstableSubspace unstable_left_subspace(const Mat& H);

Mat lagrangian_subspace(const UnstableSubspace& sub, double* asymmetry = nullptr);

Mat hamiltonian_matrix(const Mat& A, const Mat& R, const Mat& Q);

RiccatiSolution solve_riccati(const Mat& A, const Mat& R, const Mat& Q);

/// ||A'P + PA - PRP + Q||_F
double riccati_residual(const Mat& A, const Mat& R, const Mat& Q, const Mat& P);

/// exp(Lambda t) for a real block eigenmatrix.
Mat block_expm(const Mat& Lambda, double t);

double condition_number(const Mat& M);

}  // namespace khj

#endif  // KHJ_SPECTRAL_LINALG_HPP
