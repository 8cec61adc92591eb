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

#ifndef KHJ_BASIS_HPP
#define KHJ_BASIS_HPP

#include <vector>

#include "khj/types.hpp"

namespace khj {

using Exponent = std::vector<int>;

/// All exponents of total degree d in n variables, graded-lex order
/// (x1^d first).
std::vector<Exponent> graded_lex_exponents(int n, int d);

/// Dictionary of monomials z^alpha. The exponent table is the full descriptor.
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(int dim_in, std::vector<Exponent> exponents);

  int dim_in() const { return dim_in_; }
  int size() const { return static_cast<int>(exps_.size()); }
  int max_degree() const { return max_deg_; }
  int min_degree() const { return min_deg_; }
  bool purely_nonlinear() const { return min_deg_ >= 2; }
  const std::vector<Exponent>& exponents() const { return exps_; }

  Vec eval(const Vec& z) const;
  /// M x dim_in
  Mat jacobian(const Vec& z) const;
  /// Value and Jacobian in one pass; val and jac must be presized.
  void eval_with_jacobian(const Vec& z, Vec& val, Mat& jac) const;

 private:
  int dim_in_ = 0;
  int max_deg_ = 0;
  int min_deg_ = 0;
  std::vector<Exponent> exps_;
};

MonomialBasis monomial_basis(int n, int deg_min, int deg_max);

/// Gamma(z) = (Xi1(x), Xi2(x) p) on z = (x, p): x-monomials of degree 2..d1,
/// then every x-monomial m of degree 1..d2 times each p_i (i fastest).
struct Procedure2Basis {
  int n = 0;
  int d1 = 0;
  int d2 = 0;
  int N = 0;
  MonomialBasis full;     // over z, dim 2n
  MonomialBasis xi1;      // over x
  MonomialBasis xi2_mono; // x-monomials of degree 1..d2

  int M() const { return full.size(); }
  Vec Xi1(const Vec& x) const { return xi1.eval(x); }
  /// (M - N) x n, so that the p-block of Gamma is Xi2(x) p.
  Mat Xi2(const Vec& x) const;
};

Procedure2Basis procedure2_basis(int n, int d1, int d2);

MonomialBasis value_basis_xi3(int n, int d3);

}  // namespace khj

#endif  // KHJ_BASIS_HPP
