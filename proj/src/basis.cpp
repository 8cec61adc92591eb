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

#include "khj/basis.hpp"

#include <algorithm>

namespace khj {

namespace {

void lex_fill(int n, int d, Exponent& cur, int pos, std::vector<Exponent>& out) {
  if (pos == n - 1) {
    cur[pos] = d;
    out.push_back(cur);
    return;
  }
  for (int k = d; k >= 0; --k) {
    cur[pos] = k;
    lex_fill(n, d - k, cur, pos + 1, out);
  }
}

}  // namespace

std::vector<Exponent> graded_lex_exponents(int n, int d) {
  std::vector<Exponent> out;
  Exponent cur(n, 0);
  lex_fill(n, d, cur, 0, out);
  return out;
}

MonomialBasis::MonomialBasis(int dim_in, std::vector<Exponent> exponents)
    : dim_in_(dim_in), exps_(std::move(exponents)) {
  require(dim_in_ > 0, "basis input dimension must be positive");
  require(!exps_.empty(), "basis must have at least one function");
  min_deg_ = 1 << 30;
  for (const auto& e : exps_) {
    require(static_cast<int>(e.size()) == dim_in_, "basis exponent has wrong length");
    int deg = 0;
    for (int k : e) {
      require(k >= 0, "basis exponents must be non-negative");
      deg += k;
    }
    max_deg_ = std::max(max_deg_, deg);
    min_deg_ = std::min(min_deg_, deg);
  }
}

Vec MonomialBasis::eval(const Vec& z) const {
  Vec val(size());
  const int w = max_deg_ + 1;
  std::vector<double> pw(static_cast<size_t>(dim_in_) * w);
  for (int d = 0; d < dim_in_; ++d) {
    pw[d * w] = 1.0;
    for (int k = 1; k < w; ++k) pw[d * w + k] = pw[d * w + k - 1] * z(d);
  }
  for (int j = 0; j < size(); ++j) {
    double v = 1.0;
    for (int d = 0; d < dim_in_; ++d) v *= pw[d * w + exps_[j][d]];
    val(j) = v;
  }
  return val;
}

Mat MonomialBasis::jacobian(const Vec& z) const {
  Vec val;
  Mat jac;
  eval_with_jacobian(z, val, jac);
  return jac;
}

void MonomialBasis::eval_with_jacobian(const Vec& z, Vec& val, Mat& jac) const {
  val.resize(size());
  jac.resize(size(), dim_in_);
  const int w = max_deg_ + 1;
  std::vector<double> pw(static_cast<size_t>(dim_in_) * w);
  for (int d = 0; d < dim_in_; ++d) {
    pw[d * w] = 1.0;
    for (int k = 1; k < w; ++k) pw[d * w + k] = pw[d * w + k - 1] * z(d);
  }
  for (int j = 0; j < size(); ++j) {
    const Exponent& e = exps_[j];
    double v = 1.0;
    for (int d = 0; d < dim_in_; ++d) v *= pw[d * w + e[d]];
    val(j) = v;
    for (int d = 0; d < dim_in_; ++d) {
      if (e[d] == 0) {
        jac(j, d) = 0.0;
        continue;
      }
      double g = e[d] * pw[d * w + e[d] - 1];
      for (int o = 0; o < dim_in_; ++o)
        if (o != d) g *= pw[o * w + e[o]];
      jac(j, d) = g;
    }
  }
}

MonomialBasis monomial_basis(int n, int deg_min, int deg_max) {
  require(n > 0, "monomial_basis: n must be positive");
  require(deg_min >= 2, "monomial_basis: deg_min must be >= 2 (purely nonlinear)");
  require(deg_max >= deg_min, "monomial_basis: deg_max must be >= deg_min");
  std::vector<Exponent> exps;
  for (int d = deg_min; d <= deg_max; ++d) {
    auto block = graded_lex_exponents(n, d);
    exps.insert(exps.end(), block.begin(), block.end());
  }
  return MonomialBasis(n, std::move(exps));
}

Mat Procedure2Basis::Xi2(const Vec& x) const {
  Vec m = xi2_mono.eval(x);
  Mat out = Mat::Zero(static_cast<Eigen::Index>(m.size()) * n, n);
  for (Eigen::Index j = 0; j < m.size(); ++j)
    for (int i = 0; i < n; ++i) out(j * n + i, i) = m(j);
  return out;
}

Procedure2Basis procedure2_basis(int n, int d1, int d2) {
  require(n > 0, "procedure2_basis: n must be positive");
  require(d1 >= 2, "procedure2_basis: d1 must be >= 2");
  require(d2 >= 1, "procedure2_basis: d2 must be >= 1");
  Procedure2Basis b;
  b.n = n;
  b.d1 = d1;
  b.d2 = d2;
  b.xi1 = monomial_basis(n, 2, d1);
  std::vector<Exponent> m2;
  for (int d = 1; d <= d2; ++d) {
    auto block = graded_lex_exponents(n, d);
    m2.insert(m2.end(), block.begin(), block.end());
  }
  b.xi2_mono = MonomialBasis(n, m2);
  b.N = b.xi1.size();

  std::vector<Exponent> full;
  for (const auto& e : b.xi1.exponents()) {
    Exponent z(2 * n, 0);
    std::copy(e.begin(), e.end(), z.begin());
    full.push_back(z);
  }
  for (const auto& e : m2) {
    for (int i = 0; i < n; ++i) {
      Exponent z(2 * n, 0);
      std::copy(e.begin(), e.end(), z.begin());
      z[n + i] = 1;
      full.push_back(z);
    }
  }
  b.full = MonomialBasis(2 * n, full);
  return b;
}

MonomialBasis value_basis_xi3(int n, int d3) {
  require(d3 >= 2, "value_basis_xi3: d3 must be >= 2");
  return monomial_basis(n, 2, d3);
}

}  // namespace khj
