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

#include "khj/basis.hpp"
#include "khj/config.hpp"
#include "khj/sampling.hpp"
#include "khj/system_model.hpp"

using namespace khj;

namespace {

void expect_jacobian_matches_fd(const MonomialBasis& b, std::uint64_t seed) {
  const SampleSet s = sample_domain(Box::symmetric(Vec::Ones(b.dim_in())), 50, seed);
  for (Eigen::Index k = 0; k < s.L; ++k) {
    const Vec z = s.point(k);
    const Mat J = b.jacobian(z);
    const Mat Jfd = fd_jacobian([&](const Vec& y) { return b.eval(y); }, z);
    EXPECT_LE((J - Jfd).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + J.cwiseAbs().maxCoeff()));
  }
}

}  // namespace

TEST(Basis, GradedLexOrder) {
  const auto e = graded_lex_exponents(2, 2);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0], (Exponent{2, 0}));
  EXPECT_EQ(e[1], (Exponent{1, 1}));
  EXPECT_EQ(e[2], (Exponent{0, 2}));
}

TEST(Basis, Counts) {
  EXPECT_EQ(monomial_basis(2, 2, 5).size(), 18);
  EXPECT_EQ(monomial_basis(3, 2, 2).size(), 6);
  EXPECT_EQ(monomial_basis(1, 2, 9).size(), 8);
  EXPECT_EQ(value_basis_xi3(2, 3).size(), 7);
  EXPECT_EQ(value_basis_xi3(1, 2).size(), 1);
}

TEST(Basis, SingleSquare) {
  const MonomialBasis b = monomial_basis(1, 2, 2);
  Vec x(1);
  x << 0.3;
  EXPECT_DOUBLE_EQ(b.eval(x)(0), 0.09);
  EXPECT_DOUBLE_EQ(b.jacobian(Vec::Zero(1))(0, 0), 0.0);
}

TEST(Basis, PurelyNonlinearAtOrigin) {
  const MonomialBasis b = monomial_basis(3, 2, 4);
  EXPECT_TRUE(b.purely_nonlinear());
  EXPECT_EQ(b.eval(Vec::Zero(3)).norm(), 0.0);
  EXPECT_EQ(b.jacobian(Vec::Zero(3)).norm(), 0.0);
}

TEST(Basis, EvalMatchesDirectPowers) {
  const MonomialBasis b = monomial_basis(3, 2, 4);
  Vec z(3);
  z << 0.7, -1.3, 0.4;
  const Vec v = b.eval(z);
  for (int j = 0; j < b.size(); ++j) {
    const auto& e = b.exponents()[j];
    const double want = std::pow(z(0), e[0]) * std::pow(z(1), e[1]) * std::pow(z(2), e[2]);
    EXPECT_NEAR(v(j), want, 1e-14);
  }
  Vec val;
  Mat jac;
  b.eval_with_jacobian(z, val, jac);
  EXPECT_EQ(val, v);
  EXPECT_EQ(jac, b.jacobian(z));
}

TEST(Basis, JacobianMatchesFiniteDifferences) {
  expect_jacobian_matches_fd(monomial_basis(2, 2, 5), 1);
  expect_jacobian_matches_fd(monomial_basis(4, 2, 3), 2);
  expect_jacobian_matches_fd(procedure2_basis(2, 4, 3).full, 3);
  expect_jacobian_matches_fd(value_basis_xi3(2, 3), 4);
}

TEST(Basis, Procedure2Enumeration) {
  const Procedure2Basis b = procedure2_basis(2, 2, 1);
  EXPECT_EQ(b.N, 3);
  EXPECT_EQ(b.M(), 7);
  // block2 = x1 p1, x1 p2, x2 p1, x2 p2
  const auto& e = b.full.exponents();
  EXPECT_EQ(e[3], (Exponent{1, 0, 1, 0}));
  EXPECT_EQ(e[4], (Exponent{1, 0, 0, 1}));
  EXPECT_EQ(e[5], (Exponent{0, 1, 1, 0}));
  EXPECT_EQ(e[6], (Exponent{0, 1, 0, 1}));
}

TEST(Basis, Procedure2StructureIsLinearInP) {
  const Procedure2Basis b = procedure2_basis(2, 4, 3);
  for (const auto& e : b.full.exponents()) EXPECT_LE(e[2] + e[3], 1);
  const SampleSet s = sample_domain(Box::symmetric(Vec::Ones(4)), 20, 9);
  for (Eigen::Index k = 0; k < s.L; ++k) {
    const Vec z = s.point(k);
    const Vec x = z.head(2), p = z.tail(2);
    Vec want(b.M());
    want << b.Xi1(x), b.Xi2(x) * p;
    EXPECT_LE((b.full.eval(z) - want).norm(), 1e-14);
  }
  // p-block vanishes at x = 0
  Vec z0 = Vec::Zero(4);
  z0(2) = 3.0;
  z0(3) = -1.0;
  EXPECT_EQ(b.full.eval(z0).norm(), 0.0);
  EXPECT_EQ(b.full.jacobian(Vec::Zero(4)).norm(), 0.0);
}

TEST(Basis, DescriptorRoundTripIsBitwise) {
  const MonomialBasis b = monomial_basis(2, 2, 5);
  const MonomialBasis c = basis_from_descriptor(basis_descriptor(b));
  const SampleSet s = sample_domain(Box::symmetric(Vec::Ones(2)), 30, 13);
  for (Eigen::Index k = 0; k < s.L; ++k) EXPECT_EQ(b.eval(s.point(k)), c.eval(s.point(k)));
}

TEST(Basis, GramMatrixWellConditionedOnSamples) {
  const MonomialBasis b = monomial_basis(2, 2, 5);
  const SampleSet s = sample_domain(Box::symmetric(Vec::Ones(2)), 4 * b.size(), 17);
  Mat G = Mat::Zero(b.size(), b.size());
  for (Eigen::Index k = 0; k < s.L; ++k) {
    const Vec v = b.eval(s.point(k));
    G += v * v.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  EXPECT_LT(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff(), 1e12);
}

TEST(Basis, RejectsLinearTerms) {
  EXPECT_THROW(monomial_basis(2, 1, 3), ConfigError);
  EXPECT_THROW(procedure2_basis(2, 1, 1), ConfigError);
  EXPECT_THROW(value_basis_xi3(2, 1), ConfigError);
}
