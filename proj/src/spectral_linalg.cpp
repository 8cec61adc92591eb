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

#include "khj/spectral_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace khj {

namespace {

using Cd = std::complex<double>;

struct BlockRows {
  Mat rows;
  Mat Lambda;
  std::vector<Cd> eigenvalues;
  std::vector<int> start;
  std::vector<int> size;
};

// Rotate v so its largest-modulus entry is real positive.
Eigen::VectorXcd fix_phase(const Eigen::VectorXcd& v) {
  Eigen::Index k = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best * (1.0 + 1e-10)) {
      best = std::abs(v(i));
      k = i;
    }
  }
  if (best <= 0.0) return v;
  return v * (std::conj(v(k)) / best);
}

void flip_to_first_positive(Eigen::Ref<Eigen::RowVectorXd> r) {
  const double tol = 1e-12 * r.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (std::abs(r(i)) > tol) {
      if (r(i) < 0.0) r = -r;
      return;
    }
  }
}

// Left eigenvectors of M (rows y with y M = lambda y) for the selected
// eigenvalues, in real block form.
BlockRows real_block_rows(const Mat& M, const std::function<bool(Cd)>& keep) {
  const Eigen::Index n = M.rows();
  Eigen::EigenSolver<Mat> es(M.transpose());
  if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition failed");
  const Eigen::VectorXcd ev = es.eigenvalues();
  Eigen::MatrixXcd evec = es.eigenvectors();

  // rank test on the (column normalized) eigenvector matrix
  for (Eigen::Index j = 0; j < n; ++j) evec.col(j).normalize();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(evec);
  const auto sv = svd.singularValues();
  if (n > 0 && sv(n - 1) < 1e-8 * sv(0)) throw NumericalError("defective matrix unsupported");

  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!keep(ev(i))) continue;
    if (std::abs(ev(i).imag()) <= 1e-12 * scale || ev(i).imag() > 0.0) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ia = std::abs(ev(a).imag()) <= 1e-12 * scale ? 0.0 : ev(a).imag();
    const double ib = std::abs(ev(b).imag()) <= 1e-12 * scale ? 0.0 : ev(b).imag();
    if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
    return ia < ib;
  });

  int count = 0;
  for (auto i : idx) count += std::abs(ev(i).imag()) <= 1e-12 * scale ? 1 : 2;

  BlockRows out;
  out.rows = Mat::Zero(count, n);
  out.Lambda = Mat::Zero(count, count);
  int r = 0;
  for (auto i : idx) {
    Eigen::VectorXcd v = fix_phase(evec.col(i));
    if (std::abs(ev(i).imag()) <= 1e-12 * scale) {
      Eigen::RowVectorXd row = v.real().transpose();
      row.normalize();
      flip_to_first_positive(row);
      out.rows.row(r) = row;
      out.Lambda(r, r) = ev(i).real();
      out.eigenvalues.emplace_back(ev(i).real(), 0.0);
      out.start.push_back(r);
      out.size.push_back(1);
      r += 1;
    } else {
      const double a = ev(i).real(), b = ev(i).imag();
      Mat pair(2, n);
      pair.row(0) = v.real().transpose();
      pair.row(1) = v.imag().transpose();
      pair /= pair.norm();
      out.rows.middleRows(r, 2) = pair;
      out.Lambda(r, r) = a;
      out.Lambda(r, r + 1) = -b;
      out.Lambda(r + 1, r) = b;
      out.Lambda(r + 1, r + 1) = a;
      out.eigenvalues.push_back(ev(i));
      out.start.push_back(r);
      out.size.push_back(2);
      r += 2;
    }
  }
  return out;
}

}  // namespace

double condition_number(const Mat& M) {
  if (M.size() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

RealSpectralDecomposition real_spectral_decomposition(const Mat& A) {
  require(A.rows() == A.cols() && A.rows() > 0, "real_spectral_decomposition: A must be square");
  BlockRows br = real_block_rows(A, [](Cd) { return true; });
  RealSpectralDecomposition out;
  out.Lambda = br.Lambda;
  out.Vt = br.rows;
  out.eigenvalues = br.eigenvalues;
  out.block_start = br.start;
  out.block_size = br.size;
  out.cond_V = condition_number(out.Vt);
  if (!(out.cond_V < 1e12)) throw NumericalError("defective matrix unsupported");
  const double res = (out.Vt * A - out.Lambda * out.Vt).norm();
  if (res > 1e-8 * std::max(A.norm(), 1e-300))
    throw NumericalError("left eigenvector residual too large");
  return out;
}

UnstableSubspace unstable_left_subspace(const Mat& H) {
  require(H.rows() == H.cols() && H.rows() % 2 == 0 && H.rows() > 0,
          "unstable_left_subspace: H must be 2n x 2n");
  const Eigen::Index n = H.rows() / 2;
  Eigen::VectorXcd ev = H.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i).real()) < 1e-8) throw NumericalError("hyperbolicity violated");

  BlockRows br = real_block_rows(H, [](Cd l) { return l.real() > 0.0; });
  if (br.rows.rows() != n) throw NumericalError("not a Hamiltonian spectrum");

  UnstableSubspace sub;
  sub.eigen_rows = br.rows;
  sub.Lambda_u = br.Lambda;
  sub.eigenvalues = br.eigenvalues;
  sub.block_start = br.start;
  sub.block_size = br.size;

  Eigen::HouseholderQR<Mat> qr(br.rows.transpose());
  Mat Q = qr.householderQ() * Mat::Identity(2 * n, n);
  sub.D_full = Q.transpose();
  sub.D1 = sub.D_full.leftCols(n);
  sub.D2 = sub.D_full.rightCols(n);
  sub.restricted = sub.D_full * H * sub.D_full.transpose();
  return sub;
}

Mat lagrangian_subspace(const UnstableSubspace& sub, double* asymmetry) {
  const double c = condition_number(sub.D2);
  if (!(c < 1e12))
    throw NumericalError("complementarity condition fails: D2 is singular");
  Mat L = -sub.D2.colPivHouseholderQr().solve(sub.D1);
  const double asym = (L - L.transpose()).norm();
  if (asymmetry) *asymmetry = asym;
  if (asym > 1e-8 * std::max(L.norm(), 1e-300) && asym > 1e-14)
    throw NumericalError("Lagrangian subspace is not symmetric");
  return 0.5 * (L + L.transpose());
}

Mat hamiltonian_matrix(const Mat& A, const Mat& R, const Mat& Q) {
  const Eigen::Index n = A.rows();
  require(A.cols() == n && R.rows() == n && R.cols() == n && Q.rows() == n && Q.cols() == n,
          "hamiltonian_matrix: dimension mismatch");
  Mat H(2 * n, 2 * n);
  H << A, -R, -Q, -A.transpose();
  return H;
}

double riccati_residual(const Mat& A, const Mat& R, const Mat& Q, const Mat& P) {
  return (A.transpose() * P + P * A - P * R * P + Q).norm();
}

RiccatiSolution solve_riccati(const Mat& A, const Mat& R, const Mat& Q) {
  UnstableSubspace sub = unstable_left_subspace(hamiltonian_matrix(A, R, Q));
  RiccatiSolution sol;
  sol.P = lagrangian_subspace(sub);
  sol.residual = riccati_residual(A, R, Q, sol.P);
  Eigen::VectorXcd cl = Mat(A - R * sol.P).eigenvalues();
  for (Eigen::Index i = 0; i < cl.size(); ++i) {
    sol.closed_loop_spectrum.push_back(cl(i));
    if (!(cl(i).real() < 0.0)) throw NumericalError("Riccati solution is not stabilizing");
  }
  return sol;
}

Mat block_expm(const Mat& Lambda, double t) {
  const Eigen::Index n = Lambda.rows();
  Mat E = Mat::Zero(n, n);
  Eigen::Index i = 0;
  while (i < n) {
    if (i + 1 < n && Lambda(i + 1, i) != 0.0) {
      const double a = Lambda(i, i), b = Lambda(i + 1, i);
      const double ea = std::exp(a * t);
      E(i, i) = ea * std::cos(b * t);
      E(i, i + 1) = -ea * std::sin(b * t);
      E(i + 1, i) = ea * std::sin(b * t);
      E(i + 1, i + 1) = ea * std::cos(b * t);
      i += 2;
    } else {
      E(i, i) = std::exp(Lambda(i, i) * t);
      i += 1;
    }
  }
  return E;
}

}  // namespace khj
