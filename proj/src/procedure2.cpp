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

#include "khj/procedure2.hpp"

#include <cmath>

namespace khj {

UnstableEigenfunctions unstable_eigfns(const HamiltonianSystemModel& ham,
                                       const Procedure2Basis& basis, const SampleSet& samples,
                                       Assembly mode) {
  const int n = ham.base.n;
  require(basis.n == n, "unstable_eigfns: basis dimension does not match system");
  require(samples.points.cols() == 2 * n, "unstable_eigfns: samples must live in (x, p)");
  UnstableSubspace sub = unstable_left_subspace(ham.H0);

  UnstableEigenfunctions e;
  e.n = n;
  e.basis = basis;
  e.Lambda_u = sub.Lambda_u;
  e.block_start = sub.block_start;
  e.block_size = sub.block_size;
  e.box = samples.box;
  e.Wu_t = sub.eigen_rows;
  // unit first row per block, first nonzero entry positive
  for (size_t b = 0; b < sub.block_start.size(); ++b) {
    const int r0 = sub.block_start[b], k = sub.block_size[b];
    e.Wu_t.middleRows(r0, k) /= e.Wu_t.row(r0).norm();
    if (k == 1) {
      const double tol = 1e-12 * e.Wu_t.row(r0).cwiseAbs().maxCoeff();
      for (int i = 0; i < 2 * n; ++i)
        if (std::abs(e.Wu_t(r0, i)) > tol) {
          if (e.Wu_t(r0, i) < 0) e.Wu_t.row(r0) *= -1.0;
          break;
        }
    }
  }
  if (!(condition_number(e.Wu2_t()) < 1e12))
    throw NumericalError("complementarity fails: Wu2 is singular");

  const int M = basis.M();
  GalerkinMoments mom = assemble_moments(ham.F, ham.H0, basis.full, samples, mode);
  e.U.resize(n, M);
  for (size_t b = 0; b < sub.block_start.size(); ++b) {
    const int r0 = sub.block_start[b], k = sub.block_size[b];
    GalerkinProblem prob =
        form_problem(mom, e.Lambda_u.block(r0, r0, k, k), e.Wu_t.middleRows(r0, k));
    solve_coefficients(prob);
    for (int i = 0; i < k; ++i) e.U.row(r0 + i) = prob.Theta.segment(i * M, M).transpose();
    e.cond_J.push_back(prob.cond_J);
  }

  const SampleSet check = sample_domain(samples.box, std::max<Eigen::Index>(samples.L / 5, 1),
                                        derive_seed(samples.seed, 1));
  for (size_t b = 0; b < sub.block_start.size(); ++b) {
    const int r0 = sub.block_start[b], k = sub.block_size[b];
    const Mat Lb = e.Lambda_u.block(r0, r0, k, k);
    double acc = 0.0;
    for (Eigen::Index s = 0; s < check.L; ++s) {
      const Vec z = check.point(s);
      const Vec r = (e.psi_jac(z) * ham.F(z)).segment(r0, k) - Lb * e.psi(z).segment(r0, k);
      acc += r.squaredNorm();
    }
    e.residual_rms.push_back(std::sqrt(acc / (static_cast<double>(check.L) * k)));
  }
  return e;
}

Mat linear_manifold(const UnstableEigenfunctions& eigs, double* asymmetry) {
  if (!(condition_number(eigs.Wu2_t()) < 1e12))
    throw NumericalError("complementarity fails: Wu2 is singular");
  Mat Jl = -eigs.Wu2_t().colPivHouseholderQr().solve(eigs.Wu1_t());
  if (asymmetry) *asymmetry = (Jl - Jl.transpose()).norm();
  return 0.5 * (Jl + Jl.transpose());
}

HJSolution2::HJSolution2(ControlAffineSystem sys, UnstableEigenfunctions eigs)
    : sys_(std::move(sys)), eigs_(std::move(eigs)) {
  Jl_ = linear_manifold(eigs_, &asym_);
}

Vec HJSolution2::G1(const Vec& x) const {
  return eigs_.U11() * eigs_.basis.Xi1(x) + eigs_.U12() * (eigs_.basis.Xi2(x) * (Jl_ * x));
}

Mat HJSolution2::G2(const Vec& x) const {
  return eigs_.Wu2_t() + eigs_.U12() * eigs_.basis.Xi2(x);
}

Vec HJSolution2::p_n(const Vec& x) const {
  const Mat g2 = G2(x);
  Eigen::FullPivLU<Mat> lu(g2);
  if (!lu.isInvertible() || !(condition_number(g2) < 1e12)) {
    throw NumericalError("G2 is singular at x = " + format_vec(x));
  }
  return -lu.solve(G1(x));
}

Vec HJSolution2::control(const Vec& x) const {
  return -sys_.D.ldlt().solve(sys_.g(x).transpose() * p_star(x));
}

void HJSolution2::set_value(const MonomialBasis& xi3, const Mat& Jn) {
  require(xi3.dim_in() == sys_.n && Jn.rows() == xi3.size() && Jn.cols() == xi3.size(),
          "set_value: Jn does not match the value basis");
  xi3_ = xi3;
  Jn_ = Jn;
}

double HJSolution2::value(const Vec& x) const {
  require(Jn_.has_value(), "value function not fitted");
  const Vec xi = xi3_.eval(x);
  return 0.5 * (x.dot(Jl_ * x) + xi.dot(*Jn_ * xi));
}

Vec HJSolution2::value_grad(const Vec& x) const {
  require(Jn_.has_value(), "value function not fitted");
  return Jl_ * x + xi3_.jacobian(x).transpose() * (*Jn_ * xi3_.eval(x));
}

Vec nonlinear_manifold(const HJSolution2& sol, const Vec& x) { return sol.p_n(x); }

Vec control2(const HJSolution2& sol, const Vec& x) { return sol.control(x); }

Mat xi3_bar(const MonomialBasis& xi3, const Vec& x) {
  const int m1 = xi3.size();
  const Vec xi = xi3.eval(x);
  const Mat dxi = xi3.jacobian(x);  // m1 x n
  Mat out(x.size(), m1 * (m1 + 1) / 2);
  int c = 0;
  for (int a = 0; a < m1; ++a)
    for (int b = a; b < m1; ++b, ++c) {
      if (a == b)
        out.col(c) = dxi.row(a).transpose() * xi(a);
      else
        out.col(c) = dxi.row(a).transpose() * xi(b) + dxi.row(b).transpose() * xi(a);
    }
  return out;
}

Mat unpack_symmetric(const Vec& j, int m) {
  Mat J(m, m);
  int c = 0;
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b, ++c) {
      J(a, b) = j(c);
      J(b, a) = j(c);
    }
  return J;
}

namespace {

Vec pack_symmetric(const Mat& J) {
  const int m = static_cast<int>(J.rows());
  Vec j(m * (m + 1) / 2);
  int c = 0;
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b, ++c) j(c) = J(a, b);
  return j;
}

}  // namespace

JnFit fit_value_Jn(const HJSolution2& sol, const MonomialBasis& xi3, const SampleSet& x_samples) {
  const int n = sol.system().n;
  require(xi3.dim_in() == n && xi3.purely_nonlinear(), "fit_value_Jn: bad value basis");
  require(x_samples.points.cols() == n, "fit_value_Jn: samples must live in x");
  const int m1 = xi3.size();
  const int m = m1 * (m1 + 1) / 2;
  const Eigen::Index L = x_samples.L;
  Mat A(n * L, m);
  Vec y(n * L);
  std::vector<Mat> bars(static_cast<size_t>(L));
  std::vector<Mat> g2s(static_cast<size_t>(L));
  std::vector<Vec> pns(static_cast<size_t>(L));
  for (Eigen::Index k = 0; k < L; ++k) {
    const Vec x = x_samples.point(k);
    bars[k] = xi3_bar(xi3, x);
    g2s[k] = sol.G2(x);
    pns[k] = sol.p_n(x);
    A.middleRows(k * n, n) = g2s[k] * bars[k];
    y.segment(k * n, n) = -sol.G1(x);
  }
  Eigen::ColPivHouseholderQR<Mat> qr(A);
  qr.setThreshold(1e-12);
  if (qr.rank() < m) throw NumericalError("value basis unidentifiable from samples");
  const Vec j = qr.solve(y);

  JnFit fit;
  fit.Jn = unpack_symmetric(j, m1);
  Eigen::SelfAdjointEigenSolver<Mat> es(fit.Jn);
  fit.Jn_psd = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
               es.eigenvectors().transpose();
  const Vec jp = pack_symmetric(fit.Jn_psd);

  auto stats = [&](const Vec& jj, double& grad_rms, double& obj_rms) {
    double g = 0.0, o = 0.0;
    for (Eigen::Index k = 0; k < L; ++k) {
      const Vec d = bars[k] * jj - pns[k];
      g += d.squaredNorm();
      o += (g2s[k] * d).squaredNorm();
    }
    grad_rms = std::sqrt(g / static_cast<double>(L));
    obj_rms = std::sqrt(o / static_cast<double>(L));
  };
  stats(j, fit.fit_residual, fit.objective);
  stats(jp, fit.fit_residual_psd, fit.objective_psd);
  return fit;
}

Box procedure2_box(const Mat& H0, const Box& x_box, double p_scale) {
  const int n = static_cast<int>(H0.rows() / 2);
  require(x_box.dim() == n, "procedure2_box: x box has wrong dimension");
  const Mat Jl = lagrangian_subspace(unstable_left_subspace(H0));
  Eigen::JacobiSVD<Mat> svd(Jl);
  const double xmax = std::max(x_box.lo.cwiseAbs().maxCoeff(), x_box.hi.cwiseAbs().maxCoeff());
  double c = p_scale * svd.singularValues()(0) * xmax;
  if (!(c > 0.0)) c = xmax;  // zero cost: keep a non-degenerate box
  Box z;
  z.lo.resize(2 * n);
  z.hi.resize(2 * n);
  z.lo << x_box.lo, Vec::Constant(n, -c);
  z.hi << x_box.hi, Vec::Constant(n, c);
  return z;
}

Procedure2Result procedure2_solve(const ControlAffineSystem& sys, const Box& x_box,
                                  const Procedure2Options& opt) {
  HamiltonianSystemModel ham = hamiltonian_vector_field(sys);
  const Box zbox = procedure2_box(ham.H0, x_box, opt.p_scale);
  const SampleSet samples = sample_domain(zbox, opt.L, opt.seed);
  const Procedure2Basis basis = procedure2_basis(sys.n, opt.d1, opt.d2);
  UnstableEigenfunctions eigs = unstable_eigfns(ham, basis, samples, opt.mode);
  Procedure2Result res{HJSolution2(sys, std::move(eigs)), std::nullopt};
  if (opt.fit_value) {
    const MonomialBasis xi3 = value_basis_xi3(sys.n, opt.d3);
    const SampleSet xs = sample_domain(x_box, opt.L_fit, derive_seed(opt.seed, 2));
    JnFit fit = fit_value_Jn(res.solution, xi3, xs);
    res.solution.set_value(xi3, opt.use_psd ? fit.Jn_psd : fit.Jn);
    res.fit = fit;
  }
  return res;
}

}  // namespace khj
