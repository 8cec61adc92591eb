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

#include "khj/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <omp.h>

namespace khj {

namespace {

struct Partial {
  Mat Jbase, G, C;
};

// Moments of samples [begin, end) with per-sample weights folded into the
// left factor.
Partial chunk_moments(const VecField& F, const Mat& E, const MonomialBasis& basis,
                      const SampleSet& s, Eigen::Index begin, Eigen::Index end) {
  const int M = basis.size();
  const int d = basis.dim_in();
  const Eigen::Index m = end - begin;
  Mat Gam(M, m), WGam(M, m), LGam(M, m), Fn(d, m);
  Vec val(M);
  Mat jac(M, d);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Vec z = s.point(begin + k);
    const Vec f = F(z);
    basis.eval_with_jacobian(z, val, jac);
    Gam.col(k) = val;
    WGam.col(k) = (s.weights.size() ? s.weights(begin + k) : 1.0) * val;
    LGam.col(k) = jac * f;
    Fn.col(k) = f - E * z;
  }
  Partial p;
  p.Jbase.noalias() = WGam * LGam.transpose();
  p.G.noalias() = WGam * Gam.transpose();
  p.C.noalias() = WGam * Fn.transpose();
  return p;
}

GalerkinMoments naive_moments(const VecField& F, const Mat& E, const MonomialBasis& basis,
                              const SampleSet& s) {
  const int M = basis.size();
  const int d = basis.dim_in();
  GalerkinMoments mom;
  mom.Jbase = Mat::Zero(M, M);
  mom.G = Mat::Zero(M, M);
  mom.C = Mat::Zero(M, d);
  Vec val(M);
  Mat jac(M, d);
  for (Eigen::Index k = 0; k < s.L; ++k) {
    const Vec z = s.point(k);
    const Vec f = F(z);
    basis.eval_with_jacobian(z, val, jac);
    const double w = s.weights.size() ? s.weights(k) : 1.0;
    const Vec lg = jac * f;
    const Vec fn = f - E * z;
    for (int j = 0; j < M; ++j) {
      const double a = w * val(j);
      for (int i = 0; i < M; ++i) {
        mom.Jbase(j, i) += a * lg(i);
        mom.G(j, i) += a * val(i);
      }
      for (int i = 0; i < d; ++i) mom.C(j, i) += a * fn(i);
    }
  }
  return mom;
}

}  // namespace

GalerkinMoments assemble_moments(const VecField& F, const Mat& E, const MonomialBasis& basis,
                                 const SampleSet& samples, Assembly mode) {
  const int M = basis.size();
  const int d = basis.dim_in();
  require(samples.points.cols() == d, "assemble: sample dimension does not match basis");
  require(E.rows() == d && E.cols() == d, "assemble: linearization has wrong shape");
  if (samples.L < M) throw NumericalError("underdetermined: fewer samples than basis functions");

  GalerkinMoments mom;
  mom.L = samples.L;
  if (mode == Assembly::Naive) {
    mom = naive_moments(F, E, basis, samples);
    mom.L = samples.L;
  } else {
    const Eigen::Index nchunks = (samples.L + kChunk - 1) / kChunk;
    std::vector<Partial> parts(static_cast<size_t>(nchunks));
    std::vector<std::exception_ptr> errs(static_cast<size_t>(nchunks));
    auto work = [&](Eigen::Index c) {
      try {
        const Eigen::Index b = c * kChunk;
        parts[c] = chunk_moments(F, E, basis, samples, b, std::min(samples.L, b + kChunk));
      } catch (...) {
        errs[c] = std::current_exception();
      }
    };
    if (mode == Assembly::Parallel) {
#pragma omp parallel for schedule(static)
      for (Eigen::Index c = 0; c < nchunks; ++c) work(c);
    } else {
      for (Eigen::Index c = 0; c < nchunks; ++c) work(c);
    }
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
    mom.Jbase = Mat::Zero(M, M);
    mom.G = Mat::Zero(M, M);
    mom.C = Mat::Zero(M, d);
    // fixed left fold over chunk index
    for (const auto& p : parts) {
      mom.Jbase += p.Jbase;
      mom.G += p.G;
      mom.C += p.C;
    }
  }
  if (samples.weights.size() == 0) {
    const double inv = 1.0 / static_cast<double>(samples.L);
    mom.Jbase *= inv;
    mom.G *= inv;
    mom.C *= inv;
  }
  return mom;
}

GalerkinProblem form_problem(const GalerkinMoments& mom, const Mat& block, const Mat& W) {
  const Eigen::Index M = mom.G.rows();
  const Eigen::Index k = block.rows();
  require(block.cols() == k && (k == 1 || k == 2), "form_problem: block must be 1x1 or 2x2");
  require(W.rows() == k && W.cols() == mom.C.cols(), "form_problem: W has wrong shape");
  GalerkinProblem prob;
  prob.block_size = static_cast<int>(k);
  prob.J.resize(k * M, k * M);
  prob.b.resize(k * M);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      Mat blk = -block(i, j) * mom.G;
      if (i == j) blk += mom.Jbase;
      prob.J.block(i * M, j * M, M, M) = blk;
    }
    prob.b.segment(i * M, M) = mom.C * W.row(i).transpose();
  }
  prob.cond_J = condition_number(prob.J);
  if (!(prob.cond_J < 1e12))
    throw NumericalError(
        "Gram matrix numerically singular (basis or its generator image not linearly "
        "independent on this sample)");
  return prob;
}

GalerkinProblem assemble_galerkin(const VecField& F, const Mat& E, const MonomialBasis& basis,
                                  const Mat& block, const Mat& W, const SampleSet& samples,
                                  Assembly mode) {
  const double res = (W * E - block * W).norm();
  require(res <= 1e-8 * std::max(1.0, E.norm() * W.norm()),
          "assemble_galerkin: W is not a left eigenvector block of E");
  require(basis.purely_nonlinear(), "assemble_galerkin: basis must be purely nonlinear");
  GalerkinMoments mom = assemble_moments(F, E, basis, samples, mode);
  GalerkinProblem prob = form_problem(mom, block, W);
  solve_coefficients(prob);
  return prob;
}

Vec solve_coefficients(GalerkinProblem& prob) {
  if (prob.cond_J == 0.0) prob.cond_J = condition_number(prob.J);
  if (!(prob.cond_J < 1e12))
    throw NumericalError(
        "Gram matrix numerically singular (basis or its generator image not linearly "
        "independent on this sample)");
  Eigen::ColPivHouseholderQR<Mat> qr(prob.J);
  prob.Theta = qr.solve(Vec(-prob.b));
  prob.solve_residual = (prob.J * prob.Theta + prob.b).norm();
  return prob.Theta;
}

EigenfunctionSet EigenfunctionSet::galerkin(const Mat& Vt, const Mat& Lambda,
                                            std::shared_ptr<const MonomialBasis> basis,
                                            const Mat& Theta, const Box& box) {
  require(basis && Theta.rows() == Vt.rows() && Theta.cols() == basis->size(),
          "EigenfunctionSet: Theta shape does not match basis");
  EigenfunctionSet e;
  e.Vt = Vt;
  e.Lambda = Lambda;
  e.basis = basis;
  e.Theta = Theta;
  e.box = box;
  e.phi_ = [Vt, Theta, basis](const Vec& z) { return Vec(Vt * z + Theta * basis->eval(z)); };
  e.jac_ = [Vt, Theta, basis](const Vec& z) { return Mat(Vt + Theta * basis->jacobian(z)); };
  return e;
}

EigenfunctionSet EigenfunctionSet::analytic(const Mat& Vt, const Mat& Lambda, VecField phi,
                                            MatField jac, const Box& box) {
  EigenfunctionSet e;
  e.Vt = Vt;
  e.Lambda = Lambda;
  e.box = box;
  e.phi_ = std::move(phi);
  e.jac_ = std::move(jac);
  return e;
}

Vec EigenfunctionSet::phi(const Vec& z) const { return phi_(z); }
Mat EigenfunctionSet::jac(const Vec& z) const { return jac_(z); }

double eigen_residual_rms(const EigenfunctionSet& eig, const VecField& F, const SampleSet& s,
                          int r0, int k) {
  double acc = 0.0;
  const Mat Lb = eig.Lambda.block(r0, r0, k, k);
  for (Eigen::Index i = 0; i < s.L; ++i) {
    const Vec z = s.point(i);
    const Vec r = (eig.jac(z) * F(z)).segment(r0, k) - Lb * eig.phi(z).segment(r0, k);
    acc += r.squaredNorm();
  }
  return std::sqrt(acc / (static_cast<double>(s.L) * k));
}

EigenfunctionSet approximate_eigenfunction_set(const VecField& F, const Mat& E,
                                               std::shared_ptr<const MonomialBasis> basis,
                                               const SampleSet& samples,
                                               const EigfunOptions& opt) {
  require(basis && basis->purely_nonlinear(), "eigenfunction basis must be purely nonlinear");
  RealSpectralDecomposition dec = real_spectral_decomposition(E);
  GalerkinMoments mom = assemble_moments(F, E, *basis, samples, opt.mode);
  const int n = static_cast<int>(E.rows());
  const int M = basis->size();
  Mat Theta(n, M);
  std::vector<double> conds;
  for (size_t b = 0; b < dec.block_start.size(); ++b) {
    const int r0 = dec.block_start[b], k = dec.block_size[b];
    GalerkinProblem prob =
        form_problem(mom, dec.Lambda.block(r0, r0, k, k), dec.Vt.middleRows(r0, k));
    solve_coefficients(prob);
    for (int i = 0; i < k; ++i) Theta.row(r0 + i) = prob.Theta.segment(i * M, M).transpose();
    conds.push_back(prob.cond_J);
  }
  EigenfunctionSet eig = EigenfunctionSet::galerkin(dec.Vt, dec.Lambda, basis, Theta, samples.box);
  eig.block_start = dec.block_start;
  eig.block_size = dec.block_size;
  eig.cond_J = conds;
  const SampleSet check =
      opt.held_out ? sample_domain(samples.box, std::max<Eigen::Index>(samples.L / 5, 1),
                                   derive_seed(samples.seed, 1))
                   : samples;
  for (size_t b = 0; b < dec.block_start.size(); ++b)
    eig.residual_rms.push_back(
        eigen_residual_rms(eig, F, check, dec.block_start[b], dec.block_size[b]));
  return eig;
}

double quantile(std::vector<double> v, double q) {
  require(!v.empty(), "quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return v[lo] + t * (v[hi] - v[lo]);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ConvergenceTable convergence_study(const VecField& F, const Mat& E,
                                   const MonomialBasis& basis, const Box& box,
                                   const ConvergenceOptions& opt) {
  require(!opt.L_list.empty() && opt.trials >= 1, "convergence_study: empty sweep");
  RealSpectralDecomposition dec = real_spectral_decomposition(E);
  require(opt.block >= 0 && opt.block < static_cast<int>(dec.block_start.size()),
          "convergence_study: block index out of range");
  const int r0 = dec.block_start[opt.block], k = dec.block_size[opt.block];
  const Mat blk = dec.Lambda.block(r0, r0, k, k);
  const Mat W = dec.Vt.middleRows(r0, k);
  const int M = basis.size();
  const int d = basis.dim_in();

  const Mat grid = uniform_grid(box, opt.eval_per_axis);
  const Eigen::Index P = grid.rows();
  Mat Ggrid(P, M);
  for (Eigen::Index i = 0; i < P; ++i) Ggrid.row(i) = basis.eval(grid.row(i).transpose());
  const Mat lin = grid * W.transpose();  // P x k

  ConvergenceTable table;
  Mat ref(P, k);
  if (opt.analytic_reference) {
    require(k == 1 && opt.analytic_W.rows() == 1, "analytic reference needs a real block");
    const Vec wr = opt.analytic_W.row(0).transpose();
    const double s = W.row(0).dot(wr) / wr.squaredNorm();
    for (Eigen::Index i = 0; i < P; ++i)
      ref(i, 0) = s * opt.analytic_reference(grid.row(i).transpose())(0);
  } else {
    const Eigen::Index maxL = *std::max_element(opt.L_list.begin(), opt.L_list.end());
    int per_axis = 1;
    auto total = [&](int m) {
      double t = 1;
      for (int i = 0; i < d; ++i) t *= m;
      return t;
    };
    while (total(per_axis) < 100.0 * static_cast<double>(maxL)) ++per_axis;
    SampleSet quad = midpoint_grid(box, per_axis);
    quad.weights = Vec::Constant(quad.L, 1.0 / static_cast<double>(quad.L));
    table.reference_points = quad.L;
    GalerkinProblem pr = form_problem(assemble_moments(F, E, basis, quad), blk, W);
    solve_coefficients(pr);
    for (int c = 0; c < k; ++c) ref.col(c) = lin.col(c) + Ggrid * pr.Theta.segment(c * M, M);
  }
  const double ref_norm = ref.norm();

  std::vector<double> Ls, means, medians;
  for (Eigen::Index L : opt.L_list) {
    std::vector<double> errs;
    for (int t = 0; t < opt.trials; ++t) {
      // stream id: L in the high bits, trial in the low 20 bits
      const std::uint64_t seed =
          derive_seed(opt.seed, (static_cast<std::uint64_t>(L) << 20) | static_cast<std::uint64_t>(t));
      SampleSet s = sample_domain(box, L, seed);
      GalerkinProblem pr = form_problem(assemble_moments(F, E, basis, s), blk, W);
      solve_coefficients(pr);
      Mat psi(P, k);
      for (int c = 0; c < k; ++c) psi.col(c) = lin.col(c) + Ggrid * pr.Theta.segment(c * M, M);
      const double e = (psi - ref).norm() / ref_norm;
      errs.push_back(e);
      table.rows.push_back({L, t, e});
    }
    ConvergenceSummary sm;
    sm.L = L;
    double acc = 0;
    for (double e : errs) acc += e;
    sm.mean = acc / errs.size();
    sm.q25 = quantile(errs, 0.25);
    sm.median = quantile(errs, 0.5);
    sm.q75 = quantile(errs, 0.75);
    table.summary.push_back(sm);
    Ls.push_back(static_cast<double>(L));
    means.push_back(sm.mean);
    medians.push_back(sm.median);
  }
  if (Ls.size() >= 2) {
    table.slope_mean = loglog_slope(Ls, means);
    table.slope_median = loglog_slope(Ls, medians);
  }
  return table;
}

}  // namespace khj
