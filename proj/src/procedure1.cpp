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

#include "khj/procedure1.hpp"

#include <algorithm>
#include <cmath>

#include "khj/simulate.hpp"

namespace khj {

R1Q1 compute_R1_Q1(const Linearization& lin, const Mat& Vt) {
  require(Vt.rows() == lin.A.rows() && Vt.cols() == lin.A.rows(), "compute_R1_Q1: Vt shape");
  if (!(condition_number(Vt) < 1e12)) throw NumericalError("Vt is singular");
  const Mat Vinv = Vt.fullPivLu().inverse();
  R1Q1 out;
  out.R1 = Vt * lin.R0 * Vt.transpose();
  out.Q1 = Vinv.transpose() * lin.Q0 * Vinv;
  out.R1 = 0.5 * (out.R1 + out.R1.transpose());
  out.Q1 = 0.5 * (out.Q1 + out.Q1.transpose());
  return out;
}

HJSolution1::HJSolution1(ControlAffineSystem sys, EigenfunctionSet eig, Mat L, Mat R1, Mat Q1,
                         double riccati_residual)
    : sys_(std::move(sys)),
      eig_(std::move(eig)),
      L_(std::move(L)),
      R1_(std::move(R1)),
      Q1_(std::move(Q1)),
      riccati_residual_(riccati_residual) {}

double HJSolution1::value(const Vec& x) const {
  const Vec phi = eig_.phi(x);
  return 0.5 * phi.dot(L_ * phi);
}

Vec HJSolution1::grad_value(const Vec& x) const {
  return eig_.jac(x).transpose() * (L_ * eig_.phi(x));
}

Vec HJSolution1::control(const Vec& x) const {
  return -sys_.D.ldlt().solve(sys_.g(x).transpose() * grad_value(x));
}

HJSolution1 procedure1_solve(const ControlAffineSystem& sys, const EigenfunctionSet& eig) {
  require(eig.n() == sys.n, "procedure1_solve: eigenfunction and system dimensions differ");
  const Linearization lin = linearize(sys);
  R1Q1 rq = compute_R1_Q1(lin, eig.Vt);
  RiccatiSolution ric = solve_riccati(eig.Lambda, rq.R1, rq.Q1);
  return HJSolution1(sys, eig, ric.P, rq.R1, rq.Q1, ric.residual);
}

IntegrabilityReport verify_nominal_integrability(const EigenfunctionSet& eig,
                                                 const ControlAffineSystem& sys,
                                                 const SampleSet& samples,
                                                 const std::vector<double>& t_grid,
                                                 double dt) {
  const int n = sys.n;
  require(samples.points.cols() == 2 * n, "verify_nominal_integrability: samples must be (x, p)");
  require(!t_grid.empty(), "verify_nominal_integrability: empty t_grid");
  const VecField field = nominal_hamiltonian_field(sys);
  std::vector<long> marks;
  for (double t : t_grid) marks.push_back(std::lround(t / dt));
  const long steps = *std::max_element(marks.begin(), marks.end());

  auto H0 = [&](const Vec& z) { return z.tail(n).dot(sys.f(z.head(n))); };
  auto XP = [&](const Vec& z, double t, Vec& X, Vec& P) {
    const Vec x = z.head(n);
    X = block_expm(eig.Lambda, -t) * eig.phi(x);
    P = block_expm(eig.Lambda.transpose(), t) *
        eig.jac(x).transpose().fullPivLu().solve(Vec(z.tail(n)));
  };

  IntegrabilityReport rep;
  for (Eigen::Index s = 0; s < samples.L; ++s) {
    Vec z = samples.point(s);
    const double h0 = H0(z);
    Vec X0, P0;
    XP(z, 0.0, X0, P0);
    double dH = 0, dX = 0, dP = 0;
    bool left = false;
    size_t next = 0;
    std::vector<long> order = marks;
    std::sort(order.begin(), order.end());
    for (long k = 0; k <= steps && !left; ++k) {
      while (next < order.size() && order[next] == k) {
        Vec X, P;
        XP(z, k * dt, X, P);
        dH = std::max(dH, std::abs(H0(z) - h0));
        dX = std::max(dX, (X - X0).norm() / (1.0 + X0.norm()));
        dP = std::max(dP, (P - P0).norm() / (1.0 + P0.norm()));
        ++next;
      }
      if (k == steps) break;
      z = rk4_step(field, z, dt);
      if (!z.allFinite() || !eig.box.contains(z.head(n))) left = true;
    }
    if (left) {
      ++rep.excluded;
      continue;
    }
    ++rep.used;
    rep.max_H0_drift = std::max(rep.max_H0_drift, dH);
    rep.max_X_drift = std::max(rep.max_X_drift, dX);
    rep.max_P_drift = std::max(rep.max_P_drift, dP);
  }
  return rep;
}

double verify_generating_function(const EigenfunctionSet& eig, const ControlAffineSystem& sys,
                                  const Vec& P_vec, const SampleSet& samples,
                                  const std::vector<double>& t_grid) {
  const int n = sys.n;
  require(P_vec.size() == n && samples.points.cols() == n,
          "verify_generating_function: dimension mismatch");
  double worst = 0.0;
  for (Eigen::Index s = 0; s < samples.L; ++s) {
    const Vec x = samples.point(s);
    const Vec phi = eig.phi(x);
    const Mat J = eig.jac(x);
    const Vec f = sys.f(x);
    for (double t : t_grid) {
      const Mat Em = block_expm(eig.Lambda, -t);
      const Vec dWdx = J.transpose() * (Em.transpose() * P_vec);
      const double dWdt = -P_vec.dot(eig.Lambda * (Em * phi));
      worst = std::max(worst, std::abs(dWdx.dot(f) + dWdt));
    }
  }
  return worst;
}

EigenfunctionSet example1_analytic_eigenfunctions(const Box& box) {
  Mat Vt(2, 2);
  Vt << 1.0, -2.0, 1.0, 1.0;
  Mat Lambda = Mat::Zero(2, 2);
  Lambda(0, 0) = -1.0;
  Lambda(1, 1) = 2.0;
  auto phi = [](const Vec& x) {
    Vec v(2);
    v << x(0) - 2.0 * x(1), x(0) + std::sin(x(1));
    return v;
  };
  auto jac = [](const Vec& x) {
    Mat J(2, 2);
    J << 1.0, -2.0, 1.0, std::cos(x(1));
    return J;
  };
  EigenfunctionSet e = EigenfunctionSet::analytic(Vt, Lambda, phi, jac, box);
  e.block_start = {0, 1};
  e.block_size = {1, 1};
  return e;
}

EigenfunctionSet cubic1d_analytic_eigenfunction(const Box& box) {
  require(box.lo(0) > -1.0 && box.hi(0) < 1.0, "cubic eigenfunction needs |x| < 1");
  auto phi = [](const Vec& x) { return Vec::Constant(1, x(0) / std::sqrt(1.0 - x(0) * x(0))); };
  auto jac = [](const Vec& x) {
    return Mat::Constant(1, 1, std::pow(1.0 - x(0) * x(0), -1.5));
  };
  EigenfunctionSet e =
      EigenfunctionSet::analytic(Mat::Ones(1, 1), Mat::Constant(1, 1, -1.0), phi, jac, box);
  e.block_start = {0};
  e.block_size = {1};
  return e;
}

EigenfunctionSet linear_eigenfunctions(const Mat& A, const Box& box) {
  RealSpectralDecomposition dec = real_spectral_decomposition(A);
  Mat Vt = dec.Vt;
  EigenfunctionSet e = EigenfunctionSet::analytic(
      Vt, dec.Lambda, [Vt](const Vec& x) { return Vec(Vt * x); },
      [Vt](const Vec&) { return Vt; }, box);
  e.block_start = dec.block_start;
  e.block_size = dec.block_size;
  return e;
}

}  // namespace khj
