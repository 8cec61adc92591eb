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

#include "khj/simulate.hpp"

#include <cmath>
#include <exception>

#include "khj/sampling.hpp"

namespace khj {

Vec rk4_step(const VecField& field, const Vec& x, double dt) {
  const Vec k1 = field(x);
  const Vec k2 = field(x + 0.5 * dt * k1);
  const Vec k3 = field(x + 0.5 * dt * k2);
  const Vec k4 = field(x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

long step_count(double dt, double T) {
  require(dt > 0.0 && T >= dt, "integration needs dt > 0 and T >= dt");
  return std::lround(T / dt);
}

void truncate(Trajectory& tr, long rows) {
  tr.states.conservativeResize(rows, Eigen::NoChange);
  if (tr.inputs.size()) tr.inputs.conservativeResize(rows, Eigen::NoChange);
  tr.times.resize(static_cast<size_t>(rows));
  if (!tr.cumulative_cost.empty()) tr.cumulative_cost.resize(static_cast<size_t>(rows));
}

}  // namespace

Trajectory integrate_rk4(const VecField& field, const Vec& x0, double dt, double T) {
  const long K = step_count(dt, T);
  Trajectory tr;
  tr.states.resize(K + 1, x0.size());
  tr.states.row(0) = x0.transpose();
  tr.times.push_back(0.0);
  Vec x = x0;
  for (long k = 0; k < K; ++k) {
    x = rk4_step(field, x, dt);
    const double t = (k + 1) * dt;
    if (!x.allFinite()) {
      tr.diverged = true;
      tr.failure_time = t;
      tr.diagnostic = "non-finite state";
      truncate(tr, k + 1);
      return tr;
    }
    tr.states.row(k + 1) = x.transpose();
    tr.times.push_back(t);
  }
  tr.converged = x.norm() <= kConvergedTol;
  return tr;
}

Trajectory closed_loop(const ControlAffineSystem& sys, const Controller& controller,
                       const Vec& x0, double dt, double T) {
  const long K = step_count(dt, T);
  const int n = sys.n, p = sys.p;
  require(x0.size() == n, "closed_loop: x0 has wrong dimension");
  Trajectory tr;
  tr.states.resize(K + 1, n);
  tr.inputs.resize(K + 1, p);
  tr.times.reserve(K + 1);
  tr.cumulative_cost.reserve(K + 1);
  const VecField field = [&](const Vec& x) { return sys.closed_loop(x, controller(x)); };
  auto stage_cost = [&](const Vec& x, const Vec& u) { return sys.q(x) + 0.5 * u.dot(sys.D * u); };

  Vec x = x0;
  long k = 0;
  try {
    Vec u = controller(x);
    double c = stage_cost(x, u);
    tr.states.row(0) = x.transpose();
    tr.inputs.row(0) = u.transpose();
    tr.times.push_back(0.0);
    tr.cumulative_cost.push_back(0.0);
    for (k = 0; k < K; ++k) {
      x = rk4_step(field, x, dt);
      const double t = (k + 1) * dt;
      if (!x.allFinite() || x.norm() > kBlowUp) {
        tr.diverged = true;
        tr.failure_time = t;
        tr.diagnostic = x.allFinite() ? "state norm exceeded blow-up bound" : "non-finite state";
        break;
      }
      const Vec un = controller(x);
      const double cn = stage_cost(x, un);
      tr.states.row(k + 1) = x.transpose();
      tr.inputs.row(k + 1) = un.transpose();
      tr.times.push_back(t);
      tr.cumulative_cost.push_back(tr.cumulative_cost.back() + 0.5 * dt * (c + cn));
      c = cn;
    }
  } catch (const std::exception& e) {
    tr.diverged = true;
    tr.failure_time = (k + 1) * dt;
    tr.diagnostic = std::string("controller failed: ") + e.what();
  }
  truncate(tr, static_cast<long>(tr.times.size()));
  tr.running_cost = tr.cumulative_cost.empty() ? 0.0 : tr.cumulative_cost.back();
  tr.converged = !tr.diverged && tr.states.bottomRows(1).norm() <= kConvergedTol;
  return tr;
}

LQRGain lqr_controller(const Linearization& lin) {
  RiccatiSolution ric = solve_riccati(lin.A, lin.R0, lin.Q0);
  LQRGain g;
  g.P = ric.P;
  g.K = lin.D.ldlt().solve(lin.B.transpose() * ric.P);
  return g;
}

Controller linear_feedback(const Mat& K) {
  return [K](const Vec& x) { return Vec(-K * x); };
}

ComparisonReport compare_controllers(const ControlAffineSystem& sys,
                                     const std::vector<NamedController>& controllers,
                                     const std::vector<Vec>& x0_list, double dt, double T) {
  const int nc = static_cast<int>(controllers.size());
  const int ni = static_cast<int>(x0_list.size());
  ComparisonReport rep;
  rep.rows.resize(static_cast<size_t>(nc) * ni);
  rep.trajectories.resize(rep.rows.size());
#pragma omp parallel for schedule(dynamic)
  for (int cell = 0; cell < nc * ni; ++cell) {
    const int c = cell / ni, i = cell % ni;
    ComparisonRow row;
    row.controller = controllers[c].name;
    row.ic = i;
    row.x0 = x0_list[i];
    Trajectory tr;
    try {
      tr = closed_loop(sys, controllers[c].u, x0_list[i], dt, T);
    } catch (const std::exception& e) {
      tr.diverged = true;
      tr.diagnostic = e.what();
    }
    row.converged = tr.converged;
    row.diverged = tr.diverged;
    row.cost = tr.running_cost;
    row.failure_time = tr.failure_time;
    row.diagnostic = tr.diagnostic;
    for (Eigen::Index r = 0; r < tr.states.rows(); ++r)
      row.max_norm = std::max(row.max_norm, tr.states.row(r).norm());
    row.final_norm = tr.states.rows() ? tr.states.bottomRows(1).norm() : 0.0;
    rep.rows[cell] = std::move(row);
    rep.trajectories[cell] = std::move(tr);
  }
  return rep;
}

std::vector<Vec> initial_condition_cloud(const Vec& center, double spread, int count,
                                         std::uint64_t seed) {
  require(count >= 1 && spread >= 0.0, "initial_condition_cloud: bad arguments");
  Vec half = (spread * center.cwiseAbs()).cwiseMax(1e-300);
  Box box{center - half, center + half};
  std::vector<Vec> out;
  if (spread == 0.0) {
    for (int i = 0; i < count; ++i) out.push_back(center);
    return out;
  }
  SampleSet s = sample_domain(box, count, seed);
  for (int i = 0; i < count; ++i) out.push_back(s.point(i));
  return out;
}

}  // namespace khj
