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

#ifndef KHJ_SIMULATE_HPP
#define KHJ_SIMULATE_HPP

#include <string>
#include <vector>

#include "khj/spectral_linalg.hpp"
#include "khj/system_model.hpp"

namespace khj {

using Controller = std::function<Vec(const Vec&)>;

/// Uniform-step rollout. inputs has one row per stored state (the last row is
/// the controller at the final state, used by the trapezoid rule); it is empty
/// for autonomous fields.
struct Trajectory {
  std::vector<double> times;
  Mat states;
  Mat inputs;
  std::vector<double> cumulative_cost;
  double running_cost = 0.0;
  bool converged = false;
  bool diverged = false;  // truncated: non-finite state, blow-up or controller error
  double failure_time = 0.0;
  std::string diagnostic;
};

/// |x| above this counts as divergence.
inline constexpr double kBlowUp = 1e6;
inline constexpr double kConvergedTol = 1e-3;

Vec rk4_step(const VecField& field, const Vec& x, double dt);

Trajectory integrate_rk4(const VecField& field, const Vec& x0, double dt, double T);

/// xdot = f(x) + g(x) u(x), u evaluated at every RK4 stage; running cost
/// q + 1/2 u' D u by the trapezoid rule on the step points.
Trajectory closed_loop(const ControlAffineSystem& sys, const Controller& controller,
                       const Vec& x0, double dt, double T);

struct LQRGain {
  Mat K;
  Mat P;
};

/// P from the Hamiltonian invariant subspace, K = D^-1 B' P, u = -K x.
LQRGain lqr_controller(const Linearization& lin);

Controller linear_feedback(const Mat& K);

struct NamedController {
  std::string name;
  Controller u;
};

struct ComparisonRow {
  std::string controller;
  int ic = 0;
  Vec x0;
  bool converged = false;
  bool diverged = false;
  double cost = 0.0;
  double max_norm = 0.0;
  double final_norm = 0.0;
  double failure_time = 0.0;
  std::string diagnostic;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;         // controller-major, input order
  std::vector<Trajectory> trajectories;    // same order as rows
};

/// Every (controller, x0) cell is rolled out independently (in parallel);
/// per-cell failures are recorded, never thrown.
ComparisonReport compare_controllers(const ControlAffineSystem& sys,
                                     const std::vector<NamedController>& controllers,
                                     const std::vector<Vec>& x0_list, double dt, double T);

/// count points i.i.d. uniform in center * (1 +- spread) per coordinate.
std::vector<Vec> initial_condition_cloud(const Vec& center, double spread, int count,
                                         std::uint64_t seed);

}  // namespace khj

#endif  // KHJ_SIMULATE_HPP
