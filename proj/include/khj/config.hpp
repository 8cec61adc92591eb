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

#ifndef KHJ_CONFIG_HPP
#define KHJ_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "khj/procedure1.hpp"
#include "khj/procedure2.hpp"
#include "khj/simulate.hpp"

namespace khj {

inline constexpr int kSchemaVersion = 1;

struct SystemSpec {
  std::string builtin;  // example1 | pendulum | cubic1d | "" for polynomial
  double gravity = 9.81;
  std::optional<PolynomialSpec> poly;
};

struct LinearGainSpec {
  std::string name;
  Mat K;
};

struct SimulateSpec {
  std::vector<Vec> initial_conditions;  // explicit list, or
  Vec cloud_center;                     // a seeded cloud when non-empty
  double cloud_spread = 0.1;
  int cloud_count = 10;
  std::uint64_t cloud_seed = 0;
  std::vector<std::string> controllers{"procedure", "lqr"};
  std::vector<LinearGainSpec> linear_gains;
  bool write_trajectories = true;
};

struct ConvergeSpec {
  std::vector<Eigen::Index> L_list{100, 1000, 10000};
  int trials = 20;
  int block = 0;
  int eval_per_axis = 41;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  SystemSpec system;
  int procedure = 1;
  Box domain;
  std::string eigenfunctions = "galerkin";  // galerkin | analytic
  int degree = 5;
  int d1 = 7;
  int d2 = 6;
  int d3 = 2;
  Eigen::Index samples = 10000;
  std::uint64_t seed = 0;
  double p_scale = 2.0;
  Eigen::Index fit_samples = 2000;
  bool fit_value = true;  // Jn fit; a complete quadratic Xi3 in n >= 2 is unidentifiable
  bool psd = false;
  double dt = 1e-3;
  double T = 20.0;
  int grid_per_axis = 21;
  SimulateSpec simulate;
  ConvergeSpec converge;
};

/// Parses and validates; unknown keys and wrong types raise ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Every field, defaults materialized.
nlohmann::json resolved_config(const RunConfig& cfg);

ControlAffineSystem build_system(const SystemSpec& spec);

nlohmann::json to_json(const Mat& m);
nlohmann::json to_json(const Vec& v);
Mat mat_from_json(const nlohmann::json& j, const std::string& what);
Vec vec_from_json(const nlohmann::json& j, const std::string& what);

nlohmann::json basis_descriptor(const MonomialBasis& b);
MonomialBasis basis_from_descriptor(const nlohmann::json& j);

/// Eigenfunctions for Procedure 1 / eigfun as the config asks.
EigenfunctionSet build_eigenfunctions(const RunConfig& cfg, const ControlAffineSystem& sys);

nlohmann::json solution_to_json(const HJSolution1& sol);
nlohmann::json solution_to_json(const HJSolution2& sol, const std::optional<JnFit>& fit);

/// Rebuilds a saved solution against the system given by the config.
HJSolution1 solution1_from_json(const nlohmann::json& j, const ControlAffineSystem& sys);
HJSolution2 solution2_from_json(const nlohmann::json& j, const ControlAffineSystem& sys);

}  // namespace khj

#endif  // KHJ_CONFIG_HPP
