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

#ifndef KHJ_TYPES_HPP
#define KHJ_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace khj {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

using VecField = std::function<Vec(const Vec&)>;
using MatField = std::function<Mat(const Vec&)>;
using ScalarField = std::function<double(const Vec&)>;

// Bad input: malformed config, dimension mismatch, violated precondition.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical step could not be carried out (singular matrix, bad spectrum).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

void require(bool cond, const std::string& msg);

std::string format_vec(const Vec& v);

}  // namespace khj

#endif  // KHJ_TYPES_HPP
