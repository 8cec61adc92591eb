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

#include "khj/types.hpp"

#include <cstdio>

namespace khj {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

std::string format_vec(const Vec& v) {
  std::string s = "(";
  char buf[32];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6g", v(i));
    if (i) s += ", ";
    s += buf;
  }
  return s + ")";
}

}  // namespace khj
