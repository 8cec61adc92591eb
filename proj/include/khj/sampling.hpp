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

#ifndef KHJ_SAMPLING_HPP
#define KHJ_SAMPLING_HPP

#include <cstdint>

#include "khj/types.hpp"

namespace khj {

struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x) const;
  Vec center() const { return 0.5 * (lo + hi); }
  static Box symmetric(const Vec& half_width);
};

/// Points are rows. weights empty means the empirical measure 1/L.
struct SampleSet {
  Mat points;
  Box box;
  std::uint64_t seed = 0;
  Eigen::Index L = 0;
  Vec weights;

  Vec point(Eigen::Index k) const { return points.row(k).transpose(); }
  double weight(Eigen::Index k) const {
    return weights.size() ? weights(k) : 1.0 / static_cast<double>(L);
  }
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for sub-stream `stream` of `seed` (held-out sets, trials).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// L i.i.d. uniform points on box. Generator: std::mt19937_64 seeded with
/// `seed`; each coordinate uses one draw u = (draw >> 11) * 2^-53, row-major.
SampleSet sample_domain(const Box& box, Eigen::Index L, std::uint64_t seed);

/// Tensor midpoint grid with equal weights (quadrature stand-in for the
/// uniform measure).
SampleSet midpoint_grid(const Box& box, int per_axis);

/// Tensor grid including the box corners.
Mat uniform_grid(const Box& box, int per_axis);

}  // namespace khj

#endif  // KHJ_SAMPLING_HPP
