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

#include "khj/sampling.hpp"

#include <random>

namespace khj {

bool Box::contains(const Vec& x) const {
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (!(x(i) >= lo(i) && x(i) <= hi(i))) return false;
  return true;
}

Box Box::symmetric(const Vec& half_width) { return Box{-half_width, half_width}; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

SampleSet sample_domain(const Box& box, Eigen::Index L, std::uint64_t seed) {
  require(L >= 1, "sample_domain: L must be >= 1");
  require(box.lo.size() == box.hi.size() && box.lo.size() > 0, "sample_domain: bad box");
  for (Eigen::Index i = 0; i < box.lo.size(); ++i)
    require(box.hi(i) > box.lo(i), "sample_domain: degenerate box");
  SampleSet s;
  s.box = box;
  s.seed = seed;
  s.L = L;
  const Eigen::Index d = box.lo.size();
  s.points.resize(L, d);
  std::mt19937_64 rng(seed);
  const Vec width = box.hi - box.lo;
  for (Eigen::Index k = 0; k < L; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      s.points(k, i) = box.lo(i) + width(i) * u;
    }
  }
  return s;
}

SampleSet midpoint_grid(const Box& box, int per_axis) {
  require(per_axis >= 1, "midpoint_grid: per_axis must be >= 1");
  const int d = box.dim();
  Eigen::Index total = 1;
  for (int i = 0; i < d; ++i) total *= per_axis;
  SampleSet s;
  s.box = box;
  s.L = total;
  s.points.resize(total, d);
  s.weights = Vec::Constant(total, 1.0 / static_cast<double>(total));
  const Vec h = (box.hi - box.lo) / per_axis;
  for (Eigen::Index k = 0; k < total; ++k) {
    Eigen::Index r = k;
    for (int i = d - 1; i >= 0; --i) {
      const Eigen::Index j = r % per_axis;
      r /= per_axis;
      s.points(k, i) = box.lo(i) + (static_cast<double>(j) + 0.5) * h(i);
    }
  }
  return s;
}

Mat uniform_grid(const Box& box, int per_axis) {
  require(per_axis >= 2, "uniform_grid: per_axis must be >= 2");
  const int d = box.dim();
  Eigen::Index total = 1;
  for (int i = 0; i < d; ++i) total *= per_axis;
  Mat pts(total, d);
  for (Eigen::Index k = 0; k < total; ++k) {
    Eigen::Index r = k;
    for (int i = d - 1; i >= 0; --i) {
      const Eigen::Index j = r % per_axis;
      r /= per_axis;
      pts(k, i) = box.lo(i) + (box.hi(i) - box.lo(i)) * static_cast<double>(j) / (per_axis - 1);
    }
  }
  return pts;
}

}  // namespace khj
