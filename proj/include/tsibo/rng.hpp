/*
 Copyright 2026 The tsibo authors

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

#ifndef TSIBO_RNG_HPP
#define TSIBO_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tsibo/types.hpp"

namespace tsibo {

// Splitmix64 finalizer; used to derive independent seeds for sub-streams so
// that per-iteration randomness does not depend on call ordering elsewhere.
[[nodiscard]] inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Latin hypercube sample of n points in [0,1]^dim: each dimension is an
// independent random permutation of jittered strata.
[[nodiscard]] inline Eigen::MatrixXd latin_hypercube(int n, int dim, std::mt19937_64& rng) {
  Eigen::MatrixXd pts(n, dim);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int d = 0; d < dim; ++d) {
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<int> pick(0, i);
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    }
    for (int i = 0; i < n; ++i)
      pts(i, d) = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + unif(rng)) /
                  static_cast<double>(n);
  }
  return pts;
}

// Latin hypercube draw of controller parameters in log space within bounds.
[[nodiscard]] inline std::vector<ParamVector> latin_hypercube_params(int n, const ParamBounds& bounds,
                                                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd unit = latin_hypercube(n, kParamDim, rng);
  Standardizer st;
  st.bounds = bounds;
  std::vector<ParamVector> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Eigen::Matrix<double, kParamDim, 1> z = unit.row(i).transpose();
    out.push_back(st.from_unit(z));
  }
  return out;
}

}  // namespace tsibo

#endif  // TSIBO_RNG_HPP
