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

#ifndef TSIBO_TYPES_HPP
#define TSIBO_TYPES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tsibo {

inline constexpr int kParamDim = 5;
inline constexpr int kStateDim = 4;

using ParamVector = Eigen::Matrix<double, kParamDim, 1>;
using StateVector = Eigen::Matrix<double, kStateDim, 1>;

// Fraction of the episode observed, s = l / L for checkpoint l of L.
struct Fidelity {
  double s = 1.0;

  [[nodiscard]] bool is_target() const { return s == 1.0; }
  [[nodiscard]] static Fidelity target() { return Fidelity{1.0}; }
};

[[nodiscard]] inline bool operator==(Fidelity a, Fidelity b) { return a.s == b.s; }

// Evenly spaced checkpoint fidelities {1/L, 2/L, ..., 1}.
[[nodiscard]] inline std::vector<Fidelity> fidelity_grid(int num_checkpoints) {
  if (num_checkpoints < 1) throw std::invalid_argument("fidelity_grid: need at least one checkpoint");
  std::vector<Fidelity> grid;
  grid.reserve(static_cast<std::size_t>(num_checkpoints));
  for (int l = 1; l <= num_checkpoints; ++l)
    grid.push_back(Fidelity{static_cast<double>(l) / static_cast<double>(num_checkpoints)});
  return grid;
}

// One (theta, fidelity, partial objective) triple produced by an episode checkpoint.
struct Observation {
  ParamVector theta;
  Fidelity fidelity;
  double g = 0.0;
};

// Box bounds for the controller parameters, identical per dimension.
struct ParamBounds {
  double theta_min = 1e-2;
  double theta_max = 1e2;

  void validate() const {
    if (!(theta_min > 0.0) || !(theta_max > theta_min))
      throw std::invalid_argument("ParamBounds: need 0 < theta_min < theta_max");
  }
};

[[nodiscard]] inline bool theta_in_bounds(const ParamVector& theta, const ParamBounds& b) {
  for (int i = 0; i < kParamDim; ++i) {
    if (!std::isfinite(theta[i]) || theta[i] < b.theta_min || theta[i] > b.theta_max) return false;
  }
  return true;
}

inline void validate_theta(const ParamVector& theta, const ParamBounds& b) {
  if (!theta_in_bounds(theta, b))
    throw std::invalid_argument("theta has a non-finite or out-of-bounds component");
}

// Maps parameters to log space scaled to the unit cube, and centers/scales
// objective values. Frozen per surrogate model so appending an observation is
// equivalent to refitting with the same mapping.
struct Standardizer {
  ParamBounds bounds;
  double g_shift = 0.0;
  double g_scale = 1.0;

  [[nodiscard]] Eigen::Matrix<double, kParamDim, 1> to_unit(const ParamVector& theta) const {
    const double lo = std::log(bounds.theta_min);
    const double hi = std::log(bounds.theta_max);
    Eigen::Matrix<double, kParamDim, 1> z;
    for (int i = 0; i < kParamDim; ++i) z[i] = (std::log(theta[i]) - lo) / (hi - lo);
    return z;
  }

  [[nodiscard]] ParamVector from_unit(const Eigen::Matrix<double, kParamDim, 1>& z) const {
    const double lo = std::log(bounds.theta_min);
    const double hi = std::log(bounds.theta_max);
    ParamVector theta;
    // Clamped so the cube edges land exactly on the box despite exp/log
    // rounding; one ulp of overshoot would fail bounds validation.
    for (int i = 0; i < kParamDim; ++i)
      theta[i] = std::clamp(std::exp(lo + z[i] * (hi - lo)), bounds.theta_min, bounds.theta_max);
    return theta;
  }

  [[nodiscard]] double standardize_g(double g) const { return (g - g_shift) / g_scale; }
  [[nodiscard]] double unstandardize_mean(double m) const { return g_shift + g_scale * m; }
  [[nodiscard]] double unstandardize_variance(double v) const { return g_scale * g_scale * v; }

  [[nodiscard]] static Standardizer from_observations(const std::vector<Observation>& data,
                                                      const ParamBounds& bounds) {
    Standardizer st;
    st.bounds = bounds;
    if (data.empty()) return st;
    double mean = 0.0;
    for (const auto& obs : data) mean += obs.g;
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (const auto& obs : data) var += (obs.g - mean) * (obs.g - mean);
    var /= static_cast<double>(data.size());
    st.g_shift = mean;
    st.g_scale = std::max(std::sqrt(var), 1e-8);
    return st;
  }
};

// Best full-fidelity objective seen so far. Only s = 1 observations qualify.
struct Incumbent {
  bool valid = false;
  double g_star = -std::numeric_limits<double>::infinity();
  ParamVector theta_star = ParamVector::Zero();
};

[[nodiscard]] inline Incumbent update_incumbent(Incumbent inc, const Observation& obs) {
  if (!obs.fidelity.is_target()) return inc;
  if (!inc.valid || obs.g > inc.g_star) {
    inc.valid = true;
    inc.g_star = obs.g;
    inc.theta_star = obs.theta;
  }
  return inc;
}

// Episodes stopped early yield no target-fidelity observation: unchanged.
[[nodiscard]] inline Incumbent update_incumbent(Incumbent inc, const std::optional<Observation>& obs) {
  if (!obs.has_value()) return inc;
  return update_incumbent(inc, *obs);
}

struct IllConditionedGram : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tsibo

#endif  // TSIBO_TYPES_HPP
