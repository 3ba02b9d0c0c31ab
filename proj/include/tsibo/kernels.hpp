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

#ifndef TSIBO_KERNELS_HPP
#define TSIBO_KERNELS_HPP

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "tsibo/types.hpp"

namespace tsibo {

// Kernel hyperparameters. Lengthscales apply to parameters already mapped to
// the unit cube; signal/noise variances are on the standardized objective.
struct GpHyperparams {
  Eigen::Matrix<double, kParamDim, 1> lengthscales =
      Eigen::Matrix<double, kParamDim, 1>::Constant(0.5);
  double signal_variance = 1.0;
  double noise_variance = 1e-4;
  double fidelity_decay = 1.0;   // exponent of the fidelity decay kernel
  double fidelity_offset = 1.0;  // additive offset in the decay denominator
  bool fidelity_active = true;   // false: single-fidelity model, fidelity factor == 1

  void validate() const {
    for (int i = 0; i < kParamDim; ++i)
      if (!(lengthscales[i] > 0.0)) throw std::invalid_argument("lengthscales must be positive");
    if (!(signal_variance > 0.0)) throw std::invalid_argument("signal_variance must be positive");
    if (!(noise_variance >= 0.0)) throw std::invalid_argument("noise_variance must be nonnegative");
    if (!(fidelity_decay > 0.0)) throw std::invalid_argument("fidelity_decay must be positive");
    if (!(fidelity_offset > 0.0)) throw std::invalid_argument("fidelity_offset must be positive");
  }
};

// Matern 5/2 with automatic relevance determination.
// k(a,b) = sf2 * (1 + sqrt(5) r + 5 r^2 / 3) exp(-sqrt(5) r),
// r^2 = sum_i ((a_i - b_i) / l_i)^2.
[[nodiscard]] inline double kernel_matern52(const Eigen::Matrix<double, kParamDim, 1>& a,
                                            const Eigen::Matrix<double, kParamDim, 1>& b,
                                            const GpHyperparams& h) {
  static constexpr double kSqrt5 = 2.23606797749978969;
  double r2 = 0.0;
  for (int i = 0; i < kParamDim; ++i) {
    const double d = (a[i] - b[i]) / h.lengthscales[i];
    r2 += d * d;
  }
  const double r = std::sqrt(r2);
  return h.signal_variance * (1.0 + kSqrt5 * r + 5.0 * r2 / 3.0) * std::exp(-kSqrt5 * r);
}

// Fidelity correlation with unit diagonal:
// rho(s,s') = ((2s+b)(2s'+b))^{a/2} / (s+s'+b)^a.
// This is the freeze-thaw decay kernel b^a/(s+s'+b)^a rescaled to rho(s,s)=1,
// so it stays positive semidefinite and never exceeds its diagonal.
[[nodiscard]] inline double kernel_fidelity(Fidelity s1, Fidelity s2, const GpHyperparams& h) {
  if (!h.fidelity_active) return 1.0;
  const double a = h.fidelity_decay;
  const double b = h.fidelity_offset;
  const double num = (2.0 * s1.s + b) * (2.0 * s2.s + b);
  const double den = s1.s + s2.s + b;
  return std::pow(num, 0.5 * a) / std::pow(den, a);
}

// Product kernel over (theta, fidelity) pairs; inputs in unit-cube space.
[[nodiscard]] inline double kernel_joint(const Eigen::Matrix<double, kParamDim, 1>& a, Fidelity sa,
                                         const Eigen::Matrix<double, kParamDim, 1>& b, Fidelity sb,
                                         const GpHyperparams& h) {
  return kernel_matern52(a, b, h) * kernel_fidelity(sa, sb, h);
}

}  // namespace tsibo

#endif  // TSIBO_KERNELS_HPP
