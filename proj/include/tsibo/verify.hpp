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

#ifndef TSIBO_VERIFY_HPP
#define TSIBO_VERIFY_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tsibo/cartpole.hpp"
#include "tsibo/gp.hpp"

namespace tsibo {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // measured value vs tolerance
};

struct OracleCheck {
  std::string name;
  std::string description;
  std::function<CheckResult()> run;
};

// Independent reference computations. These deliberately avoid the production
// code paths they validate (dense LU instead of cached Cholesky, Monte Carlo
// instead of closed forms, a separate Riccati recursion, a separate energy
// expression) so that agreement is evidence, not tautology.
namespace oracle {

// Dense linear-solve prediction without Cholesky reuse. alpha_perturbation
// shifts every component of the production model's weight vector, which any
// nonzero value must turn into a detected mismatch.
[[nodiscard]] double max_predict_mismatch(const GpModel& model, int n_queries, std::uint64_t seed,
                                          double alpha_perturbation = 0.0);

struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};
[[nodiscard]] McEstimate mc_expected_improvement(double mean, double sd, double best,
                                                 int n_samples, std::uint64_t seed);

// Infinite-horizon discrete LQR feedback gain for the plant linearized at the
// upright target, by fixed-point Riccati iteration with its own
// finite-difference linearization.
[[nodiscard]] Eigen::RowVector4d lqr_gain(const ParamVector& theta, const CartPoleParams& plant);

[[nodiscard]] double mechanical_energy(const StateVector& x, const CartPoleParams& p);

}  // namespace oracle

// All registered oracle checks, in a stable order.
[[nodiscard]] const std::vector<OracleCheck>& oracle_registry();

// Runs the selected checks (all when names is empty). Unknown names throw.
[[nodiscard]] std::vector<CheckResult> run_oracle_checks(const std::vector<std::string>& names);

}  // namespace tsibo

#endif  // TSIBO_VERIFY_HPP
