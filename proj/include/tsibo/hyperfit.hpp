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

#ifndef TSIBO_HYPERFIT_HPP
#define TSIBO_HYPERFIT_HPP

#include <cstdint>
#include <vector>

#include "tsibo/gp.hpp"

namespace tsibo {

struct HyperFitOptions {
  int restarts = 8;                // multistart count; 1 = local polish from init only
  int max_evals_per_restart = 120;
  std::uint64_t seed = 0;
  int max_points = 0;              // evidence subsampling cap, 0 = all observations
};

struct HyperFitResult {
  GpHyperparams params;
  double lml = 0.0;
  bool improved = false;  // false when the initial hyperparameters were kept
  int evals = 0;
};

// Maximizes the log marginal likelihood over kernel hyperparameters with a
// coordinate pattern search in log space, restarted from Latin-hypercube
// points. Never returns hyperparameters with lower evidence than init
// (evaluated on the same data subset): on failure init is returned with
// improved = false.
[[nodiscard]] HyperFitResult fit_hyperparameters(const std::vector<Observation>& data,
                                                 const GpHyperparams& init, const Standardizer& st,
                                                 const HyperFitOptions& opt);

}  // namespace tsibo

#endif  // TSIBO_HYPERFIT_HPP
