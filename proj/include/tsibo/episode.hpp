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

#ifndef TSIBO_EPISODE_HPP
#define TSIBO_EPISODE_HPP

#include <functional>
#include <stdexcept>
#include <vector>

#include "tsibo/cartpole.hpp"
#include "tsibo/mpc.hpp"
#include "tsibo/stopping.hpp"
#include "tsibo/types.hpp"

namespace tsibo {

struct EpisodeConfig {
  int total_steps = 80;      // plant steps per full episode
  int num_checkpoints = 10;  // evenly spaced; must divide total_steps
  StateVector x0 = (StateVector() << 1.0, 0.3, 0.0, 0.0).finished();
  StateVector x_target = StateVector::Zero();
  Eigen::Vector4d state_weights = (Eigen::Vector4d() << 1.0, 1.0, 0.1, 0.1).finished();
  CartPoleParams plant;
  double blowup_limit = 1e3;

  void validate() const {
    if (total_steps < 1) throw std::invalid_argument("EpisodeConfig: total_steps must be >= 1");
    if (num_checkpoints < 1 || total_steps % num_checkpoints != 0)
      throw std::invalid_argument("EpisodeConfig: num_checkpoints must divide total_steps");
    for (int i = 0; i < kStateDim; ++i)
      if (!(state_weights[i] >= 0.0))
        throw std::invalid_argument("EpisodeConfig: state weights must be nonnegative");
    if (!(blowup_limit > 0.0))
      throw std::invalid_argument("EpisodeConfig: blowup_limit must be positive");
    plant.validate();
  }
};

// Tuning-objective stage cost. The input is part of the signature for
// generality but the measure penalizes state deviation only.
[[nodiscard]] inline double closed_loop_stage_cost(const StateVector& x, double u,
                                                   const StateVector& target,
                                                   const Eigen::Vector4d& weights) {
  (void)u;
  const StateVector e = x - target;
  return e.cwiseProduct(weights.cwiseProduct(e)).sum();
}

enum class EpisodeStatus { kCompletedFull, kStoppedEarly, kDiverged };

struct EpisodeResult {
  std::vector<StateVector> states;        // x_0 .. x_{steps_used}
  std::vector<double> inputs;             // u_0 .. u_{steps_used-1}
  std::vector<Observation> observations;  // one per reached checkpoint, ascending fidelity
  StopDecision stop;                      // decision that ended the episode, if any
  EpisodeStatus status = EpisodeStatus::kCompletedFull;
  int steps_used = 0;
  int solver_failures = 0;
};

// Called at each non-final checkpoint with the fresh partial observation and
// the current plant state; returning a non-continue verdict truncates the
// episode. The callback owns any surrogate conditioning it needs.
using CheckpointCallback = std::function<StopDecision(const Observation&, const StateVector&)>;

// Runs one closed-loop episode of the plant under the receding-horizon
// controller parameterized by theta. Records the negated cumulative tuning
// cost at every checkpoint; the final checkpoint is the full objective.
[[nodiscard]] EpisodeResult run_episode(const ParamVector& theta, const EpisodeConfig& cfg,
                                        const MpcConfig& mpc,
                                        const CheckpointCallback& on_checkpoint = nullptr);

}  // namespace tsibo

#endif  // TSIBO_EPISODE_HPP
