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

#include "tsibo/episode.hpp"

namespace tsibo {

EpisodeResult run_episode(const ParamVector& theta, const EpisodeConfig& cfg, const MpcConfig& mpc,
                          const CheckpointCallback& on_checkpoint) {
  cfg.validate();
  EpisodeResult result;
  MpcController controller(theta, mpc);

  const int steps_per_checkpoint = cfg.total_steps / cfg.num_checkpoints;
  StateVector x = cfg.x0;
  result.states.push_back(x);
  double cumulative = closed_loop_stage_cost(x, 0.0, cfg.x_target, cfg.state_weights);

  for (int k = 0; k < cfg.total_steps; ++k) {
    const double u = controller.step(x);
    x = cartpole_step(x, u, cfg.plant);
    result.inputs.push_back(u);
    result.states.push_back(x);
    result.steps_used = k + 1;
    cumulative += closed_loop_stage_cost(x, u, cfg.x_target, cfg.state_weights);

    if (x.cwiseAbs().maxCoeff() > cfg.blowup_limit || !x.allFinite()) {
      result.status = EpisodeStatus::kDiverged;
      break;
    }

    if ((k + 1) % steps_per_checkpoint == 0) {
      const int checkpoint = (k + 1) / steps_per_checkpoint;
      Observation obs;
      obs.theta = theta;
      obs.fidelity = Fidelity{static_cast<double>(checkpoint) /
                              static_cast<double>(cfg.num_checkpoints)};
      obs.g = -cumulative;
      result.observations.push_back(obs);

      // The final checkpoint cannot save any steps, so the stop rules are
      // only consulted strictly before it.
      if (checkpoint < cfg.num_checkpoints && on_checkpoint) {
        const StopDecision decision = on_checkpoint(obs, x);
        if (decision.verdict != StopVerdict::kContinue) {
          result.stop = decision;
          result.status = EpisodeStatus::kStoppedEarly;
          break;
        }
      }
    }
  }

  result.solver_failures = controller.solver_failures();
  return result;
}

}  // namespace tsibo
