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

#ifndef TSIBO_CAMPAIGN_HPP
#define TSIBO_CAMPAIGN_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tsibo/acquisition.hpp"
#include "tsibo/episode.hpp"
#include "tsibo/gp.hpp"
#include "tsibo/hyperfit.hpp"
#include "tsibo/stopping.hpp"
#include "tsibo/types.hpp"

namespace tsibo {

enum class Method { kBaselineBo, kTsiNoStop, kTsiEi, kTsiEiC, kTsiUcbC };

[[nodiscard]] std::string to_string(Method m);
[[nodiscard]] Method method_from_string(const std::string& name);
[[nodiscard]] const std::vector<Method>& all_methods();

struct CampaignConfig {
  Method method = Method::kTsiEiC;
  long budget = 4000;               // total closed-loop steps
  int initial_design_size = 3;      // full-length warm-up episodes
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  ParamBounds bounds;
  EpisodeConfig episode;
  MpcConfig mpc;
  AcquisitionConfig acquisition;    // fantasy fidelities default to the checkpoint grid
  StoppingConfig stopping;          // rule flags are overridden per method
  double tau_ei_rel = 0.01;         // EI stop threshold as a fraction of |incumbent|
  GpHyperparams hyper_init;
  HyperFitOptions hyperfit;
  int refit_full_every = 10;        // full multistart refit cadence, in episodes
  int local_refit_evals = 40;       // budget of the cheap between-refit polish

  void validate() const;
};

struct EpisodeRecord {
  int iteration = 0;           // 0-based across the campaign, includes initial design
  bool is_initial_design = false;
  ParamVector theta = ParamVector::Zero();
  int steps_used = 0;
  EpisodeStatus status = EpisodeStatus::kCompletedFull;
  StopDecision stop;
  std::vector<Observation> observations;  // as recorded for the surrogate
  long cumulative_steps = 0;
  bool incumbent_valid = false;
  double incumbent_g = 0.0;
  ParamVector incumbent_theta = ParamVector::Zero();
  GpHyperparams hyperparams;   // in effect when this episode was selected
  double acquisition_value = 0.0;
  bool acquisition_fallback = false;
  int solver_failures = 0;
};

struct RunLog {
  Method method = Method::kTsiEiC;
  std::uint64_t seed = 0;
  long budget = 0;
  std::vector<EpisodeRecord> episodes;
  double wall_seconds = 0.0;  // diagnostic only; never serialized
};

// Executes one tuning campaign: initial design, then select / run / condition
// / refit until the step budget is exhausted. Deterministic per seed.
[[nodiscard]] RunLog run_campaign(const CampaignConfig& cfg, std::uint64_t seed);

// Single-fidelity expected-improvement baseline; requires method BASELINE_BO.
[[nodiscard]] RunLog run_baseline(const CampaignConfig& cfg, std::uint64_t seed);

// Incumbent value vs cumulative steps, one point per episode.
[[nodiscard]] std::vector<std::pair<long, double>> best_so_far_curve(const RunLog& log);

struct Envelope {
  std::vector<long> steps;
  std::vector<double> low;
  std::vector<double> median;
  std::vector<double> high;
};

// Aligns curves on a uniform step grid by last-observation-carried-forward
// and reports pointwise min / median / max. Grid points before a run's first
// target-fidelity value carry that run's first value backward so every run
// contributes everywhere.
[[nodiscard]] Envelope aggregate_envelope(const std::vector<std::vector<std::pair<long, double>>>& curves,
                                          long max_step, long grid_stride);

}  // namespace tsibo

#endif  // TSIBO_CAMPAIGN_HPP
