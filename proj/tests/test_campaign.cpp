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

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "tsibo/campaign.hpp"
#include "tsibo/report.hpp"

using namespace tsibo;

namespace {

// Reduced search effort so campaign-level behavior can be exercised quickly.
CampaignConfig small_config(Method m, long budget = 560) {
  CampaignConfig cfg;
  cfg.method = m;
  cfg.budget = budget;
  cfg.initial_design_size = 3;
  cfg.seeds = {1};
  cfg.acquisition.n_fantasies = 32;
  cfg.acquisition.n_inner_candidates = 48;
  cfg.acquisition.n_restarts = 4;
  cfg.acquisition.polish_starts = 2;
  cfg.hyperfit.restarts = 2;
  cfg.hyperfit.max_evals_per_restart = 40;
  cfg.local_refit_evals = 10;
  return cfg;
}

const RunLog& cached_no_stop() {
  static const RunLog log = run_campaign(small_config(Method::kTsiNoStop), 1);
  return log;
}

const RunLog& cached_baseline() {
  static const RunLog log = run_campaign(small_config(Method::kBaselineBo), 1);
  return log;
}

const RunLog& cached_ei_c() {
  static const RunLog log = run_campaign(small_config(Method::kTsiEiC), 1);
  return log;
}

}  // namespace

TEST_CASE("campaign structure and budget accounting") {
  const CampaignConfig cfg = small_config(Method::kTsiNoStop);
  const RunLog& log = cached_no_stop();
  REQUIRE(!log.episodes.empty());
  CHECK(log.method == Method::kTsiNoStop);
  CHECK(log.seed == 1);
  CHECK(log.budget == cfg.budget);

  long cumulative = 0;
  for (std::size_t i = 0; i < log.episodes.size(); ++i) {
    const EpisodeRecord& rec = log.episodes[i];
    CHECK(rec.iteration == static_cast<int>(i));
    CHECK(rec.is_initial_design == (i < 3));
    cumulative += rec.steps_used;
    CHECK(rec.cumulative_steps == cumulative);
    CHECK(theta_in_bounds(rec.theta, cfg.bounds));
    if (i + 1 < log.episodes.size()) CHECK(rec.cumulative_steps < cfg.budget);
  }
  // The loop ends at the first episode that meets the budget; an episode is
  // never cut short, so the overshoot is below one full episode.
  CHECK(log.episodes.back().cumulative_steps >= cfg.budget);
  CHECK(log.episodes.back().cumulative_steps < cfg.budget + cfg.episode.total_steps);
}

TEST_CASE("the no-stop method always runs full-length episodes") {
  const RunLog& log = cached_no_stop();
  for (const EpisodeRecord& rec : log.episodes) {
    CHECK(rec.status == EpisodeStatus::kCompletedFull);
    CHECK(rec.steps_used == 80);
    REQUIRE(rec.observations.size() == 10);
    for (std::size_t l = 0; l < rec.observations.size(); ++l)
      CHECK(rec.observations[l].fidelity.s == doctest::Approx(0.1 * (l + 1)).epsilon(1e-15));
    CHECK(rec.observations.back().fidelity.is_target());
    CHECK(rec.stop.verdict == StopVerdict::kContinue);
  }
}

TEST_CASE("the baseline is single fidelity end to end") {
  const RunLog& log = cached_baseline();
  for (const EpisodeRecord& rec : log.episodes) {
    CHECK(rec.status == EpisodeStatus::kCompletedFull);
    CHECK(rec.steps_used == 80);
    REQUIRE(rec.observations.size() == 1);
    CHECK(rec.observations[0].fidelity.is_target());
    CHECK(!rec.hyperparams.fidelity_active);
  }
}

TEST_CASE("identical seeds reproduce the log byte for byte") {
  const CampaignConfig cfg = small_config(Method::kTsiEiC);
  const RunLog a = run_campaign(cfg, 1);
  const std::string sa = run_jsonl_string(a);
  const std::string sb = run_jsonl_string(cached_ei_c());
  CHECK(sa == sb);
  CHECK(run_jsonl_string(run_campaign(cfg, 2)) != sa);
}

TEST_CASE("the incumbent is the running best over target-fidelity values") {
  for (const RunLog* log : {&cached_no_stop(), &cached_ei_c(), &cached_baseline()}) {
    bool valid = false;
    double best = 0.0;
    for (const EpisodeRecord& rec : log->episodes) {
      for (const Observation& obs : rec.observations) {
        if (!obs.fidelity.is_target()) continue;
        if (!valid || obs.g > best) {
          valid = true;
          best = obs.g;
        }
      }
      CHECK(rec.incumbent_valid == valid);
      if (valid) CHECK(rec.incumbent_g == best);
    }
  }
}

TEST_CASE("the incumbent never worsens across a campaign") {
  const RunLog& log = cached_ei_c();
  double prev = -std::numeric_limits<double>::infinity();
  for (const EpisodeRecord& rec : log.episodes) {
    if (!rec.incumbent_valid) continue;
    CHECK(rec.incumbent_g >= prev);
    prev = rec.incumbent_g;
  }
}

TEST_CASE("a convergence stop credits the last checkpoint at target fidelity") {
  CampaignConfig cfg = small_config(Method::kTsiEiC, 480);
  cfg.stopping.epsilon = 10.0;  // everything counts as settled
  const RunLog log = run_campaign(cfg, 3);

  int converged = 0;
  for (const EpisodeRecord& rec : log.episodes) {
    if (rec.is_initial_design) {
      CHECK(rec.status == EpisodeStatus::kCompletedFull);  // warm-up never stops
      continue;
    }
    REQUIRE(rec.status == EpisodeStatus::kStoppedEarly);
    REQUIRE(rec.stop.verdict == StopVerdict::kStopConverged);
    CHECK(rec.stop.rule == StopRule::kConvergence);
    CHECK(rec.steps_used == 8);  // stopped at the first checkpoint
    ++converged;

    // One real checkpoint observation plus the credited full-fidelity value,
    // equal by the settled-plateau convention.
    REQUIRE(rec.observations.size() == 2);
    CHECK(rec.observations[0].fidelity.s == doctest::Approx(0.1));
    CHECK(rec.observations[1].fidelity.is_target());
    CHECK(rec.observations[1].g == rec.observations[0].g);
    CHECK(rec.incumbent_g >= rec.observations[1].g);
  }
  CHECK(converged > 0);
}

TEST_CASE("an unpromising stop discards the episode without crediting") {
  CampaignConfig cfg = small_config(Method::kTsiEi, 480);
  cfg.tau_ei_rel = 1e6;  // no realistic improvement can clear the bar
  const RunLog log = run_campaign(cfg, 4);

  double frozen = 0.0;
  int stopped = 0;
  for (const EpisodeRecord& rec : log.episodes) {
    if (rec.is_initial_design) {
      frozen = rec.incumbent_g;
      continue;
    }
    REQUIRE(rec.status == EpisodeStatus::kStoppedEarly);
    CHECK(rec.stop.verdict == StopVerdict::kStopUnpromising);
    CHECK(rec.stop.rule == StopRule::kEi);
    CHECK(rec.steps_used == 8);
    REQUIRE(rec.observations.size() == 1);
    CHECK(!rec.observations[0].fidelity.is_target());
    // No synthesized value, so the incumbent stays at the warm-up best.
    CHECK(rec.incumbent_g == frozen);
    ++stopped;
  }
  CHECK(stopped > 0);
}

TEST_CASE("the best-so-far curve mirrors the incumbent column") {
  const RunLog& log = cached_ei_c();
  const auto curve = best_so_far_curve(log);
  std::size_t ci = 0;
  for (const EpisodeRecord& rec : log.episodes) {
    if (!rec.incumbent_valid) continue;
    REQUIRE(ci < curve.size());
    CHECK(curve[ci].first == rec.cumulative_steps);
    CHECK(curve[ci].second == rec.incumbent_g);
    ++ci;
  }
  CHECK(ci == curve.size());
}

TEST_CASE("envelope of constant curves collapses to the constants") {
  const std::vector<std::vector<std::pair<long, double>>> curves = {
      {{80, -5.0}}, {{80, -3.0}}, {{80, -4.0}}};
  const Envelope env = aggregate_envelope(curves, 160, 40);
  REQUIRE(env.steps.size() == 5);
  for (std::size_t i = 0; i < env.steps.size(); ++i) {
    CHECK(env.steps[i] == static_cast<long>(40 * i));
    CHECK(env.low[i] == doctest::Approx(-5.0));
    CHECK(env.median[i] == doctest::Approx(-4.0));
    CHECK(env.high[i] == doctest::Approx(-3.0));
  }
}

TEST_CASE("envelope carries values forward and backfills the warm-up") {
  const std::vector<std::vector<std::pair<long, double>>> curves = {
      {{10, -10.0}, {20, -6.0}},
      {{5, -8.0}, {25, -4.0}}};
  const Envelope env = aggregate_envelope(curves, 25, 5);
  REQUIRE(env.steps.size() == 6);
  // step 0: both backfilled to their first values.
  CHECK(env.low[0] == doctest::Approx(-10.0));
  CHECK(env.high[0] == doctest::Approx(-8.0));
  CHECK(env.median[0] == doctest::Approx(-9.0));
  // step 10: first curve reaches -10, second still at -8.
  CHECK(env.median[2] == doctest::Approx(-9.0));
  // step 20: first improves to -6, second held at -8.
  CHECK(env.low[4] == doctest::Approx(-8.0));
  CHECK(env.high[4] == doctest::Approx(-6.0));
  // step 25: both improved.
  CHECK(env.low[5] == doctest::Approx(-6.0));
  CHECK(env.high[5] == doctest::Approx(-4.0));
  CHECK(env.median[5] == doctest::Approx(-5.0));
}

TEST_CASE("run logs survive a jsonl round trip unchanged") {
  const RunLog& log = cached_ei_c();
  const std::string path = "test_campaign_roundtrip.jsonl";
  write_run_jsonl(log, path);
  const RunLog back = read_run_jsonl(path);
  std::remove(path.c_str());

  CHECK(back.method == log.method);
  CHECK(back.seed == log.seed);
  CHECK(back.budget == log.budget);
  REQUIRE(back.episodes.size() == log.episodes.size());
  for (std::size_t i = 0; i < log.episodes.size(); ++i) {
    const EpisodeRecord& a = log.episodes[i];
    const EpisodeRecord& b = back.episodes[i];
    CHECK(b.iteration == a.iteration);
    CHECK(b.is_initial_design == a.is_initial_design);
    CHECK((b.theta.array() == a.theta.array()).all());
    CHECK(b.steps_used == a.steps_used);
    CHECK(b.status == a.status);
    CHECK(b.stop.verdict == a.stop.verdict);
    CHECK(b.stop.rule == a.stop.rule);
    CHECK(b.stop.statistic == a.stop.statistic);
    CHECK(b.stop.threshold == a.stop.threshold);
    REQUIRE(b.observations.size() == a.observations.size());
    for (std::size_t l = 0; l < a.observations.size(); ++l) {
      CHECK(b.observations[l].fidelity.s == a.observations[l].fidelity.s);
      CHECK(b.observations[l].g == a.observations[l].g);
    }
    CHECK(b.cumulative_steps == a.cumulative_steps);
    CHECK(b.incumbent_valid == a.incumbent_valid);
    CHECK(b.incumbent_g == a.incumbent_g);
    CHECK((b.incumbent_theta.array() == a.incumbent_theta.array()).all());
    CHECK((b.hyperparams.lengthscales.array() == a.hyperparams.lengthscales.array()).all());
    CHECK(b.hyperparams.signal_variance == a.hyperparams.signal_variance);
    CHECK(b.hyperparams.noise_variance == a.hyperparams.noise_variance);
    CHECK(b.hyperparams.fidelity_decay == a.hyperparams.fidelity_decay);
    CHECK(b.hyperparams.fidelity_offset == a.hyperparams.fidelity_offset);
    CHECK(b.hyperparams.fidelity_active == a.hyperparams.fidelity_active);
    CHECK(b.acquisition_value == a.acquisition_value);
    CHECK(b.acquisition_fallback == a.acquisition_fallback);
    CHECK(b.solver_failures == a.solver_failures);
  }

  // Re-serializing the read log reproduces the file exactly.
  CHECK(run_jsonl_string(back) == run_jsonl_string(log));
}

TEST_CASE("csv envelope serialization is deterministic") {
  const auto curve = best_so_far_curve(cached_no_stop());
  const Envelope env = aggregate_envelope({curve}, 560, 8);
  const std::vector<std::pair<std::string, Envelope>> named = {{"tsi_no_stop", env}};
  CHECK(curves_csv_string(named) == curves_csv_string(named));
  CHECK(curves_csv_string(named).rfind("method,step,min,median,max\n", 0) == 0);
}

TEST_CASE("method names round trip and files are named by them") {
  for (const Method m : all_methods()) CHECK(method_from_string(to_string(m)) == m);
  CHECK(to_string(Method::kBaselineBo) == "baseline_bo");
  CHECK(to_string(Method::kTsiNoStop) == "tsi_no_stop");
  CHECK(to_string(Method::kTsiEi) == "tsi_ei");
  CHECK(to_string(Method::kTsiEiC) == "tsi_ei_c");
  CHECK(to_string(Method::kTsiUcbC) == "tsi_ucb_c");
  CHECK_THROWS_AS((void)method_from_string("nope"), std::invalid_argument);
  CHECK(run_log_filename(Method::kTsiEiC, 7) == "tsi_ei_c_seed7.jsonl");
  CHECK(all_methods().size() == 5);
}

TEST_CASE("campaign configuration validation") {
  CampaignConfig cfg = small_config(Method::kTsiEiC);
  cfg.budget = 0;
  CHECK_THROWS_AS((void)run_campaign(cfg, 1), std::invalid_argument);
  cfg = small_config(Method::kTsiEiC);
  cfg.initial_design_size = 0;
  CHECK_THROWS_AS((void)run_campaign(cfg, 1), std::invalid_argument);
  cfg = small_config(Method::kTsiEiC);
  cfg.tau_ei_rel = -0.5;
  CHECK_THROWS_AS((void)run_campaign(cfg, 1), std::invalid_argument);
  cfg = small_config(Method::kTsiEiC);
  cfg.refit_full_every = 0;
  CHECK_THROWS_AS((void)run_campaign(cfg, 1), std::invalid_argument);
  cfg = small_config(Method::kTsiEiC);
  cfg.seeds.clear();
  CHECK_THROWS_AS((void)run_campaign(cfg, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)run_baseline(small_config(Method::kTsiEi), 1), std::invalid_argument);
}
