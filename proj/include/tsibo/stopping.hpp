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

#ifndef TSIBO_STOPPING_HPP
#define TSIBO_STOPPING_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "tsibo/gp.hpp"
#include "tsibo/types.hpp"

namespace tsibo {

[[nodiscard]] inline double normal_pdf(double z) {
  static constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

[[nodiscard]] inline double normal_cdf(double z) {
  static constexpr double kInvSqrt2 = 0.70710678118654752440;
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

// Expected improvement of a Gaussian over the best value seen, in
// maximization convention. Degenerates to max(mean - best, 0) at sd = 0.
[[nodiscard]] inline double expected_improvement(double mean, double sd, double best) {
  if (sd <= 0.0) return std::max(mean - best, 0.0);
  const double z = (mean - best) / sd;
  return (mean - best) * normal_cdf(z) + sd * normal_pdf(z);
}

enum class StopVerdict { kContinue, kStopUnpromising, kStopConverged };
enum class StopRule { kNone, kUcb, kEi, kConvergence };

[[nodiscard]] inline std::string to_string(StopVerdict v) {
  switch (v) {
    case StopVerdict::kContinue: return "continue";
    case StopVerdict::kStopUnpromising: return "stop_unpromising";
    case StopVerdict::kStopConverged: return "stop_converged";
  }
  return "continue";
}

[[nodiscard]] inline std::string to_string(StopRule r) {
  switch (r) {
    case StopRule::kNone: return "none";
    case StopRule::kUcb: return "ucb";
    case StopRule::kEi: return "ei";
    case StopRule::kConvergence: return "convergence";
  }
  return "none";
}

struct StopDecision {
  StopVerdict verdict = StopVerdict::kContinue;
  StopRule rule = StopRule::kNone;
  double statistic = 0.0;  // rule statistic: UCB value, EI value, or error norm
  double threshold = 0.0;
};

struct StoppingConfig {
  bool use_ucb = false;
  bool use_ei = false;
  bool use_convergence = false;
  double beta = 2.0;             // UCB width
  double tau_ei = 0.01;          // absolute EI threshold
  double epsilon = 0.05;         // convergence ball radius on scaled state error
  StateVector state_scale = StateVector::Ones();

  void validate() const {
    if (use_ucb && use_ei)
      throw std::invalid_argument("StoppingConfig: UCB and EI rules are mutually exclusive");
    if (!(beta >= 0.0)) throw std::invalid_argument("StoppingConfig: beta must be nonnegative");
    if (!(tau_ei >= 0.0)) throw std::invalid_argument("StoppingConfig: tau_ei must be nonnegative");
    if (!(epsilon > 0.0)) throw std::invalid_argument("StoppingConfig: epsilon must be positive");
    for (int i = 0; i < kStateDim; ++i)
      if (!(state_scale[i] > 0.0))
        throw std::invalid_argument("StoppingConfig: state scales must be positive");
  }
};

// Unpromising if even an optimistic bound on the target-fidelity objective
// stays below the incumbent: mean + beta * sd < g_star.
[[nodiscard]] inline StopDecision ucb_rule(const GpModel& model, const ParamVector& theta,
                                           const Incumbent& inc, const StoppingConfig& cfg) {
  StopDecision d;
  d.rule = StopRule::kUcb;
  const Posterior p = model.predict(theta, Fidelity::target());
  d.statistic = p.mean + cfg.beta * std::sqrt(std::max(p.variance, 0.0));
  d.threshold = inc.g_star;
  if (d.statistic < d.threshold) d.verdict = StopVerdict::kStopUnpromising;
  return d;
}

// Unpromising if the expected improvement of the target-fidelity posterior
// over the incumbent falls below tau_ei.
[[nodiscard]] inline StopDecision ei_rule(const GpModel& model, const ParamVector& theta,
                                          const Incumbent& inc, const StoppingConfig& cfg) {
  StopDecision d;
  d.rule = StopRule::kEi;
  const Posterior p = model.predict(theta, Fidelity::target());
  d.statistic = expected_improvement(p.mean, std::sqrt(std::max(p.variance, 0.0)), inc.g_star);
  d.threshold = cfg.tau_ei;
  if (d.statistic < d.threshold) d.verdict = StopVerdict::kStopUnpromising;
  return d;
}

// Converged if the scaled state error has entered the epsilon ball.
[[nodiscard]] inline StopDecision convergence_rule(const StateVector& x, const StateVector& target,
                                                   const StoppingConfig& cfg) {
  StopDecision d;
  d.rule = StopRule::kConvergence;
  d.statistic = ((x - target).cwiseQuotient(cfg.state_scale)).norm();
  d.threshold = cfg.epsilon;
  if (d.statistic < d.threshold) d.verdict = StopVerdict::kStopConverged;
  return d;
}

// Checkpoint decision: convergence has precedence, then the enabled surrogate
// rule. Surrogate rules need a nonempty model and a valid incumbent.
[[nodiscard]] inline StopDecision evaluate_stopping(const GpModel& model, const ParamVector& theta,
                                                    const Incumbent& inc, const StateVector& x,
                                                    const StateVector& target,
                                                    const StoppingConfig& cfg) {
  cfg.validate();
  if (cfg.use_convergence) {
    const StopDecision d = convergence_rule(x, target, cfg);
    if (d.verdict != StopVerdict::kContinue) return d;
  }
  if (!model.empty() && inc.valid) {
    if (cfg.use_ucb) {
      const StopDecision d = ucb_rule(model, theta, inc, cfg);
      if (d.verdict != StopVerdict::kContinue) return d;
    } else if (cfg.use_ei) {
      const StopDecision d = ei_rule(model, theta, inc, cfg);
      if (d.verdict != StopVerdict::kContinue) return d;
    }
  }
  return StopDecision{};
}

}  // namespace tsibo

#endif  // TSIBO_STOPPING_HPP
