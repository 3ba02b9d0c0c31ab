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

#ifndef TSIBO_ACQUISITION_HPP
#define TSIBO_ACQUISITION_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tsibo/gp.hpp"
#include "tsibo/types.hpp"

namespace tsibo {

struct AcquisitionConfig {
  int n_fantasies = 128;        // rounded up to an even count, drawn antithetically
  int n_inner_candidates = 256; // Latin-hypercube inner candidates
  int n_restarts = 16;          // outer multistart points
  int polish_starts = 4;        // best starts refined by coordinate search
  int polish_sweeps = 2;        // coordinate sweeps per refinement
  std::uint64_t seed = 0;
  std::vector<Fidelity> fantasy_fidelities;  // fidelities fantasized per new parameter point

  void validate() const {
    if (n_fantasies < 2) throw std::invalid_argument("AcquisitionConfig: n_fantasies must be >= 2");
    if (n_inner_candidates < 1)
      throw std::invalid_argument("AcquisitionConfig: n_inner_candidates must be >= 1");
    if (n_restarts < 1) throw std::invalid_argument("AcquisitionConfig: n_restarts must be >= 1");
    if (polish_starts < 0 || polish_sweeps < 0)
      throw std::invalid_argument("AcquisitionConfig: polish settings must be nonnegative");
    for (const Fidelity s : fantasy_fidelities)
      if (!(s.s > 0.0) || s.s > 1.0)
        throw std::invalid_argument("AcquisitionConfig: fantasy fidelities must lie in (0, 1]");
  }
};

// One-step lookahead value of observing a parameter point along a fidelity
// trace. The posterior minimum expected loss is approximated over a fixed
// candidate set (Latin hypercube, the observed points, and one point polished
// on the posterior mean); fantasy outcomes are drawn once, antithetically,
// and shared between the with- and without-observation terms, which makes the
// gradient estimate deterministic for a given seed and nonnegative.
class TakgEvaluator {
 public:
  TakgEvaluator(const GpModel& model, const AcquisitionConfig& cfg, const ParamBounds& bounds);

  // Expected minimum loss -E[max posterior mean] if theta were observed at
  // the given fidelities; with an empty list, the current expected loss.
  [[nodiscard]] double expected_loss(const ParamVector& theta,
                                     const std::vector<Fidelity>& fids) const;
  [[nodiscard]] double expected_loss_reference(const ParamVector& theta,
                                               const std::vector<Fidelity>& fids) const;
  [[nodiscard]] double expected_loss_current() const;

  // expected_loss(empty) - expected_loss(theta, fantasy_fidelities), >= 0.
  [[nodiscard]] double takg(const ParamVector& theta) const;

  [[nodiscard]] const Eigen::MatrixXd& candidates_unit() const { return cand_unit_; }
  [[nodiscard]] int num_fantasies() const { return static_cast<int>(zeta_.cols()); }

 private:
  const GpModel* model_;
  AcquisitionConfig cfg_;
  ParamBounds bounds_;
  Eigen::MatrixXd cand_unit_;  // J x 5, unit-cube candidate parameters
  Eigen::VectorXd cand_mean_;  // standardized posterior means at target fidelity
  Eigen::MatrixXd cand_v_;     // n x J, chol^{-1} k(X, candidates)
  Eigen::MatrixXd zeta_;       // max fantasy dimension x n_fantasies, antithetic
  double best_current_mean_ = 0.0;

  struct FantasyOperator {
    Eigen::VectorXd means;  // candidate means (standardized)
    Eigen::MatrixXd gains;  // m x J conditioning gains
  };
  [[nodiscard]] FantasyOperator build_operator(const ParamVector& theta,
                                               const std::vector<Fidelity>& fids) const;
};

struct SelectResult {
  ParamVector theta = ParamVector::Zero();
  double value = 0.0;
  bool fallback = false;  // true when every acquisition value was non-finite
  int evals = 0;
};

// Maximizes the lookahead value over the parameter box by seeded multistart
// plus coordinate refinement of the best starts.
[[nodiscard]] SelectResult select_next(const GpModel& model, const AcquisitionConfig& cfg,
                                       const ParamBounds& bounds);

// Expected-improvement acquisition at target fidelity, for the
// single-fidelity baseline.
[[nodiscard]] SelectResult select_next_ei(const GpModel& model, const AcquisitionConfig& cfg,
                                          const ParamBounds& bounds, const Incumbent& inc);

// One-shot helpers around a freshly built evaluator (same seed, same draws,
// so takg(...) == expected_loss(..., {}) - expected_loss(..., fids) exactly,
// clamped at zero).
[[nodiscard]] double expected_loss(const GpModel& model, const ParamVector& theta,
                                   const std::vector<Fidelity>& fids, const AcquisitionConfig& cfg,
                                   const ParamBounds& bounds);
[[nodiscard]] double takg(const GpModel& model, const ParamVector& theta,
                          const std::vector<Fidelity>& fids, const AcquisitionConfig& cfg,
                          const ParamBounds& bounds);

}  // namespace tsibo

#endif  // TSIBO_ACQUISITION_HPP
