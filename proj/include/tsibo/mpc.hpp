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

#ifndef TSIBO_MPC_HPP
#define TSIBO_MPC_HPP

#include <vector>

#include <Eigen/Dense>

#include "tsibo/cartpole.hpp"
#include "tsibo/types.hpp"

namespace tsibo {

struct MpcConfig {
  int horizon = 20;
  double u_max = 15.0;
  int max_iterations = 100;
  double cost_tolerance = 1e-9;
  CartPoleParams model;  // prediction model of the plant
  StateVector x_target = StateVector::Zero();

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("MpcConfig: horizon must be >= 1");
    if (!(u_max > 0.0)) throw std::invalid_argument("MpcConfig: u_max must be positive");
    if (max_iterations < 1) throw std::invalid_argument("MpcConfig: max_iterations must be >= 1");
    if (!(cost_tolerance > 0.0)) throw std::invalid_argument("MpcConfig: cost_tolerance must be positive");
    model.validate();
  }
};

// Tuning-cost stage term: (x - x_d)^T diag(theta_1..4) (x - x_d) + theta_5 u^2.
[[nodiscard]] double mpc_stage_cost(const StateVector& x, double u, const ParamVector& theta,
                                    const StateVector& x_target);

// Central finite-difference linearization of the discrete step map.
void linearize_step(const StateVector& x, double u, const CartPoleParams& p, Eigen::Matrix4d& A,
                    Eigen::Vector4d& B);

// Terminal weight: fixed point of the discrete Riccati recursion for the
// linearization at the target, so the finite horizon approximates the
// infinite-horizon cost-to-go. Homogeneous of degree one in theta.
[[nodiscard]] Eigen::Matrix4d terminal_weight(const ParamVector& theta, const MpcConfig& cfg);

struct OcpSolution {
  Eigen::VectorXd inputs;                 // length horizon, clamped to [-u_max, u_max]
  std::vector<StateVector> states;        // horizon + 1, from the model roll-out
  double cost = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> iteration_costs;    // accepted costs, non-increasing
};

// Iterative LQR for the open-loop problem from x0, warm-started from a
// previous solution if given. Always returns the best trajectory found.
[[nodiscard]] OcpSolution solve_ocp(const StateVector& x0, const ParamVector& theta,
                                    const MpcConfig& cfg, const Eigen::Matrix4d& terminal_P,
                                    const OcpSolution* warm = nullptr);
[[nodiscard]] OcpSolution solve_ocp(const StateVector& x0, const ParamVector& theta,
                                    const MpcConfig& cfg);

// Receding-horizon policy: solves the OCP at each state, applies the first
// input, and keeps the shifted solution as the next warm start.
class MpcController {
 public:
  MpcController(const ParamVector& theta, const MpcConfig& cfg);

  [[nodiscard]] double step(const StateVector& x);

  [[nodiscard]] int solver_failures() const { return failures_; }
  [[nodiscard]] const Eigen::Matrix4d& terminal_matrix() const { return P_; }

 private:
  ParamVector theta_;
  MpcConfig cfg_;
  Eigen::Matrix4d P_;
  OcpSolution prev_;
  bool has_prev_ = false;
  int failures_ = 0;
};

}  // namespace tsibo

#endif  // TSIBO_MPC_HPP
