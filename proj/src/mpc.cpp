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

#include "tsibo/mpc.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace tsibo {

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kRegMin = 1e-8;
constexpr double kRegMax = 1e9;

Eigen::Vector4d theta_state_weights(const ParamVector& theta) {
  return Eigen::Vector4d(theta[0], theta[1], theta[2], theta[3]);
}

double rollout(const StateVector& x0, const Eigen::VectorXd& u, const ParamVector& theta,
               const MpcConfig& cfg, const Eigen::Matrix4d& P, std::vector<StateVector>& states) {
  const int N = cfg.horizon;
  states.resize(static_cast<std::size_t>(N) + 1);
  states[0] = x0;
  double cost = 0.0;
  for (int k = 0; k < N; ++k) {
    cost += mpc_stage_cost(states[static_cast<std::size_t>(k)], u[k], theta, cfg.x_target);
    states[static_cast<std::size_t>(k) + 1] =
        cartpole_step(states[static_cast<std::size_t>(k)], u[k], cfg.model);
  }
  const StateVector e = states[static_cast<std::size_t>(N)] - cfg.x_target;
  cost += e.dot(P * e);
  return cost;
}

}  // namespace

double mpc_stage_cost(const StateVector& x, double u, const ParamVector& theta,
                      const StateVector& x_target) {
  const StateVector e = x - x_target;
  const Eigen::Vector4d q = theta_state_weights(theta);
  return e.cwiseProduct(q.cwiseProduct(e)).sum() + theta[4] * u * u;
}

void linearize_step(const StateVector& x, double u, const CartPoleParams& p, Eigen::Matrix4d& A,
                    Eigen::Vector4d& B) {
  for (int i = 0; i < kStateDim; ++i) {
    StateVector xp = x;
    StateVector xm = x;
    xp[i] += kFdStep;
    xm[i] -= kFdStep;
    A.col(i) = (cartpole_step(xp, u, p) - cartpole_step(xm, u, p)) / (2.0 * kFdStep);
  }
  B = (cartpole_step(x, u + kFdStep, p) - cartpole_step(x, u - kFdStep, p)) / (2.0 * kFdStep);
}

Eigen::Matrix4d terminal_weight(const ParamVector& theta, const MpcConfig& cfg) {
  Eigen::Matrix4d A;
  Eigen::Vector4d B;
  linearize_step(cfg.x_target, 0.0, cfg.model, A, B);

  const Eigen::Matrix4d Q = theta_state_weights(theta).asDiagonal();
  const double R = theta[4];
  Eigen::Matrix4d P = Q;
  for (int it = 0; it < 200000; ++it) {
    const Eigen::Vector4d PB = P * B;
    const double denom = R + B.dot(PB);
    const Eigen::Matrix4d next =
        Q + A.transpose() * P * A - (A.transpose() * PB) * (PB.transpose() * A) / denom;
    const double delta = (next - P).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
    P = 0.5 * (next + next.transpose());
    if (delta <= 1e-13 * scale) break;
  }
  return P;
}

OcpSolution solve_ocp(const StateVector& x0, const ParamVector& theta, const MpcConfig& cfg,
                      const Eigen::Matrix4d& terminal_P, const OcpSolution* warm) {
  cfg.validate();
  validate_theta(theta, ParamBounds{1e-12, 1e12});
  const int N = cfg.horizon;
  const Eigen::Vector4d q2 = 2.0 * theta_state_weights(theta);
  const double r2 = 2.0 * theta[4];

  OcpSolution sol;
  sol.inputs = Eigen::VectorXd::Zero(N);
  if (warm != nullptr && warm->inputs.size() == N) {
    sol.inputs.head(N - 1) = warm->inputs.tail(N - 1);
    sol.inputs[N - 1] = warm->inputs[N - 1];
  }
  for (int k = 0; k < N; ++k) sol.inputs[k] = std::clamp(sol.inputs[k], -cfg.u_max, cfg.u_max);

  sol.cost = rollout(x0, sol.inputs, theta, cfg, terminal_P, sol.states);
  sol.iteration_costs.push_back(sol.cost);

  std::vector<Eigen::Matrix4d> A(static_cast<std::size_t>(N));
  std::vector<Eigen::Vector4d> B(static_cast<std::size_t>(N));
  Eigen::VectorXd k_ff(N);
  std::vector<Eigen::RowVector4d> K_fb(static_cast<std::size_t>(N));

  double reg = kRegMin;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    ++sol.iterations;
    for (int k = 0; k < N; ++k)
      linearize_step(sol.states[static_cast<std::size_t>(k)], sol.inputs[k], cfg.model,
                     A[static_cast<std::size_t>(k)], B[static_cast<std::size_t>(k)]);

    // Backward pass; bump the regularizer until every Quu along the horizon
    // is safely positive.
    bool backward_ok = false;
    while (!backward_ok && reg <= kRegMax) {
      backward_ok = true;
      Eigen::Vector4d Vx =
          2.0 * terminal_P * (sol.states[static_cast<std::size_t>(N)] - cfg.x_target);
      Eigen::Matrix4d Vxx = 2.0 * terminal_P;
      for (int k = N - 1; k >= 0; --k) {
        const StateVector e = sol.states[static_cast<std::size_t>(k)] - cfg.x_target;
        const Eigen::Vector4d lx = q2.cwiseProduct(e);
        const Eigen::Matrix4d lxx = q2.asDiagonal();
        const double lu = r2 * sol.inputs[k];
        const Eigen::Matrix4d& Ak = A[static_cast<std::size_t>(k)];
        const Eigen::Vector4d& Bk = B[static_cast<std::size_t>(k)];

        const Eigen::Vector4d Qx = lx + Ak.transpose() * Vx;
        const double Qu = lu + Bk.dot(Vx);
        const Eigen::Matrix4d Qxx = lxx + Ak.transpose() * Vxx * Ak;
        const double Quu = r2 + Bk.dot(Vxx * Bk) + reg;
        const Eigen::RowVector4d Qux = Bk.transpose() * Vxx * Ak;
        if (!(Quu > 0.0) || !std::isfinite(Quu)) {
          backward_ok = false;
          reg = std::max(reg * 10.0, kRegMin * 10.0);
          break;
        }
        k_ff[k] = -Qu / Quu;
        K_fb[static_cast<std::size_t>(k)] = -Qux / Quu;

        const Eigen::RowVector4d& Kk = K_fb[static_cast<std::size_t>(k)];
        Vx = Qx + Kk.transpose() * (Quu * k_ff[k] + Qu) + Qux.transpose() * k_ff[k];
        Vxx = Qxx + Kk.transpose() * Quu * Kk + Kk.transpose() * Qux + Qux.transpose() * Kk;
        Vxx = 0.5 * (Vxx + Vxx.transpose());
      }
    }
    if (!backward_ok) break;

    // Forward pass with backtracking line search on the feedback roll-out.
    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-4; alpha *= 0.5) {
      Eigen::VectorXd u_new(N);
      std::vector<StateVector> x_new(static_cast<std::size_t>(N) + 1);
      x_new[0] = x0;
      double cost_new = 0.0;
      for (int k = 0; k < N; ++k) {
        const Eigen::Vector4d dx = x_new[static_cast<std::size_t>(k)] -
                                   sol.states[static_cast<std::size_t>(k)];
        double u = sol.inputs[k] + alpha * k_ff[k] + K_fb[static_cast<std::size_t>(k)].dot(dx);
        u = std::clamp(u, -cfg.u_max, cfg.u_max);
        u_new[k] = u;
        cost_new += mpc_stage_cost(x_new[static_cast<std::size_t>(k)], u, theta, cfg.x_target);
        x_new[static_cast<std::size_t>(k) + 1] =
            cartpole_step(x_new[static_cast<std::size_t>(k)], u, cfg.model);
      }
      const StateVector eN = x_new[static_cast<std::size_t>(N)] - cfg.x_target;
      cost_new += eN.dot(terminal_P * eN);
      if (std::isfinite(cost_new) && cost_new < sol.cost) {
        const double decrease = sol.cost - cost_new;
        sol.inputs = std::move(u_new);
        sol.states = std::move(x_new);
        sol.cost = cost_new;
        sol.iteration_costs.push_back(cost_new);
        assert(sol.iteration_costs[sol.iteration_costs.size() - 2] >= cost_new);
        reg = std::max(reg * 0.5, kRegMin);
        accepted = true;
        if (decrease < cfg.cost_tolerance * (1.0 + std::abs(sol.cost))) {
          sol.converged = true;
        }
        break;
      }
    }
    if (sol.converged) break;
    if (!accepted) {
      reg *= 10.0;
      if (reg > kRegMax) break;
    }
  }
  return sol;
}

OcpSolution solve_ocp(const StateVector& x0, const ParamVector& theta, const MpcConfig& cfg) {
  return solve_ocp(x0, theta, cfg, terminal_weight(theta, cfg), nullptr);
}

MpcController::MpcController(const ParamVector& theta, const MpcConfig& cfg)
    : theta_(theta), cfg_(cfg), P_(terminal_weight(theta, cfg)) {
  cfg_.validate();
}

double MpcController::step(const StateVector& x) {
  OcpSolution sol = solve_ocp(x, theta_, cfg_, P_, has_prev_ ? &prev_ : nullptr);
  if (!sol.converged) ++failures_;
  const double u = sol.inputs[0];
  prev_ = std::move(sol);
  has_prev_ = true;
  return u;
}

}  // namespace tsibo
