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

#include <cmath>
#include <random>

#include "doctest.h"
#include "tsibo/mpc.hpp"

using namespace tsibo;

namespace {

ParamVector make_theta(double q1, double q2, double q3, double q4, double r) {
  ParamVector theta;
  theta << q1, q2, q3, q4, r;
  return theta;
}

double recompute_cost(const OcpSolution& sol, const ParamVector& theta, const MpcConfig& cfg,
                      const Eigen::Matrix4d& P) {
  double cost = 0.0;
  for (int k = 0; k < cfg.horizon; ++k)
    cost += mpc_stage_cost(sol.states[static_cast<std::size_t>(k)], sol.inputs[k], theta,
                           cfg.x_target);
  const StateVector e = sol.states.back() - cfg.x_target;
  return cost + e.dot(P * e);
}

}  // namespace

TEST_CASE("stage cost arithmetic") {
  StateVector x;
  x << 1.0, 2.0, 0.0, 0.0;
  const ParamVector theta = make_theta(1.0, 1.0, 1.0, 1.0, 2.0);
  CHECK(mpc_stage_cost(x, 3.0, theta, StateVector::Zero()) == doctest::Approx(23.0));
  CHECK(mpc_stage_cost(x, 0.0, theta, x) == doctest::Approx(0.0));
  StateVector target;
  target << 1.0, 0.0, 0.0, 0.0;
  CHECK(mpc_stage_cost(x, 1.0, theta, target) == doctest::Approx(6.0));
  // Each weight acts on its own coordinate.
  StateVector e;
  e << 0.0, 0.0, 3.0, 0.0;
  CHECK(mpc_stage_cost(e, 0.0, make_theta(1.0, 1.0, 0.25, 1.0, 1.0), StateVector::Zero()) ==
        doctest::Approx(2.25));
}

TEST_CASE("step linearization matches an independent finite difference") {
  const CartPoleParams p;
  StateVector x;
  x << 0.3, 0.4, -0.2, 0.5;
  const double u = 1.5;
  Eigen::Matrix4d A;
  Eigen::Vector4d B;
  linearize_step(x, u, p, A, B);

  const double h = 1e-6;  // different step than the production value
  for (int i = 0; i < kStateDim; ++i) {
    StateVector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const Eigen::Vector4d col = (cartpole_step(xp, u, p) - cartpole_step(xm, u, p)) / (2.0 * h);
    CHECK((A.col(i) - col).cwiseAbs().maxCoeff() < 1e-6);
  }
  const Eigen::Vector4d b = (cartpole_step(x, u + h, p) - cartpole_step(x, u - h, p)) / (2.0 * h);
  CHECK((B - b).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("terminal weight is a symmetric psd fixed point of the riccati recursion") {
  const MpcConfig cfg;
  const ParamVector theta = make_theta(1.0, 1.0, 0.1, 0.1, 0.5);
  const Eigen::Matrix4d P = terminal_weight(theta, cfg);

  CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(P);
  CHECK(eig.eigenvalues().minCoeff() > -1e-9);

  Eigen::Matrix4d A;
  Eigen::Vector4d B;
  linearize_step(cfg.x_target, 0.0, cfg.model, A, B);
  const Eigen::Matrix4d Q = Eigen::Vector4d(theta[0], theta[1], theta[2], theta[3]).asDiagonal();
  const Eigen::Vector4d PB = P * B;
  const Eigen::Matrix4d next =
      Q + A.transpose() * P * A - (A.transpose() * PB) * (PB.transpose() * A) / (theta[4] + B.dot(PB));
  const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  CHECK((next - P).cwiseAbs().maxCoeff() < 1e-9 * scale);

  // The fixed point dominates the stage weight.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> gap(Eigen::Matrix4d(P - Q));
  CHECK(gap.eigenvalues().minCoeff() > -1e-9);
}

TEST_CASE("terminal weight is homogeneous of degree one in theta") {
  const MpcConfig cfg;
  const ParamVector theta = make_theta(2.0, 0.5, 0.1, 0.3, 1.5);
  const Eigen::Matrix4d P1 = terminal_weight(theta, cfg);
  const Eigen::Matrix4d P5 = terminal_weight(ParamVector(5.0 * theta), cfg);
  const double scale = std::max(1.0, P5.cwiseAbs().maxCoeff());
  CHECK((P5 - 5.0 * P1).cwiseAbs().maxCoeff() < 1e-8 * scale);
}

TEST_CASE("solving from the target equilibrium does nothing") {
  const MpcConfig cfg;
  for (const ParamVector& theta :
       {ParamVector(ParamVector::Ones()), make_theta(10.0, 0.1, 1.0, 0.01, 5.0)}) {
    const OcpSolution sol = solve_ocp(StateVector::Zero(), theta, cfg);
    CHECK(sol.inputs.cwiseAbs().maxCoeff() < 1e-6);
    CHECK(sol.cost < 1e-10);
  }
}

TEST_CASE("solution trajectory is a faithful roll-out of its inputs") {
  MpcConfig cfg;
  const ParamVector theta = ParamVector::Ones();
  StateVector x0;
  x0 << 1.0, 0.3, 0.0, 0.0;
  const Eigen::Matrix4d P = terminal_weight(theta, cfg);
  const OcpSolution sol = solve_ocp(x0, theta, cfg, P);

  REQUIRE(sol.states.size() == static_cast<std::size_t>(cfg.horizon + 1));
  REQUIRE(sol.inputs.size() == cfg.horizon);
  CHECK((sol.states[0] - x0).norm() == doctest::Approx(0.0));
  for (int k = 0; k < cfg.horizon; ++k) {
    const StateVector next =
        cartpole_step(sol.states[static_cast<std::size_t>(k)], sol.inputs[k], cfg.model);
    CHECK((sol.states[static_cast<std::size_t>(k + 1)] - next).norm() == doctest::Approx(0.0));
  }
  CHECK(sol.cost ==
        doctest::Approx(recompute_cost(sol, theta, cfg, P)).epsilon(1e-10));
}

TEST_CASE("inputs are clamped to the actuator limit") {
  MpcConfig cfg;
  cfg.u_max = 2.0;
  StateVector x0;
  x0 << 2.0, 0.5, 1.0, 0.0;  // far enough that the bound binds
  const OcpSolution sol = solve_ocp(x0, ParamVector::Ones(), cfg);
  CHECK(sol.inputs.cwiseAbs().maxCoeff() <= cfg.u_max + 1e-12);
  CHECK(sol.inputs.cwiseAbs().maxCoeff() == doctest::Approx(cfg.u_max));
}

TEST_CASE("scaling theta rescales the cost without moving the minimizer") {
  MpcConfig cfg;
  cfg.cost_tolerance = 1e-12;
  cfg.max_iterations = 300;
  StateVector x0;
  x0 << 0.0, 0.2, 0.0, 0.0;
  const ParamVector theta = make_theta(1.0, 2.0, 0.1, 0.1, 0.5);
  const OcpSolution a = solve_ocp(x0, theta, cfg);
  const OcpSolution b = solve_ocp(x0, ParamVector(5.0 * theta), cfg);
  CHECK(b.cost / a.cost == doctest::Approx(5.0).epsilon(1e-6));
  CHECK((a.inputs - b.inputs).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("accepted iteration costs never increase") {
  MpcConfig cfg;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  std::uniform_real_distribution<double> ang(-0.5, 0.5);
  std::uniform_real_distribution<double> logw(std::log(1e-2), std::log(1e2));
  for (int trial = 0; trial < 20; ++trial) {
    StateVector x0;
    x0 << pos(rng), ang(rng), pos(rng), pos(rng);
    ParamVector theta;
    for (int i = 0; i < kParamDim; ++i) theta[i] = std::exp(logw(rng));
    const OcpSolution sol = solve_ocp(x0, theta, cfg);
    REQUIRE(!sol.iteration_costs.empty());
    for (std::size_t i = 1; i < sol.iteration_costs.size(); ++i)
      CHECK(sol.iteration_costs[i] <= sol.iteration_costs[i - 1]);
    CHECK(sol.cost == doctest::Approx(sol.iteration_costs.back()));
    CHECK(sol.cost <= sol.iteration_costs.front());
    CHECK(std::isfinite(sol.cost));
  }
}

TEST_CASE("near the target the cost agrees with the quadratic cost-to-go") {
  // With the Riccati fixed point as terminal weight, the finite-horizon cost
  // of a small perturbation must approach x0' P x0, the infinite-horizon
  // value of the linearized problem.
  MpcConfig cfg;
  cfg.cost_tolerance = 1e-13;
  cfg.max_iterations = 300;
  const ParamVector theta = ParamVector::Ones();
  const Eigen::Matrix4d P = terminal_weight(theta, cfg);
  StateVector x0 = StateVector::Zero();
  x0[1] = 0.01;
  const OcpSolution sol = solve_ocp(x0, theta, cfg, P);
  const double lqr_value = x0.dot(P * x0);
  CHECK(sol.cost == doctest::Approx(lqr_value).epsilon(0.01));
}

TEST_CASE("receding-horizon controller regulates the benchmark start") {
  MpcConfig mpc;
  MpcController controller(make_theta(10.0, 10.0, 0.1, 0.1, 0.1), mpc);
  StateVector x;
  x << 1.0, 0.3, 0.0, 0.0;
  const CartPoleParams plant;
  for (int k = 0; k < 80; ++k) {
    const double u = controller.step(x);
    CHECK(std::abs(u) <= mpc.u_max + 1e-12);
    x = cartpole_step(x, u, plant);
  }
  CHECK(x.norm() < 0.01);
}

TEST_CASE("a heavily damped weighting still converges, just more slowly") {
  const MpcConfig mpc;
  MpcController controller(ParamVector::Ones(), mpc);
  StateVector x;
  x << 1.0, 0.3, 0.0, 0.0;
  const CartPoleParams plant;
  double norm_80 = 0.0;
  for (int k = 1; k <= 160; ++k) {
    x = cartpole_step(x, controller.step(x), plant);
    if (k == 80) norm_80 = x.norm();
  }
  CHECK(x.norm() < 0.05);
  CHECK(x.norm() < norm_80);  // still descending through the episode tail
}

TEST_CASE("controller first move equals the cold-start solve") {
  const MpcConfig cfg;
  const ParamVector theta = make_theta(1.0, 4.0, 0.2, 0.1, 1.0);
  StateVector x0;
  x0 << 0.5, -0.2, 0.1, 0.0;
  MpcController controller(theta, cfg);
  const double u = controller.step(x0);
  const OcpSolution sol = solve_ocp(x0, theta, cfg, controller.terminal_matrix());
  CHECK(u == sol.inputs[0]);
}

TEST_CASE("warm start begins no worse than the shifted previous plan") {
  const MpcConfig cfg;
  const ParamVector theta = ParamVector::Ones();
  StateVector x0;
  x0 << 1.0, 0.3, 0.0, 0.0;
  const Eigen::Matrix4d P = terminal_weight(theta, cfg);
  const OcpSolution first = solve_ocp(x0, theta, cfg, P);
  const StateVector x1 = cartpole_step(x0, first.inputs[0], cfg.model);
  const OcpSolution warm = solve_ocp(x1, theta, cfg, P, &first);
  const OcpSolution cold = solve_ocp(x1, theta, cfg, P);
  // The shifted plan is a much better starting point than all zeros.
  CHECK(warm.iteration_costs.front() < cold.iteration_costs.front());
  CHECK(warm.cost <= cold.cost * (1.0 + 1e-6));
}

TEST_CASE("configuration and parameter validation") {
  MpcConfig cfg;
  cfg.horizon = 0;
  CHECK_THROWS_AS((void)solve_ocp(StateVector::Zero(), ParamVector::Ones(), cfg),
                  std::invalid_argument);
  cfg = MpcConfig{};
  cfg.u_max = 0.0;
  CHECK_THROWS_AS((void)solve_ocp(StateVector::Zero(), ParamVector::Ones(), cfg),
                  std::invalid_argument);
  cfg = MpcConfig{};
  ParamVector bad = ParamVector::Ones();
  bad[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)solve_ocp(StateVector::Zero(), bad, cfg), std::invalid_argument);
}
