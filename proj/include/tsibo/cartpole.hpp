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

#ifndef TSIBO_CARTPOLE_HPP
#define TSIBO_CARTPOLE_HPP

#include <cmath>
#include <stdexcept>

#include "tsibo/types.hpp"

namespace tsibo {

// Frictionless cart-pole. State ordering: (cart position, pole angle,
// cart velocity, pole angular velocity); angle zero is upright.
struct CartPoleParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_length = 0.5;
  double gravity = 9.81;
  double dt = 0.05;

  void validate() const {
    if (!(cart_mass > 0.0) || !(pole_mass > 0.0) || !(pole_half_length > 0.0) ||
        !(gravity > 0.0) || !(dt > 0.0))
      throw std::invalid_argument("CartPoleParams: all parameters must be positive");
  }
};

// Continuous-time dynamics xdot = f(x, u).
[[nodiscard]] inline StateVector cartpole_dynamics(const StateVector& x, double u,
                                                   const CartPoleParams& p) {
  const double phi = x[1];
  const double pdot = x[2];
  const double phidot = x[3];
  const double total_mass = p.cart_mass + p.pole_mass;
  const double ml = p.pole_mass * p.pole_half_length;
  const double sin_phi = std::sin(phi);
  const double cos_phi = std::cos(phi);

  const double temp = (u + ml * phidot * phidot * sin_phi) / total_mass;
  const double phi_acc = (p.gravity * sin_phi - cos_phi * temp) /
                         (p.pole_half_length *
                          (4.0 / 3.0 - p.pole_mass * cos_phi * cos_phi / total_mass));
  const double p_acc = temp - ml * phi_acc * cos_phi / total_mass;

  StateVector dx;
  dx[0] = pdot;
  dx[1] = phidot;
  dx[2] = p_acc;
  dx[3] = phi_acc;
  return dx;
}

// One zero-order-hold step of length dt with classic fourth-order Runge-Kutta.
[[nodiscard]] inline StateVector cartpole_step_dt(const StateVector& x, double u,
                                                  const CartPoleParams& p, double dt) {
  const StateVector k1 = cartpole_dynamics(x, u, p);
  const StateVector k2 = cartpole_dynamics(x + 0.5 * dt * k1, u, p);
  const StateVector k3 = cartpole_dynamics(x + 0.5 * dt * k2, u, p);
  const StateVector k4 = cartpole_dynamics(x + dt * k3, u, p);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

[[nodiscard]] inline StateVector cartpole_step(const StateVector& x, double u,
                                               const CartPoleParams& p) {
  return cartpole_step_dt(x, u, p, p.dt);
}

}  // namespace tsibo

#endif  // TSIBO_CARTPOLE_HPP
