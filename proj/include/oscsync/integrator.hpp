#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "oscsync/error.hpp"

namespace oscsync {

/// One classical fourth-order Runge-Kutta step of y' = f(t, y).
template <class State, class Rhs>
State rk4_step(const Rhs& f, double t, const State& y, double h) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * h, State(y + (0.5 * h) * k1));
  const State k3 = f(t + 0.5 * h, State(y + (0.5 * h) * k2));
  const State k4 = f(t + h, State(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Integrates `steps` uniform steps from (t0, y0). `observe(k, t_k, y_k)` is
/// called for every grid point including the initial one. Throws Divergence
/// as soon as a state component is not finite.
template <class State, class Rhs, class Observer>
State integrate_fixed(const Rhs& f, State y, double t0, double h, std::size_t steps,
                      Observer&& observe) {
  observe(std::size_t{0}, t0, y);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_prev = t0 + static_cast<double>(k - 1) * h;
    y = rk4_step(f, t_prev, y, h);
    const double t = t0 + static_cast<double>(k) * h;
    if (!y.allFinite()) {
      throw Divergence("state became non-finite at t = " + std::to_string(t), t);
    }
    observe(k, t, y);
  }
  return y;
}

}  // namespace oscsync
