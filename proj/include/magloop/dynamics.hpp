#pragma once

#include <vector>

#include "magloop/functional.hpp"
#include "magloop/geometry.hpp"
#include "magloop/loop.hpp"

/**
 * \file dynamics.hpp
 *
 * @brief Lorentz flow and Euler-Lagrange residuals of the magnetic actions.
 *
 * The flow solves  v' + Gamma(v, v) = g^{-1} F v.  Residuals are computed on arc-length loops:
 *
 *     r = sqrt(E) DT/ds - g^{-1} F T / D
 *
 * with D = 1 for S_E and D = 2 eps l + (1 + tau) l^tau for S_{eps,tau}, l the length in the metric E g.
 */

namespace magloop {

  struct FlowState {
    ChartPoint p = ChartPoint::Zero();
    Vec2 v = Vec2::Zero();
  };

  struct ResidualReport {
    std::vector<double> per_vertex;
    double max_res = 0.0;
    double mean_res = 0.0;
    double speed_cv = 0.0;
  };

  double kinetic_energy(const GeometrySpec& spec, const FlowState& s);

  /// Time derivative of (p, v) under the Lorentz flow.
  FlowState lorentz_rhs(const GeometrySpec& spec, const FlowState& s);

  /// One classical fourth-order Runge-Kutta step.
  FlowState rk4_step(const GeometrySpec& spec, const FlowState& s, double h);

  /// steps + 1 states at t = i T / steps.
  std::vector<FlowState> integrate_flow(const GeometrySpec& spec, const FlowState& s0, double T, int steps);

  /// Throws DegenerateLoop on one-point curves; loops with speed CV >= 0.1 are resampled first.
  ResidualReport el_residual_SE(const GeometrySpec& spec, const Loop& loop, double E);

  ResidualReport el_residual_deq(const GeometrySpec& spec, const Loop& loop, const ActionParams& params);

  /// Trajectory CSV with header `t,x,y,vx,vy,energy`.
  std::string trajectory_to_csv(const GeometrySpec& spec, const std::vector<FlowState>& states, double T);

}  // namespace magloop
