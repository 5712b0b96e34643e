#pragma once

#include <optional>
#include <vector>

#include "magloop/geometry.hpp"
#include "magloop/loop.hpp"

/**
 * \file functional.hpp
 *
 * @brief Discrete magnetic actions on polygonal loops and their exact gradients.
 *
 * With t_j = j / N and velocities N d_j, every action is a sum over edges with the metric and the
 * potential evaluated at edge midpoints:
 *
 *     S_E          = sum_j sqrt(E q_j) + A(m_j) . d_j                       q_j = d_j^T g(m_j) d_j
 *     S_{eps,tau}  = sum_j eps N E q_j + N^tau (E q_j)^{(1+tau)/2} + A(m_j) . d_j
 *     F            = f(S_{0,tau}) S_{eps,tau}
 *
 * The energy enters through the rescaled metric E g, so S_{0,0} coincides with S_E.
 */

namespace magloop {

  struct ActionParams {
    double E = 1.0;
    double eps = 0.0;
    double tau = 0.0;
    /// Floor on the speed inside |v|^(tau - 1); only reached on (nearly) collapsed edges.
    double delta = 1e-9;

    /// Throws std::invalid_argument unless E > 0, eps >= 0, 0 <= tau < 1 and delta >= 0.
    void validate() const;

    ActionParams with(double new_eps, double new_tau) const {
      ActionParams p = *this;
      p.eps = new_eps;
      p.tau = new_tau;
      return p;
    }
  };

  /// Ramp thresholds lo = c_ref / 20 and hi = c_ref / 10, plus the level margin beta.
  struct CutoffSpec {
    double c_ref = 1.0;
    double beta = 0.1;

    double lo() const { return c_ref / 20.0; }
    double hi() const { return c_ref / 10.0; }

    static CutoffSpec from_level(double c_ref, double beta_frac);
  };

  using LoopGradient = std::vector<Vec2>;

  /// Discrete line integral of A along the loop.
  double circulation(const GeometrySpec& spec, const Loop& loop);

  double action_S(const GeometrySpec& spec, const Loop& loop, double E);

  double action_S_eps_tau(const GeometrySpec& spec, const Loop& loop, const ActionParams& params);

  /// Cubic smoothstep: 0 below lo, 1 above hi, C^1.
  double cutoff_f(double x, const CutoffSpec& cut);
  double cutoff_df(double x, const CutoffSpec& cut);

  double action_F_cutoff(const GeometrySpec& spec, const Loop& loop, const ActionParams& params, const CutoffSpec& cut);

  /// (1/N) sum_j |N d_j|^m in the metric E g; Hoelder gives L^m <= this for m >= 1.
  double speed_power_mean(const GeometrySpec& spec, const Loop& loop, double m, double E = 1.0);

  struct ValueGradient {
    double value = 0.0;
    LoopGradient gradient;
  };

  /// S_{eps,tau} and its exact derivative with respect to every vertex coordinate.
  ValueGradient eval_S_eps_tau(const GeometrySpec& spec, const Loop& loop, const ActionParams& params);

  /**
   * @brief The functional minimax runs on: S_{eps,tau}, or the cutoff functional F when a cutoff is given.
   */
  class Objective {
  public:
    Objective(GeometrySpec spec, ActionParams params, std::optional<CutoffSpec> cut = std::nullopt);

    const GeometrySpec& spec() const { return spec_; }
    const ActionParams& params() const { return params_; }
    const std::optional<CutoffSpec>& cutoff() const { return cut_; }

    double value(const Loop& loop) const;
    ValueGradient value_gradient(const Loop& loop) const;
    LoopGradient gradient(const Loop& loop) const { return value_gradient(loop).gradient; }

  private:
    GeometrySpec spec_;
    ActionParams params_;
    std::optional<CutoffSpec> cut_;
  };

  /// Gradient of S_{eps,tau} (cut empty) or of F.
  LoopGradient grad_action(const GeometrySpec& spec, const Loop& loop, const ActionParams& params,
                           const std::optional<CutoffSpec>& cut = std::nullopt);

  /// Euclidean norm over all 2N components.
  double gradient_norm(const LoopGradient& g);

  /// Moves every vertex of `loop` by `scale * dir`.
  Loop displace(const Loop& loop, const LoopGradient& dir, double scale);

}  // namespace magloop
