#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "json.hpp"
#include "magloop/dynamics.hpp"
#include "magloop/functional.hpp"

/**
 * \file oracle.hpp
 *
 * @brief Ground truth that does not go through the minimax machinery.
 */

namespace magloop {

  class InvalidOracleInput : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
  };

  struct LarmorOrbit {
    double radius = 0.0;
    double action_level = 0.0;
  };

  /// Extremal circle of S_E in the plane: radius sqrt(E)/B, level pi E / B.
  LarmorOrbit larmor_orbit(double E, double B);

  /// (r, S_E) on flux-negative circles centred at the origin. Plane geometry only.
  std::vector<std::pair<double, double>> circle_action_profile(const GeometrySpec& spec, double E,
                                                               const std::vector<double>& r_grid, std::size_t N);

  /// Central differences of the objective per vertex coordinate.
  LoopGradient fd_gradient(const Objective& objective, const Loop& loop, double h);

  LoopGradient fd_gradient(const GeometrySpec& spec, const Loop& loop, const ActionParams& params,
                           const std::optional<CutoffSpec>& cut, double h);

  /**
   * @brief Smooth random loop: a circle of random centre and radius plus a few random Fourier modes.
   *
   * On a torus, `with_windings` adds a random winding in {-1, 0, 1}^2; the chart vertices drift
   * linearly by that lattice vector and the closing edge carries the offset. Wound loops get a smaller
   * radius so they stay free of cusps.
   */
  Loop random_loop(const GeometrySpec& spec, std::size_t N, std::mt19937_64& rng, bool with_windings = false);

  struct GradCheckReport {
    std::vector<double> rel_errors;
    double max_rel_error = 0.0;
  };

  /**
   * @brief Analytic gradient against central differences on random loops.
   *
   * Loops cycle through the three geometry kinds with random parameters, eps, tau and (for every third
   * loop) a cutoff whose ramp contains the loop's S_{0,tau}. Relative L2 error per loop.
   */
  GradCheckReport gradient_check_suite(std::uint64_t seed, int loops, std::size_t N = 64, double h = 1e-6);

  /// Starting point and launch angle (chart angle of the velocity).
  struct ShootingSeed {
    ChartPoint p = ChartPoint::Zero();
    double angle = 0.0;
  };

  struct OrbitCandidate {
    FlowState initial;
    double period = 0.0;
    /// Norm of (position mismatch, velocity mismatch / speed) after one period.
    double closure_residual = 0.0;
    /// Mechanical energy 1/2 g(v, v).
    double energy = 0.0;
    std::size_t seed_index = 0;
  };

  struct ShootingSettings {
    /// Upper bound on the RK4 step.
    double max_step = 5e-4;
    int newton_iters = 40;
    /// Orbits closer than this (after arc-length resampling and best cyclic alignment) are merged.
    double dedup_tol = 1e-3;
    int threads = 1;
  };

  /**
   * @brief Periodic orbits of the Lorentz flow at mechanical energy E (speed sqrt(2E)).
   *
   * Each seed is integrated up to `period_cap`; the first close return of position and velocity is
   * refined by a least-squares Newton iteration on (x0, y0, angle, T). Only contractible closures are
   * sought: positions are compared in the lifted chart. Candidates are ordered by seed index.
   */
  std::vector<OrbitCandidate> shooting_periodic(const GeometrySpec& spec, double E, const std::vector<ShootingSeed>& seeds,
                                                double period_cap, double tol, const ShootingSettings& settings = {});

  /// N samples equally spaced in time over one period (hence in arc length).
  Loop orbit_to_loop(const GeometrySpec& spec, const OrbitCandidate& orbit, std::size_t N, double max_step = 5e-4);

  /// Max vertex distance after resampling both loops to n points, minimised over cyclic alignment.
  double aligned_loop_distance(const GeometrySpec& spec, const Loop& a, const Loop& b, std::size_t n = 128);

  nlohmann::json orbit_to_json(const OrbitCandidate& orbit);

}  // namespace magloop
