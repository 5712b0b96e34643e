#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "json.hpp"
#include "magloop/functional.hpp"
#include "magloop/loop.hpp"

/**
 * \file minimax.hpp
 *
 * @brief Throwing-out families and numerical mountain-pass levels.
 *
 * A family starts at a one-point curve and ends at a loop with negative action. The minimax level is
 * estimated by deforming the family: every interior member takes a few descent steps, the members are
 * re-spaced evenly along the family, and the iteration is accepted only if the family maximum does not
 * rise. The top member is then climbed to the saddle and polished with Newton's method.
 */

namespace magloop {

  class NoNegativeLoopFound : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
  };

  /// path: P is a point; cylinder: P is a circle of base points.
  enum class FamilyShape { path, cylinder };

  std::string to_string(FamilyShape shape);
  FamilyShape family_shape_from_string(const std::string& name);

  /**
   * @brief Discretised throwing-out map P x [0,1] -> loops.
   *
   * rows[i][s] is the loop at base point i and sweep parameter s. A path has a single row.
   */
  struct LoopFamily {
    FamilyShape shape = FamilyShape::path;
    std::vector<std::vector<Loop>> rows;
    /// Largest allowed vertexwise distance between neighbouring members.
    double mesh_bound = 0.0;

    std::size_t row_count() const { return rows.size(); }
    std::size_t row_size() const { return rows.empty() ? 0 : rows.front().size(); }
    std::size_t loop_size() const { return rows.empty() ? 0 : rows.front().front().size(); }

    /// Throws std::invalid_argument when a row does not start at a one-point curve or sizes disagree.
    void validate() const;
  };

  /// Inserts interpolated members wherever neighbours are further apart than `mesh_bound`.
  LoopFamily refine_family(const LoopFamily& family, double mesh_bound);

  struct DescentSettings {
    /// Outer iterations of the family deformation (or descent steps for a single loop).
    int max_iters = 60;
    /// Descent steps per member per outer iteration.
    int inner_iters = 10;
    double grad_tol = 1e-8;
    double step0 = 1e-3;
    double backtrack = 0.5;
    int newton_iters = 30;
    std::size_t family_size = 33;
    std::size_t family_rows = 1;
    std::uint64_t rng_seed = 0;
    int threads = 1;
    /// Relative level change below which the deformation is considered settled.
    double stall_tol = 1e-10;

    void validate() const;

    bool operator==(const DescentSettings&) const = default;
  };

  struct DescentResult {
    Loop loop;
    double grad_norm = 0.0;
    double value = 0.0;
    int iterations = 0;
    /// Last accepted step length, reusable as the next starting step.
    double step = 0.0;
    /// Objective after every accepted step (descent mode only).
    std::vector<double> values;
  };

  struct MinimaxResult {
    double level = 0.0;
    Loop argmax_loop;
    double grad_norm_at_argmax = 0.0;
    std::vector<std::pair<int, double>> history;
    bool converged = false;
    LoopFamily family;
    std::size_t argmax_row = 0;
    std::size_t argmax_index = 0;
  };

  /**
   * @brief Throwing-out family for energy E.
   *
   * The sweep grows circles around the point of strongest field with the orientation that makes the
   * flux negative, until the action is negative. For a cylinder the base points run once around the
   * vertical cycle of the torus through that point. The rng_seed fixes the angular phase of the vertices.
   */
  LoopFamily init_sweep_family(const GeometrySpec& spec, double E, FamilyShape shape, std::size_t M, std::size_t N,
                               std::uint64_t rng_seed, std::size_t M_P = 1);

  /**
   * @brief Backtracking descent of one loop.
   *
   * Without `climb` this is Armijo descent and the accepted values never increase. With a unit direction
   * `climb` every round first maximises along it and then descends on its orthogonal complement, which
   * drives the loop towards a saddle whose unstable direction is close to `climb`.
   */
  DescentResult descend_loop(const Objective& objective, const Loop& loop, const DescentSettings& settings,
                             const std::optional<LoopGradient>& climb = std::nullopt,
                             std::optional<double> initial_step = std::nullopt);

  DescentResult descend_loop(const GeometrySpec& spec, const Loop& loop, const ActionParams& params,
                             const std::optional<CutoffSpec>& cut, const DescentSettings& settings,
                             const std::optional<LoopGradient>& climb = std::nullopt);

  /// Newton iteration on the gradient with a finite-difference Hessian; symmetry zero modes are projected out.
  DescentResult refine_saddle(const Objective& objective, const Loop& loop, const DescentSettings& settings);

  MinimaxResult mountain_pass(const GeometrySpec& spec, const LoopFamily& family, const ActionParams& params,
                              const std::optional<CutoffSpec>& cut, const DescentSettings& settings);

  /// Max over every row of the cylinder; one row reduces to mountain_pass.
  MinimaxResult family_minimax(const GeometrySpec& spec, const LoopFamily& family, const ActionParams& params,
                               const std::optional<CutoffSpec>& cut, const DescentSettings& settings);

  /// Dispatches on the family shape.
  MinimaxResult run_minimax(const GeometrySpec& spec, const LoopFamily& family, const ActionParams& params,
                            const std::optional<CutoffSpec>& cut, const DescentSettings& settings);

  /// Cutoff-free run whose level becomes c_ref; returns the cutoff and the run (for warm starts).
  std::pair<CutoffSpec, MinimaxResult> bootstrap_cutoff(const GeometrySpec& spec, const LoopFamily& family,
                                                        const ActionParams& params, const DescentSettings& settings,
                                                        double beta_frac);

  /// Unit vector along the family at member `index` of `row`.
  LoopGradient family_tangent(const std::vector<Loop>& row, std::size_t index);

  nlohmann::json minimax_to_json(const MinimaxResult& result);

}  // namespace magloop
