#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "magloop/dynamics.hpp"
#include "magloop/minimax.hpp"

/**
 * \file continuation.hpp
 *
 * @brief Drives (eps, tau) towards zero with warm starts and sorts the outcome into the two cases
 * (bounded lengths with a limit extremal, or lengths running off with eps * l -> 0).
 */

namespace magloop {

  struct Schedule {
    double eps0 = 1e-2;
    double tau0 = 1e-2;
    double rho = 0.5;
    int n_steps = 8;
    /// Shrink tau at fixed eps0 first, then eps with tau = 0.
    bool nested = false;

    void validate() const;
    std::size_t size() const { return nested ? 2 * static_cast<std::size_t>(n_steps) : static_cast<std::size_t>(n_steps); }
    /// (eps, tau) of step n.
    std::pair<double, double> at(std::size_t n) const;
  };

  struct ContinuationRecord {
    double eps = 0.0;
    double tau = 0.0;
    double level = 0.0;
    Loop loop;
    /// Length of the loop in the metric E g, i.e. the constant speed of its arc-length representative.
    double l = 0.0;
    double nu = 0.0;
    double E_paper = 0.0;
    double E_exact = 0.0;
    ResidualReport residual;
    ResidualReport residual_deq;
    bool converged = false;
    double grad_norm = 0.0;
  };

  struct EnergyRung {
    double E_paper = 0.0;
    double E_exact = 0.0;
    Loop loop;
  };

  enum class OutcomeCase { converged, diverging, inconclusive };

  std::string to_string(OutcomeCase c);

  struct Classification {
    OutcomeCase kind = OutcomeCase::inconclusive;
    std::optional<Loop> limit_loop;
    ResidualReport final_residual;
    std::vector<EnergyRung> ladder;
    std::string reason;
  };

  /// (E (1 + 2 nu), E (1 + 2 nu)^2).
  std::pair<double, double> implied_energy(double nu, double E);

  /// Fills l, nu and both energies from the loop and eps.
  ContinuationRecord make_record(const GeometrySpec& spec, double E, double eps, double tau, double level, const Loop& loop);

  Classification classify_outcome(const std::vector<ContinuationRecord>& records, double E, double residual_tol = 1e-2);

  struct ContinuationResult {
    std::vector<ContinuationRecord> records;
    std::vector<MinimaxResult> minimax;
    Classification classification;
    CutoffSpec cutoff;
    /// nu non-increasing over the second half of the run.
    bool nu_trend_ok = false;
  };

  struct ContinuationSettings {
    std::size_t n_vertices = 128;
    std::size_t M_P = 1;
    double delta = 1e-9;
    double beta_frac = 0.1;
    double residual_tol = 1e-2;
  };

  /**
   * @brief Runs the schedule. The cutoff reference level comes from a cutoff-free run at the first step;
   * each later step starts from the deformed family of the previous one.
   */
  ContinuationResult continuation_run(const GeometrySpec& spec, double E, FamilyShape shape, const Schedule& schedule,
                                      const DescentSettings& settings, const ContinuationSettings& cs = {});

  nlohmann::json record_to_json(const ContinuationRecord& record, std::size_t index);
  nlohmann::json classification_to_json(const Classification& c);
  nlohmann::json residual_to_json(const ResidualReport& r);

}  // namespace magloop
