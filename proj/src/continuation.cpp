#include "magloop/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace magloop {

  void Schedule::validate() const {
    if (!(eps0 > 0.0)) throw std::invalid_argument("eps0 must be positive");
    if (!(tau0 >= 0.0 && tau0 < 1.0)) throw std::invalid_argument("tau must satisfy 0 <= tau < 1");
    if (tau0 == 0.0) throw std::invalid_argument("tau0 must be positive");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  }

  std::pair<double, double> Schedule::at(std::size_t n) const {
    const auto steps = static_cast<std::size_t>(n_steps);
    if (!nested) return {eps0 * std::pow(rho, static_cast<double>(n)), tau0 * std::pow(rho, static_cast<double>(n))};
    if (n < steps) return {eps0, tau0 * std::pow(rho, static_cast<double>(n))};
    return {eps0 * std::pow(rho, static_cast<double>(n - steps + 1)), 0.0};
  }

  std::string to_string(OutcomeCase c) {
    switch (c) {
      case OutcomeCase::converged:
        return "converged";
      case OutcomeCase::diverging:
        return "diverging";
      case OutcomeCase::inconclusive:
        return "inconclusive";
    }
    return "inconclusive";
  }

  std::pair<double, double> implied_energy(double nu, double E) {
    double s = 1.0 + 2.0 * nu;
    return {E * s, E * s * s};
  }

  ContinuationRecord make_record(const GeometrySpec& spec, double E, double eps, double tau, double level, const Loop& loop) {
    ContinuationRecord r;
    r.eps = eps;
    r.tau = tau;
    r.level = level;
    r.loop = loop;
    r.l = std::sqrt(E) * length(spec, loop);
    r.nu = eps * r.l;
    std::tie(r.E_paper, r.E_exact) = implied_energy(r.nu, E);
    return r;
  }

  Classification classify_outcome(const std::vector<ContinuationRecord>& records, double E, double residual_tol) {
    Classification c;
    if (records.size() < 3) {
      c.reason = "fewer than 3 records";
      return c;
    }
    const auto* a = &records[records.size() - 3];
    const auto* b = &records[records.size() - 2];
    const auto* d = &records.back();

    double lo = std::min({a->l, b->l, d->l});
    double hi = std::max({a->l, b->l, d->l});
    bool bounded = lo > 0.0 && hi <= 1.01 * lo;
    if (bounded && d->residual.max_res < residual_tol) {
      c.kind = OutcomeCase::converged;
      c.limit_loop = d->loop;
      c.final_residual = d->residual;
      return c;
    }

    bool growing = a->l < b->l && b->l < d->l;
    bool nu_falling = a->nu > b->nu && b->nu > d->nu;
    if (growing && nu_falling) {
      c.kind = OutcomeCase::diverging;
      for (const auto& r : records) {
        auto [ep, ee] = implied_energy(r.nu, E);
        c.ladder.push_back(EnergyRung{ep, ee, r.loop});
      }
      return c;
    }

    if (bounded) {
      c.reason = "lengths settled but final residual " + std::to_string(d->residual.max_res) + " is not below " +
                 std::to_string(residual_tol);
    } else {
      c.reason = "lengths neither settled within 1% nor grew with falling eps * l over the last 3 records";
    }
    return c;
  }

  ContinuationResult continuation_run(const GeometrySpec& spec, double E, FamilyShape shape, const Schedule& schedule,
                                      const DescentSettings& settings, const ContinuationSettings& cs) {
    schedule.validate();
    settings.validate();
    if (!(cs.beta_frac > 0.0)) throw std::invalid_argument("beta_frac must be positive");

    LoopFamily family = init_sweep_family(spec, E, shape, settings.family_size, cs.n_vertices, settings.rng_seed, cs.M_P);

    ContinuationResult out;
    ActionParams base;
    base.E = E;
    base.delta = cs.delta;

    for (std::size_t n = 0; n < schedule.size(); ++n) {
      auto [eps, tau] = schedule.at(n);
      ActionParams params = base.with(eps, tau);
      params.validate();
      if (n == 0) {
        auto [cut, free_run] = bootstrap_cutoff(spec, family, params, settings, cs.beta_frac);
        out.cutoff = cut;
        family = free_run.family;
      }
      MinimaxResult mm = run_minimax(spec, family, params, out.cutoff, settings);
      family = mm.family;

      ContinuationRecord rec = make_record(spec, E, eps, tau, mm.level, mm.argmax_loop);
      rec.converged = mm.converged;
      rec.grad_norm = mm.grad_norm_at_argmax;
      if (!mm.argmax_loop.is_point()) {
        rec.residual = el_residual_SE(spec, mm.argmax_loop, E);
        rec.residual_deq = el_residual_deq(spec, mm.argmax_loop, params);
      }
      out.records.push_back(std::move(rec));
      out.minimax.push_back(std::move(mm));
    }

    out.classification = classify_outcome(out.records, E, cs.residual_tol);
    out.nu_trend_ok = true;
    for (std::size_t n = out.records.size() / 2 + 1; n < out.records.size(); ++n) {
      if (out.records[n].nu > out.records[n - 1].nu) out.nu_trend_ok = false;
    }
    return out;
  }

  nlohmann::json residual_to_json(const ResidualReport& r) {
    return nlohmann::json{{"max_res", r.max_res}, {"mean_res", r.mean_res}, {"speed_cv", r.speed_cv}};
  }

  nlohmann::json record_to_json(const ContinuationRecord& record, std::size_t index) {
    return nlohmann::json{{"step", index},
                          {"eps", record.eps},
                          {"tau", record.tau},
                          {"level", record.level},
                          {"l", record.l},
                          {"nu", record.nu},
                          {"E_paper", record.E_paper},
                          {"E_exact", record.E_exact},
                          {"residual", residual_to_json(record.residual)},
                          {"residual_deq", residual_to_json(record.residual_deq)},
                          {"converged", record.converged},
                          {"grad_norm", record.grad_norm},
                          {"loop_file", "step_" + std::to_string(index) + ".csv"}};
  }

  nlohmann::json classification_to_json(const Classification& c) {
    nlohmann::json j{{"case", to_string(c.kind)}};
    switch (c.kind) {
      case OutcomeCase::converged:
        j["final_residual"] = residual_to_json(c.final_residual);
        break;
      case OutcomeCase::diverging: {
        nlohmann::json ladder = nlohmann::json::array();
        for (const auto& r : c.ladder) ladder.push_back({{"E_paper", r.E_paper}, {"E_exact", r.E_exact}});
        j["ladder"] = ladder;
        break;
      }
      case OutcomeCase::inconclusive:
        j["reason"] = c.reason;
        break;
    }
    return j;
  }

}  // namespace magloop
