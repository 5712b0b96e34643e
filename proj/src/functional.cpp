#include "magloop/functional.hpp"

#include <cmath>
#include <stdexcept>

namespace magloop {

  void ActionParams::validate() const {
    if (!(E > 0.0) || !std::isfinite(E)) throw std::invalid_argument("E must be positive");
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be non-negative");
    if (!(tau >= 0.0 && tau < 1.0)) throw std::invalid_argument("tau must satisfy 0 <= tau < 1");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be non-negative");
  }

  CutoffSpec CutoffSpec::from_level(double c_ref, double beta_frac) {
    if (!(c_ref > 0.0)) throw std::invalid_argument("cutoff reference level must be positive");
    if (!(beta_frac > 0.0)) throw std::invalid_argument("beta fraction must be positive");
    return CutoffSpec{c_ref, beta_frac * c_ref};
  }

  double circulation(const GeometrySpec& spec, const Loop& loop) {
    double sum = 0.0;
    for (std::size_t j = 0; j < loop.size(); ++j) sum += potential_eval(spec, loop.midpoint(j)).dot(loop.edge(j));
    return sum;
  }

  double action_S(const GeometrySpec& spec, const Loop& loop, double E) {
    double sum = 0.0;
    for (std::size_t j = 0; j < loop.size(); ++j) {
      Vec2 d = loop.edge(j);
      ChartPoint m = loop.midpoint(j);
      sum += std::sqrt(E * d.dot(metric_eval(spec, m) * d)) + potential_eval(spec, m).dot(d);
    }
    return sum;
  }

  double action_S_eps_tau(const GeometrySpec& spec, const Loop& loop, const ActionParams& params) {
    return eval_S_eps_tau(spec, loop, params).value;
  }

  double cutoff_f(double x, const CutoffSpec& cut) {
    double lo = cut.lo(), hi = cut.hi();
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    double t = (x - lo) / (hi - lo);
    return t * t * (3.0 - 2.0 * t);
  }

  double cutoff_df(double x, const CutoffSpec& cut) {
    double lo = cut.lo(), hi = cut.hi();
    if (x <= lo || x >= hi) return 0.0;
    double t = (x - lo) / (hi - lo);
    return 6.0 * t * (1.0 - t) / (hi - lo);
  }

  double action_F_cutoff(const GeometrySpec& spec, const Loop& loop, const ActionParams& params, const CutoffSpec& cut) {
    return Objective(spec, params, cut).value(loop);
  }

  double speed_power_mean(const GeometrySpec& spec, const Loop& loop, double m, double E) {
    double n = static_cast<double>(loop.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < loop.size(); ++j) {
      Vec2 d = loop.edge(j);
      double speed = n * std::sqrt(E * d.dot(metric_eval(spec, loop.midpoint(j)) * d));
      sum += std::pow(speed, m);
    }
    return sum / n;
  }

  ValueGradient eval_S_eps_tau(const GeometrySpec& spec, const Loop& loop, const ActionParams& params) {
    const std::size_t n = loop.size();
    const double nd = static_cast<double>(n);
    const double E = params.E, eps = params.eps, tau = params.tau;
    const double n_tau = std::pow(nd, tau);

    ValueGradient out;
    out.gradient.assign(n, Vec2::Zero());
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2 d = loop.edge(j);
      const ChartPoint m = loop.midpoint(j);
      const Mat2 g = E * metric_eval(spec, m);
      const Vec2 A = potential_eval(spec, m);
      const double q = d.dot(g * d);

      // eps N q + N^tau q^{(1+tau)/2}, written through the speed s = N sqrt(q) so the floor is explicit.
      const double speed = nd * std::sqrt(q);
      out.value += eps * nd * q + n_tau * std::pow(q, 0.5 * (1.0 + tau)) + A.dot(d);

      const double s_eff = std::max(speed, params.delta);
      const double q_pow = s_eff > 0.0 ? std::pow(s_eff / nd, tau - 1.0) : 0.0;
      const double dK_dq = eps * nd + 0.5 * (1.0 + tau) * n_tau * q_pow;

      const MatDerivative dg = metric_derivative(spec, m);
      Vec2 grad_d = dK_dq * 2.0 * (g * d) + A;
      Vec2 grad_m = potential_jacobian(spec, m) * d;
      for (int k = 0; k < 2; ++k) grad_m[k] += dK_dq * E * d.dot(dg[k] * d);

      std::size_t next = j + 1 == n ? 0 : j + 1;
      out.gradient[j] += -grad_d + 0.5 * grad_m;
      out.gradient[next] += grad_d + 0.5 * grad_m;
    }
    return out;
  }

  Objective::Objective(GeometrySpec spec, ActionParams params, std::optional<CutoffSpec> cut)
      : spec_(spec), params_(params), cut_(cut) {
    params_.validate();
  }

  double Objective::value(const Loop& loop) const {
    if (!cut_) return eval_S_eps_tau(spec_, loop, params_).value;
    double s0 = eval_S_eps_tau(spec_, loop, params_.with(0.0, params_.tau)).value;
    double f = cutoff_f(s0, *cut_);
    if (f == 0.0) return 0.0;
    return f * eval_S_eps_tau(spec_, loop, params_).value;
  }

  ValueGradient Objective::value_gradient(const Loop& loop) const {
    ValueGradient full = eval_S_eps_tau(spec_, loop, params_);
    if (!cut_) return full;

    ValueGradient base = eval_S_eps_tau(spec_, loop, params_.with(0.0, params_.tau));
    double f = cutoff_f(base.value, *cut_);
    double df = cutoff_df(base.value, *cut_);
    ValueGradient out;
    out.value = f == 0.0 ? 0.0 : f * full.value;
    out.gradient.resize(loop.size());
    for (std::size_t j = 0; j < loop.size(); ++j) out.gradient[j] = f * full.gradient[j] + df * full.value * base.gradient[j];
    return out;
  }

  LoopGradient grad_action(const GeometrySpec& spec, const Loop& loop, const ActionParams& params,
                           const std::optional<CutoffSpec>& cut) {
    return Objective(spec, params, cut).gradient(loop);
  }

  double gradient_norm(const LoopGradient& g) {
    double sum = 0.0;
    for (const auto& v : g) sum += v.squaredNorm();
    return std::sqrt(sum);
  }

  Loop displace(const Loop& loop, const LoopGradient& dir, double scale) {
    std::vector<ChartPoint> v = loop.vertices();
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += scale * dir[j];
    return Loop(std::move(v), loop.windings());
  }

}  // namespace magloop
