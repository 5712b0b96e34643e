#include "magloop/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace magloop {

  double kinetic_energy(const GeometrySpec& spec, const FlowState& s) {
    return 0.5 * s.v.dot(metric_eval(spec, s.p) * s.v);
  }

  FlowState lorentz_rhs(const GeometrySpec& spec, const FlowState& s) {
    Christoffel gamma = christoffel(spec, s.p);
    Vec2 geodesic(s.v.dot(gamma[0] * s.v), s.v.dot(gamma[1] * s.v));
    Vec2 lorentz = metric_eval(spec, s.p).inverse() * (field_F(spec, s.p) * s.v);
    return FlowState{s.v, lorentz - geodesic};
  }

  FlowState rk4_step(const GeometrySpec& spec, const FlowState& s, double h) {
    auto shifted = [&](const FlowState& k, double c) { return FlowState{s.p + c * k.p, s.v + c * k.v}; };
    FlowState k1 = lorentz_rhs(spec, s);
    FlowState k2 = lorentz_rhs(spec, shifted(k1, 0.5 * h));
    FlowState k3 = lorentz_rhs(spec, shifted(k2, 0.5 * h));
    FlowState k4 = lorentz_rhs(spec, shifted(k3, h));
    return FlowState{s.p + (h / 6.0) * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
                     s.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
  }

  std::vector<FlowState> integrate_flow(const GeometrySpec& spec, const FlowState& s0, double T, int steps) {
    if (steps < 1) throw std::invalid_argument("integrate_flow needs steps >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("integrate_flow needs T > 0");
    double h = T / steps;
    std::vector<FlowState> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    out.push_back(s0);
    for (int i = 0; i < steps; ++i) out.push_back(rk4_step(spec, out.back(), h));
    return out;
  }

  namespace {

    ResidualReport curvature_balance(const GeometrySpec& spec, const Loop& input, double E, double eps, double tau) {
      if (input.is_point()) throw DegenerateLoop("residual of a one-point curve is undefined");
      Loop loop = speed_cv(spec, input) < 0.1 ? input : resample_arclength(spec, input, input.size());

      const std::size_t n = loop.size();
      std::vector<double> h = edge_lengths(spec, loop);
      if (*std::min_element(h.begin(), h.end()) <= 0.0) throw DegenerateLoop("loop has a collapsed edge");

      double ell = 0.0;
      for (double x : h) ell += x;
      ell *= std::sqrt(E);
      const double denom = 2.0 * eps * ell + (1.0 + tau) * std::pow(ell, tau);
      const double root_E = std::sqrt(E);

      ResidualReport rep;
      rep.per_vertex.resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        std::size_t prev = j == 0 ? n - 1 : j - 1;
        Vec2 d_in = loop.edge(prev), d_out = loop.edge(j);
        double h_in = h[prev], h_out = h[j];
        const ChartPoint& p = loop.vertex(j);

        Vec2 tangent = (d_in + d_out) / (h_in + h_out);
        Vec2 second = 2.0 * (d_out / h_out - d_in / h_in) / (h_in + h_out);
        Christoffel gamma = christoffel(spec, p);
        Vec2 accel = second + Vec2(tangent.dot(gamma[0] * tangent), tangent.dot(gamma[1] * tangent));

        Mat2 g = metric_eval(spec, p);
        Vec2 r = root_E * accel - g.inverse() * (field_F(spec, p) * tangent) / denom;
        rep.per_vertex[j] = std::sqrt(r.dot(g * r));
      }
      rep.max_res = *std::max_element(rep.per_vertex.begin(), rep.per_vertex.end());
      double sum = 0.0;
      for (double x : rep.per_vertex) sum += x;
      rep.mean_res = sum / static_cast<double>(n);
      rep.speed_cv = speed_cv(spec, loop);
      return rep;
    }

  }  // namespace

  ResidualReport el_residual_SE(const GeometrySpec& spec, const Loop& loop, double E) {
    return curvature_balance(spec, loop, E, 0.0, 0.0);
  }

  ResidualReport el_residual_deq(const GeometrySpec& spec, const Loop& loop, const ActionParams& params) {
    params.validate();
    return curvature_balance(spec, loop, params.E, params.eps, params.tau);
  }

  std::string trajectory_to_csv(const GeometrySpec& spec, const std::vector<FlowState>& states, double T) {
    auto fmt = [](double x) {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof(buf), x);
      return std::string(buf, res.ptr);
    };
    std::ostringstream out;
    out << "t,x,y,vx,vy,energy\n";
    double steps = static_cast<double>(states.size() - 1);
    for (std::size_t i = 0; i < states.size(); ++i) {
      const FlowState& s = states[i];
      out << fmt(T * static_cast<double>(i) / steps) << ',' << fmt(s.p.x()) << ',' << fmt(s.p.y()) << ',' << fmt(s.v.x()) << ','
          << fmt(s.v.y()) << ',' << fmt(kinetic_energy(spec, s)) << '\n';
    }
    return out.str();
  }

}  // namespace magloop
