#include "magloop/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "magloop/parallel.hpp"

namespace magloop {

  LarmorOrbit larmor_orbit(double E, double B) {
    if (!(E > 0.0) || !(B > 0.0)) throw InvalidOracleInput("larmor_orbit needs E > 0 and B > 0");
    return LarmorOrbit{std::sqrt(E) / B, std::numbers::pi * E / B};
  }

  std::vector<std::pair<double, double>> circle_action_profile(const GeometrySpec& spec, double E,
                                                               const std::vector<double>& r_grid, std::size_t N) {
    if (spec.kind != GeometryKind::plane_constant_B) throw InvalidOracleInput("circle_action_profile needs the plane geometry");
    if (!(E > 0.0)) throw InvalidOracleInput("circle_action_profile needs E > 0");
    int orientation = spec.B >= 0.0 ? -1 : 1;
    std::vector<std::pair<double, double>> out;
    out.reserve(r_grid.size());
    for (double r : r_grid) out.emplace_back(r, action_S(spec, make_circle(ChartPoint::Zero(), r, orientation, N), E));
    return out;
  }

  LoopGradient fd_gradient(const Objective& objective, const Loop& loop, double h) {
    if (!(h > 0.0)) throw InvalidOracleInput("fd_gradient needs h > 0");
    LoopGradient g(loop.size(), Vec2::Zero());
    std::vector<ChartPoint> v = loop.vertices();
    for (std::size_t j = 0; j < v.size(); ++j) {
      for (int c = 0; c < 2; ++c) {
        double keep = v[j][c];
        v[j][c] = keep + h;
        double fp = objective.value(Loop(v, loop.windings()));
        v[j][c] = keep - h;
        double fm = objective.value(Loop(v, loop.windings()));
        v[j][c] = keep;
        g[j][c] = (fp - fm) / (2.0 * h);
      }
    }
    return g;
  }

  LoopGradient fd_gradient(const GeometrySpec& spec, const Loop& loop, const ActionParams& params,
                           const std::optional<CutoffSpec>& cut, double h) {
    return fd_gradient(Objective(spec, params, cut), loop, h);
  }

  Loop random_loop(const GeometrySpec& spec, std::size_t N, std::mt19937_64& rng, bool with_windings) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double two_pi = 2.0 * std::numbers::pi;
    const double scale = spec.is_torus() ? 0.25 : 1.5;
    ChartPoint c(scale * (2.0 * u(rng) - 1.0), scale * (2.0 * u(rng) - 1.0));
    double r = scale * (0.2 + 0.6 * u(rng));
    Winding w;
    if (with_windings && spec.is_torus()) {
      std::uniform_int_distribution<int> wd(-1, 1);
      w = Winding{wd(rng), wd(rng)};
      // Keep the rotation slower than the lattice drift so the curve has no cusps.
      if (w.wx != 0 || w.wy != 0) r *= 0.3;
    }
    struct Mode {
      int k;
      Vec2 a, b;
    };
    std::vector<Mode> modes;
    for (int k = 2; k <= 4; ++k) {
      double amp = 0.15 * r / k;
      modes.push_back(Mode{k, amp * Vec2(2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0), amp * Vec2(2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0)});
    }
    std::vector<ChartPoint> v;
    v.reserve(N);
    for (std::size_t j = 0; j < N; ++j) {
      double s = static_cast<double>(j) / static_cast<double>(N);
      double t = two_pi * s;
      Vec2 p = c + r * Vec2(std::cos(t), std::sin(t)) + s * Vec2(w.wx, w.wy);
      for (const auto& m : modes) p += m.a * std::cos(m.k * t) + m.b * std::sin(m.k * t);
      v.push_back(p);
    }
    if (w.wx == 0 && w.wy == 0) return Loop(std::move(v));
    std::vector<ChartPoint> lifted(v.begin(), v.end());
    lifted.push_back(v.front() + Vec2(w.wx, w.wy));
    return Loop::from_lifted(lifted, w);
  }

  GradCheckReport gradient_check_suite(std::uint64_t seed, int loops, std::size_t N, double h) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GradCheckReport rep;
    for (int i = 0; i < loops; ++i) {
      GeometrySpec spec;
      switch (i % 3) {
        case 0:
          spec = GeometrySpec::plane(0.5 + 1.5 * u(rng));
          break;
        case 1:
          spec = GeometrySpec::flat_torus(0.5 + 2.5 * u(rng), 1 + static_cast<int>(2.0 * u(rng)));
          break;
        default:
          spec = GeometrySpec::conformal_torus(0.5 + 2.5 * u(rng), 1 + static_cast<int>(2.0 * u(rng)), 0.1 + 0.4 * u(rng));
          break;
      }
      ActionParams params;
      params.E = 0.25 + 2.0 * u(rng);
      params.eps = 0.1 * u(rng);
      params.tau = 0.9 * u(rng);
      Loop loop = random_loop(spec, N, rng, spec.is_torus() && u(rng) < 0.5);

      std::optional<CutoffSpec> cut;
      if (i % 3 == 2) {
        double s0 = action_S_eps_tau(spec, loop, params.with(0.0, params.tau));
        if (s0 > 0.0) cut = CutoffSpec{15.0 * s0, 0.1};
      }
      Objective obj(spec, params, cut);
      LoopGradient g = obj.gradient(loop);
      LoopGradient fd = fd_gradient(obj, loop, h);
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        num += (g[j] - fd[j]).squaredNorm();
        den += fd[j].squaredNorm();
      }
      double rel = std::sqrt(num) / std::max(std::sqrt(den), std::numeric_limits<double>::min());
      rep.rel_errors.push_back(rel);
      rep.max_rel_error = std::max(rep.max_rel_error, rel);
    }
    return rep;
  }

  namespace {

    FlowState launch(const GeometrySpec& spec, const ChartPoint& p, double angle, double E) {
      double lambda = std::sqrt(metric_eval(spec, p)(0, 0));
      return FlowState{p, std::sqrt(2.0 * E) / lambda * Vec2(std::cos(angle), std::sin(angle))};
    }

    FlowState flow_to(const GeometrySpec& spec, FlowState s, double T, double max_step) {
      int n = std::max(1, static_cast<int>(std::ceil(T / max_step)));
      double h = T / n;
      for (int i = 0; i < n; ++i) s = rk4_step(spec, s, h);
      return s;
    }

    // z = (x0, y0, angle, T)
    Eigen::Vector4d closure(const GeometrySpec& spec, const Eigen::Vector4d& z, double E, double max_step) {
      FlowState s0 = launch(spec, ChartPoint(z[0], z[1]), z[2], E);
      FlowState s1 = flow_to(spec, s0, z[3], max_step);
      double speed = std::sqrt(s0.v.dot(s0.v));
      Vec2 dp = s1.p - s0.p;
      Vec2 dv = (s1.v - s0.v) / speed;
      return Eigen::Vector4d(dp.x(), dp.y(), dv.x(), dv.y());
    }

    std::optional<double> first_return(const GeometrySpec& spec, const FlowState& s0, double period_cap, double max_step) {
      int n = std::max(8, static_cast<int>(std::ceil(period_cap / max_step)));
      double h = period_cap / n;
      double speed = s0.v.norm();
      FlowState s = s0;
      double far = 0.0;
      double prev2 = std::numeric_limits<double>::infinity(), prev = prev2;
      for (int i = 1; i <= n; ++i) {
        s = rk4_step(spec, s, h);
        double d = std::hypot((s.p - s0.p).norm(), (s.v - s0.v).norm() / speed * far);
        far = std::max(far, (s.p - s0.p).norm());
        // A local minimum of the distance, well below the excursion so far, marks a close return.
        if (i >= 3 && prev < prev2 && prev <= d && prev < 0.25 * far) return (i - 1) * h;
        prev2 = prev;
        prev = d;
      }
      return std::nullopt;
    }

  }  // namespace

  std::vector<OrbitCandidate> shooting_periodic(const GeometrySpec& spec, double E, const std::vector<ShootingSeed>& seeds,
                                                double period_cap, double tol, const ShootingSettings& settings) {
    if (!(E > 0.0)) throw InvalidOracleInput("shooting_periodic needs E > 0");
    if (!(period_cap > 0.0)) throw InvalidOracleInput("shooting_periodic needs period_cap > 0");

    std::vector<std::optional<OrbitCandidate>> found(seeds.size());
    parallel_for(seeds.size(), settings.threads, [&](std::size_t idx) {
      const ShootingSeed& seed = seeds[idx];
      FlowState s0 = launch(spec, seed.p, seed.angle, E);
      std::optional<double> t_ret = first_return(spec, s0, period_cap, settings.max_step);
      if (!t_ret) return;

      Eigen::Vector4d z(seed.p.x(), seed.p.y(), seed.angle, *t_ret);
      Eigen::Vector4d r = closure(spec, z, E, settings.max_step);
      for (int it = 0; it < settings.newton_iters && r.norm() > 0.1 * tol; ++it) {
        Eigen::Matrix4d J;
        for (int c = 0; c < 4; ++c) {
          double dz = 1e-7 * (c == 3 ? std::max(1.0, z[3]) : 1.0);
          Eigen::Vector4d zp = z, zm = z;
          zp[c] += dz;
          zm[c] -= dz;
          J.col(c) = (closure(spec, zp, E, settings.max_step) - closure(spec, zm, E, settings.max_step)) / (2.0 * dz);
        }
        Eigen::JacobiSVD<Eigen::Matrix4d> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
        svd.setThreshold(1e-8);
        Eigen::Vector4d step = -svd.solve(r);
        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 30; ++bt) {
          Eigen::Vector4d zt = z + alpha * step;
          if (zt[3] > 0.0 && zt[3] <= period_cap) {
            Eigen::Vector4d rt = closure(spec, zt, E, settings.max_step);
            if (rt.norm() < r.norm()) {
              z = zt;
              r = rt;
              accepted = true;
              break;
            }
          }
          alpha *= 0.5;
        }
        if (!accepted) break;
      }
      if (!(r.norm() < tol)) return;

      OrbitCandidate c;
      c.initial = launch(spec, ChartPoint(z[0], z[1]), z[2], E);
      c.period = z[3];
      c.closure_residual = r.norm();
      c.energy = kinetic_energy(spec, c.initial);
      c.seed_index = idx;
      found[idx] = c;
    });

    std::vector<OrbitCandidate> out;
    std::vector<Loop> loops;
    for (const auto& f : found) {
      if (!f) continue;
      Loop loop = orbit_to_loop(spec, *f, 64, settings.max_step);
      bool duplicate = false;
      for (const auto& other : loops) {
        if (aligned_loop_distance(spec, loop, other, 64) < settings.dedup_tol) {
          duplicate = true;
          break;
        }
      }
      if (duplicate) continue;
      loops.push_back(std::move(loop));
      out.push_back(*f);
    }
    return out;
  }

  Loop orbit_to_loop(const GeometrySpec& spec, const OrbitCandidate& orbit, std::size_t N, double max_step) {
    int sub = std::max(1, static_cast<int>(std::ceil(orbit.period / (static_cast<double>(N) * max_step))));
    double h = orbit.period / static_cast<double>(N * static_cast<std::size_t>(sub));
    std::vector<ChartPoint> v;
    v.reserve(N);
    FlowState s = orbit.initial;
    for (std::size_t j = 0; j < N; ++j) {
      v.push_back(s.p);
      for (int k = 0; k < sub; ++k) s = rk4_step(spec, s, h);
    }
    return Loop(std::move(v));
  }

  double aligned_loop_distance(const GeometrySpec& spec, const Loop& a, const Loop& b, std::size_t n) {
    Loop ra = resample_arclength(spec, a, n);
    Loop rb = resample_arclength(spec, b, n);
    Vec2 ca = Vec2::Zero(), cb = Vec2::Zero();
    for (const auto& v : ra.vertices()) ca += v;
    for (const auto& v : rb.vertices()) cb += v;
    Vec2 shift = (ca - cb) / static_cast<double>(n);
    Vec2 lattice = spec.is_torus() ? Vec2(std::round(shift.x()), std::round(shift.y())) : Vec2::Zero();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      double worst = 0.0;
      for (std::size_t j = 0; j < n && worst < best; ++j) {
        worst = std::max(worst, (ra.vertex(j) - rb.vertex((j + k) % n) - lattice).norm());
      }
      best = std::min(best, worst);
    }
    return best;
  }

  nlohmann::json orbit_to_json(const OrbitCandidate& orbit) {
    return nlohmann::json{{"x0", orbit.initial.p.x()},
                          {"y0", orbit.initial.p.y()},
                          {"vx0", orbit.initial.v.x()},
                          {"vy0", orbit.initial.v.y()},
                          {"period", orbit.period},
                          {"closure_residual", orbit.closure_residual},
                          {"energy", orbit.energy},
                          {"seed_index", orbit.seed_index}};
  }

}  // namespace magloop
