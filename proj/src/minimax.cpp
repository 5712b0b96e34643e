#include "magloop/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/tools/minima.hpp>

#include "magloop/parallel.hpp"

namespace magloop {

  std::string to_string(FamilyShape shape) { return shape == FamilyShape::path ? "path" : "cylinder"; }

  FamilyShape family_shape_from_string(const std::string& name) {
    if (name == "path") return FamilyShape::path;
    if (name == "cylinder") return FamilyShape::cylinder;
    throw std::invalid_argument("unknown family shape '" + name + "'");
  }

  void LoopFamily::validate() const {
    if (rows.empty()) throw std::invalid_argument("family has no rows");
    if (shape == FamilyShape::path && rows.size() != 1) throw std::invalid_argument("a path family has exactly one row");
    std::size_t m = rows.front().size(), n = rows.front().front().size();
    if (m < 3) throw std::invalid_argument("family rows need at least 3 members");
    for (const auto& row : rows) {
      if (row.size() != m) throw std::invalid_argument("family rows must have equal length");
      if (!row.front().is_point()) throw std::invalid_argument("family rows must start at a one-point curve");
      for (const auto& loop : row) {
        if (loop.size() != n) throw std::invalid_argument("family loops must share the vertex count");
      }
    }
  }

  LoopFamily refine_family(const LoopFamily& family, double mesh_bound) {
    if (!(mesh_bound > 0.0)) throw std::invalid_argument("mesh bound must be positive");
    LoopFamily out = family;
    out.mesh_bound = mesh_bound;
    for (auto& row : out.rows) {
      std::vector<Loop> refined{row.front()};
      for (std::size_t s = 1; s < row.size(); ++s) {
        double gap = vertex_distance(row[s - 1], row[s]);
        int pieces = static_cast<int>(std::ceil(gap / mesh_bound));
        for (int p = 1; p < pieces; ++p) refined.push_back(Loop::interpolate(row[s - 1], row[s], static_cast<double>(p) / pieces));
        refined.push_back(row[s]);
      }
      row = std::move(refined);
    }
    // Rows must stay equally long; pad shorter rows by re-spacing to the longest.
    std::size_t m = 0;
    for (const auto& row : out.rows) m = std::max(m, row.size());
    for (auto& row : out.rows) {
      while (row.size() < m) {
        std::size_t widest = 1;
        double gap = -1.0;
        for (std::size_t s = 1; s < row.size(); ++s) {
          double d = vertex_distance(row[s - 1], row[s]);
          if (d > gap) {
            gap = d;
            widest = s;
          }
        }
        row.insert(row.begin() + static_cast<std::ptrdiff_t>(widest), Loop::interpolate(row[widest - 1], row[widest], 0.5));
      }
    }
    return out;
  }

  void DescentSettings::validate() const {
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (inner_iters < 1) throw std::invalid_argument("inner_iters must be >= 1");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be positive");
    if (!(step0 > 0.0)) throw std::invalid_argument("step0 must be positive");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw std::invalid_argument("backtrack must lie in (0, 1)");
    if (newton_iters < 0) throw std::invalid_argument("newton_iters must be non-negative");
    if (family_size < 3) throw std::invalid_argument("family_size must be >= 3");
    if (family_rows < 1) throw std::invalid_argument("family_rows must be >= 1");
  }

  namespace {

    constexpr double two_pi = 2.0 * std::numbers::pi;

    struct Anchor {
      ChartPoint center;
      double field = 0.0;   // F_12 at the center
      double lambda = 1.0;  // conformal length factor at the center
    };

    Anchor strongest_field_point(const GeometrySpec& spec) {
      if (!spec.is_torus()) return Anchor{ChartPoint::Zero(), spec.B, 1.0};
      constexpr int samples = 4096;
      Anchor best{ChartPoint::Zero(), 0.0, 1.0};
      double best_eff = -1.0;
      for (int i = 0; i < samples; ++i) {
        ChartPoint p(static_cast<double>(i) / samples, 0.0);
        double eff = std::abs(effective_field(spec, p));
        if (eff > best_eff) {
          best_eff = eff;
          best = Anchor{p, field_F(spec, p)(0, 1), std::sqrt(metric_eval(spec, p)(0, 0))};
        }
      }
      return best;
    }

    Eigen::VectorXd flatten(const LoopGradient& g) {
      Eigen::VectorXd v(2 * static_cast<Eigen::Index>(g.size()));
      for (std::size_t j = 0; j < g.size(); ++j) {
        v[2 * static_cast<Eigen::Index>(j)] = g[j].x();
        v[2 * static_cast<Eigen::Index>(j) + 1] = g[j].y();
      }
      return v;
    }

    LoopGradient unflatten(const Eigen::VectorXd& v) {
      LoopGradient g(static_cast<std::size_t>(v.size() / 2));
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = Vec2(v[2 * static_cast<Eigen::Index>(j)], v[2 * static_cast<Eigen::Index>(j) + 1]);
      return g;
    }

    double dot(const LoopGradient& a, const LoopGradient& b) {
      double sum = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) sum += a[j].dot(b[j]);
      return sum;
    }

    double mean_edge_chart_length(const Loop& loop) {
      double sum = 0.0;
      for (std::size_t j = 0; j < loop.size(); ++j) sum += loop.edge(j).norm();
      return sum / static_cast<double>(loop.size());
    }

    double rms_radius(const Loop& loop) {
      Vec2 c = Vec2::Zero();
      for (const auto& v : loop.vertices()) c += v;
      c /= static_cast<double>(loop.size());
      double sum = 0.0;
      for (const auto& v : loop.vertices()) sum += (v - c).squaredNorm();
      return std::sqrt(sum / static_cast<double>(loop.size()));
    }

    /// Maximum of t -> objective(a + s (b - a)) on [0, 1], by Brent's method on the negation.
    double segment_sup(const Objective& obj, const Loop& a, const Loop& b) {
      auto neg = [&](double s) { return -obj.value(Loop::interpolate(a, b, s)); };
      auto [s, val] = boost::math::tools::brent_find_minima(neg, 0.0, 1.0, std::numeric_limits<double>::digits / 2);
      (void)s;
      return -val;
    }

    std::size_t argmax_member(const std::vector<double>& values) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
      }
      return best;
    }

    /// Family maximum: member values plus the continuous sup on the two segments around the top member.
    double family_level(const Objective& obj, const std::vector<Loop>& row, const std::vector<double>& values) {
      std::size_t top = argmax_member(values);
      double level = values[top];
      if (top > 0) level = std::max(level, segment_sup(obj, row[top - 1], row[top]));
      if (top + 1 < row.size()) level = std::max(level, segment_sup(obj, row[top], row[top + 1]));
      return level;
    }

    std::vector<double> member_values(const Objective& obj, const std::vector<Loop>& row, int threads) {
      std::vector<double> values(row.size());
      parallel_for(row.size(), threads, [&](std::size_t i) { values[i] = obj.value(row[i]); });
      return values;
    }

    /// Equal spacing in the rms vertex distance; endpoints are kept.
    std::vector<Loop> respace(const std::vector<Loop>& row) {
      const std::size_t m = row.size();
      std::vector<double> cum(m, 0.0);
      for (std::size_t i = 1; i < m; ++i) cum[i] = cum[i - 1] + rms_distance(row[i - 1], row[i]);
      double total = cum.back();
      if (!(total > 0.0)) return row;
      std::vector<Loop> out(m);
      out.front() = row.front();
      out.back() = row.back();
      std::size_t seg = 0;
      for (std::size_t k = 1; k + 1 < m; ++k) {
        double target = total * static_cast<double>(k) / static_cast<double>(m - 1);
        while (seg + 2 < m && cum[seg + 1] < target) ++seg;
        double span = cum[seg + 1] - cum[seg];
        double s = span > 0.0 ? std::clamp((target - cum[seg]) / span, 0.0, 1.0) : 0.0;
        out[k] = Loop::interpolate(row[seg], row[seg + 1], s);
      }
      return out;
    }

    struct RowResult {
      std::vector<Loop> row;
      double level = 0.0;
      std::vector<std::pair<int, double>> history;
      std::size_t argmax = 0;
      Loop argmax_loop;
      double grad_norm = std::numeric_limits<double>::infinity();
      bool converged = false;
    };

    RowResult deform_row(const Objective& obj, std::vector<Loop> row, const DescentSettings& settings) {
      RowResult res;
      const double tol = 1e-12;
      std::vector<double> values = member_values(obj, row, settings.threads);
      double level = family_level(obj, row, values);
      res.history.emplace_back(0, level);

      DescentSettings inner = settings;
      inner.max_iters = settings.inner_iters;
      std::vector<double> steps(row.size(), settings.step0);

      int it = 1;
      for (; it <= settings.max_iters; ++it) {
        std::vector<Loop> descended = row;
        std::vector<double> new_steps = steps;
        parallel_for(row.size() - 2, settings.threads, [&](std::size_t k) {
          std::size_t i = k + 1;
          DescentResult d = descend_loop(obj, row[i], inner, std::nullopt, steps[i]);
          descended[i] = std::move(d.loop);
          new_steps[i] = d.step;
        });

        std::vector<Loop> proposal = respace(descended);
        std::vector<double> pvals = member_values(obj, proposal, settings.threads);
        double plevel = family_level(obj, proposal, pvals);
        if (plevel > level + tol * std::max(1.0, std::abs(level))) {
          proposal = descended;
          pvals = member_values(obj, proposal, settings.threads);
          plevel = family_level(obj, proposal, pvals);
          if (plevel > level + tol * std::max(1.0, std::abs(level))) break;
        }
        double change = level - plevel;
        row = std::move(proposal);
        values = std::move(pvals);
        level = plevel;
        steps = std::move(new_steps);
        res.history.emplace_back(it, level);
        if (change <= settings.stall_tol * std::max(1.0, std::abs(level))) break;
      }

      std::size_t top = argmax_member(values);
      res.argmax = top;
      res.argmax_loop = row[top];
      if (top == 0 || top + 1 == row.size()) {
        // No interior maximum: nothing separates the one-point curves from the terminal loop.
        res.row = std::move(row);
        res.level = level;
        return res;
      }

      DescentSettings climb = settings;
      climb.max_iters = settings.inner_iters;
      DescentResult climbed = descend_loop(obj, row[top], climb, family_tangent(row, top));
      DescentResult polished = refine_saddle(obj, climbed.loop, settings);

      row[top] = polished.loop;
      values[top] = obj.value(polished.loop);
      res.level = family_level(obj, row, values);
      res.argmax = argmax_member(values);
      res.argmax_loop = row[res.argmax];
      res.grad_norm = res.argmax == top ? polished.grad_norm : gradient_norm(obj.gradient(res.argmax_loop));
      res.converged = res.grad_norm <= settings.grad_tol;
      res.history.emplace_back(std::min(it, settings.max_iters) + 1, res.level);
      res.row = std::move(row);
      return res;
    }

    MinimaxResult assemble(const LoopFamily& input, std::vector<RowResult> rows) {
      MinimaxResult out;
      out.family = input;
      std::size_t best = 0;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].level > rows[best].level) best = r;
      }
      for (std::size_t r = 0; r < rows.size(); ++r) out.family.rows[r] = rows[r].row;
      out.level = rows[best].level;
      out.argmax_loop = rows[best].argmax_loop;
      out.grad_norm_at_argmax = rows[best].grad_norm;
      out.history = rows[best].history;
      out.converged = rows[best].converged;
      out.argmax_row = best;
      out.argmax_index = rows[best].argmax;
      if (out.family.mesh_bound > 0.0) {
        for (const auto& row : out.family.rows) {
          for (std::size_t s = 1; s < row.size(); ++s) {
            if (vertex_distance(row[s - 1], row[s]) > out.family.mesh_bound) {
              out.family = refine_family(out.family, out.family.mesh_bound);
              return out;
            }
          }
        }
      }
      return out;
    }

  }  // namespace

  LoopFamily init_sweep_family(const GeometrySpec& spec, double E, FamilyShape shape, std::size_t M, std::size_t N,
                               std::uint64_t rng_seed, std::size_t M_P) {
    spec.validate();
    if (!(E > 0.0)) throw std::invalid_argument("E must be positive");
    if (M < 3 || N < 3) throw std::invalid_argument("family needs M >= 3 and N >= 3");
    if (shape == FamilyShape::cylinder && !spec.is_torus()) throw std::invalid_argument("cylinder families need a torus geometry");
    if (shape == FamilyShape::path) M_P = 1;
    if (M_P < 1) throw std::invalid_argument("M_P must be >= 1");

    Anchor anchor = strongest_field_point(spec);
    if (anchor.field == 0.0) throw NoNegativeLoopFound("field vanishes everywhere: the action is positive on every loop");

    const int orientation = anchor.field > 0.0 ? -1 : 1;
    const double root = 2.0 * std::sqrt(E) * anchor.lambda / std::abs(anchor.field);
    double cap = 50.0 * root;
    if (spec.is_torus()) cap = std::min(cap, 0.45);

    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> phase_dist(0.0, two_pi / static_cast<double>(N));
    const double phase = phase_dist(rng);

    double r_term = 1.5 * root;
    while (r_term <= cap && action_S(spec, make_circle(anchor.center, r_term, orientation, N, phase), E) >= 0.0) r_term *= 1.25;
    if (r_term > cap) throw NoNegativeLoopFound("no circle with negative action below the radius cap");

    LoopFamily family;
    family.shape = shape;
    family.mesh_bound = 4.0 * r_term / static_cast<double>(M - 1);
    for (std::size_t i = 0; i < M_P; ++i) {
      ChartPoint center = anchor.center + Vec2(0.0, static_cast<double>(i) / static_cast<double>(M_P));
      std::vector<Loop> row;
      row.reserve(M);
      for (std::size_t s = 0; s < M; ++s) {
        double r = r_term * static_cast<double>(s) / static_cast<double>(M - 1);
        row.push_back(make_circle(center, r, orientation, N, phase));
      }
      family.rows.push_back(std::move(row));
    }
    family.validate();
    return family;
  }

  DescentResult descend_loop(const Objective& obj, const Loop& loop, const DescentSettings& settings,
                             const std::optional<LoopGradient>& climb, std::optional<double> initial_step) {
    settings.validate();
    DescentResult res;
    Loop x = loop;
    ValueGradient vg = obj.value_gradient(x);
    double step = initial_step.value_or(settings.step0);
    const double grow = 1.0 / settings.backtrack;
    const double armijo = 1e-4;

    // Armijo descent along -dir from x; returns false when no step is accepted.
    auto line_descent = [&](const LoopGradient& dir) {
      double slope = dot(dir, vg.gradient);
      if (!(slope > 0.0)) return false;
      for (int bt = 0; bt < 80; ++bt) {
        Loop trial = displace(x, dir, -step);
        double value = obj.value(trial);
        if (value <= vg.value - armijo * step * slope) {
          x = std::move(trial);
          vg = obj.value_gradient(x);
          step *= grow;
          return true;
        }
        step *= settings.backtrack;
      }
      return false;
    };

    res.values.push_back(vg.value);
    if (!climb) {
      for (int it = 0; it < settings.max_iters; ++it) {
        if (gradient_norm(vg.gradient) <= settings.grad_tol) break;
        if (!line_descent(vg.gradient)) break;
        ++res.iterations;
        res.values.push_back(vg.value);
      }
    } else {
      LoopGradient u = *climb;
      double un = gradient_norm(u);
      if (!(un > 0.0)) throw std::invalid_argument("climb direction must be non-zero");
      for (auto& v : u) v /= un;
      for (int it = 0; it < settings.max_iters; ++it) {
        if (gradient_norm(vg.gradient) <= settings.grad_tol) break;

        double reach = 0.25 * rms_radius(x) * std::sqrt(static_cast<double>(x.size()));
        if (reach > 0.0) {
          auto neg = [&](double t) { return -obj.value(displace(x, u, t)); };
          auto [t, val] = boost::math::tools::brent_find_minima(neg, -reach, reach, std::numeric_limits<double>::digits / 2);
          if (-val > vg.value) {
            x = displace(x, u, t);
            vg = obj.value_gradient(x);
          }
        }
        for (int inner = 0; inner < settings.inner_iters; ++inner) {
          LoopGradient perp = vg.gradient;
          double along = dot(perp, u);
          for (std::size_t j = 0; j < perp.size(); ++j) perp[j] -= along * u[j];
          if (gradient_norm(perp) <= settings.grad_tol) break;
          if (!line_descent(perp)) break;
        }
        ++res.iterations;
      }
    }
    res.grad_norm = gradient_norm(vg.gradient);
    res.value = vg.value;
    res.step = step;
    res.loop = std::move(x);
    return res;
  }

  DescentResult descend_loop(const GeometrySpec& spec, const Loop& loop, const ActionParams& params,
                             const std::optional<CutoffSpec>& cut, const DescentSettings& settings,
                             const std::optional<LoopGradient>& climb) {
    return descend_loop(Objective(spec, params, cut), loop, settings, climb);
  }

  DescentResult refine_saddle(const Objective& obj, const Loop& loop, const DescentSettings& settings) {
    DescentResult res;
    Loop x = loop;
    ValueGradient vg = obj.value_gradient(x);
    double gn = gradient_norm(vg.gradient);
    const double scale = mean_edge_chart_length(x);
    const auto dim = static_cast<Eigen::Index>(2 * x.size());

    for (int it = 0; it < settings.newton_iters && gn > settings.grad_tol && scale > 0.0; ++it) {
      const double h = 1e-6 * scale;
      Eigen::MatrixXd H(dim, dim);
      parallel_for(static_cast<std::size_t>(dim), settings.threads, [&](std::size_t c) {
        LoopGradient e(x.size(), Vec2::Zero());
        e[c / 2][static_cast<int>(c % 2)] = h;
        Eigen::VectorXd gp = flatten(obj.gradient(displace(x, e, 1.0)));
        Eigen::VectorXd gm = flatten(obj.gradient(displace(x, e, -1.0)));
        H.col(static_cast<Eigen::Index>(c)) = (gp - gm) / (2.0 * h);
      });
      Eigen::MatrixXd Hs = 0.5 * (H + H.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Hs);
      const Eigen::VectorXd& lam = eig.eigenvalues();
      const double cutoff = 1e-9 * lam.cwiseAbs().maxCoeff();

      Eigen::VectorXd g = flatten(vg.gradient);
      Eigen::VectorXd coeff = eig.eigenvectors().transpose() * g;
      for (Eigen::Index k = 0; k < dim; ++k) coeff[k] = std::abs(lam[k]) > cutoff ? -coeff[k] / lam[k] : 0.0;
      LoopGradient step = unflatten(eig.eigenvectors() * coeff);

      double longest = 0.0;
      for (const auto& v : step) longest = std::max(longest, v.norm());
      double alpha = longest > 2.0 * scale ? 2.0 * scale / longest : 1.0;

      bool accepted = false;
      for (int bt = 0; bt < 40; ++bt) {
        Loop trial = displace(x, step, alpha);
        ValueGradient tv = obj.value_gradient(trial);
        double tn = gradient_norm(tv.gradient);
        if (tn < (1.0 - 1e-4 * alpha) * gn) {
          x = std::move(trial);
          vg = std::move(tv);
          gn = tn;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
      ++res.iterations;
    }
    res.grad_norm = gn;
    res.value = vg.value;
    res.loop = std::move(x);
    return res;
  }

  LoopGradient family_tangent(const std::vector<Loop>& row, std::size_t index) {
    std::size_t lo = index == 0 ? 0 : index - 1;
    std::size_t hi = std::min(index + 1, row.size() - 1);
    LoopGradient t(row[index].size());
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = row[hi].vertex(j) - row[lo].vertex(j);
    double n = gradient_norm(t);
    if (n > 0.0) {
      for (auto& v : t) v /= n;
    }
    return t;
  }

  MinimaxResult mountain_pass(const GeometrySpec& spec, const LoopFamily& family, const ActionParams& params,
                              const std::optional<CutoffSpec>& cut, const DescentSettings& settings) {
    family.validate();
    settings.validate();
    if (family.row_count() != 1) throw std::invalid_argument("mountain_pass expects a single path; use family_minimax");
    Objective obj(spec, params, cut);
    std::vector<RowResult> rows;
    rows.push_back(deform_row(obj, family.rows.front(), settings));
    return assemble(family, std::move(rows));
  }

  MinimaxResult family_minimax(const GeometrySpec& spec, const LoopFamily& family, const ActionParams& params,
                               const std::optional<CutoffSpec>& cut, const DescentSettings& settings) {
    family.validate();
    settings.validate();
    Objective obj(spec, params, cut);
    std::vector<RowResult> rows;
    for (const auto& row : family.rows) rows.push_back(deform_row(obj, row, settings));
    return assemble(family, std::move(rows));
  }

  MinimaxResult run_minimax(const GeometrySpec& spec, const LoopFamily& family, const ActionParams& params,
                            const std::optional<CutoffSpec>& cut, const DescentSettings& settings) {
    return family.shape == FamilyShape::path ? mountain_pass(spec, family, params, cut, settings)
                                             : family_minimax(spec, family, params, cut, settings);
  }

  std::pair<CutoffSpec, MinimaxResult> bootstrap_cutoff(const GeometrySpec& spec, const LoopFamily& family,
                                                        const ActionParams& params, const DescentSettings& settings,
                                                        double beta_frac) {
    MinimaxResult free_run = run_minimax(spec, family, params, std::nullopt, settings);
    if (!(free_run.level > 0.0)) throw std::runtime_error("cutoff bootstrap produced a non-positive level");
    return {CutoffSpec::from_level(free_run.level, beta_frac), std::move(free_run)};
  }

  nlohmann::json minimax_to_json(const MinimaxResult& result) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& [iter, level] : result.history) history.push_back({iter, level});
    return nlohmann::json{{"level", result.level},
                          {"converged", result.converged},
                          {"grad_norm", result.grad_norm_at_argmax},
                          {"history", history},
                          {"argmax_row", result.argmax_row},
                          {"argmax_index", result.argmax_index}};
  }

}  // namespace magloop
