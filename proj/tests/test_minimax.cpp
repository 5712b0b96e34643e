#include <algorithm>
#include <map>

#include "magloop/minimax.hpp"
#include "magloop/oracle.hpp"
#include "support.hpp"

using namespace magloop;
using magloop::testing::pi;

namespace {

  ActionParams params(double E, double eps, double tau) {
    ActionParams p;
    p.E = E;
    p.eps = eps;
    p.tau = tau;
    return p;
  }

  double mean_radius(const Loop& l) {
    Vec2 c = Vec2::Zero();
    for (const auto& v : l.vertices()) c += v;
    c /= static_cast<double>(l.size());
    double r = 0.0;
    for (const auto& v : l.vertices()) r += (v - c).norm();
    return r / static_cast<double>(l.size());
  }

  DescentSettings plane_settings() {
    DescentSettings s;
    s.family_size = 33;
    return s;
  }

  const MinimaxResult& plane_run(double eps, double tau) {
    static std::map<std::pair<double, double>, MinimaxResult> cache;
    auto key = std::make_pair(eps, tau);
    auto it = cache.find(key);
    if (it == cache.end()) {
      GeometrySpec plane = GeometrySpec::plane(1.0);
      LoopFamily fam = init_sweep_family(plane, 1.0, FamilyShape::path, 33, 128, 0);
      it = cache.emplace(key, mountain_pass(plane, fam, params(1.0, eps, tau), std::nullopt, plane_settings())).first;
    }
    return it->second;
  }

}  // namespace

TEST_CASE("throwing-out family") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  LoopFamily fam = init_sweep_family(plane, 1.0, FamilyShape::path, 33, 128, 0);
  CHECK(fam.row_count() == 1);
  CHECK(fam.row_size() == 33);
  CHECK(fam.rows[0].front().is_point());
  CHECK(action_S(plane, fam.rows[0].back(), 1.0) < 0.0);
  CHECK_NOTHROW(fam.validate());
  for (std::size_t s = 1; s < fam.row_size(); ++s) REQUIRE(vertex_distance(fam.rows[0][s - 1], fam.rows[0][s]) <= fam.mesh_bound);

  // Closed form of the circle action: 2 pi sqrt(E) r - B pi r^2.
  CHECK(std::abs(action_S(plane, make_circle(ChartPoint::Zero(), 3.0, -1, 2048), 1.0) + 3.0 * pi) < 1e-2);
  for (double r : {2.01, 2.5, 4.0, 10.0}) CHECK(action_S(plane, make_circle(ChartPoint::Zero(), r, -1, 256), 1.0) < 0.0);

  CHECK_THROWS_AS(init_sweep_family(GeometrySpec::flat_torus(0.0, 1), 1.0, FamilyShape::path, 9, 32, 0), NoNegativeLoopFound);
  CHECK_THROWS_AS(init_sweep_family(plane, 1.0, FamilyShape::cylinder, 9, 32, 0), std::invalid_argument);

  LoopFamily cyl = init_sweep_family(GeometrySpec::flat_torus(3.0, 1), 0.02, FamilyShape::cylinder, 9, 32, 0, 4);
  CHECK(cyl.row_count() == 4);
  for (const auto& row : cyl.rows) CHECK(row.front().is_point());
}

TEST_CASE("family refinement keeps the mesh bound") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  LoopFamily fam = init_sweep_family(plane, 1.0, FamilyShape::path, 5, 32, 0);
  double bound = fam.mesh_bound / 10.0;
  LoopFamily fine = refine_family(fam, bound);
  CHECK(fine.row_size() > fam.row_size());
  for (std::size_t s = 1; s < fine.row_size(); ++s) REQUIRE(vertex_distance(fine.rows[0][s - 1], fine.rows[0][s]) <= bound);
  CHECK(fine.rows[0].front() == fam.rows[0].front());
  CHECK(fine.rows[0].back() == fam.rows[0].back());
}

TEST_CASE("descent from a discrete extremal stops immediately") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  const std::size_t N = 128;
  Loop polygon = make_circle(ChartPoint::Zero(), 1.0 / std::cos(pi / N), -1, N);
  DescentSettings s;
  DescentResult d = descend_loop(plane, polygon, params(1.0, 0.0, 0.0), std::nullopt, s);
  CHECK(d.iterations == 0);
  CHECK(d.grad_norm <= s.grad_tol);
  CHECK(d.loop == polygon);
}

TEST_CASE("descent values never increase") {
  std::mt19937_64 rng(3);
  GeometrySpec torus = GeometrySpec::conformal_torus(1.0, 1, 0.3);
  Loop l = random_loop(torus, 64, rng);
  DescentSettings s;
  s.max_iters = 200;
  DescentResult d = descend_loop(torus, l, params(1.0, 0.01, 0.2), std::nullopt, s);
  REQUIRE(d.values.size() >= 2);
  for (std::size_t i = 1; i < d.values.size(); ++i) REQUIRE(d.values[i] <= d.values[i - 1]);
}

TEST_CASE("perturbed circle returns to the regularised extremal") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  const std::size_t N = 128;
  const double eps = 1e-3;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<ChartPoint> v;
  double a2 = u(rng), b2 = u(rng), a3 = u(rng), b3 = u(rng);
  for (std::size_t j = 0; j < N; ++j) {
    double t = -2.0 * pi * j / N;
    double r = 1.0 + 0.05 * (a2 * std::cos(2 * t) + b2 * std::sin(2 * t) + a3 * std::cos(3 * t) + b3 * std::sin(3 * t)) / 2.0;
    v.emplace_back(r * std::cos(t), r * std::sin(t));
  }
  Loop start(v);
  // The breathing mode is the unstable direction of the saddle.
  LoopGradient radial(N);
  for (std::size_t j = 0; j < N; ++j) radial[j] = start.vertex(j).normalized() / std::sqrt(static_cast<double>(N));

  Objective obj(plane, params(1.0, eps, 0.0));
  DescentSettings s;
  s.max_iters = 50;
  DescentResult climbed = descend_loop(obj, start, s, radial);
  DescentResult polished = refine_saddle(obj, climbed.loop, s);
  CHECK(polished.grad_norm <= s.grad_tol);
  double rho = 1.0 / (1.0 - 4.0 * pi * eps);
  CHECK(std::abs(mean_radius(polished.loop) - rho) < 0.02 * rho);
}

TEST_CASE("plane mountain pass") {
  const MinimaxResult& r = plane_run(1e-3, 1e-3);
  CHECK(r.converged);
  CHECK(r.grad_norm_at_argmax <= 1e-8);
  CHECK(std::abs(r.level - pi) < 0.03 * pi);
  CHECK(std::abs(mean_radius(r.argmax_loop) - 1.0) < 0.03);
  CHECK(r.level > 0.0);
  CHECK(speed_cv(GeometrySpec::plane(1.0), r.argmax_loop) < 1e-3);

  SUBCASE("history never rises") {
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      REQUIRE(r.history[i].second <= r.history[i - 1].second + 1e-12 * std::max(1.0, std::abs(r.history[i - 1].second)));
    }
  }
  SUBCASE("endpoints are pinned") {
    LoopFamily fam = init_sweep_family(GeometrySpec::plane(1.0), 1.0, FamilyShape::path, 33, 128, 0);
    CHECK(r.family.rows[0].front() == fam.rows[0].front());
    CHECK(r.family.rows[0].back() == fam.rows[0].back());
  }
  SUBCASE("the oracle profile agrees") {
    std::vector<double> grid;
    for (int i = 0; i <= 400; ++i) grid.push_back(0.8 + 0.4 * i / 400.0);
    double best = -1e300;
    for (const auto& [rad, s] : circle_action_profile(GeometrySpec::plane(1.0), 1.0, grid, 128)) best = std::max(best, s);
    CHECK(std::abs(r.level - best) < 0.03 * best);
  }
}

TEST_CASE("levels decrease with the regularisation") {
  double hi = plane_run(1e-2, 0.0).level;
  double lo = plane_run(1e-3, 0.0).level;
  CHECK(hi >= lo - 1e-3);
  double levels[2][3];
  const double eps[] = {1e-3, 3e-3, 1e-2};
  const double tau[] = {0.0, 1e-2};
  for (int t = 0; t < 2; ++t) {
    for (int e = 0; e < 3; ++e) levels[t][e] = plane_run(eps[e], tau[t]).level;
  }
  for (int t = 0; t < 2; ++t) {
    for (int e = 1; e < 3; ++e) CHECK(levels[t][e] >= levels[t][e - 1] - 1e-3);
  }
  for (int e = 0; e < 3; ++e) CHECK(levels[1][e] >= levels[0][e] - 1e-3);
}

TEST_CASE("length bound under the cutoff") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  LoopFamily fam = init_sweep_family(plane, 1.0, FamilyShape::path, 33, 128, 0);
  ActionParams p = params(1.0, 1e-2, 1e-2);
  auto [cut, free_run] = bootstrap_cutoff(plane, fam, p, plane_settings(), 0.1);
  CHECK(cut.c_ref == free_run.level);
  CHECK(cut.beta == doctest::Approx(0.1 * free_run.level));
  MinimaxResult r = mountain_pass(plane, free_run.family, p, cut, plane_settings());
  REQUIRE(r.converged);
  CHECK(length(plane, r.argmax_loop) <= std::sqrt((cut.c_ref + cut.beta) / p.eps) * (1.0 + 1e-6));
  CHECK(action_S_eps_tau(plane, r.argmax_loop, p.with(0.0, p.tau)) >= cut.hi());
  CHECK(std::abs(r.level - free_run.level) < 1e-9);
}

TEST_CASE("cylinder families") {
  GeometrySpec torus = GeometrySpec::flat_torus(3.0, 1);
  const double E = 0.02;
  DescentSettings s;
  s.family_size = 17;
  ActionParams p = params(E, 1e-3, 1e-3);

  SUBCASE("one row reduces to the path") {
    LoopFamily cyl = init_sweep_family(torus, E, FamilyShape::cylinder, 17, 64, 0, 1);
    LoopFamily path = cyl;
    path.shape = FamilyShape::path;
    MinimaxResult a = family_minimax(torus, cyl, p, std::nullopt, s);
    MinimaxResult b = mountain_pass(torus, path, p, std::nullopt, s);
    CHECK(a.level == b.level);
    CHECK(a.argmax_loop == b.argmax_loop);
  }
  SUBCASE("level is positive, converged and independent of the row labels") {
    LoopFamily cyl = init_sweep_family(torus, E, FamilyShape::cylinder, 17, 64, 0, 4);
    MinimaxResult a = family_minimax(torus, cyl, p, std::nullopt, s);
    CHECK(a.level > 0.0);
    CHECK(a.converged);
    CHECK(a.grad_norm_at_argmax <= s.grad_tol);
    LoopFamily rotated = cyl;
    std::rotate(rotated.rows.begin(), rotated.rows.begin() + 1, rotated.rows.end());
    MinimaxResult b = family_minimax(torus, rotated, p, std::nullopt, s);
    CHECK(std::abs(a.level - b.level) <= 1e-6);
  }
}

TEST_CASE("reproducibility") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  DescentSettings s = plane_settings();
  s.rng_seed = 42;
  LoopFamily fam = init_sweep_family(plane, 1.0, FamilyShape::path, 33, 64, s.rng_seed);
  CHECK(fam.rows[0][5] == init_sweep_family(plane, 1.0, FamilyShape::path, 33, 64, s.rng_seed).rows[0][5]);
  CHECK_FALSE(fam.rows[0][5] == init_sweep_family(plane, 1.0, FamilyShape::path, 33, 64, 43).rows[0][5]);
  MinimaxResult a = mountain_pass(plane, fam, params(1.0, 1e-2, 0.0), std::nullopt, s);
  s.threads = 3;
  MinimaxResult b = mountain_pass(plane, fam, params(1.0, 1e-2, 0.0), std::nullopt, s);
  CHECK(a.level == b.level);
  CHECK(a.argmax_loop == b.argmax_loop);
  CHECK(a.history == b.history);
  CHECK(minimax_to_json(a).dump() == minimax_to_json(b).dump());
}

TEST_CASE("settings validation") {
  DescentSettings s;
  s.backtrack = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK(family_shape_from_string("cylinder") == FamilyShape::cylinder);
  CHECK_THROWS_AS(family_shape_from_string("torus"), std::invalid_argument);
}
