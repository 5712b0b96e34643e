#include "magloop/functional.hpp"
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

}  // namespace

TEST_CASE("action on one-point curves") {
  for (int i = 0; i < 3; ++i) {
    GeometrySpec spec = magloop::testing::kind_sample(i);
    Loop p = make_point_loop(ChartPoint(0.3, 0.2), 16);
    CHECK(action_S(spec, p, 1.0) == 0.0);
    CHECK(action_S_eps_tau(spec, p, params(1.0, 0.1, 0.5)) == 0.0);
    CHECK(action_F_cutoff(spec, p, params(1.0, 0.1, 0.5), CutoffSpec{1.0, 0.1}) == 0.0);
  }
}

TEST_CASE("circle values") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  Loop c = make_circle(ChartPoint::Zero(), 1.0, -1, 512);
  CHECK(std::abs(action_S(plane, c, 1.0) - pi) < 1e-2);
  CHECK(std::abs(action_S_eps_tau(plane, c, params(1.0, 0.0, 0.0)) - pi) < 1e-2);
  CHECK(action_S_eps_tau(plane, c, params(1.0, 0.0, 0.0)) == doctest::Approx(action_S(plane, c, 1.0)).epsilon(1e-14));
  CHECK(std::abs(action_S_eps_tau(plane, c, params(1.0, 0.1, 0.0)) - (pi + 0.1 * 4.0 * pi * pi)) < 1e-2);
  // E rescales the metric: the length term scales with sqrt(E).
  CHECK(std::abs(action_S(plane, make_circle(ChartPoint::Zero(), 3.0, -1, 2048), 1.0) + 3.0 * pi) < 1e-2);
}

TEST_CASE("action is additive under concatenation") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 60; ++i) {
    GeometrySpec spec = magloop::testing::kind_sample(i);
    Loop a = random_loop(spec, 20 + i % 7, rng);
    Loop b = random_loop(spec, 15 + i % 5, rng);
    b = b.translated(a.vertex(3) - b.vertex(0));
    Loop ab = concat(spec, a, b);
    double E = 0.5 + i % 3;
    double s = action_S(spec, a, E) + action_S(spec, b, E);
    REQUIRE(std::abs(action_S(spec, ab, E) - s) <= 1e-13 * (1.0 + std::abs(s)));
  }
}

TEST_CASE("lower bound by length") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    GeometrySpec spec = magloop::testing::kind_sample(i);
    Loop l = random_loop(spec, 40, rng, true);
    ActionParams p = params(1.0, 0.2 * u(rng), 0.95 * u(rng));
    double L = length(spec, l);
    double bound = p.eps * L * L + std::pow(L, 1.0 + p.tau) + circulation(spec, l);
    REQUIRE(action_S_eps_tau(spec, l, p) >= bound - 1e-9);
  }
}

TEST_CASE("Hoelder inequality with equality on arc-length loops") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 60; ++i) {
    GeometrySpec spec = magloop::testing::kind_sample(i);
    Loop l = random_loop(spec, 48, rng, true);
    Loop r = resample_arclength(spec, l, 48);
    double L = length(spec, l), Lr = length(spec, r);
    for (double m : {1.1, 1.5, 2.0}) {
      REQUIRE(std::pow(L, m) <= speed_power_mean(spec, l, m) * (1.0 + 1e-12));
      REQUIRE(std::abs(std::pow(Lr, m) - speed_power_mean(spec, r, m)) <= 1e-9 * std::pow(Lr, m));
    }
  }
}

TEST_CASE("monotone in eps and tau for arc-length loops with L >= 1") {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 30; ++i) {
    GeometrySpec spec = GeometrySpec::plane(1.0);
    Loop l = resample_arclength(spec, random_loop(spec, 40, rng), 40);
    REQUIRE(length(spec, l) >= 1.0);
    double prev = -1e300;
    for (double eps : {0.0, 1e-3, 1e-2, 0.1}) {
      double v = action_S_eps_tau(spec, l, params(1.0, eps, 0.2));
      REQUIRE(v >= prev);
      prev = v;
    }
    prev = -1e300;
    for (double tau : {0.0, 0.1, 0.5, 0.9}) {
      double v = action_S_eps_tau(spec, l, params(1.0, 0.01, tau));
      REQUIRE(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("reparameterisation invariance of S") {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 30; ++i) {
    GeometrySpec spec = magloop::testing::kind_sample(i);
    Loop l = resample_arclength(spec, random_loop(spec, 256, rng, true), 256);
    double s = action_S(spec, l, 1.0);
    REQUIRE(std::abs(action_S(spec, l.cyclic_shift(91), 1.0) - s) < 1e-6);
    REQUIRE(std::abs(action_S(spec, resample_arclength(spec, l.cyclic_shift(40), 256), 1.0) - s) < 1e-6);
  }
}

TEST_CASE("cutoff ramp") {
  CutoffSpec cut{2.0, 0.2};
  CHECK(cutoff_f(cut.lo(), cut) == 0.0);
  CHECK(cutoff_f(cut.hi(), cut) == 1.0);
  CHECK(cutoff_f(0.5 * (cut.lo() + cut.hi()), cut) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cutoff_df(cut.lo(), cut) == 0.0);
  CHECK(cutoff_df(cut.hi(), cut) == 0.0);
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    double x = cut.lo() + (cut.hi() - cut.lo()) * i / 100.0;
    REQUIRE(cutoff_f(x, cut) >= prev);
    prev = cutoff_f(x, cut);
  }

  GeometrySpec plane = GeometrySpec::plane(1.0);
  Loop c = make_circle(ChartPoint::Zero(), 1.0, 1, 64);
  ActionParams p = params(1.0, 0.01, 0.3);
  double s0 = action_S_eps_tau(plane, c, p.with(0.0, p.tau));
  REQUIRE(s0 > 0.0);
  CHECK(action_F_cutoff(plane, c, p, CutoffSpec{s0 / 2.0, 0.1}) == action_S_eps_tau(plane, c, p));
  CutoffSpec at_lo{20.0 * s0, 0.1};
  while (at_lo.lo() < s0) at_lo.c_ref = std::nextafter(at_lo.c_ref, 1e300);
  CHECK(action_F_cutoff(plane, c, p, at_lo) == 0.0);
}

TEST_CASE("analytic gradient matches central differences") {
  GradCheckReport rep = gradient_check_suite(7, 50, 64, 1e-6);
  CHECK(rep.rel_errors.size() == 50);
  CHECK(rep.max_rel_error < 1e-5);
}

TEST_CASE("plane gradient sums to zero") {
  std::mt19937_64 rng(26);
  GeometrySpec plane = GeometrySpec::plane(1.3);
  for (int i = 0; i < 20; ++i) {
    Loop l = random_loop(plane, 50, rng);
    LoopGradient g = grad_action(plane, l, params(1.0, 0.05, 0.4));
    Vec2 sum = Vec2::Zero();
    for (const auto& v : g) sum += v;
    REQUIRE(sum.norm() < 1e-9);
  }
}

TEST_CASE("gradient of the circulation term is the difference of gradients with and without the field") {
  std::mt19937_64 rng(27);
  GeometrySpec with = GeometrySpec::flat_torus(2.0, 1);
  GeometrySpec without = GeometrySpec::flat_torus(0.0, 1);
  Loop l = random_loop(with, 40, rng);
  ActionParams p = params(1.0, 0.02, 0.3);
  LoopGradient gw = grad_action(with, l, p), g0 = grad_action(without, l, p);
  Objective circ(with, params(1.0, 0.0, 0.0));
  // S_{0,0} minus the pure length term isolates the circulation.
  LoopGradient gc = fd_gradient(circ, l, 1e-6), gl = fd_gradient(Objective(without, params(1.0, 0.0, 0.0)), l, 1e-6);
  double err = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < l.size(); ++j) {
    Vec2 lhs = gw[j] - g0[j], rhs = gc[j] - gl[j];
    err += (lhs - rhs).squaredNorm();
    scale += rhs.squaredNorm();
  }
  CHECK(std::sqrt(err / scale) < 1e-6);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_WITH_AS(params(1.0, 0.0, 1.0).validate(), "tau must satisfy 0 <= tau < 1", std::invalid_argument);
  CHECK_THROWS_AS(params(0.0, 0.0, 0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(1.0, -1.0, 0.0).validate(), std::invalid_argument);
  CHECK_NOTHROW(params(1.0, 0.0, 0.0).validate());
}
