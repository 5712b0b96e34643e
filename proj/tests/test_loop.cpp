#include "magloop/functional.hpp"
#include "magloop/oracle.hpp"
#include "support.hpp"

using namespace magloop;
using magloop::testing::pi;

TEST_CASE("construction") {
  CHECK_THROWS_AS(Loop({ChartPoint(0, 0), ChartPoint(1, 0)}), std::invalid_argument);
  CHECK_THROWS_AS(Loop({ChartPoint(0, 0), ChartPoint(1, 0), ChartPoint(std::nan(""), 0)}), std::invalid_argument);
  CHECK_THROWS_AS(Loop({ChartPoint(0, 0), ChartPoint(1, 0), ChartPoint(0, 1)}, {Winding{}}), std::invalid_argument);
  Loop point = make_point_loop(ChartPoint(0.3, 0.4), 8);
  CHECK(point.is_point());
  CHECK(length(GeometrySpec::plane(1.0), point) == 0.0);
}

TEST_CASE("lengths of simple polygons") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  for (std::size_t N : {3u, 7u, 64u, 1000u}) {
    Loop c = make_circle(ChartPoint(0.5, -1.0), 1.0, 1, N);
    CHECK(length(plane, c) == doctest::Approx(2.0 * N * std::sin(pi / N)).epsilon(1e-13));
  }
  Loop square({ChartPoint(0, 0), ChartPoint(1, 0), ChartPoint(1, 1), ChartPoint(0, 1)});
  CHECK(length(plane, square) == 4.0);
}

TEST_CASE("length invariance under relabeling and reversal") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 30; ++i) {
    GeometrySpec spec = magloop::testing::kind_sample(i);
    Loop l = random_loop(spec, 50, rng, true);
    double L = length(spec, l);
    REQUIRE(length(spec, l.cyclic_shift(17)) == doctest::Approx(L).epsilon(1e-13));
    REQUIRE(length(spec, l.reversed()) == doctest::Approx(L).epsilon(1e-13));
    REQUIRE(length(spec, l.canonical(spec)) == doctest::Approx(L).epsilon(1e-13));
  }
}

TEST_CASE("arc-length resampling") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  SUBCASE("uniform circle is a fixed point") {
    Loop c = make_circle(ChartPoint::Zero(), 1.0, 1, 64);
    Loop r = resample_arclength(plane, c, 64);
    CHECK(vertex_distance(c, r) < 1e-12);
  }
  SUBCASE("clustered circle becomes uniform") {
    std::vector<ChartPoint> v;
    for (int j = 0; j < 80; ++j) {
      double s = j / 80.0;
      double t = 2.0 * pi * (s + 0.12 * std::sin(2.0 * pi * s));
      v.emplace_back(std::cos(t), std::sin(t));
    }
    Loop clustered(v);
    CHECK(speed_cv(plane, clustered) > 0.1);
    Loop r = resample_arclength(plane, clustered, 80);
    CHECK(speed_cv(plane, r) < 1e-9);
    CHECK(r.vertex(0) == clustered.vertex(0));
  }
  SUBCASE("one-point curve") {
    CHECK_THROWS_AS(resample_arclength(plane, make_point_loop(ChartPoint(1, 1), 8), 8), DegenerateLoop);
  }
  SUBCASE("length is kept up to corner cutting") {
    // Resampled vertices lie on the old polygon and cut its corners; the change is bounded by the
    // turning angle per edge, about (2 pi / N)^2 relative for smooth loops. With a frozen midpoint
    // metric a chord may come out marginally longer than the pieces it replaces.
    std::mt19937_64 rng(8);
    for (int i = 0; i < 30; ++i) {
      GeometrySpec spec = magloop::testing::kind_sample(i);
      std::size_t N = 64;
      Loop l = random_loop(spec, N, rng, true);
      double L = length(spec, l);
      for (std::size_t n_out : {N, 2 * N, 4 * N}) {
        Loop r = resample_arclength(spec, l, n_out);
        double Lr = length(spec, r);
        REQUIRE(std::abs(L - Lr) <= L * std::pow(2.0 * pi / N, 2));
        if (spec.kind != GeometryKind::conformal_torus) REQUIRE(Lr <= L * (1.0 + 1e-12));
        REQUIRE(r.total_winding() == l.total_winding());
      }
    }
  }
}

TEST_CASE("concatenation") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  Loop right = make_circle(ChartPoint(1.0, 0.0), 1.0, 1, 40, pi);
  Loop left = make_circle(ChartPoint(-1.0, 0.0), 1.0, -1, 24, 0.0);
  Loop eight = concat(plane, right, left);
  CHECK(eight.size() == 64);
  double sum = length(plane, right) + length(plane, left);
  CHECK(std::abs(length(plane, eight) - sum) <= 1e-14 * sum);

  Loop far = make_circle(ChartPoint(5.0, 5.0), 1.0, 1, 16);
  CHECK_THROWS_AS(concat(plane, right, far), NotConcatenable);

  SUBCASE("torus loops meet after a lattice translation") {
    GeometrySpec torus = GeometrySpec::flat_torus(1.0, 1);
    Loop a = make_circle(ChartPoint(0.2, 0.5), 0.1, 1, 16, pi);
    Loop b = make_circle(ChartPoint(1.0 + 0.0, 0.5 - 2.0), 0.1, 1, 16, 0.0);
    Loop c = concat(torus, a, b);
    CHECK(c.size() == 32);
    CHECK(length(torus, c) == doctest::Approx(length(torus, a) + length(torus, b)).epsilon(1e-14));
  }
}

TEST_CASE("circles") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  CHECK(make_circle(ChartPoint(2.0, 3.0), 0.0, 1, 12).is_point());
  Loop ccw = make_circle(ChartPoint::Zero(), 1.0, 1, 256);
  Loop cw = make_circle(ChartPoint::Zero(), 1.0, -1, 256);
  CHECK(length(plane, ccw) == doctest::Approx(length(plane, cw)).epsilon(1e-14));
  CHECK(std::abs(circulation(plane, cw) + pi) < 1e-3);
  CHECK(std::abs(circulation(plane, ccw) - pi) < 1e-3);
}

TEST_CASE("loop csv round trip") {
  std::mt19937_64 rng(1);
  GeometrySpec torus = GeometrySpec::flat_torus(1.0, 1);
  Loop l = random_loop(torus, 33, rng, true).canonical(torus);
  CHECK(l.has_windings());
  Loop back = loop_from_csv(loop_to_csv(l, true));
  CHECK(back == l);
  Loop plain = random_loop(GeometrySpec::plane(1.0), 20, rng);
  CHECK(loop_from_csv(loop_to_csv(plain, false)) == plain);
  CHECK(loop_to_csv(plain, false).rfind("index,x,y\n", 0) == 0);
  CHECK_THROWS(loop_from_csv("index,x,y\n0,1,2\n"));
}
