#include "magloop/dynamics.hpp"
#include "support.hpp"

using namespace magloop;
using magloop::testing::pi;

TEST_CASE("kinetic energy") {
  CHECK(kinetic_energy(GeometrySpec::plane(1.0), FlowState{ChartPoint(1, 2), Vec2(0.6, 0.8)}) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kinetic_energy(GeometrySpec::plane(1.0), FlowState{ChartPoint(1, 2), Vec2::Zero()}) == 0.0);
  CHECK(kinetic_energy(GeometrySpec::conformal_torus(1.0, 1, 0.3), FlowState{ChartPoint::Zero(), Vec2(1.0, 0.0)}) ==
        doctest::Approx(0.5 * std::exp(0.6)).epsilon(1e-15));
}

TEST_CASE("straight lines without field") {
  GeometrySpec flat = GeometrySpec::flat_torus(0.0, 1);
  FlowState s0{ChartPoint(0.1, 0.2), Vec2(0.3, -0.7)};
  auto states = integrate_flow(flat, s0, 5.0, 1000);
  CHECK(states.size() == 1001);
  for (const auto& s : states) REQUIRE((s.v - s0.v).norm() < 1e-12);
  CHECK((states.back().p - (s0.p + 5.0 * s0.v)).norm() < 1e-12);
}

TEST_CASE("cyclotron period does not depend on speed") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  for (double speed : {0.5, 1.0, 3.0}) {
    FlowState s0{ChartPoint(0.4, -0.2), Vec2(speed, 0.0)};
    auto states = integrate_flow(plane, s0, 2.0 * pi, 10000);
    CHECK((states.back().p - s0.p).norm() < 1e-6);
    CHECK((states.back().v - s0.v).norm() < 1e-6 * speed);
  }
}

TEST_CASE("energy conservation on every kind") {
  GeometrySpec kinds[] = {GeometrySpec::plane(1.0), GeometrySpec::flat_torus(1.0, 1), GeometrySpec::conformal_torus(1.0, 1, 0.3)};
  for (const auto& spec : kinds) {
    FlowState s0{ChartPoint(0.13, 0.27), Vec2(0.8, 0.35)};
    auto states = integrate_flow(spec, s0, 10.0, 10000);
    double e0 = kinetic_energy(spec, s0);
    double drift = 0.0;
    for (const auto& s : states) drift = std::max(drift, std::abs(kinetic_energy(spec, s) - e0) / e0);
    CHECK(drift < 1e-8);
  }
}

TEST_CASE("SE residual on circles") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  CHECK(el_residual_SE(plane, make_circle(ChartPoint::Zero(), 1.0, -1, 256), 1.0).max_res < 1e-3);
  // Constant curvature mismatch |sqrt(E)/r - B|.
  ResidualReport r2 = el_residual_SE(plane, make_circle(ChartPoint(1.0, 1.0), 2.0, -1, 256), 1.0);
  CHECK(std::abs(r2.mean_res - 0.5) < 0.05);
  CHECK_THROWS_AS(el_residual_SE(plane, make_point_loop(ChartPoint::Zero(), 8), 1.0), DegenerateLoop);
  // Wrong orientation: curvature and Lorentz force add up.
  CHECK(el_residual_SE(plane, make_circle(ChartPoint::Zero(), 1.0, 1, 256), 1.0).mean_res > 1.9);
}

TEST_CASE("SE residual converges at second order") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  double prev = 0.0;
  for (std::size_t N : {64u, 128u, 256u, 512u}) {
    double r = el_residual_SE(plane, make_circle(ChartPoint::Zero(), 1.0, -1, N), 1.0).max_res;
    if (prev > 0.0) {
      double order = std::log2(prev / r);
      CHECK(order >= 1.7);
      CHECK(order <= 2.3);
    }
    prev = r;
  }
}

TEST_CASE("deq residual") {
  GeometrySpec plane = GeometrySpec::plane(1.0);
  ActionParams p;
  SUBCASE("reduces to SE at eps = tau = 0") {
    std::vector<GeometrySpec> kinds = {plane, GeometrySpec::flat_torus(1.0, 1), GeometrySpec::conformal_torus(1.0, 1, 0.3)};
    for (const auto& spec : kinds) {
      Loop l = resample_arclength(spec, make_circle(ChartPoint(0.3, 0.4), 0.2, -1, 128), 128);
      ResidualReport a = el_residual_SE(spec, l, 1.0), b = el_residual_deq(spec, l, p);
      for (std::size_t j = 0; j < a.per_vertex.size(); ++j) REQUIRE(std::abs(a.per_vertex[j] - b.per_vertex[j]) <= 1e-12);
    }
  }
  SUBCASE("regularised circle radius") {
    p.eps = 0.01;
    double rho = 1.0 / (1.0 - 4.0 * pi * p.eps);
    CHECK(el_residual_deq(plane, make_circle(ChartPoint::Zero(), rho, -1, 512), p).max_res < 1e-2);
    CHECK(el_residual_deq(plane, make_circle(ChartPoint::Zero(), 1.0, -1, 512), p).max_res > 0.1);
  }
  SUBCASE("energy rescaling") {
    GeometrySpec p2 = GeometrySpec::plane(2.0);
    p.E = 4.0;
    p.eps = 0.005;
    double rho = 1.0 / (1.0 - 8.0 * pi * p.eps);
    CHECK(el_residual_deq(p2, make_circle(ChartPoint::Zero(), rho, -1, 512), p).max_res < 1e-2);
  }
}

TEST_CASE("trajectory csv") {
  auto states = integrate_flow(GeometrySpec::plane(1.0), FlowState{ChartPoint::Zero(), Vec2(1, 0)}, 1.0, 4);
  std::string csv = trajectory_to_csv(GeometrySpec::plane(1.0), states, 1.0);
  CHECK(csv.rfind("t,x,y,vx,vy,energy\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}
