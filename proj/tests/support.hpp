#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "magloop/geometry.hpp"
#include "magloop/loop.hpp"

namespace magloop::testing {

  constexpr double pi = std::numbers::pi;

  inline GeometrySpec kind_sample(int i) {
    switch (i % 3) {
      case 0:
        return GeometrySpec::plane(1.0);
      case 1:
        return GeometrySpec::flat_torus(1.0, 1);
      default:
        return GeometrySpec::conformal_torus(1.0, 1, 0.3);
    }
  }

  inline bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace magloop::testing
