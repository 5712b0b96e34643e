#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>
#include "json.hpp"

/**
 * \file geometry.hpp
 *
 * @brief Two-dimensional charts carrying a Riemannian metric and an exact magnetic field F = dA.
 *
 * Three analytic geometries are built in. All of them expose closed-form derivatives so that
 * Christoffel symbols and the field tensor are exact rather than differenced.
 */

namespace magloop {

  using Vec2 = Eigen::Vector2d;
  using Mat2 = Eigen::Matrix2d;

  /// A point in chart coordinates.
  using ChartPoint = Vec2;

  enum class GeometryKind { plane_constant_B, flat_torus_sine, conformal_torus };

  std::string to_string(GeometryKind kind);
  GeometryKind geometry_kind_from_string(const std::string& name);

  struct GeometrySpec {
    GeometryKind kind = GeometryKind::plane_constant_B;
    /// Field strength of the plane kind.
    double B = 0.0;
    /// Potential amplitude of the torus kinds, A = a sin(2 pi k x) dy.
    double a = 0.0;
    int k = 1;
    /// Conformal factor amplitude, g = exp(2 u_amp cos(2 pi x)) I.
    double u_amp = 0.0;

    bool is_torus() const { return kind != GeometryKind::plane_constant_B; }

    static GeometrySpec plane(double B);
    static GeometrySpec flat_torus(double a, int k = 1);
    static GeometrySpec conformal_torus(double a, int k, double u_amp);

    /// Throws std::invalid_argument on non-finite parameters or k < 1.
    void validate() const;

    friend bool operator==(const GeometrySpec&, const GeometrySpec&) = default;
  };

  /// Christoffel symbols of the second kind; gamma[i](j, k) = Gamma^i_{jk}.
  using Christoffel = std::array<Mat2, 2>;

  /// Partial derivatives of a 2x2 field; d[k] = d/dx^k.
  using MatDerivative = std::array<Mat2, 2>;

  Mat2 metric_eval(const GeometrySpec& spec, const ChartPoint& p);
  MatDerivative metric_derivative(const GeometrySpec& spec, const ChartPoint& p);
  Christoffel christoffel(const GeometrySpec& spec, const ChartPoint& p);

  /// Covector (A_1, A_2).
  Vec2 potential_eval(const GeometrySpec& spec, const ChartPoint& p);
  /// J(k, i) = d A_i / d x^k.
  Mat2 potential_jacobian(const GeometrySpec& spec, const ChartPoint& p);

  /// F_ij = d_i A_j - d_j A_i.
  Mat2 field_F(const GeometrySpec& spec, const ChartPoint& p);

  /**
   * @brief Field strength measured against the metric area form, F_12 / sqrt(det g).
   *
   * This is the quantity that fixes the radius of small magnetic circles, r = sqrt(E) / |B_eff|.
   */
  double effective_field(const GeometrySpec& spec, const ChartPoint& p);

  /// Canonical representative in [0,1)^2 on torus kinds; identity on the plane.
  ChartPoint wrap_point(const GeometrySpec& spec, const ChartPoint& p);

  void to_json(nlohmann::json& j, const GeometrySpec& spec);
  /// Absent numeric fields default to 0 (k to 1); unknown keys are rejected.
  void from_json(const nlohmann::json& j, GeometrySpec& spec);

}  // namespace magloop
