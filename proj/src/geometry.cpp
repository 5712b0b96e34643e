#include "magloop/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace magloop {

  namespace {

    constexpr double two_pi = 2.0 * std::numbers::pi;

    double unit_mod(double x) {
      double r = x - std::floor(x);
      return r >= 1.0 ? 0.0 : r;
    }

    // Torus fields only depend on x; reducing first makes integer shifts land on the same argument.
    double torus_x(const GeometrySpec& spec, const ChartPoint& p) { return spec.is_torus() ? unit_mod(p.x()) : p.x(); }

    double conformal_u(const GeometrySpec& spec, double x) {
      return spec.kind == GeometryKind::conformal_torus ? spec.u_amp * std::cos(two_pi * x) : 0.0;
    }

    double conformal_du(const GeometrySpec& spec, double x) {
      return spec.kind == GeometryKind::conformal_torus ? -two_pi * spec.u_amp * std::sin(two_pi * x) : 0.0;
    }

  }  // namespace

  std::string to_string(GeometryKind kind) {
    switch (kind) {
      case GeometryKind::plane_constant_B:
        return "plane_constant_B";
      case GeometryKind::flat_torus_sine:
        return "flat_torus_sine";
      case GeometryKind::conformal_torus:
        return "conformal_torus";
    }
    return "unknown";
  }

  GeometryKind geometry_kind_from_string(const std::string& name) {
    if (name == "plane_constant_B") return GeometryKind::plane_constant_B;
    if (name == "flat_torus_sine") return GeometryKind::flat_torus_sine;
    if (name == "conformal_torus") return GeometryKind::conformal_torus;
    throw std::invalid_argument("unknown geometry kind '" + name + "'");
  }

  GeometrySpec GeometrySpec::plane(double B) {
    GeometrySpec s;
    s.kind = GeometryKind::plane_constant_B;
    s.B = B;
    return s;
  }

  GeometrySpec GeometrySpec::flat_torus(double a, int k) {
    GeometrySpec s;
    s.kind = GeometryKind::flat_torus_sine;
    s.a = a;
    s.k = k;
    return s;
  }

  GeometrySpec GeometrySpec::conformal_torus(double a, int k, double u_amp) {
    GeometrySpec s;
    s.kind = GeometryKind::conformal_torus;
    s.a = a;
    s.k = k;
    s.u_amp = u_amp;
    return s;
  }

  void GeometrySpec::validate() const {
    if (!std::isfinite(B) || !std::isfinite(a) || !std::isfinite(u_amp)) {
      throw std::invalid_argument("geometry parameters must be finite");
    }
    if (k < 1) throw std::invalid_argument("geometry wavenumber k must be a positive integer");
  }

  Mat2 metric_eval(const GeometrySpec& spec, const ChartPoint& p) {
    double u = conformal_u(spec, torus_x(spec, p));
    return std::exp(2.0 * u) * Mat2::Identity();
  }

  MatDerivative metric_derivative(const GeometrySpec& spec, const ChartPoint& p) {
    double x = torus_x(spec, p);
    double u = conformal_u(spec, x);
    MatDerivative d{Mat2::Zero(), Mat2::Zero()};
    d[0] = 2.0 * conformal_du(spec, x) * std::exp(2.0 * u) * Mat2::Identity();
    return d;
  }

  Christoffel christoffel(const GeometrySpec& spec, const ChartPoint& p) {
    Mat2 ginv = metric_eval(spec, p).inverse();
    MatDerivative dg = metric_derivative(spec, p);
    Christoffel gamma{Mat2::Zero(), Mat2::Zero()};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
          double sum = 0.0;
          for (int l = 0; l < 2; ++l) {
            sum += ginv(i, l) * (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
          }
          gamma[i](j, k) = 0.5 * sum;
        }
      }
    }
    return gamma;
  }

  Vec2 potential_eval(const GeometrySpec& spec, const ChartPoint& p) {
    if (spec.kind == GeometryKind::plane_constant_B) {
      return 0.5 * spec.B * Vec2(-p.y(), p.x());
    }
    double x = torus_x(spec, p);
    return Vec2(0.0, spec.a * std::sin(two_pi * spec.k * x));
  }

  Mat2 potential_jacobian(const GeometrySpec& spec, const ChartPoint& p) {
    Mat2 J = Mat2::Zero();
    if (spec.kind == GeometryKind::plane_constant_B) {
      J(0, 1) = 0.5 * spec.B;
      J(1, 0) = -0.5 * spec.B;
      return J;
    }
    double x = torus_x(spec, p);
    J(0, 1) = two_pi * spec.k * spec.a * std::cos(two_pi * spec.k * x);
    return J;
  }

  Mat2 field_F(const GeometrySpec& spec, const ChartPoint& p) {
    Mat2 J = potential_jacobian(spec, p);
    return J - J.transpose();
  }

  double effective_field(const GeometrySpec& spec, const ChartPoint& p) {
    return field_F(spec, p)(0, 1) / std::sqrt(metric_eval(spec, p).determinant());
  }

  ChartPoint wrap_point(const GeometrySpec& spec, const ChartPoint& p) {
    if (!spec.is_torus()) return p;
    return ChartPoint(unit_mod(p.x()), unit_mod(p.y()));
  }

  void to_json(nlohmann::json& j, const GeometrySpec& spec) {
    j = nlohmann::json{{"kind", to_string(spec.kind)}, {"B", spec.B}, {"a", spec.a}, {"k", spec.k}, {"u_amp", spec.u_amp}};
  }

  void from_json(const nlohmann::json& j, GeometrySpec& spec) {
    if (!j.is_object()) throw std::invalid_argument("geometry must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key != "kind" && key != "B" && key != "a" && key != "k" && key != "u_amp") {
        throw std::invalid_argument("unknown geometry key '" + key + "'");
      }
    }
    if (!j.contains("kind")) throw std::invalid_argument("geometry.kind is required");
    GeometrySpec s;
    s.kind = geometry_kind_from_string(j.at("kind").get<std::string>());
    s.B = j.value("B", 0.0);
    s.a = j.value("a", 0.0);
    s.k = j.value("k", 1);
    s.u_amp = j.value("u_amp", 0.0);
    s.validate();
    spec = s;
  }

}  // namespace magloop
