#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "magloop/continuation.hpp"
#include "magloop/geometry.hpp"
#include "magloop/minimax.hpp"

namespace magloop {

  /// Unreadable file, malformed JSON, unknown key or out-of-range value.
  class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
  };

  struct ExperimentConfig {
    GeometrySpec geometry;
    double E = 1.0;
    FamilyShape w_shape = FamilyShape::path;

    std::size_t n_vertices = 128;
    std::size_t family_size = 33;
    std::size_t M_P = 1;

    double eps0 = 1e-2;
    double tau0 = 1e-2;
    double rho = 0.5;
    int n_steps = 8;
    double delta = 1e-9;
    double beta_frac = 0.1;
    bool nested = false;

    DescentSettings solver;
    double residual_tol = 1e-2;

    std::string output_dir = "out";
    std::uint64_t seed = 0;

    /// Throws ConfigError on the first violated range.
    void validate() const;

    Schedule schedule() const;
    ContinuationSettings continuation_settings() const;
    /// Solver settings with the seed and family sizes filled in.
    DescentSettings descent_settings(int threads) const;

    bool operator==(const ExperimentConfig&) const = default;
  };

  /// Strict: unknown keys are rejected. Missing sections keep their defaults.
  ExperimentConfig config_from_json(const nlohmann::json& j);
  nlohmann::json config_to_json(const ExperimentConfig& config);

  /// Parse errors carry "line L, column C".
  ExperimentConfig parse_config(const std::string& text);
  ExperimentConfig load_config(const std::string& path);

}  // namespace magloop
