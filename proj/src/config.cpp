#include "magloop/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace magloop {

  namespace {

    using nlohmann::json;

    void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
      if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
      for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
      }
    }

    template <class T>
    void read(const json& j, const char* key, T& out, const std::string& where) {
      if (!j.contains(key)) return;
      try {
        out = j.at(key).get<T>();
      } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
      }
    }

    /// Counts above this are certainly typos and would only exhaust memory.
    constexpr std::size_t max_count = 1u << 20;

  }  // namespace

  void ExperimentConfig::validate() const {
    try {
      geometry.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!(E > 0.0)) throw ConfigError("E must be positive");
    if (n_vertices < 3 || n_vertices > max_count) throw ConfigError("discretization.n_vertices must lie in [3, 2^20]");
    if (family_size < 3 || family_size > max_count) throw ConfigError("discretization.family_size must lie in [3, 2^20]");
    if (M_P < 1 || M_P > max_count) throw ConfigError("discretization.M_P must lie in [1, 2^20]");
    if (w_shape == FamilyShape::cylinder && !geometry.is_torus()) throw ConfigError("w_shape cylinder needs a torus geometry");
    if (!(tau0 >= 0.0 && tau0 < 1.0)) throw ConfigError("tau must satisfy 0 <= tau < 1");
    if (!(delta >= 0.0)) throw ConfigError("action.delta must be non-negative");
    if (!(beta_frac > 0.0)) throw ConfigError("action.beta_frac must be positive");
    if (!(residual_tol > 0.0)) throw ConfigError("solver.residual_tol must be positive");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
    try {
      schedule().validate();
      descent_settings(1).validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  Schedule ExperimentConfig::schedule() const { return Schedule{eps0, tau0, rho, n_steps, nested}; }

  ContinuationSettings ExperimentConfig::continuation_settings() const {
    return ContinuationSettings{n_vertices, M_P, delta, beta_frac, residual_tol};
  }

  DescentSettings ExperimentConfig::descent_settings(int threads) const {
    DescentSettings s = solver;
    s.family_size = family_size;
    s.family_rows = M_P;
    s.rng_seed = seed;
    s.threads = threads;
    return s;
  }

  ExperimentConfig config_from_json(const json& j) {
    check_keys(j, "config", {"geometry", "E", "w_shape", "discretization", "action", "solver", "output_dir", "seed"});
    ExperimentConfig c;
    if (!j.contains("geometry")) throw ConfigError("config.geometry is required");
    try {
      c.geometry = j.at("geometry").get<GeometrySpec>();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    } catch (const json::exception& e) {
      throw ConfigError(std::string("geometry: ") + e.what());
    }
    read(j, "E", c.E, "config");
    if (j.contains("w_shape")) {
      std::string shape;
      read(j, "w_shape", shape, "config");
      try {
        c.w_shape = family_shape_from_string(shape);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    if (j.contains("discretization")) {
      const json& d = j.at("discretization");
      check_keys(d, "discretization", {"n_vertices", "family_size", "M_P"});
      read(d, "n_vertices", c.n_vertices, "discretization");
      read(d, "family_size", c.family_size, "discretization");
      read(d, "M_P", c.M_P, "discretization");
    }
    if (j.contains("action")) {
      const json& a = j.at("action");
      check_keys(a, "action", {"eps0", "tau0", "rho", "n_steps", "delta", "beta_frac", "nested"});
      read(a, "eps0", c.eps0, "action");
      read(a, "tau0", c.tau0, "action");
      read(a, "rho", c.rho, "action");
      read(a, "n_steps", c.n_steps, "action");
      read(a, "delta", c.delta, "action");
      read(a, "beta_frac", c.beta_frac, "action");
      read(a, "nested", c.nested, "action");
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      check_keys(s, "solver",
                 {"max_iters", "inner_iters", "grad_tol", "step0", "backtrack", "newton_iters", "stall_tol", "residual_tol"});
      read(s, "max_iters", c.solver.max_iters, "solver");
      read(s, "inner_iters", c.solver.inner_iters, "solver");
      read(s, "grad_tol", c.solver.grad_tol, "solver");
      read(s, "step0", c.solver.step0, "solver");
      read(s, "backtrack", c.solver.backtrack, "solver");
      read(s, "newton_iters", c.solver.newton_iters, "solver");
      read(s, "stall_tol", c.solver.stall_tol, "solver");
      read(s, "residual_tol", c.residual_tol, "solver");
    }
    read(j, "output_dir", c.output_dir, "config");
    read(j, "seed", c.seed, "config");
    c.solver.family_size = c.family_size;
    c.solver.family_rows = c.M_P;
    c.solver.rng_seed = c.seed;
    c.validate();
    return c;
  }

  json config_to_json(const ExperimentConfig& c) {
    return json{{"geometry", c.geometry},
                {"E", c.E},
                {"w_shape", to_string(c.w_shape)},
                {"discretization", {{"n_vertices", c.n_vertices}, {"family_size", c.family_size}, {"M_P", c.M_P}}},
                {"action",
                 {{"eps0", c.eps0},
                  {"tau0", c.tau0},
                  {"rho", c.rho},
                  {"n_steps", c.n_steps},
                  {"delta", c.delta},
                  {"beta_frac", c.beta_frac},
                  {"nested", c.nested}}},
                {"solver",
                 {{"max_iters", c.solver.max_iters},
                  {"inner_iters", c.solver.inner_iters},
                  {"grad_tol", c.solver.grad_tol},
                  {"step0", c.solver.step0},
                  {"backtrack", c.solver.backtrack},
                  {"newton_iters", c.solver.newton_iters},
                  {"stall_tol", c.solver.stall_tol},
                  {"residual_tol", c.residual_tol}}},
                {"output_dir", c.output_dir},
                {"seed", c.seed}};
  }

  ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      // byte offset -> line/column
      std::size_t line = 1, col = 1;
      for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      throw ConfigError("malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                        e.what());
    }
    return config_from_json(j);
  }

  ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
  }

}  // namespace magloop
