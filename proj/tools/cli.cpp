#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "magloop/config.hpp"
#include "magloop/continuation.hpp"
#include "magloop/dynamics.hpp"
#include "magloop/io.hpp"
#include "magloop/minimax.hpp"
#include "magloop/oracle.hpp"

namespace magloop::cli {

  namespace {

    struct Globals {
      int threads = 1;
      bool verbose = false;
    };

    struct GeometryOptions {
      std::string kind = "plane_constant_B";
      double B = 1.0;
      double a = 0.0;
      int k = 1;
      double u_amp = 0.0;

      void attach(CLI::App* app) {
        app->add_option("--geometry", kind, "geometry kind: plane_constant_B, flat_torus_sine or conformal_torus")
            ->capture_default_str();
        app->add_option("--B", B, "field strength (plane)")->capture_default_str();
        app->add_option("--a", a, "potential amplitude (torus kinds)")->capture_default_str();
        app->add_option("--k", k, "potential frequency (torus kinds)")->capture_default_str();
        app->add_option("--u-amp", u_amp, "conformal factor amplitude")->capture_default_str();
      }

      GeometrySpec spec() const {
        GeometrySpec s;
        try {
          s.kind = geometry_kind_from_string(kind);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
        s.B = s.kind == GeometryKind::plane_constant_B ? B : 0.0;
        s.a = s.is_torus() ? a : 0.0;
        s.k = k;
        s.u_amp = s.kind == GeometryKind::conformal_torus ? u_amp : 0.0;
        try {
          s.validate();
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
        return s;
      }
    };

    /// Relative config paths land under $MAGLOOP_OUTPUT_ROOT when it is set.
    std::string resolve_output(const std::string& configured) {
      const char* root = std::getenv("MAGLOOP_OUTPUT_ROOT");
      std::filesystem::path p(configured);
      if (root && *root && p.is_relative()) return (std::filesystem::path(root) / p).string();
      return configured;
    }

    double seconds_since(std::chrono::steady_clock::time_point t0) {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    int cmd_run(const Globals& g, const std::string& config_path, const std::string& output_override) {
      auto t0 = std::chrono::steady_clock::now();
      ExperimentConfig config = load_config(config_path);
      std::string dir = output_override.empty() ? resolve_output(config.output_dir) : output_override;
      ensure_directory(dir);

      auto t1 = std::chrono::steady_clock::now();
      ContinuationResult result = continuation_run(config.geometry, config.E, config.w_shape, config.schedule(),
                                                   config.descent_settings(g.threads), config.continuation_settings());
      nlohmann::json timings{{"continuation_s", seconds_since(t1)}, {"total_s", seconds_since(t0)}};
      write_bundle(dir, config, result, timings);

      if (g.verbose) {
        std::cout << summary_text(config, result);
      } else {
        std::cout << "outcome: " << to_string(result.classification.kind) << "\n";
      }
      std::cout << "bundle: " << (std::filesystem::path(dir) / "result.json").string() << "\n";
      return result.classification.kind == OutcomeCase::inconclusive ? inconclusive : ok;
    }

    struct MpassOptions {
      std::string config;
      std::optional<double> eps, tau;
      std::string output;
    };

    int cmd_mpass(const Globals& g, const MpassOptions& o) {
      ExperimentConfig config = load_config(o.config);
      ActionParams params;
      params.E = config.E;
      params.eps = o.eps.value_or(config.eps0);
      params.tau = o.tau.value_or(config.tau0);
      params.delta = config.delta;
      try {
        params.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      DescentSettings settings = config.descent_settings(g.threads);
      LoopFamily family =
          init_sweep_family(config.geometry, config.E, config.w_shape, config.family_size, config.n_vertices, config.seed, config.M_P);
      MinimaxResult mm = run_minimax(config.geometry, family, params, std::nullopt, settings);

      double L = length(config.geometry, mm.argmax_loop);
      std::cout.precision(12);
      std::cout << "level " << mm.level << "\n"
                << "length " << L << "\n"
                << "grad_norm " << mm.grad_norm_at_argmax << "\n"
                << "converged " << (mm.converged ? "yes" : "no") << "\n";
      if (g.verbose) {
        for (const auto& [it, level] : mm.history) std::cout << "  iter " << it << "  level " << level << "\n";
      }
      if (!o.output.empty()) {
        std::string dir = resolve_output(o.output);
        ensure_directory(dir);
        nlohmann::json j = minimax_to_json(mm);
        j["eps"] = params.eps;
        j["tau"] = params.tau;
        j["length"] = L;
        j["version"] = version_string();
        write_text_file((std::filesystem::path(dir) / "mpass.json").string(), j.dump(2) + "\n");
        write_text_file((std::filesystem::path(dir) / "argmax.csv").string(),
                        loop_to_csv(mm.argmax_loop, mm.argmax_loop.has_windings()));
      }
      return mm.converged ? ok : inconclusive;
    }

    struct FlowOptions {
      GeometryOptions geo;
      double x = 0.0, y = 0.0, angle = 0.0, speed = 1.0, T = 0.0;
      int steps = 0;
      std::string output;
    };

    int cmd_flow(const Globals&, const FlowOptions& o) {
      GeometrySpec spec = o.geo.spec();
      if (!(o.T > 0.0)) throw ConfigError("--T must be positive");
      if (!(o.speed > 0.0)) throw ConfigError("--speed must be positive");
      int steps = o.steps > 0 ? o.steps : static_cast<int>(std::ceil(o.T / 1e-3));
      ChartPoint p(o.x, o.y);
      double lambda = std::sqrt(metric_eval(spec, p)(0, 0));
      FlowState s0{p, o.speed / lambda * Vec2(std::cos(o.angle), std::sin(o.angle))};
      std::vector<FlowState> states = integrate_flow(spec, s0, o.T, steps);

      const FlowState& s1 = states.back();
      double closure = std::hypot((s1.p - s0.p).norm(), (s1.v - s0.v).norm() / s0.v.norm());
      double e0 = kinetic_energy(spec, s0);
      double drift = 0.0;
      for (const auto& s : states) drift = std::max(drift, std::abs(kinetic_energy(spec, s) - e0) / e0);
      std::cout.precision(6);
      std::cout << std::scientific << "closure_residual " << closure << "\n"
                << "energy_drift " << drift << "\n";
      if (!o.output.empty()) {
        std::string dir = resolve_output(o.output);
        ensure_directory(dir);
        write_text_file((std::filesystem::path(dir) / "trajectory.csv").string(), trajectory_to_csv(spec, states, o.T));
      }
      return ok;
    }

    struct GradcheckOptions {
      std::uint64_t seed = 0;
      int loops = 50;
      std::size_t N = 64;
      double h = 1e-6;
      double tol = 1e-5;
    };

    int cmd_gradcheck(const Globals& g, const GradcheckOptions& o) {
      if (o.loops < 1 || o.N < 3 || !(o.h > 0.0)) throw ConfigError("gradcheck needs --loops >= 1, --N >= 3 and --fd-step > 0");
      GradCheckReport rep = gradient_check_suite(o.seed, o.loops, o.N, o.h);
      if (g.verbose) {
        for (std::size_t i = 0; i < rep.rel_errors.size(); ++i) std::cout << "loop " << i << "  rel_error " << rep.rel_errors[i] << "\n";
      }
      std::cout << "max_rel_error " << rep.max_rel_error << "\n";
      return rep.max_rel_error < o.tol ? ok : failure;
    }

    struct ShootOptions {
      GeometryOptions geo;
      double E = 0.5;
      double period_cap = 10.0;
      double tol = 1e-8;
      double grid_step = 0.25;
      double x_min = 0.0, x_max = 1.0, y0 = 0.0;
      int angles = 4;
      std::string output;
    };

    int cmd_shoot(const Globals& g, const ShootOptions& o) {
      GeometrySpec spec = o.geo.spec();
      if (!(o.grid_step > 0.0) || o.angles < 1 || !(o.x_max >= o.x_min)) throw ConfigError("invalid seed grid");
      std::vector<ShootingSeed> seeds;
      for (double x = o.x_min; x <= o.x_max + 1e-12; x += o.grid_step) {
        for (int i = 0; i < o.angles; ++i) {
          seeds.push_back(ShootingSeed{ChartPoint(x, o.y0), 2.0 * std::numbers::pi * i / o.angles});
        }
      }
      ShootingSettings settings;
      settings.threads = g.threads;
      std::vector<OrbitCandidate> found;
      try {
        found = shooting_periodic(spec, o.E, seeds, o.period_cap, o.tol, settings);
      } catch (const InvalidOracleInput& e) {
        throw ConfigError(e.what());
      }
      std::cout << "candidates " << found.size() << "\n";
      nlohmann::json arr = nlohmann::json::array();
      for (std::size_t i = 0; i < found.size(); ++i) {
        nlohmann::json j = orbit_to_json(found[i]);
        j["loop_file"] = "orbit_" + std::to_string(i) + ".csv";
        arr.push_back(j);
        if (g.verbose) std::cout << j.dump() << "\n";
      }
      if (!o.output.empty()) {
        std::string dir = resolve_output(o.output);
        ensure_directory(dir);
        std::filesystem::path root(dir);
        write_text_file((root / "orbits.json").string(), nlohmann::json{{"version", version_string()}, {"orbits", arr}}.dump(2) + "\n");
        for (std::size_t i = 0; i < found.size(); ++i) {
          write_text_file((root / ("orbit_" + std::to_string(i) + ".csv")).string(),
                          loop_to_csv(orbit_to_loop(spec, found[i], 256), false));
        }
      }
      return ok;
    }

  }  // namespace

  int run_cli(int argc, char** argv) {
    CLI::App app{"Periodic magnetic geodesics by numerical mountain pass"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--threads", g.threads, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();
    app.add_flag("--verbose", g.verbose, "print per-step details");

    std::string run_config, run_output;
    CLI::App* run = app.add_subcommand("run", "continuation experiment from a JSON config; writes a result bundle");
    run->add_option("--config", run_config, "experiment config (JSON)")->required();
    run->add_option("--output", run_output, "output directory (overrides the config)");

    MpassOptions mp;
    CLI::App* mpass = app.add_subcommand("mpass", "single mountain pass at fixed eps, tau");
    mpass->add_option("--config", mp.config, "experiment config (JSON)")->required();
    mpass->add_option("--eps", mp.eps, "eps (default: action.eps0)");
    mpass->add_option("--tau", mp.tau, "tau (default: action.tau0)");
    mpass->add_option("--output", mp.output, "directory for mpass.json and argmax.csv");

    FlowOptions fl;
    CLI::App* flow = app.add_subcommand("flow", "integrate the Lorentz flow with RK4");
    fl.geo.attach(flow);
    flow->add_option("--x", fl.x, "initial x")->capture_default_str();
    flow->add_option("--y", fl.y, "initial y")->capture_default_str();
    flow->add_option("--angle", fl.angle, "launch angle in the chart")->capture_default_str();
    flow->add_option("--speed", fl.speed, "initial speed |v|_g")->capture_default_str();
    flow->add_option("--T", fl.T, "integration time")->required();
    flow->add_option("--steps", fl.steps, "RK4 steps (default: ceil(T / 1e-3))");
    flow->add_option("--output", fl.output, "directory for trajectory.csv");

    GradcheckOptions gc;
    CLI::App* gradcheck = app.add_subcommand("gradcheck", "analytic gradient against central differences on random loops");
    gradcheck->add_option("--seed", gc.seed, "random seed")->capture_default_str();
    gradcheck->add_option("--loops", gc.loops, "number of random loops")->capture_default_str();
    gradcheck->add_option("--N", gc.N, "vertices per loop")->capture_default_str();
    gradcheck->add_option("--fd-step", gc.h, "difference step")->capture_default_str();
    gradcheck->add_option("--tol", gc.tol, "pass threshold on the relative L2 error")->capture_default_str();

    CLI::App* oracle = app.add_subcommand("oracle", "independent reference solutions");
    oracle->require_subcommand(1);
    double lE = 1.0, lB = 1.0;
    CLI::App* larmor = oracle->add_subcommand("larmor", "closed-form planar extremal");
    larmor->add_option("--E", lE, "energy")->capture_default_str();
    larmor->add_option("--B", lB, "field strength")->capture_default_str();

    ShootOptions sh;
    CLI::App* shoot = oracle->add_subcommand("shoot", "periodic orbits by shooting (mechanical energy, speed sqrt(2E))");
    sh.geo.attach(shoot);
    shoot->add_option("--E", sh.E, "mechanical energy")->capture_default_str();
    shoot->add_option("--period-cap", sh.period_cap, "longest period searched")->capture_default_str();
    shoot->add_option("--tol", sh.tol, "closure tolerance")->capture_default_str();
    shoot->add_option("--grid-step", sh.grid_step, "spacing of seed x0")->capture_default_str();
    shoot->add_option("--x-min", sh.x_min, "first seed x0")->capture_default_str();
    shoot->add_option("--x-max", sh.x_max, "last seed x0")->capture_default_str();
    shoot->add_option("--y0", sh.y0, "seed y0")->capture_default_str();
    shoot->add_option("--angles", sh.angles, "launch directions per seed point")->capture_default_str();
    shoot->add_option("--output", sh.output, "directory for orbits.json and orbit_<i>.csv");

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return config_error;
    }

    try {
      if (run->parsed()) return cmd_run(g, run_config, run_output);
      if (mpass->parsed()) return cmd_mpass(g, mp);
      if (flow->parsed()) return cmd_flow(g, fl);
      if (gradcheck->parsed()) return cmd_gradcheck(g, gc);
      if (larmor->parsed()) {
        LarmorOrbit orbit = larmor_orbit(lE, lB);
        std::cout.precision(17);
        std::cout << nlohmann::json{{"radius", orbit.radius}, {"action_level", orbit.action_level}}.dump() << "\n";
        return ok;
      }
      if (shoot->parsed()) return cmd_shoot(g, sh);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return config_error;
    } catch (const InvalidOracleInput& e) {
      std::cerr << "invalid input: " << e.what() << "\n";
      return config_error;
    } catch (const NoNegativeLoopFound& e) {
      std::cerr << "no negative loop: " << e.what() << "\n";
      return no_negative_loop;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return failure;
    }
    return failure;
  }

}  // namespace magloop::cli
