#include "magloop/io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace magloop {

  std::string version_string() { return std::string("magloop ") + MAGLOOP_VERSION; }

  nlohmann::json make_bundle(const ExperimentConfig& config, const ContinuationResult& result) {
    nlohmann::json records = nlohmann::json::array();
    for (std::size_t n = 0; n < result.records.size(); ++n) records.push_back(record_to_json(result.records[n], n));
    nlohmann::json minimax = nlohmann::json::array();
    for (const auto& m : result.minimax) minimax.push_back(minimax_to_json(m));
    return nlohmann::json{{"version", version_string()},
                          {"config", config_to_json(config)},
                          {"cutoff", {{"c_ref", result.cutoff.c_ref}, {"beta", result.cutoff.beta}}},
                          {"records", records},
                          {"classification", classification_to_json(result.classification)},
                          {"nu_trend_ok", result.nu_trend_ok},
                          {"minimax", minimax}};
  }

  std::string summary_text(const ExperimentConfig& config, const ContinuationResult& result) {
    std::ostringstream os;
    os << version_string() << "\n";
    os << "geometry " << to_string(config.geometry.kind) << ", E = " << config.E << ", shape " << to_string(config.w_shape)
       << "\n";
    os << "c_ref " << result.cutoff.c_ref << ", beta " << result.cutoff.beta << "\n\n";
    os << std::setw(5) << "step" << std::setw(12) << "eps" << std::setw(12) << "tau" << std::setw(16) << "level"
       << std::setw(14) << "l" << std::setw(12) << "nu" << std::setw(12) << "res_SE" << "  conv\n";
    os << std::setprecision(6);
    for (std::size_t n = 0; n < result.records.size(); ++n) {
      const auto& r = result.records[n];
      os << std::setw(5) << n << std::setw(12) << r.eps << std::setw(12) << r.tau << std::setw(16) << std::setprecision(10)
         << r.level << std::setprecision(6) << std::setw(14) << r.l << std::setw(12) << r.nu << std::setw(12)
         << r.residual.max_res << "  " << (r.converged ? "yes" : "no") << "\n";
    }
    os << "\noutcome: " << to_string(result.classification.kind);
    if (!result.classification.reason.empty()) os << " (" << result.classification.reason << ")";
    os << "\n";
    return os.str();
  }

  void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  }

  void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write to '" + path + "' failed");
  }

  void write_bundle(const std::string& dir, const ExperimentConfig& config, const ContinuationResult& result,
                    const nlohmann::json& timings) {
    ensure_directory(dir);
    const std::filesystem::path root(dir);
    nlohmann::json bundle = make_bundle(config, result);
    bundle["timings"] = timings;
    write_text_file((root / "result.json").string(), bundle.dump(2) + "\n");
    for (std::size_t n = 0; n < result.records.size(); ++n) {
      write_text_file((root / ("step_" + std::to_string(n) + ".csv")).string(),
                      loop_to_csv(result.records[n].loop, result.records[n].loop.has_windings()));
    }
    write_text_file((root / "summary.txt").string(), summary_text(config, result));
  }

}  // namespace magloop
