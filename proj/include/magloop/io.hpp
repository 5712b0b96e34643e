#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "magloop/config.hpp"
#include "magloop/continuation.hpp"

namespace magloop {

  class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
  };

  std::string version_string();

  /// Everything except the wall-clock timings, which live under the separate "timings" key.
  nlohmann::json make_bundle(const ExperimentConfig& config, const ContinuationResult& result);

  std::string summary_text(const ExperimentConfig& config, const ContinuationResult& result);

  /// Writes result.json, step_<n>.csv and summary.txt under `dir` (created if missing).
  void write_bundle(const std::string& dir, const ExperimentConfig& config, const ContinuationResult& result,
                    const nlohmann::json& timings);

  void write_text_file(const std::string& path, const std::string& content);

  /// Creates `dir` and its parents; throws IoError if that fails.
  void ensure_directory(const std::string& dir);

}  // namespace magloop
