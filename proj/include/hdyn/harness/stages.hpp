#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <ostream>
#include <stdexcept>
#include <string>

#include "hdyn/harness/manifest.hpp"

namespace hdyn {

/// An upstream artifact is absent. `producer` names the subcommand that writes it.
class MissingArtifact : public std::runtime_error {
 public:
  MissingArtifact(const std::string& path, const std::string& producer)
      : std::runtime_error("missing artifact '" + path + "'; run `hdyn " + producer + "` with the same --out first"),
        producer_(producer) {}
  const std::string& producer() const { return producer_; }

 private:
  std::string producer_;
};

struct StageResult {
  ExperimentManifest manifest;
  std::string report;     // human-readable summary
  bool task_ok = true;    // false when the task itself failed (exit code 4)
};

/// Runs one subcommand with a fully resolved config, writing artifacts and
/// a manifest under `out`. Inputs are only read.
StageResult run_stage(const std::string& subcommand, const nlohmann::json& config, const std::filesystem::path& out);

/// Exit code convention of the command-line tool.
enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitMissing = 3, kExitTask = 4 };

}  // namespace hdyn
