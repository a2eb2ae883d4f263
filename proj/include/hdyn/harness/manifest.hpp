#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace hdyn {

constexpr const char* kHarnessVersion = "1.0.0";

std::string sha256_hex(const std::string& bytes);
/// Throws ConfigError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

struct ArtifactRecord {
  std::string path;    // relative to the output directory
  std::string sha256;
};

/// What a subcommand read and wrote. Paths are relative to the output
/// directory so reruns into different directories compare equal.
struct ExperimentManifest {
  std::string subcommand;
  std::string tag;  // distinguishes repeated runs of one subcommand, e.g. dataset names
  nlohmann::json config;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> stages;
  std::vector<ArtifactRecord> inputs;
  std::vector<ArtifactRecord> outputs;

  /// Records `relative` (under `root`) with its current hash.
  void add_input(const std::filesystem::path& root, const std::string& relative);
  void add_output(const std::filesystem::path& root, const std::string& relative);

  nlohmann::json to_json() const;
  /// Hash of the canonical JSON form.
  std::string digest() const;
};

/// Writes <root>/manifests/<subcommand>[-<tag>].json and returns its relative path.
std::string write_manifest(const std::filesystem::path& root, const ExperimentManifest& manifest);

}  // namespace hdyn
