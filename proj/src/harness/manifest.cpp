#include "hdyn/harness/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "hdyn/common/errors.hpp"
#include "hdyn/learn/hybrid.hpp"

namespace hdyn {

namespace {

std::string to_hex(const unsigned char* d, unsigned int n) {
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < n; ++i) out << std::setw(2) << static_cast<int>(d[i]);
  return out.str();
}

struct Hasher {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};
  Hasher() {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("sha256: digest initialisation failed");
  }
  void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx.get(), data, n); }
  std::string finish() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    return to_hex(md.data(), len);
  }
};

nlohmann::json records(const std::vector<ArtifactRecord>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : v) out.push_back({{"path", r.path}, {"sha256", r.sha256}});
  return out;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  Hasher h;
  h.update(bytes.data(), bytes.size());
  return h.finish();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  Hasher h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.finish();
}

void ExperimentManifest::add_input(const std::filesystem::path& root, const std::string& relative) {
  inputs.push_back({relative, sha256_file(root / relative)});
}

void ExperimentManifest::add_output(const std::filesystem::path& root, const std::string& relative) {
  outputs.push_back({relative, sha256_file(root / relative)});
}

nlohmann::json ExperimentManifest::to_json() const {
  return {{"subcommand", subcommand},
          {"tag", tag},
          {"harness_version", kHarnessVersion},
          {"model_format_version", kModelFormatVersion},
          {"output_dir", "."},
          {"config", config},
          {"seeds", seeds},
          {"stages", stages},
          {"inputs", records(inputs)},
          {"outputs", records(outputs)}};
}

std::string ExperimentManifest::digest() const { return sha256_hex(to_json().dump()); }

std::string write_manifest(const std::filesystem::path& root, const ExperimentManifest& manifest) {
  const std::string rel =
      "manifests/" + manifest.subcommand + (manifest.tag.empty() ? "" : "-" + manifest.tag) + ".json";
  std::filesystem::create_directories(root / "manifests");
  std::ofstream out(root / rel);
  if (!out) throw ConfigError("cannot write '" + (root / rel).string() + "'");
  out << manifest.to_json().dump(2) << "\n";
  return rel;
}

}  // namespace hdyn
