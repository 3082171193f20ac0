#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tbnls::cli {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// All file output of a command goes through one writer, which records each
/// artifact for the manifest.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path directory);

  const std::filesystem::path& directory() const { return directory_; }
  void write(const std::string& name, const std::string& contents);
  const std::vector<std::string>& artifacts() const { return artifacts_; }

 private:
  std::filesystem::path directory_;
  std::vector<std::string> artifacts_;
};

struct ManifestInfo {
  std::string command;
  std::string config_text;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string failed_stage;
  std::string error;
  int exit_code = 0;
  std::vector<std::string> notes;
};

/// Writes manifest.json: config hash, code version, wall time, status and a
/// SHA-256 for every artifact.
void write_manifest(const ArtifactWriter& writer, const ManifestInfo& info);

}  // namespace tbnls::cli
