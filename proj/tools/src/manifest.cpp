#include "manifest.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "json.hpp"
#include "version.hpp"

namespace tbnls::cli {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

ArtifactWriter::ArtifactWriter(fs::path directory) : directory_(std::move(directory)) {
  fs::create_directories(directory_);
}

void ArtifactWriter::write(const std::string& name, const std::string& contents) {
  const fs::path path = directory_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path.string());
  if (std::find(artifacts_.begin(), artifacts_.end(), name) == artifacts_.end())
    artifacts_.push_back(name);
}

void write_manifest(const ArtifactWriter& writer, const ManifestInfo& info) {
  nlohmann::ordered_json j;
  j["command"] = info.command;
  j["version"] = kVersion;
  j["revision"] = kRevision;
  j["config_sha256"] = sha256_hex(info.config_text);
  j["wall_seconds"] = info.wall_seconds;
  j["status"] = info.failed ? "FAILED" : "OK";
  j["exit_code"] = info.exit_code;
  if (info.failed) {
    j["failed_stage"] = info.failed_stage;
    j["error"] = info.error;
  }
  j["notes"] = info.notes;
  auto& arts = j["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& name : writer.artifacts()) {
    const fs::path p = writer.directory() / name;
    arts.push_back({{"file", name},
                    {"bytes", static_cast<std::uint64_t>(fs::file_size(p))},
                    {"sha256", sha256_file(p)}});
  }
  std::ofstream out(writer.directory() / "manifest.json", std::ios::trunc);
  out << j.dump(2) << '\n';
}

}  // namespace tbnls::cli
