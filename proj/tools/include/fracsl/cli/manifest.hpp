#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fracsl::cli {

inline constexpr const char* kToolName = "fracsl";
inline constexpr const char* kManifestName = "manifest.json";

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation = "<=";  ///< how value compares against threshold when passing
};

struct FileDigest {
  std::string path;  ///< relative to the output directory, '/' separated
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string tool = kToolName;
  std::string version;
  std::string command;
  std::string config_sha256;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string started;
  std::string finished;
  std::string status;  ///< pass, check_failed, numerical_error
  int exit_code = 0;
  std::vector<FileDigest> files;
  std::vector<Check> checks;
  std::optional<std::string> error_kind;
  std::optional<std::string> error;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

/// Every regular file under dir except the manifest itself, sorted by path.
std::vector<FileDigest> digest_directory(const std::filesystem::path& dir);

/// UTC timestamp, ISO 8601 with seconds.
std::string utc_now();

/// FRACSL_THREADS if set to a positive integer, else 1.
int thread_count();

}  // namespace fracsl::cli
