#include "fracsl/cli/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace fracsl::cli {
namespace {

using Ctx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

Ctx make_ctx() {
  Ctx ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 initialisation failed");
  }
  return ctx;
}

std::string finish(EVP_MD_CTX* ctx) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, md, &len) != 1) throw std::runtime_error("SHA-256 finalisation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  auto ctx = make_ctx();
  EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
  return finish(ctx.get());
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  auto ctx = make_ctx();
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  return finish(ctx.get());
}

std::vector<FileDigest> digest_directory(const std::filesystem::path& dir) {
  std::vector<FileDigest> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), dir).generic_string();
    if (rel == kManifestName) continue;
    out.push_back({rel, sha256_file(entry.path()), entry.file_size()});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int thread_count() {
  const char* env = std::getenv("FRACSL_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  return (end != env && *end == '\0' && n > 0 && n < 4096) ? static_cast<int>(n) : 1;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = tool;
  j["version"] = version;
  j["command"] = command;
  j["config_sha256"] = config_sha256;
  j["seed"] = seed;
  j["threads"] = threads;
  j["started"] = started;
  j["finished"] = finished;
  j["status"] = status;
  j["exit_code"] = exit_code;
  j["files"] = nlohmann::json::array();
  for (const auto& f : files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back(
        {{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"threshold", c.threshold}, {"relation", c.relation}});
  }
  if (error_kind) j["error_kind"] = *error_kind;
  if (error) j["error"] = *error;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.tool = j.at("tool");
  m.version = j.at("version");
  m.command = j.at("command");
  m.config_sha256 = j.at("config_sha256");
  m.seed = j.at("seed");
  m.threads = j.at("threads");
  m.started = j.at("started");
  m.finished = j.at("finished");
  m.status = j.at("status");
  m.exit_code = j.at("exit_code");
  for (const auto& f : j.at("files")) m.files.push_back({f.at("path"), f.at("sha256"), f.at("bytes")});
  for (const auto& c : j.at("checks")) {
    m.checks.push_back({c.at("name"), c.at("pass"), c.at("value"), c.at("threshold"), c.at("relation")});
  }
  if (j.contains("error_kind")) m.error_kind = j["error_kind"].get<std::string>();
  if (j.contains("error")) m.error = j["error"].get<std::string>();
  return m;
}

}  // namespace fracsl::cli
