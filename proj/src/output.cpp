#include "cotrap/output.hpp"

#include <openssl/evp.h>

#include <json.hpp>

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cotrap {

namespace {
constexpr const char* kToolVersion = "1.0.0";
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

// ---------------------------------------------------------------- csv

void CsvWriter::comment(const std::string& line) { buf_ += "# " + line + "\r\n"; }

void CsvWriter::header(const std::vector<std::string>& columns) {
  columns_ = columns.size();
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (columns_ && fields.size() != columns_) throw std::logic_error("csv: column count mismatch");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += quote(fields[i]);
  }
  buf_ += "\r\n";
}

std::string CsvWriter::num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

std::string CsvWriter::num(std::int64_t v) { return std::to_string(v); }

std::string CsvWriter::quote(const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
  std::string q = "\"";
  for (char c : f) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

// ---------------------------------------------------------------- run output

RunOutput::RunOutput(std::string dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void RunOutput::write(const std::string& name, const std::string& content) {
  const std::filesystem::path p = std::filesystem::path(dir_) / name;
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << content;
  out.close();
  for (auto& f : files_)
    if (f.name == name) {
      f.sha256 = sha256_hex(content);
      f.bytes = content.size();
      return;
    }
  files_.push_back({name, sha256_hex(content), content.size()});
}

std::string RunOutput::write_manifest(const std::string& command,
                                      const std::string& canonical_config, std::uint64_t seed,
                                      const std::string& derived_json) const {
  using json = nlohmann::json;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char ts[32];
  std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  json m;
  m["schema"] = "cotrap.manifest/1";
  m["tool"] = "cotrap";
  m["tool_version"] = kToolVersion;
  m["command"] = command;
  m["timestamp"] = ts;
  m["seed"] = seed;
  m["config"] = json::parse(canonical_config);
  m["config_sha256"] = sha256_hex(canonical_config);
  m["derived"] = json::parse(derived_json);
  json files = json::array();
  for (const auto& f : files_) files.push_back({{"file", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  m["outputs"] = files;
  const std::string name = command + ".manifest.json";
  const std::string text = m.dump(2) + "\n";
  std::ofstream out(std::filesystem::path(dir_) / name, std::ios::binary | std::ios::trunc);
  out << text;
  return name;
}

}  // namespace cotrap
