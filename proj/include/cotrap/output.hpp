#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cotrap {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

/// RFC-4180 table with '#' comment lines (units, provenance of columns) before the header.
class CsvWriter {
 public:
  void comment(const std::string& line);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& fields);
  const std::string& str() const { return buf_; }

  static std::string num(double v);  // %.17g, round-trip exact
  static std::string num(std::int64_t v);
  static std::string quote(const std::string& field);

 private:
  std::string buf_;
  std::size_t columns_ = 0;
};

struct OutputFile {
  std::string name;
  std::string sha256;
  std::uint64_t bytes = 0;
};

/// Output directory of one run; every file written through it is inventoried.
class RunOutput {
 public:
  explicit RunOutput(std::string dir);
  void write(const std::string& name, const std::string& content);
  const std::vector<OutputFile>& files() const { return files_; }
  const std::string& dir() const { return dir_; }
  /// `<command>.manifest.json`; derived_json must be a JSON object.
  std::string write_manifest(const std::string& command, const std::string& canonical_config,
                             std::uint64_t seed, const std::string& derived_json) const;

 private:
  std::string dir_;
  std::vector<OutputFile> files_;
};

}  // namespace cotrap
