#pragma once

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace knudsenlab {

/// Shortest decimal that round-trips (std::to_chars); "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

/// "knudsenlab <version> eigen <version>"
std::string version_string();

/// CSV file: a '#' line with versions and config hash, the column line, then rows.
/// Rows are flushed on destruction; writes are not shared between threads.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& config_hash, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  /// Mixed row: already formatted cells.
  void row_text(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::filesystem::path path_;
};

/// Pretty-printed with a trailing newline. Throws std::runtime_error when the file cannot be written.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace knudsenlab
