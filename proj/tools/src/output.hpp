#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace jmgt::cli {

// Comma-separated table. The first lines are '#' comments carrying the
// artifact version and config hash; numbers are written with 17 significant
// digits so that reruns compare byte for byte.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& hash, const std::vector<std::string>& columns);
  CsvWriter& add(double x);
  CsvWriter& add(const std::string& s);
  CsvWriter& add(long x);
  void end_row();
  void close();

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

// Adds "version" and "config_hash" and writes pretty JSON.
void write_json(const std::string& path, const std::string& hash, nlohmann::json body);

// Creates the directory if needed; IoError when that fails.
void ensure_directory(const std::string& dir);
std::string format_number(double x);

}  // namespace jmgt::cli
