#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "config.hpp"

namespace jmgt::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& hash,
                     const std::vector<std::string>& columns)
    : out_(path), path_(path), columns_(columns.size()) {
  if (!out_) throw IoError("cannot write " + path);
  out_ << "# jmgt " << artifact_version() << "\n# config_hash " << hash << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
}

CsvWriter& CsvWriter::add(double x) { return add(format_number(x)); }
CsvWriter& CsvWriter::add(long x) { return add(std::to_string(x)); }

CsvWriter& CsvWriter::add(const std::string& s) {
  if (filled_ == columns_) throw std::logic_error("too many values in CSV row of " + path_);
  out_ << (filled_ ? "," : "") << s;
  ++filled_;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw std::logic_error("short CSV row in " + path_);
  out_ << "\n";
  filled_ = 0;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw IoError("failed writing " + path_);
}

void write_json(const std::string& path, const std::string& hash, nlohmann::json body) {
  body["version"] = artifact_version();
  body["config_hash"] = hash;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << body.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path);
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir);
}

}  // namespace jmgt::cli
