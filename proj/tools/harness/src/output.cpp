#include "fracspde/harness/output.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace fracspde::harness {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string cell(double v) { return format_number(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::logic_error("CsvTable: row width differs from header");
  rows_.push_back(std::move(cells));
  return *this;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

RunOutput::RunOutput(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_)) {
    throw std::runtime_error("cannot create output directory " + dir_.string());
  }
}

void RunOutput::write_manifest(const nlohmann::json& manifest) const {
  std::ofstream os(dir_ / "manifest.json", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write manifest in " + dir_.string());
  os << manifest.dump(2) << '\n';
}

void RunOutput::write_table(const std::string& name, const CsvTable& table) const { table.write(dir_ / name); }

void RunOutput::report(const nlohmann::json& record) { reports_.push_back(record.dump()); }

void RunOutput::summary(const std::string& line) { summary_.push_back(line); }

void RunOutput::close() {
  std::ofstream rep(dir_ / "reports.ndjson", std::ios::binary);
  for (const auto& r : reports_) rep << r << '\n';
  std::ofstream sum(dir_ / "summary.txt", std::ios::binary);
  for (const auto& s : summary_) sum << s << '\n';
  if (!rep || !sum) throw std::runtime_error("cannot write reports in " + dir_.string());
}

}  // namespace fracspde::harness
