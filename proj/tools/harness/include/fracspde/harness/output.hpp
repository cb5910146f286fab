#pragma once

// Run artifacts: manifest.json, results.csv, reports.ndjson and summary.txt in
// one directory. Numbers are written in shortest round-trip form, so equal
// results give byte-identical tables.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fracspde::harness {

std::string format_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> cells);
  std::size_t size() const { return rows_.size(); }
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Cell helpers.
std::string cell(double v);
std::string cell(std::size_t v);
std::string cell(int v);
std::string cell(bool v);
inline std::string cell(const std::string& s) { return s; }
inline std::string cell(const char* s) { return s; }

class RunOutput {
 public:
  /// Creates the directory; throws std::runtime_error when it is not writable.
  explicit RunOutput(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  void write_manifest(const nlohmann::json& manifest) const;
  void write_table(const std::string& name, const CsvTable& table) const;
  void report(const nlohmann::json& record);
  void summary(const std::string& line);
  /// Flushes reports.ndjson and summary.txt.
  void close();

 private:
  std::filesystem::path dir_;
  std::vector<std::string> reports_, summary_;
};

}  // namespace fracspde::harness
