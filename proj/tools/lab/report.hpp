#pragma once

// Reports: a JSON document per command plus CSV tables, written with sorted
// keys and %.17g numbers so that equal inputs give equal bytes.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace kamlab::lab {

using nlohmann::json;

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<json>> rows;
};

struct Report {
  std::string command;
  json config = json::object();
  json results = json::object();
  std::vector<Assertion> assertions;
  std::vector<std::string> warnings;
  std::optional<json> error;
  std::vector<CsvTable> tables;

  void check(const std::string& name, bool passed, const std::string& detail = {});
  /// No error and every assertion passed.
  bool ok() const;
  json document() const;
};

/// %.17g; NaN and infinities have no JSON form and become null.
std::string format_number(double x);
std::string dump_json(const json& j);
std::string dump_csv(const CsvTable& t);

/// Writes <dir>/<command>.json and <dir>/<table>.csv; throws std::runtime_error on I/O failure.
std::vector<std::filesystem::path> emit_report(const Report& r, const std::filesystem::path& dir);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace kamlab::lab
