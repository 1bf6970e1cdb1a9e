#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace kamlab::lab {

void Report::check(const std::string& name, bool passed, const std::string& detail) {
  assertions.push_back({name, passed, detail});
}

bool Report::ok() const {
  if (error) return false;
  for (const auto& a : assertions) {
    if (!a.passed) return false;
  }
  return true;
}

json Report::document() const {
  json d;
  d["command"] = command;
  d["config"] = config;
  d["results"] = results;
  d["warnings"] = warnings;
  json as = json::array();
  for (const auto& a : assertions) as.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  d["assertions"] = as;
  d["error"] = error ? *error : json(nullptr);
  d["status"] = error ? "error" : (ok() ? "passed" : "failed");
  json files = json::array();
  for (const auto& t : tables) files.push_back(t.name + ".csv");
  d["tables"] = files;
  return d;
}

std::string format_number(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void dump(const json& j, std::string& out, int indent) {
  const std::string pad(indent + 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {  // std::map keeps keys sorted
        if (!first) out += ",\n";
        first = false;
        out += pad + json(k).dump() + ": ";
        dump(v, out, indent + 2);
      }
      out += "\n" + std::string(indent, ' ') + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(j[i], out, indent + 2);
      }
      out += "\n" + std::string(indent, ' ') + "]";
      return;
    }
    case json::value_t::number_float:
      out += format_number(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

std::string csv_cell(const json& v) {
  if (v.is_number_float()) {
    const double x = v.get<double>();
    return std::isfinite(x) ? format_number(x) : (std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf"));
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace

std::string dump_json(const json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

std::string dump_csv(const CsvTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += "\n";
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::filesystem::path> emit_report(const Report& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  written.push_back(dir / (r.command + ".json"));
  write_file(written.back(), dump_json(r.document()));
  for (const auto& t : r.tables) {
    written.push_back(dir / (t.name + ".csv"));
    write_file(written.back(), dump_csv(t));
  }
  return written;
}

}  // namespace kamlab::lab
