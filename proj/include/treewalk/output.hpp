#pragma once

#include <charconv>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "treewalk/arith.hpp"

namespace treewalk {

inline constexpr const char* kSchemaVersion = "treewalk/1";

/// One machine-readable table: a command echo, parameter and metadata
/// key/value pairs, and rows under named columns. Cells are pre-rendered
/// strings so rational and float modes share one emission path.
struct OutputRecord {
  std::string schema_version = kSchemaVersion;
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Shortest round-trip decimal rendering.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string format_rational(const Rational& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

namespace detail {

inline bool csv_needs_quotes(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

inline std::string csv_quote(const std::string& s) {
  if (!csv_needs_quotes(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';  // double embedded quotes
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

/// CSV with a '#'-prefixed preamble carrying the record envelope, then a
/// header row and the data rows, RFC-4180 quoting throughout.
inline std::string to_csv(const OutputRecord& rec) {
  std::string out;
  out += "# schema_version=" + rec.schema_version + "\n";
  out += "# command=" + rec.command + "\n";
  for (const auto& [k, v] : rec.params) out += "# param:" + k + "=" + v + "\n";
  for (const auto& [k, v] : rec.metadata) out += "# meta:" + k + "=" + v + "\n";
  for (std::size_t i = 0; i < rec.columns.size(); ++i) {
    if (i) out += ',';
    out += detail::csv_quote(rec.columns[i]);
  }
  out += '\n';
  for (const auto& row : rec.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += detail::csv_quote(row[i]);
    }
    out += '\n';
  }
  return out;
}

/// One top-level JSON object; rows become an array of column-keyed objects.
inline std::string to_json(const OutputRecord& rec) {
  nlohmann::ordered_json j;
  j["schema_version"] = rec.schema_version;
  j["command"] = rec.command;
  j["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rec.params) j["params"][k] = v;
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rec.metadata) j["metadata"][k] = v;
  j["columns"] = rec.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rec.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[rec.columns[i]] = row[i];
    j["rows"].push_back(std::move(obj));
  }
  return j.dump(2) + "\n";
}

inline std::string render(const OutputRecord& rec, const std::string& format) {
  if (format == "csv") return to_csv(rec);
  if (format == "json") return to_json(rec);
  throw Error(ErrorCode::ParseError, "unknown format '" + format + "'");
}

namespace detail {

// RFC-4180 field splitter for one physical line (no embedded newlines in any
// field this tool emits).
inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace detail

/// Re-parse emitted text (either format) back into an OutputRecord. Throws
/// ParseError on malformed input.
inline OutputRecord parse_record(const std::string& text) {
  OutputRecord rec;
  rec.schema_version.clear();
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw Error(ErrorCode::ParseError, "empty record");

  if (text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("bad json: ") + e.what());
    }
    try {
      rec.schema_version = j.at("schema_version").get<std::string>();
      rec.command = j.at("command").get<std::string>();
      for (const auto& [k, v] : j.at("params").items())
        rec.params.emplace_back(k, v.get<std::string>());
      for (const auto& [k, v] : j.at("metadata").items())
        rec.metadata.emplace_back(k, v.get<std::string>());
      rec.columns = j.at("columns").get<std::vector<std::string>>();
      for (const auto& row : j.at("rows")) {
        std::vector<std::string> cells;
        for (const auto& col : rec.columns) cells.push_back(row.at(col).get<std::string>());
        rec.rows.push_back(std::move(cells));
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("bad record shape: ") + e.what());
    }
    return rec;
  }

  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      const std::size_t b = body.find_first_not_of(' ');
      if (b == std::string::npos) continue;
      body = body.substr(b);
      const std::size_t eq = body.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "bad preamble line: " + line);
      const std::string key = body.substr(0, eq);
      const std::string val = body.substr(eq + 1);
      if (key == "schema_version") {
        rec.schema_version = val;
      } else if (key == "command") {
        rec.command = val;
      } else if (key.rfind("param:", 0) == 0) {
        rec.params.emplace_back(key.substr(6), val);
      } else if (key.rfind("meta:", 0) == 0) {
        rec.metadata.emplace_back(key.substr(5), val);
      } else {
        throw Error(ErrorCode::ParseError, "unknown preamble key: " + key);
      }
      continue;
    }
    auto cells = detail::csv_split(line);
    if (!have_header) {
      rec.columns = std::move(cells);
      have_header = true;
    } else {
      rec.rows.push_back(std::move(cells));
    }
  }
  return rec;
}

/// Schema check used by the CLI on its own output and by the tests on every
/// emitted table.
inline void validate_record(const OutputRecord& rec) {
  if (rec.schema_version != kSchemaVersion)
    throw Error(ErrorCode::ParseError, "unknown schema_version '" + rec.schema_version + "'");
  if (rec.command.empty()) throw Error(ErrorCode::ParseError, "missing command");
  bool have_d = false, have_lambda = false;
  for (const auto& [k, v] : rec.params) {
    if (k == "d") have_d = true;
    if (k == "lambda") have_lambda = true;
    if (v.empty()) throw Error(ErrorCode::ParseError, "empty param value for " + k);
  }
  if (!have_d || !have_lambda) throw Error(ErrorCode::ParseError, "params must echo d and lambda");
  if (rec.columns.empty()) throw Error(ErrorCode::ParseError, "no columns");
  if (rec.rows.empty()) throw Error(ErrorCode::ParseError, "no rows");
  for (const auto& row : rec.rows)
    if (row.size() != rec.columns.size())
      throw Error(ErrorCode::ParseError, "row width does not match column count");
}

inline void validate_record_text(const std::string& text) { validate_record(parse_record(text)); }

}  // namespace treewalk
