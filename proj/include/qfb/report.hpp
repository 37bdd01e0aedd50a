// report.hpp
// Result envelopes and their CSV / JSON serializations.
//
// CSV: one header line, '.' decimal separator, LF line endings, doubles in
// shortest round-trip form, empty field for "not applicable".
// JSON: {"schema", "tool", "version", "command", "timestamp", "config",
// "columns", "rows": [{column: value}], "summary"}.

#pragma once

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

namespace qfb::report {

using Json = nlohmann::ordered_json;
using Value = std::variant<std::monostate, double, std::int64_t, std::string, bool>;
using Row = std::vector<Value>;

#ifdef QFB_VERSION
inline constexpr const char* kToolVersion = QFB_VERSION;
#else
inline constexpr const char* kToolVersion = "0.0.0";
#endif

struct ResultEnvelope {
  std::string schema;  // e.g. "qfb.protocol/1"
  std::string command;
  std::string tool_version = kToolVersion;
  std::string timestamp;
  Json config = Json::object();
  std::vector<std::string> columns;
  std::vector<Row> rows;
  Json summary = Json::object();
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// UTC ISO-8601; honours SOURCE_DATE_EPOCH for reproducible envelopes.
inline std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline std::string csv_field(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string out = "\"";
      for (char c : s) {
        if (c == '"') out += '"';
        out += c;
      }
      return out + "\"";
    }
  };
  return std::visit(Visitor{}, v);
}

inline Json json_value(const Value& v) {
  struct Visitor {
    Json operator()(std::monostate) const { return nullptr; }
    Json operator()(double d) const { return std::isfinite(d) ? Json(d) : Json(format_double(d)); }
    Json operator()(std::int64_t i) const { return i; }
    Json operator()(bool b) const { return b; }
    Json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace detail

inline void write_csv(const ResultEnvelope& env, std::ostream& os) {
  for (std::size_t c = 0; c < env.columns.size(); ++c) os << (c ? "," : "") << env.columns[c];
  os << '\n';
  for (const Row& row : env.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << detail::csv_field(row[c]);
    os << '\n';
  }
}

inline Json rows_json(const ResultEnvelope& env) {
  Json rows = Json::array();
  for (const Row& row : env.rows) {
    Json obj = Json::object();
    for (std::size_t c = 0; c < row.size() && c < env.columns.size(); ++c) obj[env.columns[c]] = detail::json_value(row[c]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

inline Json to_json(const ResultEnvelope& env) {
  Json j = Json::object();
  j["schema"] = env.schema;
  j["tool"] = "qfb";
  j["version"] = env.tool_version;
  j["command"] = env.command;
  j["timestamp"] = env.timestamp;
  j["config"] = env.config;
  j["columns"] = env.columns;
  j["rows"] = rows_json(env);
  j["summary"] = env.summary;
  return j;
}

inline void write_json(const ResultEnvelope& env, std::ostream& os) { os << to_json(env).dump(2) << '\n'; }

/// Writes `contents` to `path` via a temporary file in the same directory and
/// a rename, so readers never observe a partial file.
inline void write_atomically(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

}  // namespace qfb::report
