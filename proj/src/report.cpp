#include "rankone/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rankone {

void Table::add_row(std::vector<Value> row) {
  if (row.size() != columns.size()) throw Error("row width does not match table '" + name + "'");
  rows.push_back(std::move(row));
}

void Report::set(const std::string& key, Value v) {
  for (auto& [k, old] : scalars)
    if (k == key) {
      old = std::move(v);
      return;
    }
  scalars.emplace_back(key, std::move(v));
}

const Value* Report::find(const std::string& key) const {
  for (const auto& [k, v] : scalars)
    if (k == key) return &v;
  return nullptr;
}

Table& Report::table(const std::string& name, std::vector<std::string> columns) {
  tables.push_back(Table{name, std::move(columns), {}});
  return tables.back();
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string to_json_text(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "null";
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
        else if constexpr (std::is_same_v<T, double>) return std::isfinite(x) ? format_double(x) : json_escape(format_double(x));
        else return json_escape(x);
      },
      v);
}

std::string to_csv_text(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
        else if constexpr (std::is_same_v<T, double>) return format_double(x);
        else return csv_escape(x);
      },
      v);
}

std::string render_json(const Report& r) {
  std::ostringstream os;
  os << "{\n  \"command\": " << json_escape(r.command) << ",\n  \"scalars\": {";
  for (std::size_t i = 0; i < r.scalars.size(); ++i)
    os << (i ? "," : "") << "\n    " << json_escape(r.scalars[i].first) << ": " << to_json_text(r.scalars[i].second);
  os << (r.scalars.empty() ? "" : "\n  ") << "},\n  \"tables\": [";
  for (std::size_t t = 0; t < r.tables.size(); ++t) {
    const Table& tb = r.tables[t];
    os << (t ? "," : "") << "\n    {\n      \"name\": " << json_escape(tb.name) << ",\n      \"columns\": [";
    for (std::size_t c = 0; c < tb.columns.size(); ++c) os << (c ? ", " : "") << json_escape(tb.columns[c]);
    os << "],\n      \"rows\": [";
    for (std::size_t i = 0; i < tb.rows.size(); ++i) {
      os << (i ? "," : "") << "\n        [";
      for (std::size_t c = 0; c < tb.rows[i].size(); ++c) os << (c ? ", " : "") << to_json_text(tb.rows[i][c]);
      os << "]";
    }
    os << (tb.rows.empty() ? "" : "\n      ") << "]\n    }";
  }
  os << (r.tables.empty() ? "" : "\n  ") << "]\n}\n";
  return os.str();
}

std::string render_csv(const Report& r) {
  std::ostringstream os;
  if (r.tables.empty()) {
    os << "key,value\n";
    for (const auto& [k, v] : r.scalars) os << csv_escape(k) << "," << to_csv_text(v) << "\n";
    return os.str();
  }
  for (std::size_t t = 0; t < r.tables.size(); ++t) {
    const Table& tb = r.tables[t];
    if (t) os << "\n# table: " << tb.name << "\n";
    for (std::size_t c = 0; c < tb.columns.size(); ++c) os << (c ? "," : "") << csv_escape(tb.columns[c]);
    os << "\n";
    for (const auto& row : tb.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << to_csv_text(row[c]);
      os << "\n";
    }
  }
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

std::filesystem::path emit_report(const Report& r, const std::filesystem::path& dir, const std::string& stem,
                                  ReportFormat format) {
  const auto path = dir / (stem + (format == ReportFormat::json ? ".json" : ".csv"));
  write_text(path, format == ReportFormat::json ? render_json(r) : render_csv(r));
  return path;
}

}  // namespace rankone
