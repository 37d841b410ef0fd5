#pragma once

// Deterministic CSV/JSON emitters: fixed field order, %.17g floats.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rankone/common.hpp"

namespace rankone {

using Value = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  void add_row(std::vector<Value> row);
};

struct Report {
  std::string command;
  std::vector<std::pair<std::string, Value>> scalars;
  std::vector<Table> tables;

  void set(const std::string& key, Value v);
  const Value* find(const std::string& key) const;
  Table& table(const std::string& name, std::vector<std::string> columns);
};

enum class ReportFormat { json, csv };

class IoError : public Error {
 public:
  using Error::Error;
};

std::string format_double(double x);
std::string to_json_text(const Value& v);
std::string to_csv_text(const Value& v);

std::string render_json(const Report& r);
/// First table, then each further table after a blank line and a "# table: name" line.
std::string render_csv(const Report& r);

void write_text(const std::filesystem::path& path, const std::string& text);
std::filesystem::path emit_report(const Report& r, const std::filesystem::path& dir, const std::string& stem,
                                  ReportFormat format);

}  // namespace rankone
