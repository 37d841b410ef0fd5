#pragma once

// JSON scenarios: a generator, optional rank-one data and an ordered command
// list, each command producing one report file plus a run manifest.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rankone/report.hpp"

namespace rankone {

class SchemaError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kToolVersion = "1.0.0";

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides the scenario's output_dir
  int threads = 0;                               // 0 keeps the OpenMP default
  double tol_scale = 1.0;
  std::uint64_t seed = 0;
  bool write_files = true;
};

struct CommandOutcome {
  std::string op;
  std::string artifact;
  bool ok = false;
  std::string error;
  std::vector<std::string> failed_checks;
  double wall_seconds = 0.0;
};

struct RunResult {
  int exit_code = 0;
  std::string scenario_name;
  std::string scenario_hash;
  std::vector<CommandOutcome> outcomes;
  std::vector<Report> reports;
  std::vector<std::string> diagnostics;
};

/// Operation names accepted in a command list.
const std::vector<std::string>& scenario_operations();

/// FNV-1a 64 of the bytes, as 16 hex digits.
std::string content_hash(const std::string& bytes);

RunResult run_scenario_text(const std::string& json_text, const RunOptions& opt);
RunResult run_scenario(const std::filesystem::path& config, const RunOptions& opt);

}  // namespace rankone
