#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "critwin/config.hpp"

namespace critwin {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

inline constexpr const char* kOutputDirEnv = "CRITWIN_OUTPUT_DIR";

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<int> workers;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::vector<std::string> files;  // paths written, manifest last
};

// One table: header line plus rows, already formatted.
struct CsvTable {
  std::string name;
  std::string header;
  std::vector<std::string> rows;
};

std::string format_number(double v);

// Execute a validated config and return the CSV tables (no I/O).
std::vector<CsvTable> execute(const ExperimentConfig& cfg);

// Load, override, execute and write outputs. Never throws; maps failures to
// exit codes and removes everything it wrote on failure. The output dir is
// taken from, in order: overrides, $CRITWIN_OUTPUT_DIR, the config.
RunResult run(const std::string& config_path, std::optional<ProbeKind> kind,
              const RunOverrides& overrides = {});

}  // namespace critwin
