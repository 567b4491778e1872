#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "tailtest/cli/config.hpp"
#include "tailtest/error.hpp"

namespace tailtest::cli {

/// 0 ok, 2 usage, 3 input, 4 numeric or calibration.
int exit_code_for(ErrorCode code) noexcept;

struct CommandOutput {
  /// {tool, version, schema_version, command, config, seed, timing, warnings,
  /// cache, payload}; failures carry "error" and a null payload.
  nlohmann::json envelope;
  std::string csv;  ///< filled when the effective format is csv and the command succeeded
  int exit_code = 0;
};

/// Runs one command. Library errors are caught and serialized; statistical
/// decisions never change the exit code.
CommandOutput run_command(const RunConfig& config);

/// The bytes to write for this output: CSV when available, JSON otherwise.
std::string render(const CommandOutput& output);

}  // namespace tailtest::cli
