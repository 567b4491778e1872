#include <cstdlib>
#include <fstream>
#include <iostream>

#include "tailtest/cli/config.hpp"
#include "tailtest/cli/run.hpp"

int main(int argc, char** argv) {
  using namespace tailtest::cli;

  Environment environment;
  if (const char* dir = std::getenv(std::string(kCacheEnvVar).c_str())) environment[std::string(kCacheEnvVar)] = dir;

  const ParseResult parsed = parse_config(std::vector<std::string>(argv + 1, argv + argc), environment);
  if (!parsed.config) {
    (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.message;
    return parsed.exit_code;
  }
  const RunConfig& config = *parsed.config;
  const CommandOutput output = run_command(config);

  if (!config.quiet) {
    if (config.command == Command::simulate || config.command == Command::mixture) {
      std::cerr << "seed " << output.envelope.value("seed", std::uint64_t{0}) << '\n';
    }
    for (const auto& w : output.envelope["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
    if (output.envelope.contains("error")) {
      std::cerr << "error: " << output.envelope["error"]["message"].get<std::string>() << '\n';
    }
  }

  const std::string text = render(output);
  if (config.output) {
    std::ofstream out(*config.output, std::ios::binary);
    if (!(out << text)) {
      std::cerr << "error: cannot write " << *config.output << '\n';
      return 3;
    }
  } else {
    std::cout << text;
  }
  return output.exit_code;
}
