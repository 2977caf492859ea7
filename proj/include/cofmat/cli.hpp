#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cofmat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitNumerical = 3;

enum class Command { verify, simulate, spectrum, sweep, emit };

std::string to_string(Command c);

struct Options {
  Command command = Command::verify;
  std::filesystem::path config;
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;  ///< overrides [tolerances] coupling
};

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path manifest;              ///< empty if the run stopped before writing
  std::vector<std::filesystem::path> outputs;  ///< data files, manifest excluded
  std::map<std::string, bool> verdicts;
  std::string message;                         ///< first error, if any
};

/// Runs one subcommand against a config file. Never throws: parse problems
/// give kExitParse, failed checks and numerical errors kExitNumerical.
RunResult run(const Options& opts);

/// Command-line entry: parses flags and prints a one-line summary per verdict.
int main(int argc, char** argv);

}  // namespace cofmat::cli
