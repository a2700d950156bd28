#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace promptctl::cli {

inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBudget = 2;

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::optional<std::filesystem::path> emit_trace;
};

struct ReplayOptions {
  /// "kp=0.5" style gain overrides for the P controller.
  std::vector<std::string> gains;
  std::optional<std::filesystem::path> emit_trace;
};

struct TuneOptions {
  std::filesystem::path config;
  std::vector<std::string> overrides;
  bool dry_run = false;
};

struct CompareOptions {
  std::filesystem::path config;
  /// Empty selects every controller in the config.
  std::vector<std::string> controllers;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::optional<std::filesystem::path> emit_trace;
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_replay_paper(const ReplayOptions& opts, std::ostream& out, std::ostream& err);
int cmd_tune(const TuneOptions& opts, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches. Usage errors return 1.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace promptctl::cli
