#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "promptctl/loop.hpp"

namespace promptctl {

inline constexpr const char* kTraceCsvHeader = "step,dimension,y,e,u,converged";

/// One row per step x dimension, values printed with 17 significant digits
/// so equal traces give byte-equal files.
void write_trace_csv(const IterationTrace& trace, std::ostream& out);
[[nodiscard]] std::string trace_csv(const IterationTrace& trace);

/// {"seed", "iterations", "converged", "final_error", "status", "controller"
/// [, "error"]} as pretty-printed JSON.
[[nodiscard]] std::string summary_json(const LoopResult& result);

/// Writes `contents` to `path`, creating parent directories. Throws
/// Error(Configuration) if the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

/// "%.17g" rendering used throughout the exported files.
[[nodiscard]] std::string format_number(double value);

}  // namespace promptctl
