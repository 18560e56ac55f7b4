#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "krf/config.hpp"
#include "krf/diagnostics.hpp"

namespace krf {

inline constexpr const char* kOutputRootEnv = "KRFLAB_OUTPUT_ROOT";

struct FileEntry {
  std::string path;  // relative to the run directory
  std::uintmax_t bytes = 0;
  std::string sha256;
};

std::string sha256_hex(const std::filesystem::path& file);
std::string code_version();

// Run directory for a config: output_dir, resolved against the output-root
// environment variable when that is set and output_dir is relative.
std::filesystem::path resolve_output_dir(const RunConfig& c);

// Line formats shared by the streaming writer and emit_series.
std::string csv_header_line(int n);
std::string csv_line(const DiagnosticsRecord& r);
std::string jsonl_line(const DiagnosticsRecord& r);

// Writes series.csv and series.jsonl into dir.  An empty record list gives a
// header-only CSV (n is needed for the header width).
std::vector<FileEntry> emit_series(std::span<const DiagnosticsRecord> records, int n,
                                   const std::filesystem::path& dir);

struct ExecuteResult {
  int exit_code = 0;  // 0 or a stable ErrorCode value
  std::string termination;
  std::filesystem::path run_dir;
  bool manifest_written = false;
};

// Runs the flow, streams diagnostics, writes checkpoints and the manifest.
// Progress and errors go to `log`.
ExecuteResult execute(const RunConfig& c, std::ostream& log);

// Prints a manifest summary and re-checks every digest; returns 0 when all
// files match.
int inspect(const std::filesystem::path& manifest, std::ostream& out);

}  // namespace krf
