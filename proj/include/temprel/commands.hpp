#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "temprel/config.hpp"

namespace temprel {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitRuntime = 4;

const std::vector<std::string>& command_names();

/// Runs one pipeline step and returns its JSON summary (also printed by the
/// CLI). Writes the effective config to <output_dir>/config.<command>.json.
nlohmann::json run_command(const std::string& command, const RunConfig& config);

/// Runs train, predict, infer and evaluate for every entry of `grid`:
/// {"runs": [{"system": str, "embedding": str, "set": {key: value}}]}.
/// Each run writes into <output_dir>/<index>; the combined report goes to
/// <output_dir>/grid_report.{json,md}.
nlohmann::json run_grid(const nlohmann::json& base, const nlohmann::json& grid,
                        const std::filesystem::path& base_dir);

/// Markdown table with one row per grid run.
std::string grid_table(const nlohmann::json& report);

/// `temprel <command> --config <path> [--set key=value ...] [--grid <path>]`.
/// Errors go to `err` as one JSON line; returns the exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace temprel
