#pragma once

/**
 * @file cli.hpp
 * @brief Command-line workflows: RCS sweep, arm-swing micro-Doppler,
 * link-level simulation and scenario validation, plus figure presets.
 */

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace isac::cli {

enum class Subcommand { rcs_sweep, microdoppler, simulate, validate };

std::string to_string(Subcommand s);

struct RunConfig {
    Subcommand subcommand = Subcommand::validate;
    std::optional<std::filesystem::path> scenario_path;
    std::filesystem::path output_dir = "out";
    /// Overrides the scenario seed when set; the scenario seed defaults to 0.
    std::optional<std::uint64_t> seed;
    std::optional<std::string> preset;
    std::vector<std::string> overrides; ///< section.key=value, applied after load
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInvalid = 2;

struct RunResult {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> artifacts; ///< absolute paths, excluding the manifest
    std::optional<std::filesystem::path> manifest;
};

struct Recipe {
    std::string name;
    Subcommand subcommand;
    std::string summary;
};

/// Named figure presets and the subcommand each belongs to.
const std::vector<Recipe>& figure_recipes();

/// Runs one workflow. Diagnostics go to `err`, a short summary to `out`.
RunResult run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to run(). Returns the process exit code.
int main_entry(int argc, char** argv);

} // namespace isac::cli
