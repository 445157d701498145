#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace eprsim {

inline constexpr const char* tool_version = "0.3.0";

/// Command-line overrides applied on top of a config file.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> shots;
    std::optional<unsigned> workers;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;  // json | csv | both
};

/// Exit codes: 0 success, 2 config error, 3 physics-invariant failure.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_physics_error = 3;

struct RunArtifacts {
    int exit_code = exit_ok;
    std::string summary;             // one-line stdout summary
    std::string error;               // diagnostic for nonzero exits
    nlohmann::ordered_json json;     // full JSON artifact
    std::string csv;                 // CSV artifact (may be empty)
    std::string extra_text;          // canonical .seq for compile
    std::vector<std::string> printed_lines;  // diagnostics echoed to stdout
    std::string basename;
    std::string out_dir = "out";
    std::string format = "both";
};

/// Execute one experiment from a fully-resolved JSON config.  The config
/// schema is strict: unknown keys anywhere are a config error.  Artifacts
/// are returned in memory; write_artifacts persists them.
RunArtifacts run_experiment(const nlohmann::ordered_json& config,
                            const RunOverrides& overrides);

RunArtifacts run_experiment_file(const std::string& config_path,
                                 const std::optional<std::string>& subcommand,
                                 const RunOverrides& overrides);

/// Built-in default config for a subcommand run without --config.
nlohmann::ordered_json default_config(const std::string& experiment);

/// Write JSON/CSV (and any extra text) under out_dir; returns the paths
/// written.  Throws on I/O failure.
std::vector<std::string> write_artifacts(const RunArtifacts& artifacts);

}  // namespace eprsim
