#pragma once

// Subcommand bodies. Each returns the process exit status (0 or 4); errors
// propagate as tcr::Error subclasses and are mapped to statuses by main.

#include <string>

#include "config.hpp"

namespace tcr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitAlarm = 4;

int cmd_synth(const RunConfig& c);
int cmd_estimate(const RunConfig& c);
int cmd_diagnose(const RunConfig& c);
int cmd_reallocate(const RunConfig& c);
int cmd_bootstrap(const RunConfig& c);
int cmd_benchmark_vam(const RunConfig& c);
int cmd_toy_are(const RunConfig& c);

int dispatch(const std::string& command, const RunConfig& c);

// manifest.json in the output directory: tool version, command, seed,
// effective config with its FNV-1a hash, module versions and output files.
void write_manifest(const RunConfig& c, const std::string& command, const std::vector<std::string>& outputs,
                    const nlohmann::json& status = nlohmann::json::object());

}  // namespace tcr::cli
