#pragma once

#include "identikit/config.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace identikit {

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_analysis = 3 };

struct RunOptions {
    Analysis analysis = Analysis::all;
    std::filesystem::path out_dir;
    std::size_t threads = 1;
    std::optional<std::uint64_t> seed; // overrides the config seed
};

struct RunOutcome {
    int exit_code = exit_ok;
    std::string message;
    json summary;
};

// Runs the selected analyses in dependency order and writes summary.json and
// the per-analysis CSV files into out_dir.
RunOutcome run(const RunConfig& config, const RunOptions& options);

// Parses, validates and runs a JSON configuration document.
RunOutcome run(const json& document, const RunOptions& options);

// One line per registered model: name, parameter count, ground-truth label.
std::string list_models();

} // namespace identikit
