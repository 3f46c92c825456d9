#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ehaloha/config.hpp"

namespace ehaloha::cli {

struct RunOutcome
{
    std::vector<std::filesystem::path> artifacts;
    //! One-line machine-readable summary (no timing; the caller appends wall time).
    std::string summary;
};

//! Execute one experiment and write its artifacts under cfg.out.
//! Artifacts depend only on the config, never on thread count or timing.
RunOutcome run(ExperimentConfig const& cfg);

//! Full CLI entry point: 0 on success, 1 for invalid config, 2 for runtime aborts.
int main_entry(std::vector<std::string> const& args);

}  // namespace ehaloha::cli
