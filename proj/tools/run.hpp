#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "scenario.hpp"

namespace impact::cli {

enum class Backend { ClosedForm, Riccati, FixedPoint, MonteCarlo };

Backend parse_backend(const std::string& name);
const char* to_string(Backend b);

struct BackendOutput {
    TrajectorySet trajectories;
    nlohmann::json diagnostics;  // backend-specific details
};

/// Solves the scenario with one backend. Solver exceptions propagate.
BackendOutput solve_backend(const Scenario& s, Backend backend);

struct RunOptions {
    std::string config_path;
    Backend backend = Backend::ClosedForm;
    bool verify = false;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
};

enum ExitCode { kSuccess = 0, kSolverError = 1, kVerificationFailed = 2 };

/// Writes trajectories.csv, validation.json, and deviation.json (verify) or
/// mc_diagnostics.json (Monte Carlo) into out_dir. Messages go to stderr.
int run(const RunOptions& options);

}  // namespace impact::cli
