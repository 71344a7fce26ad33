#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "impact/core_model.hpp"

namespace impact::cli {

/// A qualitative property of a sweep. Agents are 1-based; agent 0 means
/// "every agent" and value_index -1 means the last swept value.
struct Assertion {
    enum class Kind {
        Monotone,      // quantity(agent, t) ordered along the value list
        SignAt,        // sign of quantity(agent, t) for one value
        DipsBelow,     // min_t quantity < 0 for one value
        StaysAbove,    // min_t quantity > 0 on (0, T] for one value
        ChangesSign,   // quantity takes both signs for one value
    };
    Kind kind = Kind::Monotone;
    std::string statement;  // the quoted behaviour being checked
    std::string quantity = "Q";
    std::vector<int> agents{0};
    double t = 0.5;         // as a fraction of T
    int value_index = -1;
    int direction = -1;     // Monotone: +1 nondecreasing, -1 nonincreasing; SignAt: required sign
};

struct SweepSpec {
    std::string name;
    nlohmann::json base;
    std::string parameter;
    std::vector<double> values;
    std::string backend = "closed_form";
    std::string values_source = "user";
    std::vector<Assertion> assertions;
};

std::vector<std::string> preset_names();
std::optional<SweepSpec> preset(const std::string& name);
/// Spec file: {"name", "base" (object or config path), "parameter", "values", "backend", "assertions"}.
SweepSpec load_sweep_spec(const std::string& path);
/// Preset name or spec file path.
SweepSpec resolve_sweep(const std::string& arg);

struct AssertionResult {
    Assertion assertion;
    bool passed = false;
    std::string detail;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<TrajectorySet> runs;
    std::vector<AssertionResult> assertions;
    bool all_passed() const;
};

/// Solves every value (in parallel) and evaluates the assertions.
SweepResult run_sweep(const SweepSpec& spec, std::optional<int> steps = std::nullopt);
std::vector<AssertionResult> evaluate(const std::vector<Assertion>& assertions, const std::vector<double>& values,
                                      const std::vector<TrajectorySet>& runs);

/// Writes <name>_<k>.csv per value, <name>_long.csv and <name>_assertions.json into out_dir.
void write_sweep(const SweepResult& result, const std::string& out_dir);
std::string long_csv_text(const SweepResult& result);
nlohmann::json assertions_json(const SweepResult& result);

}  // namespace impact::cli
