#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "impact/core_model.hpp"
#include "impact/fbsde_mc.hpp"

namespace impact::cli {

struct Scenario {
    MarketParams market;
    std::vector<AgentParams> agents;
    int n_steps = 1000;

    McOptions mc;
    int mc_steps = 50;

    int fp_max_iter = 200;
    double fp_tol = 1e-8;

    std::vector<double> epsilons{-1e-2, 1e-2};
    int basis_size = 10;

    int n() const { return static_cast<int>(agents.size()); }
};

/// Throws impact::InvalidArgument on schema errors.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);
nlohmann::json read_json_file(const std::string& path);

/// Set a scalar at a dotted path such as "market.mu", "agents[0].alpha" or
/// "agents[*].lambda" (every agent). Throws InvalidArgument if unresolvable.
void set_param(nlohmann::json& doc, const std::string& path, double value);

/// The three-trader baseline used by the presets.
nlohmann::json baseline_config();

/// Factor model implied by the scenario's market for the Monte Carlo backend.
FactorModel mc_factor_model(const Scenario& s);

}  // namespace impact::cli
