#pragma once

#include <string>

#include <json.hpp>

#include "impact/aggregation.hpp"
#include "impact/core_model.hpp"
#include "impact/equilibrium_check.hpp"
#include "impact/fbsde_mc.hpp"

namespace impact::cli {

/// Columns t, Q_1..Q_n, q_1..q_n with 17 significant digits. Throws Error on IO failure.
void export_csv(const TrajectorySet& traj, const std::string& path);
std::string csv_text(const TrajectorySet& traj);
/// Inverse of export_csv.
TrajectorySet read_csv(const std::string& path);

/// Writes `doc` pretty-printed with a trailing newline.
void write_json(const nlohmann::json& doc, const std::string& path);

nlohmann::json to_json(const ValidationReport& rep);
nlohmann::json to_json(const DeviationReport& rep);
nlohmann::json to_json(const ConvergenceReport& rep);
nlohmann::json to_json(const ResidualStats& st);

}  // namespace impact::cli
