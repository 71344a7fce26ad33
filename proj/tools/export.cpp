#include "export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "impact/errors.hpp"

namespace impact::cli {

using nlohmann::json;

namespace {

void put(std::string& out, double v) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.append(buf, static_cast<std::size_t>(len));
}

// nlohmann rejects NaN/inf; encode them as null
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string csv_text(const TrajectorySet& traj) {
    const int n = traj.n_agents();
    std::string out = "t";
    for (int i = 1; i <= n; ++i) out += ",Q_" + std::to_string(i);
    for (int i = 1; i <= n; ++i) out += ",q_" + std::to_string(i);
    out += '\n';
    for (int k = 0; k < traj.grid.n_nodes(); ++k) {
        put(out, traj.grid.node(k));
        for (int i = 0; i < n; ++i) {
            out += ',';
            put(out, traj.Q(i, k));
        }
        for (int i = 0; i < n; ++i) {
            out += ',';
            put(out, traj.q(i, k));
        }
        out += '\n';
    }
    return out;
}

void export_csv(const TrajectorySet& traj, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path);
    os << csv_text(traj);
    if (!os) throw Error("write failed: " + path);
}

TrajectorySet read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read " + path);
    std::string line;
    if (!std::getline(is, line)) throw Error(path + ": empty file");
    const auto cols = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
    if (cols < 3 || (cols - 1) % 2 != 0) throw Error(path + ": bad header");
    const int n = (cols - 1) / 2;

    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc()) throw Error(path + ": bad number '" + cell + "'");
            row.push_back(v);
        }
        if (static_cast<int>(row.size()) != cols) throw Error(path + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.size() < 3) throw Error(path + ": too few rows");
    const int N = static_cast<int>(rows.size()) - 1;
    TrajectorySet out;
    out.grid = TimeGrid(rows.back()[0], N);
    out.provenance = "csv";
    out.Q.resize(n, N + 1);
    out.q.resize(n, N + 1);
    for (int k = 0; k <= N; ++k)
        for (int i = 0; i < n; ++i) {
            out.Q(i, k) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(1 + i)];
            out.q(i, k) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(1 + n + i)];
        }
    return out;
}

void write_json(const json& doc, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path);
    os << doc.dump(2) << '\n';
    if (!os) throw Error("write failed: " + path);
}

json to_json(const ValidationReport& rep) {
    json agents = json::array();
    for (std::size_t i = 0; i < rep.agents.size(); ++i) {
        const auto& a = rep.agents[i];
        agents.push_back({{"agent", i + 1},
                          {"beta", number(a.beta)},
                          {"beta_nonnegative", a.beta_nonnegative},
                          {"strictly_positive", a.strictly_positive},
                          {"min_risk", number(a.min_risk)},
                          {"uniqueness_condition", a.uniqueness_condition}});
    }
    return {{"n", rep.n},
            {"verdict", to_string(rep.verdict)},
            {"threshold", number(rep.threshold)},
            {"agents", agents},
            {"notes", rep.notes}};
}

json to_json(const DeviationReport& rep) {
    json agents = json::array();
    for (std::size_t i = 0; i < rep.agents.size(); ++i) {
        const auto& a = rep.agents[i];
        json deltas = json::array();
        const auto ne = rep.epsilons.size();
        for (std::size_t k = 0; ne > 0 && k * ne < a.deltas.size(); ++k) {
            json row = json::array();
            for (std::size_t e = 0; e < ne; ++e) row.push_back(number(a.deltas[k * ne + e]));
            deltas.push_back(row);
        }
        json curv = json::array();
        for (double c : a.curvatures) curv.push_back(number(c));
        agents.push_back({{"agent", i + 1},
                          {"passed", a.passed},
                          {"min_delta_cost", number(a.min_delta)},
                          {"min_curvature", number(a.min_curvature)},
                          {"delta_cost", deltas},
                          {"curvature", curv}});
    }
    return {{"passed", rep.passed},
            {"tolerance", rep.tolerance},
            {"epsilons", rep.epsilons},
            {"basis_size", rep.basis_size},
            {"agents", agents}};
}

json to_json(const ConvergenceReport& rep) {
    json entries = json::array();
    for (const auto& e : rep.entries)
        entries.push_back(
            {{"n", e.n}, {"average_error", number(e.average_error)}, {"per_agent_error", number(e.per_agent_error)}});
    return {{"Q0_star", rep.Q0_star},
            {"entries", entries},
            {"slope", number(rep.slope)},
            {"per_agent_slope", number(rep.per_agent_slope)},
            {"strictly_decreasing", rep.strictly_decreasing}};
}

json to_json(const ResidualStats& st) {
    return {{"mean_abs", number(st.mean_abs)},
            {"p95_abs", number(st.p95_abs)},
            {"max_abs", number(st.max_abs)},
            {"martingale_failures", st.martingale_failures},
            {"worst_martingale_ratio", number(st.worst_martingale_ratio)}};
}

}  // namespace impact::cli
