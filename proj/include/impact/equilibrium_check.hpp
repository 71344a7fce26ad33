#pragma once

#include <vector>

#include "impact/core_model.hpp"

namespace impact {

/// Expected cost of one agent, split into its parts. The impact integral
/// runs over the other agents' rates only; the agent's own permanent impact
/// is absorbed into beta_i and the constant a Q0^2 / 2.
struct CostBreakdown {
    double total = 0.0;
    double impact_term = 0.0;   // -int Q (mu + a sum_{j != i} q^j)
    double slippage = 0.0;      // b int q^2
    double terminal = 0.0;      // beta Q_T^2
    double running_risk = 0.0;  // int lambda sigma^2 Q^2
    double constant = 0.0;      // a Q0^2 / 2
};

/// Trapezoid quadrature; coefficients are frozen at each interval midpoint.
CostBreakdown expected_cost(int agent_index, const TrajectorySet& traj, const MarketParams& market,
                            const std::vector<AgentParams>& agents);

/// Cost of agent i following (Q, q) while the rows of `rates` (all agents)
/// other than i stay fixed.
CostBreakdown expected_cost(int agent_index, const Vector& Q, const Vector& q, const Matrix& rates,
                            const TimeGrid& grid, const MarketParams& market, const std::vector<AgentParams>& agents);

/// Best response of agent i to the opponents' rate paths (rows = other agents).
std::pair<Vector, Vector> best_response(int agent_index, const Matrix& opponents, const MarketParams& market,
                                        const std::vector<AgentParams>& agents, const TimeGrid& grid);

struct FixedPointResult {
    TrajectorySet trajectories;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> history;
};

/// Jacobi best-response iteration started from everyone's response to idle
/// opponents. Stops once the sup-norm change of (Q, q) drops below tol.
/// Throws NoConvergence after max_iter sweeps.
FixedPointResult fixed_point_iterate(const MarketParams& market, const std::vector<AgentParams>& agents,
                                     const TimeGrid& grid, int max_iter = 200, double tol = 1e-8,
                                     double relaxation = 1.0);

struct AgentDeviation {
    double min_delta = 0.0;
    double min_curvature = 0.0;
    std::vector<double> deltas;      // [basis][epsilon]
    std::vector<double> curvatures;  // per basis function
    bool passed = true;
};

struct DeviationReport {
    double tolerance = -1e-8;
    std::vector<double> epsilons;
    int basis_size = 0;
    std::vector<AgentDeviation> agents;
    bool passed = true;
};

/// Unilateral deviations q^i + eps phi_k with tent functions phi_k of unit
/// height centred at equally spaced nodes.
DeviationReport deviation_test(const TrajectorySet& traj, const MarketParams& market,
                               const std::vector<AgentParams>& agents,
                               const std::vector<double>& epsilons = {-1e-2, 1e-2}, int basis_size = 10);

/// Tent function k of `basis_size` on the grid.
Vector tent_function(const TimeGrid& grid, int k, int basis_size);

}  // namespace impact
