#pragma once

// Similar agents (shared beta, lambda): the total inventory solves a scalar
// problem, and each agent's path follows from it. With impact scaled by 1/n
// the average path converges to a mean-field limit.
//
// Every scalar problem here has the form
//   q' = (lambda sigma^2 / b) Q - c q - s(t),   q(T) = -kappa Q(T),
// decoupled by q = P Q + p with
//   P' = lambda sigma^2 / b - c P - P^2,  P(T) = -kappa,
//   p' = -(c + P) p - s,                  p(T) = 0.

#include <functional>
#include <vector>

#include "impact/core_model.hpp"
#include "impact/single_agent.hpp"

namespace impact {

struct SharedParams {
    double alpha = 0.0;
    double lambda = 0.0;
};

struct ScalarLq {
    double kappa = 0.0;
    double c = 0.0;
    double lambda = 0.0;
    /// s(t) = s_mu * mu(t) + s_ext * ext(t), with ext given on the grid.
    double s_mu = 0.0;
    double s_ext = 0.0;
    Vector ext;
    /// Optional a-priori envelope for P: lower <= P(t) <= upper(t).
    std::function<void(double t, double P)> check;
};

struct ScalarLqSolution {
    ScalarPath P;
    ScalarPath p;
    Vector Q;
    Vector q;
};

ScalarLqSolution solve_scalar_lq(const ScalarLq& problem, const MarketParams& market, const TimeGrid& grid,
                                 double Q0);

struct AggregateSolution {
    TimeGrid grid;
    Vector Q_tilde;
    Vector q_tilde;
    ScalarPath P;
    ScalarPath p;
};

/// Throws BlowUp if P leaves the a-priori envelope.
AggregateSolution solve_aggregate(const MarketParams& market, const SharedParams& shared, double q0_total, int n,
                                  const TimeGrid& grid);

TrajectorySet decompose(const AggregateSolution& aggregate, const Vector& per_agent_q0, const MarketParams& market,
                        const SharedParams& shared, const TimeGrid& grid);

struct MeanFieldSolution {
    TimeGrid grid;
    Vector Q_star;
    Vector q_star;
};

MeanFieldSolution meanfield_limit(const MarketParams& market, const SharedParams& shared, double Q0_star,
                                  const TimeGrid& grid);

/// Per-agent limit path driven by the mean-field rate q*.
std::pair<Vector, Vector> meanfield_agent(const MarketParams& market, const SharedParams& shared,
                                          const MeanFieldSolution& mf, double q0);

struct ConvergenceEntry {
    int n = 0;
    double average_error = 0.0;   // sup |mean Q - Q*| + sup |mean q - q*|
    double per_agent_error = 0.0; // max_i of the same distance to the per-agent limit
};

struct ConvergenceReport {
    double Q0_star = 0.0;
    std::vector<ConvergenceEntry> entries;
    double slope = 0.0;           // least-squares slope of log(average_error) vs log(n)
    double per_agent_slope = 0.0;
    bool strictly_decreasing = false;
};

/// Q0_sequence supplies Q0^i for i = 0 .. max(n_list) - 1. Each n runs the
/// constant-coefficient closed form (Riccati otherwise) with impact a / n.
ConvergenceReport convergence_report(const MarketParams& market, const SharedParams& shared,
                                     const std::vector<double>& Q0_sequence, double Q0_star,
                                     const std::vector<int>& n_list, const TimeGrid& grid);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace impact
