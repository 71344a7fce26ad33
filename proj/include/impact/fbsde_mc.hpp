#pragma once

// Regression Monte Carlo for the Nash FBSDE with one-factor Markovian
// coefficients. Each player's rate satisfies
//   q_t = -kappa Q_T + int_t^T (-lambda sigma^2 Q + s_mu mu + c q + sum_j w_j q^j) ds + int_t^T Z dW,
// which covers the n-agent system (c = 0, w_j = a / 2b for j != i) and the
// aggregated similar-agents equation (one player, c = (n - 1) a / 2b).
//
// Time stepping: Euler forward for Q and the backward recursion
//   q_k = E_k[q_{k+1}] + dt f_k.
// The joint rate vector is carried through an n x n decoupling field,
// q_k = P_k Q_k + p_k per path, with
//   D P_k = E[P_{k+1} | X_k] + dt (W P_k^old - diag(lambda sigma_k^2)),
//   D p_k = E[p_{k+1} | X_k] + dt (s mu_k + W p_k^old),
//   D = I - dt E[P_{k+1} | X_k] - dt diag(c).
// Conditional expectations are least-squares regressions on the factor only,
// and the cross-player term W uses the field from the previous Picard sweep.

#include <cstdint>
#include <string>
#include <vector>

#include "impact/core_model.hpp"
#include "impact/factor_model.hpp"

namespace impact {

struct FactorPaths {
    TimeGrid grid;
    Matrix X;   // n_paths x (N + 1)
    Matrix dW;  // n_paths x N
};

/// Euler-Maruyama factor paths. Path r uses its own mt19937_64 seeded from
/// (seed, r), so results do not depend on the thread count.
FactorPaths simulate_factors(const FactorModel& model, const TimeGrid& grid, int n_paths, std::uint64_t seed);

struct McPlayer {
    double kappa = 0.0;
    double lambda = 0.0;
    double s_mu = 0.0;
    double c = 0.0;
    double q0 = 0.0;
    std::vector<double> w;  // weights on the other players' rates (w[i] unused)
};

struct McProblem {
    double b = 1.0;
    FactorModel model;
    std::vector<McPlayer> players;
};

McProblem nash_problem(const MarketParams& market, const std::vector<AgentParams>& agents, const FactorModel& model);
McProblem aggregate_problem(const MarketParams& market, double alpha, double lambda, double q0_total, int n,
                            const FactorModel& model);

struct McOptions {
    int n_paths = 10000;
    std::uint64_t seed = 42;
    int basis_degree = 2;
    int max_picard = 50;
    double tol = 1e-4;
    double ridge = 1e-10;
};

struct McFbsdeSolution {
    TimeGrid grid;
    McProblem problem;
    FactorPaths factors;
    std::vector<Matrix> Q;  // per player, n_paths x (N + 1)
    std::vector<Matrix> q;  // per player, n_paths x (N + 1)
    std::vector<Matrix> Z;  // per player, n_paths x N (one Brownian dimension)
    int picard_iterations = 0;
    double final_residual = 0.0;
    std::vector<double> history;

    int n_players() const { return static_cast<int>(Q.size()); }
    int n_paths() const { return static_cast<int>(factors.X.rows()); }
    /// Path averages as a trajectory set with provenance "mc".
    TrajectorySet mean_trajectories() const;
};

/// Throws NoConvergence (with history) or DegenerateRegression.
McFbsdeSolution picard_solve(const McProblem& problem, const TimeGrid& grid, const McOptions& options = {});

/// n-agent game; rejects AssumptionViolated scenarios.
McFbsdeSolution picard_solve(const MarketParams& market, const std::vector<AgentParams>& agents,
                             const FactorModel& model, const TimeGrid& grid, const McOptions& options = {});

struct ResidualStats {
    double mean_abs = 0.0;
    double p95_abs = 0.0;
    double max_abs = 0.0;
    /// Martingale check per step: |mean(-Z dW)| <= 3 standard errors.
    int martingale_failures = 0;
    double worst_martingale_ratio = 0.0;
};

/// Defect between q_k and -kappa Q_N + sum_{l >= k} f_l dt + sum_{l >= k} Z_l dW_l.
std::vector<ResidualStats> fbsde_residual(const McFbsdeSolution& solution);

/// Long-format CSV: path,step,t,X,dW,player,Q,q,Z (dW and Z empty at the last step).
void dump_paths_csv(const McFbsdeSolution& solution, const std::string& path, int max_paths = -1);

}  // namespace impact
