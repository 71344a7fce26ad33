#pragma once

// Single-agent problem with deterministic coefficients and fixed opponents.
// The value function is Q -> A Q^2 + B Q + C with
//   A' = A^2 / b - lambda sigma^2,           A(T) = beta,
//   B' = A B / b + mu + a sum_{j != i} q^j,   B(T) = 0,
//   C' = B^2 / (4 b),                         C(T) = 0,
// and the optimal rate is q* = -(A Q + B / 2) / b.

#include <utility>

#include "impact/core_model.hpp"
#include "impact/ode.hpp"

namespace impact {

/// Scalar path on a grid, keeping the refined values the integrator produced.
struct ScalarPath {
    FineGrid fine_grid;
    Vector fine;

    const TimeGrid& grid() const { return fine_grid.grid; }
    double at(int k) const { return fine(k * fine_grid.m); }
    Vector on_grid() const;
};

struct AbcSolution {
    TimeGrid grid;
    double beta = 0.0;
    ScalarPath A;
    ScalarPath B;
    Vector C;
};

/// Rows of `opponents` are the other agents' rate paths on `grid` (may be empty).
ScalarPath solve_A(const AgentParams& agent, const MarketParams& market, const TimeGrid& grid);
ScalarPath solve_B(const AgentParams& agent, const MarketParams& market, const TimeGrid& grid,
                   const ScalarPath& A, const Matrix& opponents);
Vector solve_C(const TimeGrid& grid, const Vector& B, double b);

AbcSolution solve_abc(const AgentParams& agent, const MarketParams& market, const TimeGrid& grid,
                      const Matrix& opponents);

/// A Q^2 + B Q + C at grid time t. Throws InvalidArgument off the grid.
/// The agent's full expected cost adds the constant a Q^2 / 2, see
/// full_value_function.
double value_function(const AbcSolution& abc, double t, double Q);
double full_value_function(const AbcSolution& abc, double a, double t, double Q);

/// Feedback-optimal inventory and rate paths (Q, q) on the grid.
std::pair<Vector, Vector> optimal_trajectory(const AgentParams& agent, const MarketParams& market,
                                             const TimeGrid& grid, const Matrix& opponents);
std::pair<Vector, Vector> optimal_trajectory(const AbcSolution& abc, const MarketParams& market, double q0);

}  // namespace impact
