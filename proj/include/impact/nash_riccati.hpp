#pragma once

// Nash equilibrium for deterministic coefficients through the decoupling
// q = P Q + p, with K = (a / 2b)(ones - I):
//   P' = -Ahat - K P - P^2,      P(T) = G = diag(-beta_i / b),
//   p' = -(K + P) p - Chat,      p(T) = 0,
//   Q' = P Q + p,                Q(0) = Q0.

#include <vector>

#include "impact/core_model.hpp"
#include "impact/ode.hpp"

namespace impact {

inline constexpr double kDefaultRiccatiGuard = 1e3;

struct MatrixPath {
    FineGrid fine_grid;
    std::vector<Matrix> fine;

    const TimeGrid& grid() const { return fine_grid.grid; }
    const Matrix& at(int k) const { return fine[static_cast<std::size_t>(k * fine_grid.m)]; }
};

struct VectorPath {
    FineGrid fine_grid;
    std::vector<Vector> fine;

    const TimeGrid& grid() const { return fine_grid.grid; }
    const Vector& at(int k) const { return fine[static_cast<std::size_t>(k * fine_grid.m)]; }
};

struct RiccatiSolution {
    MatrixPath P;
    VectorPath p;
};

/// Throws BlowUp when the max-row-sum norm of P exceeds `guard`.
/// `substeps` fixes the RK4 substeps per interval (even, >= 2); 0 picks them from the stiffness.
MatrixPath solve_P(const MarketParams& market, const std::vector<AgentParams>& agents, int n,
                   const TimeGrid& grid, double guard = kDefaultRiccatiGuard, int substeps = 0);
VectorPath solve_p(const MarketParams& market, const std::vector<AgentParams>& agents, const TimeGrid& grid,
                   const MatrixPath& P);
TrajectorySet forward_Q(const Vector& Q0, const MatrixPath& P, const VectorPath& p, const TimeGrid& grid);

/// Convenience: validate, solve P and p, roll Q forward.
TrajectorySet solve_nash_riccati(const MarketParams& market, const std::vector<AgentParams>& agents,
                                 const TimeGrid& grid, double guard = kDefaultRiccatiGuard,
                                 RiccatiSolution* out = nullptr, int substeps = 0);

}  // namespace impact
