#pragma once

// Constant-coefficient Nash equilibrium. Lambda = [q; Q] solves
//   Lambda' = M Lambda + N,   M = [[Atilde, -Ahat], [I, 0]],  N = [-Chat; 0],
// with Q(0) = Q0 and q(T) = G Q(T).

#include <vector>

#include "impact/core_model.hpp"
#include "impact/linalg.hpp"

namespace impact {

struct OdeSystem {
    int n = 0;
    Matrix M;       // 2n x 2n
    Vector N;       // 2n
    Matrix G;       // diag(-beta_i / b)
    Matrix Ahat;    // diag(-lambda_i sigma^2 / b)
    Matrix Bhat;    // all ones
    Matrix Atilde;  // (a / 2b)(I - Bhat)
    Vector Chat;    // (mu / 2b) 1
};

struct XiSolution {
    Vector xi1;
    Vector xi2;
    double condition_estimate = 1.0;
    double initial_residual = 0.0;   // |Q(0) - Q0|_inf
    double terminal_residual = 0.0;  // |q(T) - G Q(T)|_inf
};

/// Throws InvalidArgument for non-constant coefficients and
/// AssumptionViolated when some beta_i < 0.
OdeSystem build_system(const MarketParams& market, const std::vector<AgentParams>& agents, int n);

/// Throws IllConditioned when E1 - G E3 is singular to working precision.
XiSolution solve_xi(const OdeSystem& sys, const Vector& Q0, double T, const LinalgTolerances& tol = {});

TrajectorySet equilibrium_trajectories(const OdeSystem& sys, const XiSolution& xi, const TimeGrid& grid);

TrajectorySet solve_nash_closed_form(const MarketParams& market, const std::vector<AgentParams>& agents,
                                     const TimeGrid& grid, XiSolution* xi_out = nullptr);

}  // namespace impact
