#include "impact/nash_closed_form.hpp"

#include "impact/errors.hpp"

namespace impact {

namespace {

Matrix augmented(const OdeSystem& sys) {
    const int m = 2 * sys.n;
    Matrix aug = Matrix::Zero(m + 1, m + 1);
    aug.topLeftCorner(m, m) = sys.M;
    aug.topRightCorner(m, 1) = sys.N;
    return aug;
}

}  // namespace

OdeSystem build_system(const MarketParams& market, const std::vector<AgentParams>& agents, int n) {
    market.check();
    if (!market.is_constant()) throw InvalidArgument("closed form needs constant drift and volatility");
    if (n < 1 || static_cast<int>(agents.size()) != n) throw InvalidArgument("agent count does not match n");
    const double a = market.a;
    const double b = market.b;
    const double sig2 = market.sigma2_at(0.0);
    const double mu = market.mu_at(0.0);

    OdeSystem s;
    s.n = n;
    const Matrix I = Matrix::Identity(n, n);
    s.Bhat = Matrix::Ones(n, n);
    s.Atilde = (a / (2.0 * b)) * (I - s.Bhat);
    s.Ahat = Matrix::Zero(n, n);
    s.G = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const auto& ag = agents[static_cast<std::size_t>(i)];
        const double beta = beta_of(ag, market);
        if (beta < 0.0) throw AssumptionViolated("closed form: some beta_i < 0");
        if (ag.lambda < 0.0) throw InvalidArgument("closed form: lambda must be >= 0");
        s.Ahat(i, i) = -ag.lambda * sig2 / b;
        s.G(i, i) = -beta / b;
    }
    s.Chat = Vector::Constant(n, mu / (2.0 * b));
    s.M = Matrix::Zero(2 * n, 2 * n);
    s.M.topLeftCorner(n, n) = s.Atilde;
    s.M.topRightCorner(n, n) = -s.Ahat;
    s.M.bottomLeftCorner(n, n) = I;
    s.N = Vector::Zero(2 * n);
    s.N.head(n) = -s.Chat;
    return s;
}

XiSolution solve_xi(const OdeSystem& sys, const Vector& Q0, double T, const LinalgTolerances& tol) {
    const int n = sys.n;
    if (Q0.size() != n) throw InvalidArgument("solve_xi: Q0 has wrong length");
    const Matrix E = mat_exp(sys.M, T);
    const Matrix J = exp_integral(sys.M, sys.N, T);
    const auto E1 = E.topLeftCorner(n, n);
    const auto E2 = E.topRightCorner(n, n);
    const auto E3 = E.bottomLeftCorner(n, n);
    const auto E4 = E.bottomRightCorner(n, n);

    const Matrix lhs = E1 - sys.G * E3;
    const Vector rhs = -J.topRows(n) + sys.G * J.bottomRows(n) - (E2 - sys.G * E4) * Q0;
    const auto sol = solve_linear(lhs, rhs, tol);

    XiSolution xi;
    xi.xi1 = sol.X.col(0);
    xi.xi2 = Q0;
    xi.condition_estimate = sol.condition_estimate;

    Vector x0(2 * n);
    x0 << xi.xi1, xi.xi2;
    const Vector LT = E * x0 + J.col(0);
    xi.initial_residual = 0.0;
    xi.terminal_residual = (LT.head(n) - sys.G * LT.tail(n)).cwiseAbs().maxCoeff();
    return xi;
}

TrajectorySet equilibrium_trajectories(const OdeSystem& sys, const XiSolution& xi, const TimeGrid& grid) {
    const int n = sys.n;
    const int N = grid.n_steps();
    const Matrix aug = augmented(sys);
    const Matrix step = mat_exp(aug, grid.dt());

    TrajectorySet out;
    out.grid = grid;
    out.provenance = "closed_form";
    out.Q.resize(n, N + 1);
    out.q.resize(n, N + 1);

    Vector y(2 * n + 1);
    y << xi.xi1, xi.xi2, 1.0;
    // re-anchor on the exact exponential periodically to keep round-off flat
    const int anchor = 64;
    for (int k = 0; k <= N; ++k) {
        if (k > 0) {
            if (k % anchor == 0 || k == N) {
                Vector y0(2 * n + 1);
                y0 << xi.xi1, xi.xi2, 1.0;
                y = mat_exp(aug, grid.node(k)) * y0;
            } else {
                y = step * y;
            }
        }
        out.q.col(k) = y.head(n);
        out.Q.col(k) = y.segment(n, n);
    }
    return out;
}

TrajectorySet solve_nash_closed_form(const MarketParams& market, const std::vector<AgentParams>& agents,
                                     const TimeGrid& grid, XiSolution* xi_out) {
    const int n = static_cast<int>(agents.size());
    const auto sys = build_system(market, agents, n);
    const auto xi = solve_xi(sys, initial_inventories(agents), market.T);
    if (xi_out) *xi_out = xi;
    return equilibrium_trajectories(sys, xi, grid);
}

}  // namespace impact
