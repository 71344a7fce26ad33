#include "impact/single_agent.hpp"

#include <algorithm>
#include <cmath>

#include "impact/errors.hpp"

namespace impact {

namespace {

void require_deterministic(const MarketParams& market, const char* who) {
    market.check();
    if (!market.is_deterministic())
        throw InvalidArgument(std::string(who) + ": stochastic coefficients are not supported here");
}

Vector opponent_sum(const TimeGrid& grid, const Matrix& opponents) {
    if (opponents.rows() > 0 && opponents.cols() != grid.n_nodes())
        throw InvalidArgument("opponent paths do not match the grid");
    if (opponents.rows() == 0) return Vector::Zero(grid.n_nodes());
    return opponents.colwise().sum().transpose();
}

}  // namespace

Vector ScalarPath::on_grid() const {
    Vector out(grid().n_nodes());
    for (int k = 0; k < out.size(); ++k) out(k) = at(k);
    return out;
}

ScalarPath solve_A(const AgentParams& agent, const MarketParams& market, const TimeGrid& grid) {
    require_deterministic(market, "solve_A");
    const double beta = beta_of(agent, market);
    if (beta < 0.0) throw AssumptionViolated("solve_A: beta = alpha - a/2 is negative");
    if (agent.lambda < 0.0) throw InvalidArgument("solve_A: lambda must be >= 0");

    const double b = market.b;
    const double T = market.T;
    const double sig2max = std::pow(market.vol.sup_abs(T), 2);
    const double rate = std::max(beta / b, std::sqrt(agent.lambda * sig2max / b));
    FineGrid fg{grid, choose_substeps(grid.dt(), rate)};

    // a-priori envelope of A
    const double Mb = beta + agent.lambda * sig2max * T;
    const double slack = 1e-9;
    auto check = [&](int j, double A) {
        const double tau = T - fg.t(j);
        const double lo = beta * std::exp(-Mb * tau / b);
        const double hi = beta + agent.lambda * sig2max * tau;
        if (!std::isfinite(A) || A < lo - slack * (1.0 + lo) || A > hi + slack * (1.0 + hi))
            throw BlowUp("solve_A: A left its a-priori bounds", fg.t(j), std::abs(A));
    };
    const double lam = agent.lambda;
    auto rhs = [&](double, double tc, double A) { return A * A / b - lam * market.sigma2_at(tc); };
    auto y = rk4_backward(fg, beta, rhs, check);
    return {fg, Eigen::Map<Vector>(y.data(), static_cast<Eigen::Index>(y.size()))};
}

ScalarPath solve_B(const AgentParams& agent, const MarketParams& market, const TimeGrid& grid,
                   const ScalarPath& A, const Matrix& opponents) {
    (void)agent;
    require_deterministic(market, "solve_B");
    if (!(A.grid() == grid)) throw InvalidArgument("solve_B: A is on a different grid");
    const FineGrid& fg = A.fine_grid;
    // opponent sum at fine nodes and fine midpoints
    const Vector S = resample(grid, opponent_sum(grid, opponents), 2 * fg.m);
    const double a = market.a;
    const double b = market.b;
    const double h = fg.h();

    auto rhs = [&](double t, double tc, double B) {
        // t is a fine node or a fine midpoint; locate it on the half-step lattice
        const auto idx = static_cast<Eigen::Index>(std::lround(2.0 * t / h));
        const auto j = idx / 2;
        double Aval;
        if (idx % 2 == 0) {
            Aval = A.fine(j);
        } else {
            // midpoint of a fine step: cubic Hermite from the ODE derivatives
            const double a0 = A.fine(j), a1 = A.fine(j + 1);
            const double d0 = a0 * a0 / b - agent.lambda * market.sigma2_at(tc);
            const double d1 = a1 * a1 / b - agent.lambda * market.sigma2_at(tc);
            Aval = 0.5 * (a0 + a1) + h * (d0 - d1) / 8.0;
        }
        return Aval * B / b + market.mu_at(tc) + a * S(idx);
    };
    auto y = rk4_backward(fg, 0.0, rhs, [](int, double) {});
    return {fg, Eigen::Map<Vector>(y.data(), static_cast<Eigen::Index>(y.size()))};
}

Vector solve_C(const TimeGrid& grid, const Vector& B, double b) {
    if (B.size() != grid.n_nodes()) throw InvalidArgument("solve_C: B does not match grid");
    const int N = grid.n_steps();
    Vector C(N + 1);
    C(N) = 0.0;
    const double h = grid.dt();
    for (int k = N - 1; k >= 0; --k) C(k) = C(k + 1) - 0.5 * h * (B(k) * B(k) + B(k + 1) * B(k + 1)) / (4.0 * b);
    return C;
}

AbcSolution solve_abc(const AgentParams& agent, const MarketParams& market, const TimeGrid& grid,
                      const Matrix& opponents) {
    AbcSolution s;
    s.grid = grid;
    s.beta = beta_of(agent, market);
    s.A = solve_A(agent, market, grid);
    s.B = solve_B(agent, market, grid, s.A, opponents);
    s.C = solve_C(grid, s.B.on_grid(), market.b);
    return s;
}

double value_function(const AbcSolution& abc, double t, double Q) {
    const int k = abc.grid.index_of(t);
    if (k < 0) throw InvalidArgument("value_function: t is not a grid node");
    return abc.A.at(k) * Q * Q + abc.B.at(k) * Q + abc.C(k);
}

double full_value_function(const AbcSolution& abc, double a, double t, double Q) {
    return value_function(abc, t, Q) + 0.5 * a * Q * Q;
}

std::pair<Vector, Vector> optimal_trajectory(const AbcSolution& abc, const MarketParams& market, double q0) {
    const FineGrid& fg = abc.A.fine_grid;
    const double b = market.b;
    auto g = [&](int j, double Q) { return -(abc.A.fine(j) * Q + 0.5 * abc.B.fine(j)) / b; };
    const auto half = rk4_forward_paired(fg, q0, g);
    const int N = abc.grid.n_steps();
    const int stride = fg.m / 2;
    Vector Q(N + 1), q(N + 1);
    for (int k = 0; k <= N; ++k) {
        Q(k) = half[static_cast<std::size_t>(k * stride)];
        q(k) = g(k * fg.m, Q(k));
    }
    return {Q, q};
}

std::pair<Vector, Vector> optimal_trajectory(const AgentParams& agent, const MarketParams& market,
                                             const TimeGrid& grid, const Matrix& opponents) {
    return optimal_trajectory(solve_abc(agent, market, grid, opponents), market, agent.q0);
}

}  // namespace impact
