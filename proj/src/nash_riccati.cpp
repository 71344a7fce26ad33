#include "impact/nash_riccati.hpp"

#include <algorithm>
#include <cmath>

#include "impact/errors.hpp"

namespace impact {

namespace {

Matrix interaction(int n, double a, double b) {
    return (a / (2.0 * b)) * (Matrix::Ones(n, n) - Matrix::Identity(n, n));
}

void require_inputs(const MarketParams& market, const std::vector<AgentParams>& agents, int n) {
    market.check();
    if (!market.is_deterministic()) throw InvalidArgument("riccati backend needs deterministic coefficients");
    if (n < 1 || static_cast<int>(agents.size()) != n) throw InvalidArgument("agent count does not match n");
    for (const auto& ag : agents) {
        if (beta_of(ag, market) < 0.0) throw AssumptionViolated("riccati backend: some beta_i < 0");
        if (ag.lambda < 0.0) throw InvalidArgument("riccati backend: lambda must be >= 0");
    }
}

}  // namespace

MatrixPath solve_P(const MarketParams& market, const std::vector<AgentParams>& agents, int n,
                   const TimeGrid& grid, double guard, int substeps) {
    require_inputs(market, agents, n);
    if (substeps != 0 && (substeps < 2 || substeps % 2 != 0))
        throw InvalidArgument("solve_P: substeps must be 0 or an even number >= 2");
    const double b = market.b;
    const Matrix K = interaction(n, market.a, b);
    Vector lam(n);
    Matrix G = Matrix::Zero(n, n);
    double rate = (n - 1) * market.a / (2.0 * b);
    const double sig2max = std::pow(market.vol.sup_abs(market.T), 2);
    for (int i = 0; i < n; ++i) {
        const auto& ag = agents[static_cast<std::size_t>(i)];
        lam(i) = ag.lambda;
        G(i, i) = -beta_of(ag, market) / b;
        rate = std::max({rate, -G(i, i), std::sqrt(ag.lambda * sig2max / b)});
    }
    FineGrid fg{grid, substeps != 0 ? substeps : choose_substeps(grid.dt(), rate)};
    if (G.cwiseAbs().rowwise().sum().maxCoeff() > guard)
        throw BlowUp("solve_P: terminal condition exceeds the guard", market.T, G.cwiseAbs().maxCoeff());

    auto rhs = [&](double, double tc, const Matrix& P) -> Matrix {
        Matrix d = -K * P - P * P;
        d.diagonal() += lam * (market.sigma2_at(tc) / b);
        return d;
    };
    auto check = [&](int j, const Matrix& P) {
        const double nrm = P.cwiseAbs().rowwise().sum().maxCoeff();
        if (!std::isfinite(nrm) || nrm > guard) throw BlowUp("solve_P: |P| exceeded the guard", fg.t(j), nrm);
    };
    return {fg, rk4_backward(fg, G, rhs, check)};
}

VectorPath solve_p(const MarketParams& market, const std::vector<AgentParams>& agents, const TimeGrid& grid,
                   const MatrixPath& P) {
    const int n = static_cast<int>(agents.size());
    if (!(P.grid() == grid)) throw InvalidArgument("solve_p: P is on a different grid");
    const double b = market.b;
    const Matrix K = interaction(n, market.a, b);
    const FineGrid& fg = P.fine_grid;
    const double h = fg.h();

    auto rhs = [&](double t, double tc, const Vector& p) -> Vector {
        const auto idx = static_cast<std::size_t>(std::lround(2.0 * t / h));
        const auto j = idx / 2;
        Matrix Pt;
        if (idx % 2 == 0) {
            Pt = P.fine[j];
        } else {
            const Matrix& P0 = P.fine[j];
            const Matrix& P1 = P.fine[j + 1];
            Matrix D0 = -K * P0 - P0 * P0;
            Matrix D1 = -K * P1 - P1 * P1;
            // the -Ahat source cancels in D0 - D1 under frozen coefficients
            Pt = 0.5 * (P0 + P1) + (h / 8.0) * (D0 - D1);
        }
        Vector d = -(K + Pt) * p;
        d.array() -= market.mu_at(tc) / (2.0 * b);
        return d;
    };
    return {fg, rk4_backward(fg, Vector(Vector::Zero(n)), rhs, [](int, const Vector&) {})};
}

TrajectorySet forward_Q(const Vector& Q0, const MatrixPath& P, const VectorPath& p, const TimeGrid& grid) {
    if (!(P.grid() == grid) || !(p.grid() == grid)) throw InvalidArgument("forward_Q: grid mismatch");
    if (Q0.size() != P.fine.front().rows()) throw InvalidArgument("forward_Q: Q0 has wrong length");
    const FineGrid& fg = P.fine_grid;
    auto g = [&](int j, const Vector& Q) -> Vector {
        return P.fine[static_cast<std::size_t>(j)] * Q + p.fine[static_cast<std::size_t>(j)];
    };
    const auto half = rk4_forward_paired(fg, Q0, g);
    const int N = grid.n_steps();
    const int stride = fg.m / 2;
    TrajectorySet out;
    out.grid = grid;
    out.provenance = "riccati";
    out.Q.resize(Q0.size(), N + 1);
    out.q.resize(Q0.size(), N + 1);
    for (int k = 0; k <= N; ++k) {
        out.Q.col(k) = half[static_cast<std::size_t>(k * stride)];
        out.q.col(k) = g(k * fg.m, out.Q.col(k));
    }
    return out;
}

TrajectorySet solve_nash_riccati(const MarketParams& market, const std::vector<AgentParams>& agents,
                                 const TimeGrid& grid, double guard, RiccatiSolution* out, int substeps) {
    const int n = static_cast<int>(agents.size());
    auto P = solve_P(market, agents, n, grid, guard, substeps);
    auto p = solve_p(market, agents, grid, P);
    auto traj = forward_Q(initial_inventories(agents), P, p, grid);
    if (out) *out = RiccatiSolution{std::move(P), std::move(p)};
    return traj;
}

}  // namespace impact
