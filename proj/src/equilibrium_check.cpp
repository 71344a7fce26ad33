#include "impact/equilibrium_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "impact/errors.hpp"
#include "impact/quadrature.hpp"
#include "impact/single_agent.hpp"

namespace impact {

namespace {

Matrix without_row(const Matrix& m, int i) {
    Matrix out(m.rows() - 1, m.cols());
    for (Eigen::Index r = 0, o = 0; r < m.rows(); ++r)
        if (r != i) out.row(o++) = m.row(r);
    return out;
}

}  // namespace

CostBreakdown expected_cost(int i, const Vector& Q, const Vector& q, const Matrix& rates, const TimeGrid& grid,
                            const MarketParams& market, const std::vector<AgentParams>& agents) {
    const int n = static_cast<int>(agents.size());
    if (i < 0 || i >= n) throw InvalidArgument("expected_cost: agent index out of range");
    if (Q.size() != grid.n_nodes() || q.size() != grid.n_nodes() || rates.cols() != grid.n_nodes())
        throw InvalidArgument("expected_cost: paths do not match the grid");
    if (!market.is_deterministic()) throw InvalidArgument("expected_cost: needs deterministic coefficients");

    const auto& ag = agents[static_cast<std::size_t>(i)];
    const double a = market.a;
    const double h = grid.dt();
    Vector others = Vector::Zero(grid.n_nodes());
    for (Eigen::Index r = 0; r < rates.rows(); ++r)
        if (r != i) others += rates.row(r).transpose();

    CostBreakdown c;
    c.constant = 0.5 * a * Q(0) * Q(0);
    c.terminal = beta_of(ag, market) * Q(grid.n_steps()) * Q(grid.n_steps());
    c.slippage = market.b * trapz(grid, Vector(q.array().square()));
    double impact = 0.0;
    double risk = 0.0;
    for (int k = 0; k < grid.n_steps(); ++k) {
        const double tm = grid.node(k) + 0.5 * h;
        const double mu = market.mu_at(tm);
        const double s2 = market.sigma2_at(tm);
        impact += 0.5 * h * (Q(k) * (mu + a * others(k)) + Q(k + 1) * (mu + a * others(k + 1)));
        risk += 0.5 * h * s2 * (Q(k) * Q(k) + Q(k + 1) * Q(k + 1));
    }
    c.impact_term = -impact;
    c.running_risk = ag.lambda * risk;
    c.total = c.constant + c.impact_term + c.slippage + c.terminal + c.running_risk;
    return c;
}

CostBreakdown expected_cost(int i, const TrajectorySet& traj, const MarketParams& market,
                            const std::vector<AgentParams>& agents) {
    if (traj.n_agents() != static_cast<int>(agents.size()))
        throw InvalidArgument("expected_cost: trajectory set and agents differ in size");
    return expected_cost(i, traj.Q.row(i).transpose(), traj.q.row(i).transpose(), traj.q, traj.grid, market,
                         agents);
}

std::pair<Vector, Vector> best_response(int i, const Matrix& opponents, const MarketParams& market,
                                        const std::vector<AgentParams>& agents, const TimeGrid& grid) {
    if (i < 0 || i >= static_cast<int>(agents.size())) throw InvalidArgument("best_response: bad agent index");
    return optimal_trajectory(agents[static_cast<std::size_t>(i)], market, grid, opponents);
}

FixedPointResult fixed_point_iterate(const MarketParams& market, const std::vector<AgentParams>& agents,
                                     const TimeGrid& grid, int max_iter, double tol, double relaxation) {
    const int n = static_cast<int>(agents.size());
    if (n < 1) throw InvalidArgument("fixed_point_iterate: no agents");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw InvalidArgument("fixed_point_iterate: relaxation in (0, 1]");
    const int nodes = grid.n_nodes();

    // A does not depend on the opponents
    std::vector<ScalarPath> A;
    for (const auto& ag : agents) A.push_back(solve_A(ag, market, grid));

    auto sweep = [&](const Matrix& rates, Matrix& Qn, Matrix& qn) {
        for (int i = 0; i < n; ++i) {
            const auto& ag = agents[static_cast<std::size_t>(i)];
            AbcSolution abc;
            abc.grid = grid;
            abc.beta = beta_of(ag, market);
            abc.A = A[static_cast<std::size_t>(i)];
            abc.B = solve_B(ag, market, grid, abc.A, without_row(rates, i));
            auto [Qi, qi] = optimal_trajectory(abc, market, ag.q0);
            Qn.row(i) = Qi.transpose();
            qn.row(i) = qi.transpose();
        }
    };

    Matrix Q(n, nodes), q(n, nodes);
    sweep(Matrix::Zero(n, nodes), Q, q);

    FixedPointResult res;
    for (int it = 1; it <= max_iter; ++it) {
        Matrix Qn(n, nodes), qn(n, nodes);
        sweep(q, Qn, qn);
        if (relaxation != 1.0) {
            Qn = relaxation * Qn + (1.0 - relaxation) * Q;
            qn = relaxation * qn + (1.0 - relaxation) * q;
        }
        const double change = std::max((Qn - Q).cwiseAbs().maxCoeff(), (qn - q).cwiseAbs().maxCoeff());
        res.history.push_back(change);
        Q = std::move(Qn);
        q = std::move(qn);
        if (!std::isfinite(change)) break;
        if (change < tol) {
            res.iterations = it;
            res.residual = change;
            res.trajectories = TrajectorySet{grid, Q, q, "fixed_point"};
            return res;
        }
    }
    throw NoConvergence("fixed_point_iterate: best-response iteration did not converge",
                        static_cast<int>(res.history.size()), res.history);
}

Vector tent_function(const TimeGrid& grid, int k, int basis_size) {
    const int N = grid.n_steps();
    const double spacing = static_cast<double>(N) / (basis_size + 1);
    const auto centre = static_cast<int>(std::lround((k + 1) * spacing));
    const int half = std::max(1, static_cast<int>(std::lround(spacing)));
    Vector phi = Vector::Zero(N + 1);
    for (int j = std::max(0, centre - half); j <= std::min(N, centre + half); ++j)
        phi(j) = 1.0 - std::abs(j - centre) / static_cast<double>(half);
    return phi;
}

DeviationReport deviation_test(const TrajectorySet& traj, const MarketParams& market,
                               const std::vector<AgentParams>& agents, const std::vector<double>& epsilons,
                               int basis_size) {
    DeviationReport rep;
    rep.epsilons = epsilons;
    rep.basis_size = basis_size;
    const TimeGrid& grid = traj.grid;
    const int n = traj.n_agents();

    std::vector<Vector> phis, Phis;
    for (int k = 0; k < basis_size; ++k) {
        phis.push_back(tent_function(grid, k, basis_size));
        Phis.push_back(cumtrapz(grid, phis.back()));
    }
    double e4 = 0.0;
    for (double e : epsilons) e4 += e * e * e * e;

    for (int i = 0; i < n; ++i) {
        const Vector Q = traj.Q.row(i).transpose();
        const Vector q = traj.q.row(i).transpose();
        const double base = expected_cost(i, Q, q, traj.q, grid, market, agents).total;
        AgentDeviation ad;
        ad.min_delta = std::numeric_limits<double>::infinity();
        ad.min_curvature = std::numeric_limits<double>::infinity();
        for (int k = 0; k < basis_size; ++k) {
            double num = 0.0;
            for (double e : epsilons) {
                const Vector Qp = Q + e * Phis[static_cast<std::size_t>(k)];
                const Vector qp = q + e * phis[static_cast<std::size_t>(k)];
                const double d = expected_cost(i, Qp, qp, traj.q, grid, market, agents).total - base;
                ad.deltas.push_back(d);
                ad.min_delta = std::min(ad.min_delta, d);
                num += d * e * e;
            }
            const double c = e4 > 0.0 ? num / e4 : 0.0;
            ad.curvatures.push_back(c);
            ad.min_curvature = std::min(ad.min_curvature, c);
        }
        if (basis_size == 0 || epsilons.empty()) ad.min_delta = ad.min_curvature = 0.0;
        ad.passed = ad.min_delta >= rep.tolerance && (e4 == 0.0 || basis_size == 0 || ad.min_curvature > 0.0);
        rep.passed = rep.passed && ad.passed;
        rep.agents.push_back(std::move(ad));
    }
    return rep;
}

}  // namespace impact
