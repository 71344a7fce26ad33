#include "impact/aggregation.hpp"

#include <algorithm>
#include <cmath>

#include "impact/errors.hpp"
#include "impact/nash_closed_form.hpp"
#include "impact/nash_riccati.hpp"
#include "impact/parallel.hpp"

namespace impact {

namespace {

void require_shared(const MarketParams& market, const SharedParams& shared) {
    market.check();
    if (!market.is_deterministic()) throw InvalidArgument("aggregation needs deterministic coefficients");
    if (shared.lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
}

}  // namespace

ScalarLqSolution solve_scalar_lq(const ScalarLq& pr, const MarketParams& market, const TimeGrid& grid, double Q0) {
    const double b = market.b;
    const double sig2max = std::pow(market.vol.sup_abs(market.T), 2);
    const double rate = std::max({std::abs(pr.kappa), std::abs(pr.c), std::sqrt(pr.lambda * sig2max / b)});
    FineGrid fg{grid, choose_substeps(grid.dt(), rate)};
    const double h = fg.h();

    auto Prhs = [&](double, double tc, double P) {
        return pr.lambda * market.sigma2_at(tc) / b - pr.c * P - P * P;
    };
    auto check = [&](int j, double P) {
        if (!std::isfinite(P)) throw BlowUp("scalar Riccati diverged", fg.t(j), std::abs(P));
        if (pr.check) pr.check(fg.t(j), P);
    };
    auto Pv = rk4_backward(fg, -pr.kappa, Prhs, check);
    ScalarLqSolution out;
    out.P = {fg, Eigen::Map<Vector>(Pv.data(), static_cast<Eigen::Index>(Pv.size()))};

    Vector ext;
    if (pr.s_ext != 0.0) {
        if (pr.ext.size() != grid.n_nodes()) throw InvalidArgument("scalar problem: external source off grid");
        ext = resample(grid, pr.ext, 2 * fg.m);
    }
    auto prhs = [&](double t, double tc, double p) {
        const auto idx = static_cast<Eigen::Index>(std::lround(2.0 * t / h));
        const auto j = idx / 2;
        double P;
        if (idx % 2 == 0) {
            P = out.P.fine(j);
        } else {
            const double P0 = out.P.fine(j), P1 = out.P.fine(j + 1);
            P = 0.5 * (P0 + P1) + (h / 8.0) * ((-pr.c * P0 - P0 * P0) - (-pr.c * P1 - P1 * P1));
        }
        double s = pr.s_mu * market.mu_at(tc);
        if (pr.s_ext != 0.0) s += pr.s_ext * ext(idx);
        return -(pr.c + P) * p - s;
    };
    auto pv = rk4_backward(fg, 0.0, prhs, [](int, double) {});
    out.p = {fg, Eigen::Map<Vector>(pv.data(), static_cast<Eigen::Index>(pv.size()))};

    auto g = [&](int j, double Q) { return out.P.fine(j) * Q + out.p.fine(j); };
    const auto half = rk4_forward_paired(fg, Q0, g);
    const int N = grid.n_steps();
    out.Q.resize(N + 1);
    out.q.resize(N + 1);
    for (int k = 0; k <= N; ++k) {
        out.Q(k) = half[static_cast<std::size_t>(k * fg.m / 2)];
        out.q(k) = g(k * fg.m, out.Q(k));
    }
    return out;
}

AggregateSolution solve_aggregate(const MarketParams& market, const SharedParams& shared, double q0_total, int n,
                                  const TimeGrid& grid) {
    require_shared(market, shared);
    if (n < 1) throw InvalidArgument("solve_aggregate: n must be >= 1");
    const double b = market.b;
    const double T = market.T;
    const double beta = shared.alpha - 0.5 * market.a;
    if (beta < 0.0) throw AssumptionViolated("solve_aggregate: beta < 0");

    ScalarLq pr;
    pr.kappa = beta / b;
    pr.c = (n - 1) * market.a / (2.0 * b);
    pr.lambda = shared.lambda;
    pr.s_mu = n / (2.0 * b);

    const double sig2max = std::pow(market.vol.sup_abs(T), 2);
    const double Mb = std::exp(pr.c * T) * (beta / b + shared.lambda * sig2max * T / b);
    pr.check = [=](double t, double P) {
        const double lo = -Mb;
        const double hi = -(beta / b) * std::exp(-Mb * (T - t));
        const double tol = 1e-9 * (1.0 + Mb);
        if (P < lo - tol || P > hi + tol) throw BlowUp("solve_aggregate: P left its a-priori bounds", t, std::abs(P));
    };
    auto s = solve_scalar_lq(pr, market, grid, q0_total);
    return {grid, s.Q, s.q, s.P, s.p};
}

TrajectorySet decompose(const AggregateSolution& agg, const Vector& per_agent_q0, const MarketParams& market,
                        const SharedParams& shared, const TimeGrid& grid) {
    require_shared(market, shared);
    if (!(agg.grid == grid)) throw InvalidArgument("decompose: aggregate is on a different grid");
    const double b = market.b;
    const double beta = shared.alpha - 0.5 * market.a;

    ScalarLq pr;
    pr.kappa = beta / b;
    pr.c = -market.a / (2.0 * b);
    pr.lambda = shared.lambda;
    pr.s_mu = 1.0 / (2.0 * b);
    pr.s_ext = market.a / (2.0 * b);
    pr.ext = agg.q_tilde;

    const auto n = per_agent_q0.size();
    TrajectorySet out;
    out.grid = grid;
    out.provenance = "aggregate";
    out.Q.resize(n, grid.n_nodes());
    out.q.resize(n, grid.n_nodes());
    // P and p are shared by all agents
    const auto base = solve_scalar_lq(pr, market, grid, 0.0);
    const FineGrid& fg = base.P.fine_grid;
    for (Eigen::Index i = 0; i < n; ++i) {
        auto g = [&](int j, double Q) { return base.P.fine(j) * Q + base.p.fine(j); };
        const auto half = rk4_forward_paired(fg, per_agent_q0(i), g);
        for (int k = 0; k < grid.n_nodes(); ++k) {
            out.Q(i, k) = half[static_cast<std::size_t>(k * fg.m / 2)];
            out.q(i, k) = g(k * fg.m, out.Q(i, k));
        }
    }
    return out;
}

MeanFieldSolution meanfield_limit(const MarketParams& market, const SharedParams& shared, double Q0_star,
                                  const TimeGrid& grid) {
    require_shared(market, shared);
    if (!(shared.alpha > 0.0)) throw InvalidArgument("meanfield_limit: alpha must be > 0");
    ScalarLq pr;
    pr.kappa = shared.alpha / market.b;
    pr.c = market.a / (2.0 * market.b);
    pr.lambda = shared.lambda;
    pr.s_mu = 1.0 / (2.0 * market.b);
    auto s = solve_scalar_lq(pr, market, grid, Q0_star);
    return {grid, s.Q, s.q};
}

std::pair<Vector, Vector> meanfield_agent(const MarketParams& market, const SharedParams& shared,
                                          const MeanFieldSolution& mf, double q0) {
    ScalarLq pr;
    pr.kappa = shared.alpha / market.b;
    pr.c = 0.0;
    pr.lambda = shared.lambda;
    pr.s_mu = 1.0 / (2.0 * market.b);
    pr.s_ext = market.a / (2.0 * market.b);
    pr.ext = mf.q_star;
    auto s = solve_scalar_lq(pr, market, mf.grid, q0);
    return {s.Q, s.q};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const auto m = std::min(x.size(), y.size());
    if (m < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double d = m * sxx - sx * sx;
    return d == 0.0 ? 0.0 : (m * sxy - sx * sy) / d;
}

ConvergenceReport convergence_report(const MarketParams& market, const SharedParams& shared,
                                     const std::vector<double>& Q0_sequence, double Q0_star,
                                     const std::vector<int>& n_list, const TimeGrid& grid) {
    require_shared(market, shared);
    if (n_list.empty()) throw InvalidArgument("convergence_report: empty n_list");
    const int nmax = *std::max_element(n_list.begin(), n_list.end());
    if (static_cast<int>(Q0_sequence.size()) < nmax)
        throw InvalidArgument("convergence_report: Q0_sequence shorter than max n");

    const auto mf = meanfield_limit(market, shared, Q0_star, grid);
    std::vector<std::pair<Vector, Vector>> limit_paths(static_cast<std::size_t>(nmax));
    parallel_for(nmax, [&](int i) {
        limit_paths[static_cast<std::size_t>(i)] = meanfield_agent(market, shared, mf, Q0_sequence[static_cast<std::size_t>(i)]);
    });

    ConvergenceReport rep;
    rep.Q0_star = Q0_star;
    rep.entries.resize(n_list.size());
    parallel_for(static_cast<int>(n_list.size()), [&](int idx) {
        const int n = n_list[static_cast<std::size_t>(idx)];
        MarketParams mk = market;
        mk.a = market.a / n;
        std::vector<AgentParams> agents(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            agents[static_cast<std::size_t>(i)] = {shared.alpha, shared.lambda, Q0_sequence[static_cast<std::size_t>(i)]};
        const TrajectorySet tr = mk.is_constant() ? solve_nash_closed_form(mk, agents, grid)
                                                  : solve_nash_riccati(mk, agents, grid);
        const Vector Qbar = tr.Q.colwise().mean().transpose();
        const Vector qbar = tr.q.colwise().mean().transpose();
        ConvergenceEntry e;
        e.n = n;
        e.average_error = (Qbar - mf.Q_star).cwiseAbs().maxCoeff() + (qbar - mf.q_star).cwiseAbs().maxCoeff();
        for (int i = 0; i < n; ++i) {
            const auto& lp = limit_paths[static_cast<std::size_t>(i)];
            const double d = (tr.Q.row(i).transpose() - lp.first).cwiseAbs().maxCoeff() +
                             (tr.q.row(i).transpose() - lp.second).cwiseAbs().maxCoeff();
            e.per_agent_error = std::max(e.per_agent_error, d);
        }
        rep.entries[static_cast<std::size_t>(idx)] = e;
    });

    std::vector<double> xs, ys, yp;
    rep.strictly_decreasing = true;
    for (std::size_t k = 0; k < rep.entries.size(); ++k) {
        xs.push_back(rep.entries[k].n);
        ys.push_back(rep.entries[k].average_error);
        yp.push_back(rep.entries[k].per_agent_error);
        if (k > 0 && !(rep.entries[k].average_error < rep.entries[k - 1].average_error)) rep.strictly_decreasing = false;
    }
    rep.slope = loglog_slope(xs, ys);
    rep.per_agent_slope = loglog_slope(xs, yp);
    return rep;
}

}  // namespace impact
