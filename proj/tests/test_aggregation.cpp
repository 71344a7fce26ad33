#include <doctest.h>

#include "fixtures.hpp"
#include "impact/aggregation.hpp"
#include "impact/errors.hpp"
#include "impact/nash_closed_form.hpp"
#include "impact/nash_riccati.hpp"
#include "impact/single_agent.hpp"
#include "oracles.hpp"

using namespace impact;

namespace {

std::vector<AgentParams> equalised(const Vector& q0, double alpha = 1.0, double lambda = 1.0) {
    std::vector<AgentParams> out;
    for (Eigen::Index i = 0; i < q0.size(); ++i) out.push_back({alpha, lambda, q0(i)});
    return out;
}

Vector baseline_q0() {
    Vector v(3);
    v << 1.0, 1.0, 0.5;
    return v;
}

}  // namespace

TEST_SUITE("aggregation") {

TEST_CASE("n = 1 aggregate is the single-agent solution") {
    const auto m = fixture::market();
    const auto g = make_grid(1.0, 1000);
    const auto agg = solve_aggregate(m, {1.0, 1.0}, 1.3, 1, g);
    const auto [Q, q] = optimal_trajectory({1.0, 1.0, 1.3}, m, g, Matrix());
    CHECK((agg.Q_tilde - Q).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((agg.q_tilde - q).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("zero data") {
    const auto agg = solve_aggregate(fixture::market_with(0.0, 0.2), {1.0, 1.0}, 0.0, 3, make_grid(1.0, 100));
    CHECK(agg.Q_tilde.cwiseAbs().maxCoeff() == 0.0);
    CHECK(agg.q_tilde.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("aggregate equals the summed equilibrium") {
    const auto m = fixture::market();
    const auto g = make_grid(1.0, 1000);
    const auto q0 = baseline_q0();
    const auto agg = solve_aggregate(m, {1.0, 1.0}, q0.sum(), 3, g);
    const auto cf = solve_nash_closed_form(m, equalised(q0), g);
    const Vector sQ = cf.Q.colwise().sum().transpose();
    const Vector sq = cf.q.colwise().sum().transpose();
    CHECK((agg.Q_tilde - sQ).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((agg.q_tilde - sq).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("decomposition matches the full solver and sums to the aggregate") {
    const auto m = fixture::market();
    const auto g = make_grid(1.0, 1000);
    const SharedParams sh{0.8, 0.6};
    Vector q0(4);
    q0 << 1.0, 0.0, 0.5, 2.0;
    const auto agg = solve_aggregate(m, sh, q0.sum(), 4, g);
    const auto dec = decompose(agg, q0, m, sh, g);
    const auto cf = solve_nash_closed_form(m, equalised(q0, sh.alpha, sh.lambda), g);
    CHECK(dec.provenance == "aggregate");
    CHECK(sup_distance(dec, cf) < 1e-6);
    CHECK((Vector(dec.Q.colwise().sum().transpose()) - agg.Q_tilde).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((Vector(dec.q.colwise().sum().transpose()) - agg.q_tilde).cwiseAbs().maxCoeff() < 1e-7);
    // the idle agent trades against the crowd
    CHECK(dec.Q.row(1).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("equal initial inventories split the aggregate evenly") {
    const auto m = fixture::market();
    const auto g = make_grid(1.0, 200);
    const Vector q0 = Vector::Constant(5, 0.4);
    const auto agg = solve_aggregate(m, {1.0, 1.0}, 2.0, 5, g);
    const auto dec = decompose(agg, q0, m, {1.0, 1.0}, g);
    for (int i = 0; i < 5; ++i) CHECK((dec.Q.row(i).transpose() - agg.Q_tilde / 5.0).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("aggregate with piecewise volatility matches the Riccati backend") {
    auto m = fixture::market();
    m.vol = CoefficientSpec::piecewise({0.0, 0.5}, {0.2, 0.4});
    const auto g = make_grid(1.0, 1000);
    const auto q0 = baseline_q0();
    const auto agg = solve_aggregate(m, {1.0, 1.0}, q0.sum(), 3, g);
    const auto dec = decompose(agg, q0, m, {1.0, 1.0}, g);
    const auto rc = solve_nash_riccati(m, equalised(q0), g);
    CHECK(sup_distance(dec, rc) < 1e-6);
}

TEST_CASE("mean-field limit") {
    const auto g = make_grid(1.0, 1000);
    const auto z = meanfield_limit(fixture::market_with(0.0, 0.2), {1.0, 1.0}, 0.0, g);
    CHECK(z.Q_star.cwiseAbs().maxCoeff() == 0.0);

    auto m = fixture::market_with(0.0, 0.2, 0.0);
    const auto mf = meanfield_limit(m, {1.0, 0.0}, 2.0, g);
    for (int k = 0; k <= 1000; ++k)
        CHECK(std::abs(mf.Q_star(k) - 2.0 * (0.01 + (1.0 - g.node(k))) / (0.01 + 1.0)) < 1e-8);

    const auto base = meanfield_limit(fixture::market(), {1.0, 1.0}, 1.0, g);
    CHECK(base.Q_star.allFinite());
    CHECK(base.q_star.allFinite());
}

TEST_CASE("convergence report on the baseline market") {
    const auto m = fixture::market();
    const auto g = make_grid(1.0, 1000);
    const std::vector<double> q0(32, 1.0);
    const auto rep = convergence_report(m, {1.0, 1.0}, q0, 1.0, {2, 4, 8, 16, 32}, g);
    CHECK(rep.strictly_decreasing);
    CHECK(rep.slope == doctest::Approx(-1.0).epsilon(0.3));
    for (std::size_t k = 1; k < rep.entries.size(); ++k)
        CHECK(rep.entries[k].average_error <= rep.entries[k - 1].average_error);
}

TEST_CASE("no interaction means no finite-n error") {
    const auto m = fixture::market_with(0.02, 0.2, 0.0);
    std::vector<double> q0;
    for (int i = 0; i < 8; ++i) q0.push_back(0.5 + 0.1 * i);
    const auto rep = convergence_report(m, {1.0, 1.0}, q0, 0.85, {2, 4, 8}, make_grid(1.0, 1000));
    for (const auto& e : rep.entries) CHECK(e.per_agent_error < 1e-8);
}

TEST_CASE("loglog slope") {
    CHECK(loglog_slope({1, 2, 4, 8}, {1, 0.5, 0.25, 0.125}) == doctest::Approx(-1.0));
    CHECK(loglog_slope({1}, {1}) == 0.0);
}

}
