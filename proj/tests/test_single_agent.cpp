#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "impact/equilibrium_check.hpp"
#include "impact/errors.hpp"
#include "impact/single_agent.hpp"
#include "oracles.hpp"

using namespace impact;

namespace {

MarketParams no_risk_market() {
    auto m = fixture::market_with(0.0, 0.2);
    return m;
}

}  // namespace

TEST_SUITE("single_agent") {

TEST_CASE("A without risk matches the scalar closed form") {
    const auto m = no_risk_market();
    const AgentParams ag{1.0, 0.0, 1.0};
    const double beta = 0.995;
    const auto g = make_grid(1.0, 1000);
    const auto A = solve_A(ag, m, g);
    for (int k = 0; k <= 1000; ++k) CHECK(std::abs(A.at(k) - oracle::A_no_risk(0.01, beta, 1.0, g.node(k))) < 1e-10);
    CHECK(A.at(0) == doctest::Approx(0.0099005).epsilon(1e-5));

    // the oracle itself satisfies A' = A^2 / b
    const double t = 0.3, h = 1e-5;
    const double d = (oracle::A_no_risk(0.01, beta, 1, t + h) - oracle::A_no_risk(0.01, beta, 1, t - h)) / (2 * h);
    CHECK(d == doctest::Approx(std::pow(oracle::A_no_risk(0.01, beta, 1, t), 2) / 0.01).epsilon(1e-6));
}

TEST_CASE("zero terminal penalty and no risk give A = 0") {
    const auto m = no_risk_market();
    const auto A = solve_A({0.005, 0.0, 1.0}, m, make_grid(1.0, 50));
    CHECK(A.fine.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("A stays within its a-priori bounds") {
    const auto m = fixture::market();
    const auto g = make_grid(1.0, 1000);
    const auto A = solve_A({1.0, 1.0, 1.0}, m, g);
    const double beta = 0.995, M = beta + 0.04;
    for (int k = 0; k <= 1000; ++k) {
        const double t = g.node(k);
        CHECK(A.at(k) >= beta * std::exp(-M * (1 - t) / 0.01) - 1e-12);
        CHECK(A.at(k) <= beta + 0.04 * (1 - t) + 1e-12);
    }
}

TEST_CASE("B for simple sources") {
    const auto g = make_grid(1.0, 100);
    auto m = no_risk_market();
    const AgentParams ag{1.0, 0.0, 1.0};
    const auto A = solve_A(ag, m, g);
    CHECK(solve_B(ag, m, g, A, Matrix()).fine.cwiseAbs().maxCoeff() == 0.0);

    m.drift = 0.03;
    const AgentParams idle{0.005, 0.0, 1.0};
    const auto A0 = solve_A(idle, m, g);
    const auto B = solve_B(idle, m, g, A0, Matrix());
    for (int k = 0; k <= 100; ++k) CHECK(std::abs(B.at(k) + 0.03 * (1 - g.node(k))) < 1e-14);

    const auto Bz = solve_B(ag, m, g, A, Matrix::Zero(2, 101));
    const auto Be = solve_B(ag, m, g, A, Matrix());
    CHECK((Bz.fine - Be.fine).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("C from B") {
    const auto g = make_grid(1.0, 100);
    CHECK(solve_C(g, Vector::Zero(101), 0.01).cwiseAbs().maxCoeff() == 0.0);
    const Vector C = solve_C(g, Vector::Constant(101, 2.0), 1.0);
    CHECK(C(0) == doctest::Approx(-1.0).epsilon(1e-14));
    Vector B(101);
    for (int k = 0; k <= 100; ++k) B(k) = std::sin(5 * g.node(k));
    const Vector C2 = solve_C(g, B, 0.1);
    for (int k = 1; k <= 100; ++k) CHECK(C2(k) >= C2(k - 1));
}

TEST_CASE("value function") {
    AbcSolution abc;
    abc.grid = make_grid(1.0, 2);
    abc.A.fine_grid = {abc.grid, 2};
    abc.B.fine_grid = {abc.grid, 2};
    abc.A.fine = Vector::Constant(5, 1.0);
    abc.B.fine = Vector::Constant(5, 2.0);
    abc.C = Vector::Constant(3, 3.0);
    CHECK(value_function(abc, 0.5, 0.0) == 3.0);
    CHECK(value_function(abc, 0.5, 2.0) == 11.0);
    CHECK_THROWS_AS(value_function(abc, 0.3, 1.0), InvalidArgument);
    CHECK(full_value_function(abc, 0.02, 0.5, 2.0) == doctest::Approx(11.04));
}

TEST_CASE("value at time zero equals the optimal cost") {
    auto m = no_risk_market();
    const AgentParams ag{1.0, 0.0, 1.5};
    const auto g = make_grid(1.0, 1000);
    const auto abc = solve_abc(ag, m, g, Matrix());
    const double beta = 0.995;
    CHECK(value_function(abc, 0.0, 1.5) == doctest::Approx(1.5 * 1.5 * 0.01 * beta / (0.01 + beta)).epsilon(1e-10));
    const auto [Q, q] = optimal_trajectory(abc, m, 1.5);
    TrajectorySet tr{g, Q.transpose(), q.transpose(), "single"};
    const auto cost = expected_cost(0, tr, m, {ag});
    CHECK(std::abs(cost.total - full_value_function(abc, m.a, 0.0, 1.5)) < 1e-6);

    // same identity with risk, drift and a fixed opponent
    m = fixture::market();
    const AgentParams ag2{0.5, 0.7, 1.0};
    Matrix opp(1, 1001);
    for (int k = 0; k <= 1000; ++k) opp(0, k) = -1.0 + 0.5 * g.node(k);
    const auto abc2 = solve_abc(ag2, m, g, opp);
    const auto [Q2, q2] = optimal_trajectory(abc2, m, 1.0);
    Matrix rates(2, 1001);
    rates.row(0) = q2.transpose();
    rates.row(1) = opp.row(0);
    const auto c2 = expected_cost(0, Q2, q2, rates, g, m, {ag2, {1, 1, 1}});
    CHECK(std::abs(c2.total - full_value_function(abc2, m.a, 0.0, 1.0)) < 1e-6);
}

TEST_CASE("optimal inventory without risk or drift is linear in time") {
    const auto m = no_risk_market();
    const auto g = make_grid(1.0, 1000);
    const AgentParams ag{1.0, 0.0, 2.0};
    const auto [Q, q] = optimal_trajectory(ag, m, g, Matrix());
    for (int k = 0; k <= 1000; ++k) {
        CHECK(std::abs(Q(k) - oracle::Q_no_risk(2.0, 0.01, 0.995, 1.0, g.node(k))) < 1e-8);
        CHECK(std::abs(q(k) - oracle::q_no_risk(2.0, 0.01, 0.995, 1.0)) < 1e-8);
    }
}

TEST_CASE("trivial and penalised trajectories") {
    const auto m = no_risk_market();
    const auto g = make_grid(1.0, 200);
    const auto [Q, q] = optimal_trajectory({1.0, 1.0, 0.0}, m, g, Matrix::Zero(2, 201));
    CHECK(Q.cwiseAbs().maxCoeff() == 0.0);
    CHECK(q.cwiseAbs().maxCoeff() == 0.0);

    const auto mk = fixture::market();
    const auto [Qp, qp] = optimal_trajectory({1e3, 1.0, 1.0}, mk, make_grid(1.0, 1000), Matrix());
    CHECK(std::abs(Qp(1000)) <= 0.01);
}

TEST_CASE("optimality against tent perturbations and FBSDE residual") {
    const auto m = fixture::market();
    const auto g = make_grid(1.0, 1000);
    const AgentParams ag{1.0, 1.0, 1.0};
    const auto [Q, q] = optimal_trajectory(ag, m, g, Matrix());
    TrajectorySet tr{g, Q.transpose(), q.transpose(), "single"};
    const auto rep = deviation_test(tr, m, {ag});
    CHECK(rep.passed);
    CHECK(oracle::nash_integral_residual(tr, m, {ag}) < 1e-6);
}

TEST_CASE("random scenarios respect the A bounds") {
    std::mt19937_64 rng(5);
    for (int r = 0; r < 20; ++r) {
        const auto s = fixture::random_single(rng);
        const auto g = make_grid(s.market.T, 400);
        CHECK_NOTHROW(solve_A(s.agent, s.market, g));
    }
}

}
