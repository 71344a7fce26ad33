#include <doctest.h>

#include <random>

#include "impact/errors.hpp"
#include "impact/linalg.hpp"
#include "impact/ode.hpp"
#include "impact/quadrature.hpp"
#include "oracles.hpp"

using namespace impact;

namespace {

double rel_err(const Matrix& x, const Matrix& ref) {
    return (x - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("mat_exp of simple matrices") {
    CHECK(mat_exp(Matrix::Zero(2, 2), 3.7).isApprox(Matrix::Identity(2, 2), 0.0));
    Matrix N(2, 2);
    N << 0, 1, 0, 0;
    Matrix E(2, 2);
    E << 1, 1, 0, 1;
    CHECK((mat_exp(N) - E).cwiseAbs().maxCoeff() < 1e-15);
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 1;
    D(1, 1) = -2;
    const Matrix ED = mat_exp(D);
    CHECK(std::abs(ED(0, 0) - std::exp(1.0)) < 1e-12 * std::exp(1.0));
    CHECK(std::abs(ED(1, 1) - std::exp(-2.0)) < 1e-12);
    CHECK(rel_err(ED, oracle::taylor_exp(D, 50)) < 1e-12);
}

TEST_CASE("mat_exp agrees with a Taylor oracle on random matrices") {
    std::mt19937_64 rng(7);
    for (int r = 0; r < 25; ++r) {
        const Matrix A = oracle::random_matrix(rng, 6, 5.0);
        CHECK(rel_err(mat_exp(A), oracle::taylor_exp(A)) < 1e-12);
    }
}

TEST_CASE("mat_exp rejects bad input") {
    CHECK_THROWS_AS(mat_exp(Matrix::Zero(2, 3)), InvalidArgument);
    Matrix A = Matrix::Zero(2, 2);
    A(0, 1) = std::nan("");
    CHECK_THROWS_AS(mat_exp(A), InvalidArgument);
}

TEST_CASE("solve_linear") {
    Vector v(3);
    v << 1, 2, 3;
    CHECK(solve_linear(Matrix::Identity(3, 3), v).X.isApprox(v));
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 2;
    D(1, 1) = 4;
    Vector r(2);
    r << 2, 4;
    CHECK((solve_linear(D, r).X - Vector::Ones(2)).cwiseAbs().maxCoeff() < 1e-15);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 10; ++k) {
        const Matrix A = oracle::random_matrix(rng, 6, 5.0) + 3.0 * Matrix::Identity(6, 6);
        const Matrix X = oracle::random_matrix(rng, 6, 1.0);
        const auto sol = solve_linear(A, A * X);
        CHECK((sol.X - X).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(sol.condition_estimate >= 1.0);
    }
    Matrix S = Matrix::Ones(3, 3);
    CHECK_THROWS_AS(solve_linear(S, Vector::Ones(3)), IllConditioned);
}

TEST_CASE("exp_integral closed forms") {
    Vector v(2);
    v << 1.5, -2.0;
    CHECK((exp_integral(Matrix::Zero(2, 2), v, 0.7) - 0.7 * v).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(std::abs(exp_integral(Matrix::Identity(1, 1), Matrix::Ones(1, 1), 1.0)(0, 0) - (std::exp(1.0) - 1.0)) <
          1e-14);
    Matrix N(2, 2);
    N << 0, 1, 0, 0;
    Vector c(2);
    c << 0, 1;
    const Matrix J = exp_integral(N, c, 1.0);
    CHECK(std::abs(J(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(J(1, 0) - 1.0) < 1e-15);
}

TEST_CASE("kernel properties on random 6x6 matrices") {
    std::mt19937_64 rng(11);
    for (int r = 0; r < 20; ++r) {
        const Matrix A = oracle::random_matrix(rng, 6, 5.0);
        const double s = 0.3, u = 0.45;
        CHECK(rel_err(mat_exp(A, s + u), mat_exp(A, s) * mat_exp(A, u)) < 1e-10);
        const double h = 1e-5;
        const Matrix d = (mat_exp(A, u + h) - mat_exp(A, u - h)) / (2 * h);
        const Matrix ref = A * mat_exp(A, u);
        CHECK((d - ref).norm() / ref.norm() < 1e-6);
    }
}

}

TEST_SUITE("kernels") {

TEST_CASE("substep choice") {
    CHECK(choose_substeps(1e-3, 1.0) == 2);
    CHECK(choose_substeps(0.0, 1.0) == 2);
    for (double h : {1e-3, 0.02, 0.1})
        for (double rate : {1.0, 1.1, 100.0}) {
            const int m = choose_substeps(h, rate);
            CHECK(m % 2 == 0);
            CHECK(m >= 2);
            CHECK(h / m * rate <= kSubstepStability * (1 + 1e-12));
            // and no smaller even count would do
            if (m > 2) CHECK(h / (m - 2) * rate > kSubstepStability);
        }
}

TEST_CASE("rk4 backward integrates a linear ODE to fourth order") {
    // y' = -y, y(T) = 1 => y(0) = e^T
    auto err = [](int N) {
        FineGrid fg{make_grid(1.0, N), 2};
        auto y = rk4_backward(fg, 1.0, [](double, double, double v) { return -v; }, [](int, double) {});
        return std::abs(y.front() - std::exp(1.0));
    };
    const double ratio = err(20) / err(40);
    CHECK(ratio > 14.0);
    CHECK(ratio < 18.0);
}

TEST_CASE("resample reproduces cubics") {
    const auto g = make_grid(1.0, 10);
    Vector f(11);
    for (int k = 0; k <= 10; ++k) {
        const double t = g.node(k);
        f(k) = 1 - 2 * t + 3 * t * t - t * t * t;
    }
    const Vector r = resample(g, f, 4);
    REQUIRE(r.size() == 41);
    for (int j = 0; j <= 40; ++j) {
        const double t = j / 40.0;
        CHECK(std::abs(r(j) - (1 - 2 * t + 3 * t * t - t * t * t)) < 1e-13);
    }
}

TEST_CASE("quadrature") {
    const auto g = make_grid(2.0, 8);
    Vector one = Vector::Ones(9), lin(9), cub(9);
    for (int k = 0; k <= 8; ++k) {
        lin(k) = g.node(k);
        cub(k) = std::pow(g.node(k), 3);
    }
    CHECK(trapz(g, one) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(trapz(g, lin) == doctest::Approx(2.0).epsilon(1e-15));
    const Vector c = cumtrapz(g, lin);
    CHECK(c(0) == 0.0);
    CHECK(c(8) == doctest::Approx(2.0));
    const Vector tail = tail_integrals(g, cub);
    for (int k = 0; k <= 8; ++k) CHECK(std::abs(tail(k) - (16.0 - std::pow(g.node(k), 4)) / 4.0) < 1e-13);
}

}
