#pragma once

// Independent reference computations used as test oracles. None of these
// call into the library's numerical kernels.

#include <cmath>
#include <random>
#include <vector>

#include "impact/core_model.hpp"

namespace oracle {

using impact::Matrix;
using impact::Vector;

/// exp(A) by scaling, a plain Taylor series and repeated squaring.
inline Matrix taylor_exp(const Matrix& A, int terms = 40) {
    const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
    int s = 0;
    while (norm / std::ldexp(1.0, s) > 0.25) ++s;
    const Matrix X = A / std::ldexp(1.0, s);
    Matrix term = Matrix::Identity(A.rows(), A.cols());
    Matrix sum = term;
    for (int k = 1; k < terms; ++k) {
        term = term * X / k;
        sum += term;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

inline Matrix random_matrix(std::mt19937_64& rng, int n, double norm) {
    std::normal_distribution<double> nd;
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
    const double cur = A.cwiseAbs().rowwise().sum().maxCoeff();
    std::uniform_real_distribution<double> u(0.1, 1.0);
    return A * (norm * u(rng) / cur);
}

// Single agent with lambda = 0 and mu = 0: Riccati solution and the
// Almgren-Chriss style linear-in-time liquidation.
inline double A_no_risk(double b, double beta, double T, double t) { return b * beta / (b + beta * (T - t)); }
inline double Q_no_risk(double Q0, double b, double beta, double T, double t) {
    return Q0 * (b + beta * (T - t)) / (b + beta * T);
}
inline double q_no_risk(double Q0, double b, double beta, double T) { return -Q0 * beta / (b + beta * T); }

/// Trapezoid integral of f over [t_k, T] for every k with the Euler-Maclaurin
/// endpoint correction, derivatives from one-sided three-point differences.
inline Vector corrected_tail_integrals(double h, const Vector& f) {
    const auto N = f.size() - 1;
    auto dleft = [&](Eigen::Index k) { return (-3.0 * f(k) + 4.0 * f(k + 1) - f(k + 2)) / (2.0 * h); };
    auto dright = [&](Eigen::Index k) { return (3.0 * f(k) - 4.0 * f(k - 1) + f(k - 2)) / (2.0 * h); };
    Vector out = Vector::Zero(N + 1);
    double acc = 0.0;
    for (Eigen::Index k = N - 1; k >= 0; --k) {
        acc += 0.5 * h * (f(k) + f(k + 1));
        const double d0 = k + 2 <= N ? dleft(k) : dright(k);
        out(k) = acc - h * h / 12.0 * (dright(N) - d0);
    }
    return out;
}

/// Sup-norm residual of the integral form of the Nash FBSDE with
/// deterministic coefficients:
///   q^i_t = -(beta_i / b) Q^i_T + int_t^T (1/b)(-lambda_i sigma^2 Q^i + (mu + a sum_{j != i} q^j) / 2) ds.
inline double nash_integral_residual(const impact::TrajectorySet& tr, const impact::MarketParams& m,
                                     const std::vector<impact::AgentParams>& agents) {
    const int n = tr.n_agents();
    const int N = tr.grid.n_steps();
    const double h = tr.grid.dt();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double beta = agents[static_cast<std::size_t>(i)].alpha - 0.5 * m.a;
        Vector f(N + 1);
        for (int k = 0; k <= N; ++k) {
            const double t = tr.grid.node(k);
            double others = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) others += tr.q(j, k);
            f(k) = (-agents[static_cast<std::size_t>(i)].lambda * m.sigma2_at(t) * tr.Q(i, k) +
                    0.5 * (m.mu_at(t) + m.a * others)) /
                   m.b;
        }
        const Vector tail = corrected_tail_integrals(h, f);
        for (int k = 0; k <= N; ++k) {
            const double rhs = -(beta / m.b) * tr.Q(i, N) + tail(k);
            worst = std::max(worst, std::abs(tr.q(i, k) - rhs));
        }
    }
    return worst;
}

/// Composite Simpson rule; N must be even.
inline double simpson(double h, const Vector& f) {
    const auto N = f.size() - 1;
    double s = f(0) + f(N);
    for (Eigen::Index k = 1; k < N; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k);
    return s * h / 3.0;
}

}  // namespace oracle
