#pragma once

#include <random>
#include <vector>

#include "impact/core_model.hpp"

namespace fixture {

/// Three-trader baseline: a = b = 0.01, mu = 0.02, sigma = 0.2, T = 1.
inline impact::MarketParams market() {
    impact::MarketParams m;
    m.a = 0.01;
    m.b = 0.01;
    m.T = 1.0;
    m.drift = 0.02;
    m.vol = 0.2;
    m.S0 = 100.0;
    return m;
}

inline std::vector<impact::AgentParams> agents() {
    return {{1.0, 1.0, 1.0}, {0.5, 0.5, 1.0}, {0.25, 0.25, 0.5}};
}

inline impact::MarketParams market_with(double mu, double sigma, double a = 0.01, double b = 0.01) {
    auto m = market();
    m.drift = mu;
    m.vol = sigma;
    m.a = a;
    m.b = b;
    return m;
}

/// Random single-agent scenario with beta > 0 and lambda > 0.
struct RandomScenario {
    impact::MarketParams market;
    impact::AgentParams agent;
};

inline RandomScenario random_single(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RandomScenario s;
    s.market.a = 0.05 * u(rng);
    s.market.b = 0.005 + 0.05 * u(rng);
    s.market.T = 0.5 + 1.5 * u(rng);
    s.market.drift = -0.05 + 0.1 * u(rng);
    s.market.vol = 0.05 + 0.4 * u(rng);
    s.agent.alpha = s.market.a / 2 + 0.05 + 2.0 * u(rng);
    s.agent.lambda = 0.05 + 2.0 * u(rng);
    s.agent.q0 = -1.0 + 3.0 * u(rng);
    return s;
}

}  // namespace fixture
