#include "impact/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "impact/errors.hpp"

namespace impact {

CoefficientSpec CoefficientSpec::piecewise(std::vector<double> breakpoints, std::vector<double> values) {
    if (breakpoints.empty() || breakpoints.size() != values.size())
        throw InvalidArgument("piecewise coefficient: breakpoints and values must be nonempty and of equal length");
    for (std::size_t k = 1; k < breakpoints.size(); ++k)
        if (!(breakpoints[k] > breakpoints[k - 1]))
            throw InvalidArgument("piecewise coefficient: breakpoints must be strictly increasing");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidArgument("piecewise coefficient: values must be finite");
    CoefficientSpec c;
    c.rep_ = Piecewise{std::move(breakpoints), std::move(values)};
    return c;
}

CoefficientSpec CoefficientSpec::factor_vol(const FactorModel& model) {
    CoefficientSpec c;
    c.rep_ = FactorVol{model};
    return c;
}

CoefficientSpec CoefficientSpec::factor_drift(double base, double loading) {
    CoefficientSpec c;
    c.rep_ = FactorDrift{base, loading};
    return c;
}

double CoefficientSpec::value(double t) const {
    if (const auto* c = std::get_if<Constant>(&rep_)) return c->value;
    if (const auto* p = std::get_if<Piecewise>(&rep_)) {
        // last k with breakpoints[k] < t
        const auto it = std::lower_bound(p->breakpoints.begin(), p->breakpoints.end(), t);
        const auto k = it == p->breakpoints.begin() ? 0 : (it - p->breakpoints.begin()) - 1;
        return p->values[static_cast<std::size_t>(k)];
    }
    throw InvalidArgument("coefficient is factor-driven; no deterministic value");
}

double CoefficientSpec::sup_abs(double T) const {
    if (const auto* c = std::get_if<Constant>(&rep_)) return std::abs(c->value);
    if (const auto* p = std::get_if<Piecewise>(&rep_)) {
        double s = std::abs(p->values.front());
        for (std::size_t k = 1; k < p->values.size(); ++k)
            if (p->breakpoints[k] < T) s = std::max(s, std::abs(p->values[k]));
        return s;
    }
    if (const auto* f = std::get_if<FactorVol>(&rep_)) return f->model.sigma_max();
    return std::numeric_limits<double>::infinity();
}

double CoefficientSpec::inf_abs(double T) const {
    if (const auto* c = std::get_if<Constant>(&rep_)) return std::abs(c->value);
    if (const auto* p = std::get_if<Piecewise>(&rep_)) {
        double s = std::abs(p->values.front());
        for (std::size_t k = 1; k < p->values.size(); ++k)
            if (p->breakpoints[k] < T) s = std::min(s, std::abs(p->values[k]));
        return s;
    }
    if (const auto* f = std::get_if<FactorVol>(&rep_)) return f->model.sigma_min();
    return 0.0;
}

void MarketParams::check() const {
    if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("market.a must be finite and >= 0");
    if (!(b > 0.0)) throw InvalidArgument("market.b must be > 0");
    if (!(T > 0.0)) throw InvalidArgument("market.T must be > 0");
    if (std::holds_alternative<CoefficientSpec::FactorDrift>(vol.rep()))
        throw InvalidArgument("market.sigma cannot be a drift loading");
    if (std::holds_alternative<CoefficientSpec::FactorVol>(drift.rep()))
        throw InvalidArgument("market.mu cannot be a volatility factor model");
    if (const auto* p = std::get_if<CoefficientSpec::Piecewise>(&vol.rep()))
        for (double v : p->values)
            if (v < 0.0) throw InvalidArgument("volatility values must be >= 0");
    if (const auto* c = std::get_if<CoefficientSpec::Constant>(&vol.rep()))
        if (!(c->value >= 0.0) || !std::isfinite(c->value)) throw InvalidArgument("volatility must be finite and >= 0");
    if (const auto* c = std::get_if<CoefficientSpec::Constant>(&drift.rep()))
        if (!std::isfinite(c->value)) throw InvalidArgument("drift must be finite");
    if (const auto* f = std::get_if<CoefficientSpec::FactorVol>(&vol.rep())) {
        const auto& m = f->model;
        if (m.kind == FactorModel::Kind::MeanRevertingVol && !std::isfinite(m.cap))
            throw InvalidArgument("mean-reverting volatility needs a finite cap");
        if (m.floor < 0.0 || m.cap < m.floor) throw InvalidArgument("volatility floor/cap out of order");
        if (m.brownian_dims != 1) throw InvalidArgument("only one Brownian dimension is supported");
    }
}

double beta_of(const AgentParams& agent, const MarketParams& market) { return agent.alpha - 0.5 * market.a; }

FactorModel factor_model_of(const MarketParams& market) {
    FactorModel model;
    if (const auto* f = std::get_if<CoefficientSpec::FactorVol>(&market.vol.rep())) {
        model = f->model;
    } else if (market.vol.is_constant()) {
        model = FactorModel::constant_vol(market.vol.value(0.0));
    } else {
        throw InvalidArgument("Monte Carlo backend needs constant or factor-driven volatility");
    }
    if (const auto* d = std::get_if<CoefficientSpec::FactorDrift>(&market.drift.rep())) {
        model.mu_base = d->base;
        model.mu_loading = d->loading;
    } else if (market.drift.is_constant()) {
        model.mu_base = market.drift.value(0.0);
        model.mu_loading = 0.0;
    } else {
        throw InvalidArgument("Monte Carlo backend needs constant or factor-driven drift");
    }
    return model;
}

TimeGrid::TimeGrid(double T, int n_steps) : n_steps_(n_steps), T_(T), dt_(T / n_steps) {}

std::vector<double> TimeGrid::nodes() const {
    std::vector<double> out(static_cast<std::size_t>(n_nodes()));
    for (int k = 0; k <= n_steps_; ++k) out[static_cast<std::size_t>(k)] = node(k);
    return out;
}

int TimeGrid::index_of(double t) const {
    const double x = t / dt_;
    const long k = std::lround(x);
    if (k < 0 || k > n_steps_) return -1;
    if (std::abs(t - node(static_cast<int>(k))) > 1e-12 * std::max(1.0, T_)) return -1;
    return static_cast<int>(k);
}

TimeGrid make_grid(double T, int n_steps) {
    if (n_steps < 2) throw InvalidArgument("make_grid: n_steps must be >= 2");
    if (!(T > 0.0)) throw InvalidArgument("make_grid: T must be > 0");
    return TimeGrid(T, n_steps);
}

void require_grid(const MarketParams& market, const TimeGrid& grid) {
    if (grid.n_steps() < 2 || std::abs(grid.T() - market.T) > 1e-12 * std::max(1.0, market.T))
        throw InvalidArgument("time grid does not span [0, T]");
}

double sup_distance(const TrajectorySet& x, const TrajectorySet& y) {
    if (x.Q.rows() != y.Q.rows() || x.Q.cols() != y.Q.cols())
        throw InvalidArgument("sup_distance: trajectory shapes differ");
    return std::max((x.Q - y.Q).cwiseAbs().maxCoeff(), (x.q - y.q).cwiseAbs().maxCoeff());
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Unique: return "Unique";
        case Verdict::ExistsMaybeNonUnique: return "ExistsMaybeNonUnique";
        case Verdict::AssumptionViolated: return "AssumptionViolated";
    }
    return "?";
}

ValidationReport validate(const MarketParams& market, const std::vector<AgentParams>& agents, int n) {
    ValidationReport r;
    r.n = n;
    if (n < 1 || static_cast<int>(agents.size()) != n) {
        r.notes.emplace_back("agent count does not match n");
        r.verdict = Verdict::AssumptionViolated;
        return r;
    }
    try {
        market.check();
    } catch (const Error& e) {
        r.notes.emplace_back(e.what());
        r.verdict = Verdict::AssumptionViolated;
        return r;
    }
    r.threshold = market.a * market.a * market.b * (n - 1) / 16.0;
    const double sigma_inf = market.vol.inf_abs(market.T);

    bool all_nonneg = true;
    bool all_unique = true;
    for (const auto& ag : agents) {
        AgentValidation v;
        v.beta = beta_of(ag, market);
        v.beta_nonnegative = v.beta >= 0.0;
        v.strictly_positive = v.beta > 0.0 && ag.lambda > 0.0;
        v.min_risk = ag.lambda * sigma_inf * sigma_inf;
        v.uniqueness_condition = v.min_risk > r.threshold;
        all_nonneg = all_nonneg && v.beta_nonnegative && ag.lambda >= 0.0;
        all_unique = all_unique && v.strictly_positive && v.uniqueness_condition;
        r.agents.push_back(v);
    }
    if (!all_nonneg) {
        r.verdict = Verdict::AssumptionViolated;
        r.notes.emplace_back("some agent has alpha < a/2 (negative effective terminal penalty) or lambda < 0");
    } else if (all_unique) {
        r.verdict = Verdict::Unique;
    } else {
        r.verdict = Verdict::ExistsMaybeNonUnique;
    }
    return r;
}

Vector initial_inventories(const std::vector<AgentParams>& agents) {
    Vector q0(static_cast<Eigen::Index>(agents.size()));
    for (std::size_t i = 0; i < agents.size(); ++i) q0(static_cast<Eigen::Index>(i)) = agents[i].q0;
    return q0;
}

}  // namespace impact
