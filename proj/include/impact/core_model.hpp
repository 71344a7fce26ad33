#pragma once

// Model parameters, time grids, trajectories and assumption checks for the
// n-agent liquidation game with linear permanent impact and private slippage.

#include <Eigen/Dense>

#include <string>
#include <variant>
#include <vector>

#include "impact/factor_model.hpp"

namespace impact {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Time-dependent (or factor-driven) coefficient of the price dynamics.
///
/// Piecewise coefficients are piecewise constant: value(t) = values[k] for
/// breakpoints[k] < t <= breakpoints[k+1], and values[0] for t <= breakpoints[0].
class CoefficientSpec {
public:
    struct Constant {
        double value = 0.0;
    };
    struct Piecewise {
        std::vector<double> breakpoints;
        std::vector<double> values;
    };
    struct FactorVol {
        FactorModel model;
    };
    struct FactorDrift {
        double base = 0.0;
        double loading = 0.0;
    };

    CoefficientSpec() : rep_(Constant{0.0}) {}
    CoefficientSpec(double v) : rep_(Constant{v}) {}  // NOLINT: implicit by design of configs
    static CoefficientSpec piecewise(std::vector<double> breakpoints, std::vector<double> values);
    static CoefficientSpec factor_vol(const FactorModel& model);
    static CoefficientSpec factor_drift(double base, double loading);

    bool is_constant() const { return std::holds_alternative<Constant>(rep_); }
    bool is_deterministic() const {
        return std::holds_alternative<Constant>(rep_) || std::holds_alternative<Piecewise>(rep_);
    }

    /// Deterministic value at time t. Throws InvalidArgument for factor specs.
    double value(double t) const;
    /// sup and inf of |value| over [0, T]; factor specs use the reachable range.
    double sup_abs(double T) const;
    double inf_abs(double T) const;

    const auto& rep() const { return rep_; }

private:
    std::variant<Constant, Piecewise, FactorVol, FactorDrift> rep_;
};

struct MarketParams {
    double a = 0.01;   // permanent impact
    double b = 0.01;   // slippage
    double T = 1.0;    // horizon
    CoefficientSpec drift{0.0};
    CoefficientSpec vol{0.2};
    double S0 = 0.0;   // carried through configs; equilibria do not depend on it

    double mu_at(double t) const { return drift.value(t); }
    double sigma2_at(double t) const {
        const double s = vol.value(t);
        return s * s;
    }
    bool is_deterministic() const { return drift.is_deterministic() && vol.is_deterministic(); }
    bool is_constant() const { return drift.is_constant() && vol.is_constant(); }

    /// Throws InvalidArgument unless a >= 0, b > 0, T > 0 and the coefficient
    /// specs are well formed. a = 0 (no interaction) is accepted as a limit case.
    void check() const;
};

struct AgentParams {
    double alpha = 0.0;   // terminal inventory penalty
    double lambda = 0.0;  // running risk aversion
    double q0 = 0.0;      // initial inventory
};

double beta_of(const AgentParams& agent, const MarketParams& market);

/// Assemble the factor model seen by the Monte Carlo backend. Constant
/// coefficients map to ConstantVol; piecewise-in-time coefficients are
/// rejected.
FactorModel factor_model_of(const MarketParams& market);

class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(double T, int n_steps);

    int n_steps() const { return n_steps_; }
    int n_nodes() const { return n_steps_ + 1; }
    double T() const { return T_; }
    double dt() const { return dt_; }
    double node(int k) const { return k == n_steps_ ? T_ : k * dt_; }
    std::vector<double> nodes() const;

    /// Index of the node at t, or -1 if t is not a node (relative tol 1e-12).
    int index_of(double t) const;

    bool operator==(const TimeGrid& o) const { return n_steps_ == o.n_steps_ && T_ == o.T_; }

private:
    int n_steps_ = 0;
    double T_ = 0.0;
    double dt_ = 0.0;
};

/// Uniform grid with n_steps intervals on [0, T]; n_steps >= 2.
TimeGrid make_grid(double T, int n_steps);

/// Throws InvalidArgument unless the grid spans [0, market.T].
void require_grid(const MarketParams& market, const TimeGrid& grid);

/// Inventories and trading rates of every agent on a grid. Rows index agents,
/// columns index grid nodes.
struct TrajectorySet {
    TimeGrid grid;
    Matrix Q;
    Matrix q;
    std::string provenance;

    int n_agents() const { return static_cast<int>(Q.rows()); }
};

double sup_distance(const TrajectorySet& x, const TrajectorySet& y);

enum class Verdict { Unique, ExistsMaybeNonUnique, AssumptionViolated };
const char* to_string(Verdict v);

struct AgentValidation {
    double beta = 0.0;
    bool beta_nonnegative = false;
    bool strictly_positive = false;   // beta > 0 and lambda > 0
    double min_risk = 0.0;            // inf_t lambda sigma_t^2
    bool uniqueness_condition = false;
};

struct ValidationReport {
    int n = 0;
    double threshold = 0.0;           // a^2 b (n-1) / 16
    std::vector<AgentValidation> agents;
    std::vector<std::string> notes;
    Verdict verdict = Verdict::AssumptionViolated;
};

/// Checks the standing assumptions of the equilibrium results. Never throws.
ValidationReport validate(const MarketParams& market, const std::vector<AgentParams>& agents, int n);

Vector initial_inventories(const std::vector<AgentParams>& agents);

}  // namespace impact
