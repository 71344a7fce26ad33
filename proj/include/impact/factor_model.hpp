#pragma once

#include <algorithm>
#include <limits>

namespace impact {

/// One-factor Markovian model of a stochastic volatility (and an
/// optional drift loading on it). The factor X is driven by the same
/// Brownian motion as the price.
///
///   ConstantVol:       X_t = level for all t.
///   MeanRevertingVol:  dX = speed (level - X) dt + vol_of_vol dW,  X_0 = x0.
///
/// Volatility is sigma(X) = clamp(X, floor, cap); drift is
/// mu(X) = mu_base + mu_loading (sigma(X) - level). Both are bounded as long
/// as cap is finite.
struct FactorModel {
    enum class Kind { ConstantVol, MeanRevertingVol };

    Kind kind = Kind::ConstantVol;
    double level = 0.2;
    double speed = 0.0;
    double vol_of_vol = 0.0;
    double floor = 0.0;
    double cap = std::numeric_limits<double>::infinity();
    double x0 = 0.2;
    double mu_base = 0.0;
    double mu_loading = 0.0;
    int brownian_dims = 1;

    static FactorModel constant_vol(double sigma, double mu = 0.0) {
        FactorModel m;
        m.kind = Kind::ConstantVol;
        m.level = sigma;
        m.x0 = sigma;
        m.floor = 0.0;
        m.mu_base = mu;
        return m;
    }

    double sigma(double x) const {
        if (kind == Kind::ConstantVol) return level;
        return std::clamp(x, floor, cap);
    }
    double mu(double x) const { return mu_base + mu_loading * (sigma(x) - level); }

    /// Bounds of sigma over the reachable factor range.
    double sigma_min() const { return kind == Kind::ConstantVol ? level : floor; }
    double sigma_max() const { return kind == Kind::ConstantVol ? level : cap; }
};

}  // namespace impact
