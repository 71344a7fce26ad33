#pragma once

// Fixed-step RK4 drivers on a uniform grid refined by an even number of
// substeps per interval, plus cubic Lagrange resampling of grid data.

#include <array>
#include <vector>

#include "impact/core_model.hpp"

namespace impact {

/// Target bound on h * rate for one RK4 substep.
inline constexpr double kSubstepStability = 0.01;

/// Smallest even m >= 2 with (h / m) * rate <= kSubstepStability.
int choose_substeps(double h, double rate);

/// Refined grid: grid node k sits at fine index k * m.
struct FineGrid {
    TimeGrid grid;
    int m = 2;

    int n_fine() const { return grid.n_steps() * m; }
    double h() const { return grid.dt() / m; }
    double t(int j) const { return j == n_fine() ? grid.T() : j * h(); }
};

/// Backward RK4 for y' = f(t, tc, y), y(T) = yT, one step per fine interval.
/// tc is the midpoint of the current step; callers evaluate piecewise
/// coefficients there so breakpoints on the grid are handled exactly.
/// Returns y at every fine node. `check(j, y)` runs after each step.
template <class State, class F, class Check>
std::vector<State> rk4_backward(const FineGrid& fg, const State& yT, F&& f, Check&& check) {
    const int nf = fg.n_fine();
    std::vector<State> y(static_cast<std::size_t>(nf + 1));
    y[static_cast<std::size_t>(nf)] = yT;
    const double h = fg.h();
    for (int j = nf; j > 0; --j) {
        const double t = fg.t(j);
        const double tm = t - 0.5 * h;
        const double t0 = fg.t(j - 1);
        const State& yj = y[static_cast<std::size_t>(j)];
        const State k1 = f(t, tm, yj);
        const State k2 = f(tm, tm, State(yj - 0.5 * h * k1));
        const State k3 = f(tm, tm, State(yj - 0.5 * h * k2));
        const State k4 = f(t0, tm, State(yj - h * k3));
        y[static_cast<std::size_t>(j - 1)] = yj - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check(j - 1, y[static_cast<std::size_t>(j - 1)]);
    }
    return y;
}

/// Forward RK4 with step 2h whose stages use fine nodes only: g(j, y) is
/// the derivative at fine node j. Returns y at even fine nodes.
template <class State, class G>
std::vector<State> rk4_forward_paired(const FineGrid& fg, const State& y0, G&& g) {
    const int nf = fg.n_fine();
    const double H = 2.0 * fg.h();
    std::vector<State> y(static_cast<std::size_t>(nf / 2 + 1));
    y[0] = y0;
    for (int i = 0; i < nf / 2; ++i) {
        const int j = 2 * i;
        const State& yi = y[static_cast<std::size_t>(i)];
        const State k1 = g(j, yi);
        const State k2 = g(j + 1, State(yi + 0.5 * H * k1));
        const State k3 = g(j + 1, State(yi + 0.5 * H * k2));
        const State k4 = g(j + 2, State(yi + H * k3));
        y[static_cast<std::size_t>(i + 1)] = yi + (H / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

/// Four-point Lagrange stencil for evaluating grid data at t.
struct LagrangeStencil {
    int k0 = 0;
    std::array<double, 4> w{};
};
LagrangeStencil lagrange_stencil(const TimeGrid& grid, double t);

/// Values of grid data at the nodes of the grid refined by `factor`.
Vector resample(const TimeGrid& grid, const Vector& values, int factor);

}  // namespace impact
