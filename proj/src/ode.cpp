#include "impact/ode.hpp"

#include <algorithm>
#include <cmath>

#include "impact/errors.hpp"

namespace impact {

int choose_substeps(double h, double rate) {
    if (!std::isfinite(rate)) throw InvalidArgument("choose_substeps: non-finite rate");
    const double need = std::ceil(h * std::abs(rate) / kSubstepStability);
    int m = std::max(2, static_cast<int>(std::min(need, 1e7)));
    if (m % 2) ++m;
    return m;
}

LagrangeStencil lagrange_stencil(const TimeGrid& grid, double t) {
    const int N = grid.n_steps();
    if (N < 3) throw InvalidArgument("lagrange_stencil: grid needs at least 3 intervals");
    const double x = t / grid.dt();
    int k = static_cast<int>(std::floor(x));
    k = std::clamp(k, 0, N - 1);
    const int k0 = std::clamp(k - 1, 0, N - 3);

    LagrangeStencil s;
    s.k0 = k0;
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        for (int c = 0; c < 4; ++c) {
            if (c == a) continue;
            w *= (x - (k0 + c)) / static_cast<double>(a - c);
        }
        s.w[static_cast<std::size_t>(a)] = w;
    }
    return s;
}

Vector resample(const TimeGrid& grid, const Vector& values, int factor) {
    if (values.size() != grid.n_nodes()) throw InvalidArgument("resample: values do not match grid");
    const int N = grid.n_steps();
    Vector out(N * factor + 1);
    for (int j = 0; j <= N * factor; ++j) {
        if (j % factor == 0) {
            out(j) = values(j / factor);
            continue;
        }
        const auto s = lagrange_stencil(grid, grid.dt() * j / factor);
        double v = 0.0;
        for (int a = 0; a < 4; ++a) v += s.w[static_cast<std::size_t>(a)] * values(s.k0 + a);
        out(j) = v;
    }
    return out;
}

}  // namespace impact
