#include "impact/quadrature.hpp"

#include "impact/errors.hpp"

namespace impact {

namespace {
void require_match(const TimeGrid& grid, const Vector& f, const char* who) {
    if (f.size() != grid.n_nodes()) throw InvalidArgument(std::string(who) + ": values do not match grid");
}
}  // namespace

double trapz(const TimeGrid& grid, const Vector& f) {
    require_match(grid, f, "trapz");
    const int N = grid.n_steps();
    return grid.dt() * (f.segment(1, N - 1).sum() + 0.5 * (f(0) + f(N)));
}

Vector cumtrapz(const TimeGrid& grid, const Vector& f) {
    require_match(grid, f, "cumtrapz");
    Vector out(f.size());
    out(0) = 0.0;
    const double h = grid.dt();
    for (int k = 0; k < grid.n_steps(); ++k) out(k + 1) = out(k) + 0.5 * h * (f(k) + f(k + 1));
    return out;
}

Vector interval_integrals(const TimeGrid& grid, const Vector& f) {
    require_match(grid, f, "interval_integrals");
    const int N = grid.n_steps();
    if (N < 3) throw InvalidArgument("interval_integrals: needs at least 3 intervals");
    const double c = grid.dt() / 24.0;
    Vector I(N);
    I(0) = c * (9 * f(0) + 19 * f(1) - 5 * f(2) + f(3));
    for (int k = 1; k < N - 1; ++k) I(k) = c * (-f(k - 1) + 13 * f(k) + 13 * f(k + 1) - f(k + 2));
    I(N - 1) = c * (9 * f(N) + 19 * f(N - 1) - 5 * f(N - 2) + f(N - 3));
    return I;
}

Vector tail_integrals(const TimeGrid& grid, const Vector& f) {
    const Vector I = interval_integrals(grid, f);
    const int N = grid.n_steps();
    Vector tail(N + 1);
    tail(N) = 0.0;
    for (int k = N - 1; k >= 0; --k) tail(k) = tail(k + 1) + I(k);
    return tail;
}

}  // namespace impact
