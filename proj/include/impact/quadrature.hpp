#pragma once

#include "impact/core_model.hpp"

namespace impact {

/// Trapezoid rule over the whole grid.
double trapz(const TimeGrid& grid, const Vector& f);

/// Running trapezoid integral from 0; out(0) = 0.
Vector cumtrapz(const TimeGrid& grid, const Vector& f);

/// Fourth-order integrals of f over each grid interval (needs >= 3 intervals).
Vector interval_integrals(const TimeGrid& grid, const Vector& f);

/// tail(k) = integral of f over [t_k, T] built from interval_integrals.
Vector tail_integrals(const TimeGrid& grid, const Vector& f);

}  // namespace impact
