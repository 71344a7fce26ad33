#pragma once

#include "impact/core_model.hpp"

namespace impact {

struct LinalgTolerances {
    double pivot_floor = 1e-14;  // relative to the 1-norm of the matrix
};

/// exp(scale * A) by scaling and squaring with a degree-13 Padé kernel.
/// Throws InvalidArgument for non-square or non-finite input.
Matrix mat_exp(const Matrix& A, double scale = 1.0);

struct LinearSolve {
    Matrix X;
    double condition_estimate = 1.0;  // 1-norm estimate of cond(A)
};

/// LU with partial pivoting. Throws IllConditioned if a pivot falls below
/// tol.pivot_floor * ||A||_1.
LinearSolve solve_linear(const Matrix& A, const Matrix& rhs, const LinalgTolerances& tol = {});

/// \int_0^t exp(sA) c ds, read off the top-right block of
/// exp(t [[A, c], [0, 0]]). Works for singular A.
Matrix exp_integral(const Matrix& A, const Matrix& c, double t);

}  // namespace impact
