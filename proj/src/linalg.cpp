#include "impact/linalg.hpp"

#include <Eigen/LU>

#include <array>
#include <cmath>
#include <limits>

#include "impact/errors.hpp"

namespace impact {

namespace {

void require_square_finite(const Matrix& A, const char* who) {
    if (A.rows() != A.cols()) throw InvalidArgument(std::string(who) + ": matrix must be square");
    if (!A.allFinite()) throw InvalidArgument(std::string(who) + ": matrix has non-finite entries");
}

double norm1(const Matrix& A) {
    if (A.size() == 0) return 0.0;
    return A.cwiseAbs().colwise().sum().maxCoeff();
}

// Higham (2005) coefficients and thresholds.
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

Matrix mat_exp(const Matrix& A_in, double scale) {
    require_square_finite(A_in, "mat_exp");
    if (!std::isfinite(scale)) throw InvalidArgument("mat_exp: non-finite scale");
    const auto m = A_in.rows();
    const Matrix I = Matrix::Identity(m, m);
    if (m == 0) return I;

    Matrix A = scale * A_in;
    const double nrm = norm1(A);
    if (nrm == 0.0) return I;

    int s = 0;
    if (nrm > kTheta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / kTheta13))));
    A /= std::ldexp(1.0, s);

    const Matrix A2 = A * A;
    const Matrix A4 = A2 * A2;
    const Matrix A6 = A4 * A2;
    const auto& c = kPade13;
    const Matrix U = A * (A6 * (c[13] * A6 + c[11] * A4 + c[9] * A2) + c[7] * A6 + c[5] * A4 + c[3] * A2 + c[1] * I);
    const Matrix V = A6 * (c[12] * A6 + c[10] * A4 + c[8] * A2) + c[6] * A6 + c[4] * A4 + c[2] * A2 + c[0] * I;

    Matrix R = Eigen::PartialPivLU<Matrix>(V - U).solve(V + U);
    for (int k = 0; k < s; ++k) R = R * R;
    return R;
}

LinearSolve solve_linear(const Matrix& A, const Matrix& rhs, const LinalgTolerances& tol) {
    require_square_finite(A, "solve_linear");
    if (rhs.rows() != A.rows()) throw InvalidArgument("solve_linear: rhs rows do not match");
    if (!rhs.allFinite()) throw InvalidArgument("solve_linear: rhs has non-finite entries");

    const double anorm = norm1(A);
    Eigen::PartialPivLU<Matrix> lu(A);
    const Matrix& LU = lu.matrixLU();
    double min_pivot = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < A.rows(); ++k) min_pivot = std::min(min_pivot, std::abs(LU(k, k)));

    const double rcond = A.rows() == 0 ? 1.0 : lu.rcond();
    const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (A.rows() > 0 && (anorm == 0.0 || min_pivot < tol.pivot_floor * anorm))
        throw IllConditioned("solve_linear: pivot below working-precision floor", cond);

    return {lu.solve(rhs), cond};
}

Matrix exp_integral(const Matrix& A, const Matrix& c, double t) {
    if (A.rows() != A.cols()) throw InvalidArgument("exp_integral: A must be square");
    if (c.rows() != A.rows()) throw InvalidArgument("exp_integral: c rows do not match A");
    const auto m = A.rows();
    const auto k = c.cols();
    Matrix aug = Matrix::Zero(m + k, m + k);
    aug.topLeftCorner(m, m) = A;
    aug.topRightCorner(m, k) = c;
    return mat_exp(aug, t).topRightCorner(m, k);
}

}  // namespace impact
