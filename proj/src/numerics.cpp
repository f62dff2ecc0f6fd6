#include "mrtcee/numerics.hpp"

#include <cmath>
#include <limits>

#include "mrtcee/errors.hpp"

namespace mrtcee {

namespace {

// LDLT of the Jacobi-equilibrated matrix S a S with S = diag(a)^(-1/2), so
// the condition check ignores pure column scaling.
struct ScaledLdlt {
    Eigen::VectorXd scale;
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    double condition = 1.0;
};

ScaledLdlt checked_ldlt(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw ValidationError("solve_spd: matrix must be square and non-empty");
    }
    if (!all_finite(a)) {
        throw NumericalError("solve_spd: matrix has non-finite entries");
    }
    ScaledLdlt out;
    const Eigen::VectorXd d = a.diagonal();
    if ((d.array() <= 0.0).any()) {
        throw NumericalError("singular system: non-positive diagonal entry");
    }
    out.scale = d.cwiseSqrt().cwiseInverse();
    out.ldlt.compute(out.scale.asDiagonal() * a * out.scale.asDiagonal());
    if (out.ldlt.info() != Eigen::Success || !out.ldlt.isPositive()) {
        throw NumericalError("singular system: matrix is not positive definite");
    }
    const Eigen::VectorXd pivots = out.ldlt.vectorD();
    if (!(pivots.minCoeff() > pivots.maxCoeff() / kSingularConditionBound)) {
        throw NumericalError("singular system: condition estimate exceeds 1e12");
    }
    const double rcond = out.ldlt.rcond();
    const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(cond <= kSingularConditionBound)) {
        throw NumericalError("singular system: condition estimate exceeds 1e12");
    }
    out.condition = std::max(1.0, cond);
    return out;
}

}  // namespace

bool all_finite(const Eigen::MatrixXd& a) {
    return a.allFinite();
}

SpdSolveReport solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs) {
    if (rhs.size() != a.rows()) {
        throw ValidationError("solve_spd: right-hand side has the wrong length");
    }
    if (!rhs.allFinite()) {
        throw NumericalError("solve_spd: right-hand side has non-finite entries");
    }
    const auto f = checked_ldlt(a);
    SpdSolveReport report;
    report.condition_estimate = f.condition;
    report.solution = f.scale.cwiseProduct(f.ldlt.solve(f.scale.cwiseProduct(rhs)));
    return report;
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a) {
    const auto f = checked_ldlt(a);
    const Eigen::MatrixXd scaled_inv = f.ldlt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
    const Eigen::MatrixXd inv = f.scale.asDiagonal() * scaled_inv * f.scale.asDiagonal();
    // Symmetrize away round-off.
    return 0.5 * (inv + inv.transpose());
}

Eigen::VectorXd solve_square(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs) {
    if (a.rows() != a.cols() || rhs.size() != a.rows()) {
        throw ValidationError("solve_square: dimension mismatch");
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const double rcond = lu.rcond();
    if (!(rcond > 1.0 / kSingularConditionBound)) {
        throw NumericalError("singular system");
    }
    return lu.solve(rhs);
}

int numerical_rank(const Eigen::MatrixXd& a, double tol) {
    if (a.size() == 0) {
        return 0;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    const auto& r = qr.matrixQR();
    const Eigen::Index diag = std::min(r.rows(), r.cols());
    int rank = 0;
    for (Eigen::Index i = 0; i < diag; ++i) {
        if (std::abs(r(i, i)) > tol) {
            ++rank;
        }
    }
    return rank;
}

}  // namespace mrtcee
