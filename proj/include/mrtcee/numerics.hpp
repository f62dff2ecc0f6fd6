#pragma once

#include <Eigen/Dense>

namespace mrtcee {

/// Kronecker product: block (i, j) of the result is a(i, j) * b.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    const Eigen::Index br = b.rows();
    const Eigen::Index bc = b.cols();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * br, a.cols() * bc);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * br, j * bc, br, bc) = a(i, j) * b;
        }
    }
    return out;
}

inline constexpr double kSingularConditionBound = 1e12;

struct SpdSolveReport {
    Eigen::VectorXd solution;
    double condition_estimate = 1.0;  // of the equilibrated matrix
};

/// Solves a x = rhs for symmetric a through an LDLT factorization of the
/// diagonally equilibrated matrix. Throws NumericalError when the
/// factorization fails or the 1-norm condition estimate exceeds
/// kSingularConditionBound.
SpdSolveReport solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs);

/// Inverse of a symmetric positive (semi)definite matrix, same checks as solve_spd.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a);

/// Solves a general square system with partial-pivot LU; used for the small
/// non-symmetric constraint systems of the pattern builders.
Eigen::VectorXd solve_square(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs);

/// Numerical rank with absolute tolerance `tol` on the column-pivoted QR diagonal.
int numerical_rank(const Eigen::MatrixXd& a, double tol);

bool all_finite(const Eigen::MatrixXd& a);

}  // namespace mrtcee
