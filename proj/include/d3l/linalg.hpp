#pragma once

#include <Eigen/Dense>

namespace d3l::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Lower triangle of S^T S + diag(shift), mirrored to a full symmetric
/// matrix. S is typically a (row-weighted) kernel block.
[[nodiscard]] Matrix gram_plus_diagonal(const Matrix& s, const Vector& shift);

/// Symmetric positive definite system M x = b, factored once (Cholesky).
class SpdSystem {
public:
    /// Throws IllConditioned if M is not numerically positive definite.
    explicit SpdSystem(Matrix m);

    [[nodiscard]] const Matrix& matrix() const noexcept { return matrix_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return matrix_.rows(); }

    [[nodiscard]] Vector solve(const Vector& rhs) const;

    /// Correction steps x += M^{-1}(b - M x) starting from `x`, until
    /// ||b - M x|| <= rel_tol * ||b|| or `max_steps` corrections were applied.
    [[nodiscard]] Vector refine(const Vector& rhs, Vector x, double rel_tol, int max_steps) const;

    /// ||b - M x|| / ||b|| (absolute norm when b = 0).
    [[nodiscard]] double relative_residual(const Vector& rhs, const Vector& x) const;

private:
    Matrix matrix_;
    Eigen::LLT<Matrix, Eigen::Lower> llt_;
};

} // namespace d3l::linalg
