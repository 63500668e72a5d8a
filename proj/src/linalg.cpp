#include "d3l/linalg.hpp"

#include "d3l/errors.hpp"

#include <cmath>

namespace d3l::linalg {

Matrix gram_plus_diagonal(const Matrix& s, const Vector& shift) {
    const auto n = s.cols();
    Matrix m = Matrix::Zero(n, n);
    m.selfadjointView<Eigen::Lower>().rankUpdate(s.transpose());
    m.diagonal() += shift;
    m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
    return m;
}

SpdSystem::SpdSystem(Matrix m) : matrix_(std::move(m)), llt_(matrix_) {
    if (llt_.info() != Eigen::Success) {
        // Report the smallest diagonal entry as the offending pivot scale.
        const double pivot = matrix_.size() == 0 ? 0.0 : matrix_.diagonal().minCoeff();
        throw IllConditioned("system matrix is not numerically positive definite", pivot);
    }
    const Vector pivots = llt_.matrixLLT().diagonal();
    if (pivots.size() > 0) {
        const double smallest = pivots.cwiseAbs().minCoeff();
        const double largest = pivots.cwiseAbs().maxCoeff();
        // Squared pivots relate to the matrix scale; reject a numerically singular factor.
        if (!(smallest * smallest > 1e-15 * largest * largest)) {
            throw IllConditioned("system matrix is numerically singular", smallest * smallest);
        }
    }
}

Vector SpdSystem::solve(const Vector& rhs) const {
    return llt_.solve(rhs);
}

Vector SpdSystem::refine(const Vector& rhs, Vector x, double rel_tol, int max_steps) const {
    const double scale = rhs.norm();
    for (int step = 0; step < max_steps; ++step) {
        const Vector r = rhs - matrix_ * x;
        if (r.norm() <= rel_tol * scale) break;
        x += llt_.solve(r);
    }
    return x;
}

double SpdSystem::relative_residual(const Vector& rhs, const Vector& x) const {
    const double r = (rhs - matrix_ * x).norm();
    const double scale = rhs.norm();
    return scale > 0.0 ? r / scale : r;
}

} // namespace d3l::linalg
