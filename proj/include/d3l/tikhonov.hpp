#pragma once

#include "d3l/dataset.hpp"
#include "d3l/kernel.hpp"

#include <Eigen/Dense>

#include <string>

namespace d3l::tikhonov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// The regularization matrix Q.
enum class RegMatrix { identity, first_difference };
enum class Method { direct, conjugate_gradient };

[[nodiscard]] std::string to_string(RegMatrix q);
[[nodiscard]] RegMatrix reg_matrix_from_string(const std::string& name);
[[nodiscard]] std::string to_string(Method m);
[[nodiscard]] Method method_from_string(const std::string& name);

struct TikhonovConfig {
    double lambda = 0.0;
    RegMatrix reg_matrix = RegMatrix::identity;
    Method method = Method::direct;
    double tol = 1e-10;  // conjugate gradient: relative residual target
    int max_iter = 10000;
};

void validate(const TikhonovConfig& cfg);

// Objective convention: J(a) = ||A a - y||^2 + lambda ||Q a||^2.
struct Solution {
    Vector alpha;
    double residual_norm = 0.0;  // ||A a - y||
    double reg_norm = 0.0;       // ||Q a||
    double objective = 0.0;
    double solve_seconds = 0.0;
    int iterations = 0;          // conjugate gradient only
};

/// Solves A a = y (interpolation, lambda = 0). Throws IllConditioned with
/// the smallest pivot when A is numerically singular.
[[nodiscard]] Solution solve_interpolation(const Matrix& a, const Vector& y);

/// Minimizes J via the normal equations (A^T A + lambda Q^T Q) a = A^T y.
[[nodiscard]] Solution solve_tikhonov(const Matrix& a, const Vector& y, const TikhonovConfig& cfg);

[[nodiscard]] inline Solution solve_tikhonov(const kernel::KernelMatrix& a, const Vector& y,
                                             const TikhonovConfig& cfg) {
    return solve_tikhonov(a.entries, y, cfg);
}

[[nodiscard]] double objective(const Matrix& a, const Vector& y, const Vector& alpha, double lambda,
                               RegMatrix q = RegMatrix::identity);

/// Analytic gradient of J.
[[nodiscard]] Vector gradient(const Matrix& a, const Vector& y, const Vector& alpha, double lambda,
                              RegMatrix q = RegMatrix::identity);

/// Q v for the chosen regularization matrix (length N, or N-1 for first differences).
[[nodiscard]] Vector apply_q(RegMatrix q, const Vector& v);
/// Q^T Q v.
[[nodiscard]] Vector apply_qtq(RegMatrix q, const Vector& v);

/// ||(A^T A + lambda Q^T Q) a - A^T y|| / ||A^T y||.
[[nodiscard]] double normal_equation_residual(const Matrix& a, const Vector& y, const Vector& alpha,
                                              double lambda, RegMatrix q = RegMatrix::identity);

/// Representer-theorem evaluation: sum_k alpha_k K(phi(query), phi(x_k)).
[[nodiscard]] double predict(const Vector& alpha, const kernel::KernelSpec& spec, const data::Dataset& train,
                             const Vector& query);

} // namespace d3l::tikhonov
