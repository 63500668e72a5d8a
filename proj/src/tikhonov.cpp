#include "d3l/tikhonov.hpp"

#include "d3l/errors.hpp"
#include "d3l/linalg.hpp"

#include <chrono>
#include <cmath>

namespace d3l::tikhonov {

namespace {

using Clock = std::chrono::steady_clock;

// Normal-equation residual target for every returned solution.
constexpr double kNormalTolerance = 1e-8;
constexpr double kInterpolationTolerance = 1e-8;

void check_system(const Matrix& a, const Vector& y) {
    if (a.rows() != a.cols() || a.rows() < 1) {
        throw InvalidArgument("kernel matrix must be square and nonempty, got " + std::to_string(a.rows()) + "x"
                              + std::to_string(a.cols()));
    }
    if (y.size() != a.rows()) {
        throw InvalidArgument("target length " + std::to_string(y.size()) + " does not match matrix size "
                              + std::to_string(a.rows()));
    }
}

Matrix normal_matrix(const Matrix& a, double lambda, RegMatrix q) {
    const auto n = a.cols();
    if (q == RegMatrix::identity) {
        return linalg::gram_plus_diagonal(a, Vector::Constant(n, lambda));
    }
    // Q^T Q for first differences is the path-graph Laplacian.
    Vector diag = Vector::Constant(n, 2.0 * lambda);
    diag(0) = lambda;
    diag(n - 1) = lambda;
    if (n == 1) diag(0) = 0.0;
    Matrix m = linalg::gram_plus_diagonal(a, diag);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        m(k + 1, k) -= lambda;
        m(k, k + 1) -= lambda;
    }
    return m;
}

Vector conjugate_gradient(const Matrix& a, const Vector& b, const TikhonovConfig& cfg, int& iterations) {
    const auto op = [&](const Vector& v) -> Vector {
        Vector out = a.transpose() * (a * v);
        if (cfg.lambda != 0.0) out += cfg.lambda * apply_qtq(cfg.reg_matrix, v);
        return out;
    };
    Vector x = Vector::Zero(b.size());
    Vector r = b;
    Vector p = r;
    double rr = r.squaredNorm();
    const double target = cfg.tol * b.norm();
    iterations = 0;
    while (std::sqrt(rr) > target) {
        if (iterations >= cfg.max_iter) {
            throw NotConverged("conjugate gradient did not converge in " + std::to_string(cfg.max_iter)
                                   + " iterations (relative residual " + std::to_string(std::sqrt(rr) / b.norm())
                                   + ")",
                               {std::sqrt(rr) / b.norm()});
        }
        const Vector ap = op(p);
        const double step = rr / p.dot(ap);
        x += step * p;
        r -= step * ap;
        const double rr_next = r.squaredNorm();
        p = r + (rr_next / rr) * p;
        rr = rr_next;
        ++iterations;
        // Guard against drift of the recursive residual.
        if (std::sqrt(rr) <= target) {
            r = b - op(x);
            rr = r.squaredNorm();
            p = r;
        }
    }
    return x;
}

void fill_norms(Solution& s, const Matrix& a, const Vector& y, double lambda, RegMatrix q) {
    s.residual_norm = (a * s.alpha - y).norm();
    s.reg_norm = apply_q(q, s.alpha).norm();
    s.objective = s.residual_norm * s.residual_norm + lambda * s.reg_norm * s.reg_norm;
}

} // namespace

std::string to_string(RegMatrix q) {
    return q == RegMatrix::identity ? "identity" : "first_difference";
}

RegMatrix reg_matrix_from_string(const std::string& name) {
    if (name == "identity") return RegMatrix::identity;
    if (name == "first_difference") return RegMatrix::first_difference;
    throw InvalidArgument("unknown regularization matrix '" + name + "'");
}

std::string to_string(Method m) {
    return m == Method::direct ? "direct" : "conjugate_gradient";
}

Method method_from_string(const std::string& name) {
    if (name == "direct") return Method::direct;
    if (name == "conjugate_gradient" || name == "cg") return Method::conjugate_gradient;
    throw InvalidArgument("unknown solver method '" + name + "'");
}

void validate(const TikhonovConfig& cfg) {
    if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
        throw InvalidArgument("lambda must be a finite value >= 0");
    }
    if (cfg.method == Method::conjugate_gradient && (!(cfg.tol > 0.0) || cfg.max_iter < 1)) {
        throw InvalidArgument("conjugate gradient needs tol > 0 and max_iter >= 1");
    }
}

Vector apply_q(RegMatrix q, const Vector& v) {
    if (q == RegMatrix::identity) return v;
    if (v.size() < 2) return Vector::Zero(0);
    return v.tail(v.size() - 1) - v.head(v.size() - 1);
}

Vector apply_qtq(RegMatrix q, const Vector& v) {
    if (q == RegMatrix::identity) return v;
    const auto n = v.size();
    Vector out = Vector::Zero(n);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double diff = v(k + 1) - v(k);
        out(k) -= diff;
        out(k + 1) += diff;
    }
    return out;
}

double objective(const Matrix& a, const Vector& y, const Vector& alpha, double lambda, RegMatrix q) {
    return (a * alpha - y).squaredNorm() + lambda * apply_q(q, alpha).squaredNorm();
}

Vector gradient(const Matrix& a, const Vector& y, const Vector& alpha, double lambda, RegMatrix q) {
    return 2.0 * (a.transpose() * (a * alpha - y) + lambda * apply_qtq(q, alpha));
}

double normal_equation_residual(const Matrix& a, const Vector& y, const Vector& alpha, double lambda,
                                RegMatrix q) {
    const Vector rhs = a.transpose() * y;
    const Vector lhs = a.transpose() * (a * alpha) + lambda * apply_qtq(q, alpha);
    const double scale = rhs.norm();
    return scale > 0.0 ? (lhs - rhs).norm() / scale : (lhs - rhs).norm();
}

Solution solve_interpolation(const Matrix& a, const Vector& y) {
    const auto start = Clock::now();
    check_system(a, y);
    const Eigen::FullPivLU<Matrix> lu(a);
    const Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double largest = pivots.maxCoeff();
    const double smallest = pivots.minCoeff();
    if (!(smallest > 1e-12 * largest)) {
        throw IllConditioned("kernel matrix is numerically singular: smallest pivot " + std::to_string(smallest)
                                 + " vs largest " + std::to_string(largest),
                             smallest);
    }
    Solution s;
    s.alpha = lu.solve(y);
    for (int step = 0; step < 2; ++step) {
        const Vector r = y - a * s.alpha;
        if (r.norm() <= 1e-12 * y.norm()) break;
        s.alpha += lu.solve(r);
    }
    fill_norms(s, a, y, 0.0, RegMatrix::identity);
    if (s.residual_norm > kInterpolationTolerance * y.norm()) {
        throw IllConditioned("interpolation residual " + std::to_string(s.residual_norm)
                                 + " exceeds tolerance; kernel matrix is ill-conditioned",
                             smallest);
    }
    s.solve_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return s;
}

Solution solve_tikhonov(const Matrix& a, const Vector& y, const TikhonovConfig& cfg) {
    const auto start = Clock::now();
    validate(cfg);
    check_system(a, y);

    const Vector rhs = a.transpose() * y;
    Solution s;
    if (cfg.method == Method::direct) {
        const linalg::SpdSystem system(normal_matrix(a, cfg.lambda, cfg.reg_matrix));
        s.alpha = system.refine(rhs, Vector::Zero(rhs.size()), 1e-12, 4);
        if (system.relative_residual(rhs, s.alpha) > kNormalTolerance) {
            throw IllConditioned("normal equations could not be solved to relative residual 1e-8",
                                 system.matrix().diagonal().minCoeff());
        }
    } else {
        s.alpha = conjugate_gradient(a, rhs, cfg, s.iterations);
    }
    fill_norms(s, a, y, cfg.lambda, cfg.reg_matrix);
    s.solve_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return s;
}

double predict(const Vector& alpha, const kernel::KernelSpec& spec, const data::Dataset& train,
               const Vector& query) {
    if (alpha.size() != train.size()) {
        throw InvalidArgument("coefficient vector has length " + std::to_string(alpha.size()) + ", training set has "
                              + std::to_string(train.size()) + " points");
    }
    if (query.size() != train.dim()) {
        throw InvalidArgument("query has dimension " + std::to_string(query.size()) + ", training data has "
                              + std::to_string(train.dim()));
    }
    const Vector phi_q = kernel::forward(spec.layers, query);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < train.size(); ++k) {
        const Vector phi_k = kernel::forward(spec.layers, train.points.row(k).transpose());
        sum += alpha(k) * kernel::outer_value(spec, phi_q, phi_k);
    }
    return sum;
}

} // namespace d3l::tikhonov
