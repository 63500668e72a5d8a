#include "d3l/errors.hpp"
#include "d3l/kernel.hpp"
#include "d3l/tikhonov.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace d3l;
using tikhonov::Method;
using tikhonov::RegMatrix;
using tikhonov::TikhonovConfig;

namespace {

TikhonovConfig with_lambda(double lambda, RegMatrix q = RegMatrix::identity, Method m = Method::direct) {
    TikhonovConfig cfg;
    cfg.lambda = lambda;
    cfg.reg_matrix = q;
    cfg.method = m;
    return cfg;
}

// A random SPD kernel matrix: gaussian over random points plus a small ridge
// so that every test system is comfortably nonsingular.
Eigen::MatrixXd random_kernel(std::mt19937_64& rng, Eigen::Index n) {
    const auto ds = test::random_dataset(rng, n, 2);
    Eigen::MatrixXd a = kernel::assemble(kernel::KernelSpec::gaussian(0.3), ds).entries;
    a.diagonal().array() += 0.05;
    return a;
}

// Dense Q for the chosen regularization, written out directly.
Eigen::MatrixXd dense_q(RegMatrix q, Eigen::Index n) {
    if (q == RegMatrix::identity) return Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(n - 1, 0), n);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        d(k, k) = -1.0;
        d(k, k + 1) = 1.0;
    }
    return d;
}

} // namespace

TEST_CASE("interpolation solves the identity and a 2x2 system") {
    const Eigen::Vector3d y(1.0, -2.0, 0.5);
    const auto s = tikhonov::solve_interpolation(Eigen::MatrixXd::Identity(3, 3), y);
    CHECK(s.alpha == Eigen::VectorXd(y));
    CHECK(s.residual_norm == 0.0);

    Eigen::Matrix2d a;
    a << 1.0, 0.5, 0.5, 1.0;
    const auto t = tikhonov::solve_interpolation(a, Eigen::Vector2d(1.5, 1.5));
    CHECK(t.alpha(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t.alpha(1) == doctest::Approx(1.0).epsilon(1e-14));

    const Eigen::MatrixXd d = Eigen::Vector2d(2.0, 4.0).asDiagonal();
    const auto u = tikhonov::solve_interpolation(d, Eigen::Vector2d(2.0, 4.0));
    CHECK(u.alpha == Eigen::VectorXd(Eigen::Vector2d(1.0, 1.0)));
}

TEST_CASE("interpolation with duplicate points is ill-conditioned") {
    Eigen::MatrixXd pts(3, 1);
    pts << 0.2, 0.2, 0.7;
    const auto ds = data::make_dataset(pts, Eigen::Vector3d(1.0, 2.0, 3.0));
    const auto a = kernel::assemble(kernel::KernelSpec::gaussian(0.5), ds);
    try {
        (void)tikhonov::solve_interpolation(a.entries, ds.targets);
        FAIL("expected IllConditioned");
    } catch (const IllConditioned& e) {
        CHECK(e.pivot() < 1e-12);
    }
}

TEST_CASE("tikhonov on a diagonal matrix has a closed form") {
    const Eigen::MatrixXd a = Eigen::Vector2d(2.0, 1.0).asDiagonal();
    const auto s = tikhonov::solve_tikhonov(a, Eigen::Vector2d(2.0, 1.0), with_lambda(1.0));
    CHECK(s.alpha(0) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(s.alpha(1) == doctest::Approx(0.5).epsilon(1e-14));
    // J = (1.6-2)^2 + (0.5-1)^2 + 0.64 + 0.25
    CHECK(s.objective == doctest::Approx(0.16 + 0.25 + 0.64 + 0.25).epsilon(1e-14));
}

TEST_CASE("tikhonov limits in lambda") {
    std::mt19937_64 rng(3);
    const auto a = random_kernel(rng, 8);
    const auto y = test::random_vector(rng, 8);

    const auto huge = tikhonov::solve_tikhonov(a, y, with_lambda(1e12));
    CHECK(huge.alpha.norm() <= 1e-6);

    const auto zero = tikhonov::solve_tikhonov(a, y, with_lambda(0.0));
    const auto interp = tikhonov::solve_interpolation(a, y);
    CHECK((zero.alpha - interp.alpha).norm() <= 1e-10 * interp.alpha.norm());
}

TEST_CASE("conjugate gradient agrees with the direct solve") {
    std::mt19937_64 rng(4);
    for (const auto q : {RegMatrix::identity, RegMatrix::first_difference}) {
        const auto a = random_kernel(rng, 20);
        const auto y = test::random_vector(rng, 20);
        const auto direct = tikhonov::solve_tikhonov(a, y, with_lambda(0.1, q));
        const auto cg = tikhonov::solve_tikhonov(a, y, with_lambda(0.1, q, Method::conjugate_gradient));
        CHECK(cg.iterations > 0);
        CHECK((cg.alpha - direct.alpha).norm() <= 1e-6 * direct.alpha.norm());
    }
}

TEST_CASE("conjugate gradient reports non-convergence") {
    std::mt19937_64 rng(5);
    const auto a = random_kernel(rng, 30);
    auto cfg = with_lambda(1e-3, RegMatrix::identity, Method::conjugate_gradient);
    cfg.max_iter = 1;
    cfg.tol = 1e-14;
    try {
        (void)tikhonov::solve_tikhonov(a, test::random_vector(rng, 30), cfg);
        FAIL("expected NotConverged");
    } catch (const NotConverged& e) {
        CHECK(e.final_residual() > 1e-14);
    }
}

TEST_CASE("invalid solver inputs are rejected") {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS((void)tikhonov::solve_tikhonov(a, Eigen::Vector2d(1, 1), with_lambda(-1.0)), InvalidArgument);
    CHECK_THROWS_AS((void)tikhonov::solve_tikhonov(a, Eigen::Vector2d(1, 1), with_lambda(std::nan(""))),
                    InvalidArgument);
    CHECK_THROWS_AS((void)tikhonov::solve_tikhonov(a, Eigen::Vector3d(1, 1, 1), with_lambda(1.0)), InvalidArgument);
    CHECK_THROWS_AS((void)tikhonov::solve_interpolation(Eigen::MatrixXd::Ones(2, 3), Eigen::Vector2d(1, 1)),
                    InvalidArgument);
    CHECK_THROWS_AS((void)tikhonov::reg_matrix_from_string("laplacian"), InvalidArgument);
    CHECK(tikhonov::method_from_string(tikhonov::to_string(Method::conjugate_gradient))
          == Method::conjugate_gradient);
}

TEST_CASE("predict evaluates the kernel expansion") {
    std::mt19937_64 rng(6);
    const auto ds = test::random_dataset(rng, 6, 2);
    auto spec = kernel::KernelSpec::gaussian(0.4);
    spec.layers.push_back({test::random_matrix(rng, 3, 2), test::random_vector(rng, 3), kernel::Activation::tanh});
    const auto a = kernel::assemble(spec, ds).entries;

    // At a training point predict() reproduces (A alpha)_i.
    const auto s = tikhonov::solve_interpolation(a, ds.targets);
    for (Eigen::Index i = 0; i < 6; ++i) {
        CHECK(tikhonov::predict(s.alpha, spec, ds, ds.points.row(i).transpose())
              == doctest::Approx(ds.targets(i)).epsilon(1e-8));
    }
    CHECK(tikhonov::predict(Eigen::VectorXd::Zero(6), spec, ds, Eigen::Vector2d(0.3, 0.3)) == 0.0);

    const auto alpha = test::random_vector(rng, 6);
    const Eigen::Vector2d q(0.55, 0.1);
    double expected = 0.0;
    for (Eigen::Index k = 0; k < 6; ++k) expected += alpha(k) * kernel::eval_kernel(spec, q, ds.points.row(k));
    CHECK(tikhonov::predict(alpha, spec, ds, q) == doctest::Approx(expected).epsilon(1e-14));
    CHECK_THROWS_AS((void)tikhonov::predict(alpha, spec, ds, Eigen::Vector3d(0, 0, 0)), InvalidArgument);
    CHECK_THROWS_AS((void)tikhonov::predict(Eigen::VectorXd::Zero(2), spec, ds, q), InvalidArgument);
}

TEST_CASE("property: returned solutions satisfy the normal equations") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> size(1, 25);
    std::uniform_real_distribution<double> log_lambda(-6.0, 2.0);
    for (int trial = 0; trial < 60; ++trial) {
        const auto n = size(rng);
        const auto a = random_kernel(rng, n);
        const auto y = test::random_vector(rng, n);
        const auto q = trial % 2 == 0 ? RegMatrix::identity : RegMatrix::first_difference;
        const double lambda = std::pow(10.0, log_lambda(rng));
        const auto s = tikhonov::solve_tikhonov(a, y, with_lambda(lambda, q));
        CHECK(tikhonov::normal_equation_residual(a, y, s.alpha, lambda, q) <= 1e-8);
    }
}

TEST_CASE("property: the optimal objective is nondecreasing in lambda") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_kernel(rng, 15);
        const auto y = test::random_vector(rng, 15);
        double previous = -1.0;
        for (const double lambda : {1e-6, 1e-4, 1e-2, 1e-1, 1.0, 10.0}) {
            const auto s = tikhonov::solve_tikhonov(a, y, with_lambda(lambda));
            CHECK(s.objective >= previous * (1.0 - 1e-12));
            previous = s.objective;
        }
    }
}

TEST_CASE("property: analytic gradient matches central differences") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_kernel(rng, 10);
        const auto y = test::random_vector(rng, 10);
        const auto alpha = test::random_vector(rng, 10);
        const auto q = trial % 2 == 0 ? RegMatrix::identity : RegMatrix::first_difference;
        const double lambda = 0.3;
        const auto g = tikhonov::gradient(a, y, alpha, lambda, q);
        Eigen::VectorXd fd(10);
        const double h = 1e-6;
        for (Eigen::Index k = 0; k < 10; ++k) {
            Eigen::VectorXd plus = alpha;
            Eigen::VectorXd minus = alpha;
            plus(k) += h;
            minus(k) -= h;
            fd(k) = (tikhonov::objective(a, y, plus, lambda, q) - tikhonov::objective(a, y, minus, lambda, q))
                    / (2.0 * h);
        }
        CHECK((g - fd).norm() <= 1e-5 * (1.0 + (a.transpose() * y).norm()));
    }
}

TEST_CASE("property: planted coefficients are recovered without noise") {
    // Points on a unit-spaced grid with sigma = 0.5 keep A well conditioned.
    std::mt19937_64 rng(34);
    Eigen::MatrixXd pts(25, 2);
    for (Eigen::Index i = 0; i < 25; ++i) {
        pts(i, 0) = static_cast<double>(i % 5);
        pts(i, 1) = static_cast<double>(i / 5);
    }
    const auto spec = kernel::KernelSpec::gaussian(0.5);
    const auto ds0 = data::make_dataset(pts, Eigen::VectorXd::Zero(25));
    const auto a = kernel::assemble(spec, ds0).entries;
    for (int trial = 0; trial < 10; ++trial) {
        const auto planted = test::random_vector(rng, 25);
        const Eigen::VectorXd y = a * planted;
        const auto s = tikhonov::solve_tikhonov(a, y, with_lambda(1e-10));
        CHECK((s.alpha - planted).norm() / planted.norm() <= 1e-4);
    }
}

TEST_CASE("property: objective equals the explicit sum of squares") {
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = random_kernel(rng, 7);
        const auto y = test::random_vector(rng, 7);
        const auto alpha = test::random_vector(rng, 7);
        for (const auto q : {RegMatrix::identity, RegMatrix::first_difference}) {
            const auto qd = dense_q(q, 7);
            double expected = 0.0;
            for (Eigen::Index i = 0; i < 7; ++i) {
                double r = -y(i);
                for (Eigen::Index j = 0; j < 7; ++j) r += a(i, j) * alpha(j);
                expected += r * r;
            }
            expected += 0.7 * (qd * alpha).squaredNorm();
            CHECK(tikhonov::objective(a, y, alpha, 0.7, q) == doctest::Approx(expected).epsilon(1e-13));
        }
    }
}

TEST_CASE("property: apply_q and apply_qtq match dense matrices") {
    std::mt19937_64 rng(36);
    for (Eigen::Index n = 1; n <= 12; ++n) {
        const auto v = test::random_vector(rng, n);
        for (const auto q : {RegMatrix::identity, RegMatrix::first_difference}) {
            const auto qd = dense_q(q, n);
            CHECK((tikhonov::apply_q(q, v) - qd * v).norm() <= 1e-14);
            CHECK((tikhonov::apply_qtq(q, v) - qd.transpose() * qd * v).norm() <= 1e-14);
        }
    }
}
