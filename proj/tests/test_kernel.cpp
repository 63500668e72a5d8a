#include "d3l/errors.hpp"
#include "d3l/kernel.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace d3l;
using kernel::Activation;
using kernel::KernelSpec;
using kernel::LayerMap;

namespace {

LayerMap random_layer(std::mt19937_64& rng, Eigen::Index out, Eigen::Index in, Activation act) {
    return {test::random_matrix(rng, out, in), test::random_vector(rng, out), act};
}

// Scalar-loop evaluation of act(W x + b), written independently of forward().
std::vector<double> scalar_layer(const LayerMap& l, const std::vector<double>& x) {
    std::vector<double> out(static_cast<std::size_t>(l.weight.rows()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
        double s = l.bias(r);
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) s += l.weight(r, c) * x[static_cast<std::size_t>(c)];
        switch (l.activation) {
        case Activation::relu: s = std::max(0.0, s); break;
        case Activation::tanh: s = std::tanh(s); break;
        case Activation::sigmoid: s = 1.0 / (1.0 + std::exp(-s)); break;
        case Activation::identity: break;
        }
        out[static_cast<std::size_t>(r)] = s;
    }
    return out;
}

double naive_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& z, double sigma) {
    double sq = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) sq += (x(k) - z(k)) * (x(k) - z(k));
    return std::exp(-sq / (2.0 * sigma * sigma));
}

std::vector<KernelSpec> spec_menu(std::mt19937_64& rng, Eigen::Index d) {
    std::vector<KernelSpec> specs{KernelSpec::gaussian(0.8), KernelSpec::linear(), KernelSpec::polynomial(3, 1.0),
                                  KernelSpec::gaussian(0.5, 0.6)};
    auto deep = KernelSpec::gaussian(1.2);
    deep.layers.push_back(random_layer(rng, 4, d, Activation::tanh));
    deep.layers.push_back(random_layer(rng, 3, 4, Activation::relu));
    specs.push_back(deep);
    auto deep_poly = KernelSpec::polynomial(2, 0.5);
    deep_poly.layers.push_back(random_layer(rng, 2, d, Activation::sigmoid));
    specs.push_back(deep_poly);
    return specs;
}

} // namespace

TEST_CASE("forward with no layers is the identity") {
    const Eigen::Vector2d x(1.0, 2.0);
    CHECK(kernel::forward({}, x) == Eigen::VectorXd(x));
}

TEST_CASE("forward applies relu after the affine map") {
    LayerMap l{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), Activation::relu};
    const std::vector<LayerMap> layers{l};
    const auto y = kernel::forward(layers, Eigen::Vector2d(-1.0, 2.0));
    CHECK(y(0) == 0.0);
    CHECK(y(1) == 2.0);
}

TEST_CASE("two random layers match a scalar-loop evaluation") {
    std::mt19937_64 rng(5);
    for (const auto act : {Activation::relu, Activation::tanh, Activation::sigmoid, Activation::identity}) {
        const std::vector<LayerMap> layers{random_layer(rng, 3, 2, act), random_layer(rng, 2, 3, Activation::tanh)};
        const std::vector<double> x{0.5, -0.3};
        const auto expected = scalar_layer(layers[1], scalar_layer(layers[0], x));
        const auto got = kernel::forward(layers, Eigen::Vector2d(0.5, -0.3));
        REQUIRE(got.size() == 2);
        CHECK(got(0) == doctest::Approx(expected[0]).epsilon(1e-15));
        CHECK(got(1) == doctest::Approx(expected[1]).epsilon(1e-15));
    }
}

TEST_CASE("forward rejects a dimension mismatch") {
    std::mt19937_64 rng(1);
    const std::vector<LayerMap> layers{random_layer(rng, 2, 3, Activation::relu)};
    CHECK_THROWS_AS((void)kernel::forward(layers, Eigen::Vector2d(1.0, 2.0)), InvalidArgument);
}

TEST_CASE("eval_kernel closed forms") {
    const Eigen::Vector3d x(0.3, -1.0, 2.0);
    CHECK(kernel::eval_kernel(KernelSpec::gaussian(0.7), x, x) == 1.0);
    CHECK(kernel::eval_kernel(KernelSpec::linear(), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 0.0);
    // ||x - z||^2 = 2 with sigma = 1 gives exp(-1).
    const double g = kernel::eval_kernel(KernelSpec::gaussian(1.0), Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
    CHECK(g == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(g == doctest::Approx(0.367879).epsilon(1e-6));
    // (<x, z> + 1)^3 with <x, z> = 1*2 + 2*0.5 = 3.
    CHECK(kernel::eval_kernel(KernelSpec::polynomial(3, 1.0), Eigen::Vector2d(1, 2), Eigen::Vector2d(2, 0.5))
          == doctest::Approx(64.0));
    CHECK_THROWS_AS((void)kernel::eval_kernel(KernelSpec::linear(), Eigen::Vector2d(1, 0), x), InvalidArgument);
}

TEST_CASE("kernel spec validation") {
    CHECK_THROWS_AS(kernel::validate(KernelSpec::gaussian(0.0)), InvalidArgument);
    CHECK_THROWS_AS(kernel::validate(KernelSpec::polynomial(0, 0.0)), InvalidArgument);
    CHECK_THROWS_AS(kernel::validate(KernelSpec::polynomial(2, -1.0)), InvalidArgument);
    auto lin = KernelSpec::linear();
    lin.truncation_radius = 1.0;
    CHECK_THROWS_AS(kernel::validate(lin), InvalidArgument);
    CHECK_THROWS_AS(kernel::validate(KernelSpec::gaussian(1.0, -2.0)), InvalidArgument);
    auto bad = KernelSpec::gaussian(1.0);
    bad.layers.push_back({Eigen::MatrixXd::Ones(2, 2), Eigen::VectorXd::Ones(3), Activation::relu});
    CHECK_THROWS_AS(kernel::validate(bad), InvalidArgument);
    CHECK(kernel::activation_from_string(kernel::to_string(Activation::sigmoid)) == Activation::sigmoid);
    CHECK_THROWS_AS((void)kernel::outer_from_string("matern"), InvalidArgument);
}

TEST_CASE("assemble small cases") {
    const auto one = data::make_dataset(Eigen::MatrixXd::Constant(1, 2, 0.4), Eigen::VectorXd::Ones(1));
    const auto k1 = kernel::assemble(KernelSpec::gaussian(1.0), one);
    CHECK(k1.size() == 1);
    CHECK(k1.entries(0, 0) == 1.0);
    CHECK(k1.assembly_seconds >= 0.0);

    Eigen::MatrixXd pts(3, 2);
    pts << 0.1, 0.2, 0.1, 0.2, 0.9, 0.5;
    const auto dup = data::make_dataset(pts, Eigen::VectorXd::Zero(3));
    CHECK(kernel::assemble(KernelSpec::gaussian(0.3), dup).entries(0, 1) == 1.0);
}

TEST_CASE("assemble equals a naive double loop over eval_kernel") {
    std::mt19937_64 rng(11);
    const auto ds = test::random_dataset(rng, 5, 3);
    for (const auto& spec : spec_menu(rng, 3)) {
        const auto a = kernel::assemble(spec, ds).entries;
        for (Eigen::Index i = 0; i < 5; ++i) {
            for (Eigen::Index j = 0; j < 5; ++j) {
                const double ref = kernel::eval_kernel(spec, ds.points.row(i).transpose(), ds.points.row(j).transpose());
                CHECK(std::abs(a(i, j) - ref) <= 1e-14 * std::max(1.0, std::abs(ref)));
            }
        }
        // Flat gaussian checked against the closed form as well.
        if (spec.outer == kernel::Outer::gaussian && spec.layers.empty() && !spec.truncation_radius) {
            CHECK(a(1, 3) == doctest::Approx(naive_gaussian(ds.points.row(1), ds.points.row(3), spec.sigma)));
        }
    }
}

TEST_CASE("assemble_block agrees with slices of the full matrix") {
    std::mt19937_64 rng(12);
    const auto ds = test::random_dataset(rng, 9, 2);
    for (const auto& spec : spec_menu(rng, 2)) {
        const auto full = kernel::assemble(spec, ds).entries;
        std::vector<Eigen::Index> all(9);
        std::iota(all.begin(), all.end(), 0);
        CHECK(kernel::assemble_block(spec, ds, all, all) == full);

        const std::vector<Eigen::Index> one{0};
        CHECK(kernel::assemble_block(spec, ds, one, one)(0, 0) == full(0, 0));

        const std::vector<Eigen::Index> rows{7, 2, 5};
        const std::vector<Eigen::Index> cols{0, 8, 3, 1};
        const auto block = kernel::assemble_block(spec, ds, rows, cols);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < cols.size(); ++c) {
                CHECK(block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) == full(rows[r], cols[c]));
            }
        }
        CHECK(kernel::assemble_block(spec, ds, 2, 4, 5, 3) == full.block(2, 5, 4, 3));
    }
    const std::vector<Eigen::Index> bad{9};
    const std::vector<Eigen::Index> ok{0};
    CHECK_THROWS_AS((void)kernel::assemble_block(KernelSpec::linear(), ds, bad, ok), InvalidArgument);
    CHECK_THROWS_AS((void)kernel::assemble_block(KernelSpec::linear(), ds, ok, bad), InvalidArgument);
}

TEST_CASE("property: kernels are symmetric in their arguments") {
    std::mt19937_64 rng(21);
    const auto specs = spec_menu(rng, 3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = test::random_vector(rng, 3);
        const auto z = test::random_vector(rng, 3);
        for (const auto& spec : specs) CHECK(kernel::eval_kernel(spec, x, z) == kernel::eval_kernel(spec, z, x));
    }
    for (const auto& spec : specs) {
        const auto a = kernel::assemble(spec, test::random_dataset(rng, 12, 3)).entries;
        CHECK(a == a.transpose());
    }
}

TEST_CASE("property: untruncated gaussian matrices are positive semidefinite") {
    std::mt19937_64 rng(22);
    std::uniform_int_distribution<int> size(1, 20);
    for (int trial = 0; trial < 50; ++trial) {
        const auto ds = test::random_dataset(rng, size(rng), 2);
        const auto a = kernel::assemble(KernelSpec::gaussian(0.4), ds).entries;
        for (Eigen::Index i = 0; i < a.rows(); ++i) CHECK(a(i, i) == 1.0);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("property: identity layers reproduce the flat kernel exactly") {
    std::mt19937_64 rng(23);
    const auto ds = test::random_dataset(rng, 10, 3);
    for (auto spec : {KernelSpec::gaussian(0.6), KernelSpec::linear(), KernelSpec::polynomial(2, 1.0)}) {
        const auto flat = kernel::assemble(spec, ds).entries;
        spec.layers.push_back({Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3), Activation::identity});
        spec.layers.push_back({Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3), Activation::identity});
        CHECK(kernel::assemble(spec, ds).entries == flat);
    }
}

TEST_CASE("property: truncation zeroes exactly the far pairs") {
    std::mt19937_64 rng(24);
    const double r = 0.5;
    auto spec = KernelSpec::gaussian(0.7, r);
    spec.layers.push_back(random_layer(rng, 2, 2, Activation::tanh));
    auto plain = spec;
    plain.truncation_radius.reset();
    const auto ds = test::random_dataset(rng, 30, 2);
    const auto a = kernel::assemble(spec, ds).entries;
    const auto b = kernel::assemble(plain, ds).entries;
    const auto phi = kernel::features(spec.layers, ds.points);
    int zeroed = 0;
    for (Eigen::Index i = 0; i < 30; ++i) {
        for (Eigen::Index j = 0; j < 30; ++j) {
            if ((phi.row(i) - phi.row(j)).norm() > r) {
                CHECK(a(i, j) == 0.0);
                ++zeroed;
            } else {
                CHECK(a(i, j) == b(i, j));
            }
        }
    }
    CHECK(zeroed > 0);
    CHECK(a == a.transpose());
}
