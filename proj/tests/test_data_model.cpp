#include "d3l/dataset.hpp"
#include "d3l/errors.hpp"
#include "d3l/kernel.hpp"
#include "d3l/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

using namespace d3l;
using d3l::test::temp_dir;
using d3l::test::write_text;

TEST_CASE("load_csv parses a three-row file") {
    const auto dir = temp_dir("csv");
    write_text(dir / "a.csv", "x1,x2,y\n1,2,3\n4.5,-5,6e-1\n7,8,9\n");
    const auto ds = data::load_csv(dir / "a.csv", "y");
    CHECK(ds.size() == 3);
    CHECK(ds.dim() == 2);
    CHECK(ds.points(1, 0) == 4.5);
    CHECK(ds.points(1, 1) == -5.0);
    CHECK(ds.targets(1) == 0.6);
    CHECK(ds.feature_names == std::vector<std::string>{"x1", "x2"});
    CHECK(ds.target_bound() == 9.0);
}

TEST_CASE("load_csv reports row and column of an unparseable cell") {
    const auto dir = temp_dir("csv");
    write_text(dir / "bad.csv", "x1,x2,y\nabc,2,3\n");
    try {
        (void)data::load_csv(dir / "bad.csv", "y");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
        CHECK(e.column() == "x1");
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("\"x1\"") != std::string::npos);
    }
}

TEST_CASE("load_csv accepts a single data row") {
    const auto dir = temp_dir("csv");
    write_text(dir / "one.csv", "x,y\n0.25,1\n");
    const auto ds = data::load_csv(dir / "one.csv", "y");
    CHECK(ds.size() == 1);
    CHECK(ds.dim() == 1);
}

TEST_CASE("load_csv accepts CRLF, a byte order mark and a target column in the middle") {
    const auto dir = temp_dir("csv");
    write_text(dir / "crlf.csv", "\xEF\xBB\xBFx1,y,x2\r\n1,2,3\r\n4,5,6\r\n");
    const auto ds = data::load_csv(dir / "crlf.csv", "y");
    CHECK(ds.size() == 2);
    CHECK(ds.points(0, 1) == 3.0);
    CHECK(ds.targets(1) == 5.0);
}

TEST_CASE("load_csv error contract") {
    const auto dir = temp_dir("csv");
    CHECK_THROWS_AS((void)data::load_csv(dir / "missing.csv", "y"), InvalidArgument);
    write_text(dir / "empty.csv", "");
    CHECK_THROWS_AS((void)data::load_csv(dir / "empty.csv", "y"), ParseError);
    write_text(dir / "notarget.csv", "x1,x2\n1,2\n");
    CHECK_THROWS_AS((void)data::load_csv(dir / "notarget.csv", "y"), InvalidArgument);
    write_text(dir / "header_only.csv", "x1,y\n");
    CHECK_THROWS_AS((void)data::load_csv(dir / "header_only.csv", "y"), ParseError);
    write_text(dir / "nan.csv", "x1,y\nnan,1\n");
    CHECK_THROWS_AS((void)data::load_csv(dir / "nan.csv", "y"), ParseError);
    write_text(dir / "ragged.csv", "x1,y\n1,2,3\n");
    CHECK_THROWS_AS((void)data::load_csv(dir / "ragged.csv", "y"), ParseError);
}

TEST_CASE("write_csv then load_csv reproduces values to 15 significant digits") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> mag(-12.0, 12.0);
    const auto dir = temp_dir("roundtrip");
    for (int trial = 0; trial < 20; ++trial) {
        auto ds = test::random_dataset(rng, 7, 3);
        for (Eigen::Index i = 0; i < ds.size(); ++i) ds.targets(i) *= std::pow(10.0, mag(rng));
        data::write_csv(ds, dir / "rt.csv");
        const auto back = data::load_csv(dir / "rt.csv", "y");
        REQUIRE(back.size() == ds.size());
        for (Eigen::Index i = 0; i < ds.size(); ++i) {
            CHECK(std::abs(back.targets(i) - ds.targets(i)) <= 1e-15 * std::abs(ds.targets(i)));
            for (Eigen::Index j = 0; j < ds.dim(); ++j) {
                CHECK(std::abs(back.points(i, j) - ds.points(i, j)) <= 1e-15 * std::abs(ds.points(i, j)));
            }
        }
    }
}

TEST_CASE("dataset invariants are enforced") {
    CHECK_THROWS_AS((void)data::make_dataset(Eigen::MatrixXd(0, 1), Eigen::VectorXd(0)), InvalidArgument);
    CHECK_THROWS_AS((void)data::make_dataset(Eigen::MatrixXd::Zero(2, 1), Eigen::VectorXd::Zero(3)),
                    InvalidArgument);
    Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(2, 1);
    pts(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((void)data::make_dataset(pts, Eigen::VectorXd::Zero(2)), InvalidArgument);
}

TEST_CASE("generate is a pure function of its spec") {
    data::SyntheticSpec spec;
    spec.n = 10;
    spec.d = 2;
    spec.seed = 7;
    spec.noise_sd = 0.3;
    for (const auto gen : {data::Generator::smooth_sine, data::Generator::piecewise_linear,
                           data::Generator::kernel_planted}) {
        spec.generator = gen;
        const auto a = data::generate(spec);
        const auto b = data::generate(spec);
        CHECK(a.points == b.points);
        CHECK(a.targets == b.targets);
        auto other = spec;
        other.seed = 8;
        CHECK(data::generate(other).points != a.points);
    }
}

TEST_CASE("kernel-planted generator without noise gives y = A alpha*") {
    data::SyntheticSpec spec;
    spec.n = 25;
    spec.d = 3;
    spec.seed = 3;
    spec.generator = data::Generator::kernel_planted;
    spec.kernel = kernel::KernelSpec::gaussian(0.7);
    const auto ds = data::generate(spec);
    REQUIRE(ds.planted.has_value());
    const auto a = kernel::assemble(spec.kernel, ds);
    const Eigen::VectorXd expected = a.entries * *ds.planted;
    CHECK(ds.targets == expected);
}

TEST_CASE("smooth-sine targets match an independent implementation of the generator") {
    data::SyntheticSpec spec;
    spec.n = 100;
    spec.d = 3;
    spec.seed = 1;
    spec.noise_sd = 0.1;
    spec.generator = data::Generator::smooth_sine;
    const auto ds = data::generate(spec);

    // Oracle: same stream order (all coordinates, then noise), formula written out directly.
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::array<double, 3>> pts(100);
    for (auto& p : pts) {
        for (auto& c : p) c = unit(rng);
    }
    std::vector<double> y(100);
    for (std::size_t i = 0; i < 100; ++i) {
        y[i] = (std::sin(2 * std::numbers::pi * pts[i][0]) + std::sin(2 * std::numbers::pi * pts[i][1])
                + std::sin(2 * std::numbers::pi * pts[i][2]))
               / 3.0;
    }
    for (auto& v : y) v += 0.1 * normal(rng);

    double mean = 0.0;
    for (const double v : y) mean += v;
    mean /= 100.0;
    double var = 0.0;
    for (const double v : y) var += (v - mean) * (v - mean);
    var /= 99.0;

    const double ds_mean = ds.targets.mean();
    const double ds_var = (ds.targets.array() - ds_mean).square().sum() / 99.0;
    CHECK(ds_var == doctest::Approx(var).epsilon(1e-12));
    for (std::size_t i = 0; i < 100; ++i) CHECK(ds.targets(static_cast<Eigen::Index>(i)) == doctest::Approx(y[i]));
}

TEST_CASE("piecewise-linear generator is a tent over the coordinate mean") {
    data::SyntheticSpec spec;
    spec.n = 50;
    spec.d = 2;
    spec.generator = data::Generator::piecewise_linear;
    const auto ds = data::generate(spec);
    for (Eigen::Index i = 0; i < ds.size(); ++i) {
        const double m = 0.5 * (ds.points(i, 0) + ds.points(i, 1));
        CHECK(ds.targets(i) == doctest::Approx(1.0 - std::abs(2.0 * m - 1.0)));
    }
}

TEST_CASE("generate rejects empty sizes") {
    data::SyntheticSpec spec;
    spec.n = 0;
    CHECK_THROWS_AS((void)data::generate(spec), InvalidArgument);
    spec.n = 5;
    spec.d = 0;
    CHECK_THROWS_AS((void)data::generate(spec), InvalidArgument);
}

TEST_CASE("segmented layout makes the truncated kernel block diagonal over segments") {
    const auto spec = test::segmented_spec(60, 3, 4, 9);
    const auto ds = data::generate(spec);
    const auto a = kernel::assemble(test::truncated_gaussian(), ds).entries;
    // Segments for n = 60, p = 3, overlap 4: E = 18, 17, 17 exclusive indices.
    const std::vector<std::pair<Eigen::Index, Eigen::Index>> segs{{0, 18}, {18, 22}, {22, 39}, {39, 43}, {43, 60}};
    const auto segment_of = [&](Eigen::Index k) {
        for (std::size_t s = 0; s < segs.size(); ++s) {
            if (k >= segs[s].first && k < segs[s].second) return s;
        }
        return segs.size();
    };
    for (Eigen::Index i = 0; i < 60; ++i) {
        for (Eigen::Index j = 0; j < 60; ++j) {
            if (segment_of(i) != segment_of(j)) {
                CHECK(a(i, j) == 0.0);
            }
        }
        if (i + 1 < 60 && segment_of(i) == segment_of(i + 1)) CHECK(a(i, i + 1) > 0.0);
    }
}
