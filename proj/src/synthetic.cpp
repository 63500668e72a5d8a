#include "d3l/synthetic.hpp"

#include "d3l/decomposition.hpp"
#include "d3l/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace d3l::data {

std::string to_string(Generator g) {
    switch (g) {
    case Generator::smooth_sine: return "smooth-sine";
    case Generator::piecewise_linear: return "piecewise-linear";
    case Generator::kernel_planted: return "kernel-planted";
    }
    return "smooth-sine";
}

Generator generator_from_string(const std::string& name) {
    if (name == "smooth-sine") return Generator::smooth_sine;
    if (name == "piecewise-linear") return Generator::piecewise_linear;
    if (name == "kernel-planted") return Generator::kernel_planted;
    throw InvalidArgument("unknown generator '" + name + "'");
}

std::string to_string(Layout l) {
    return l == Layout::uniform ? "uniform" : "segmented";
}

Layout layout_from_string(const std::string& name) {
    if (name == "uniform") return Layout::uniform;
    if (name == "segmented") return Layout::segmented;
    throw InvalidArgument("unknown point layout '" + name + "'");
}

void validate(const SyntheticSpec& spec) {
    if (spec.n < 1) throw InvalidArgument("synthetic n must be >= 1");
    if (spec.d < 1) throw InvalidArgument("synthetic d must be >= 1");
    if (!(spec.noise_sd >= 0.0) || !std::isfinite(spec.noise_sd)) {
        throw InvalidArgument("noise_sd must be a finite value >= 0");
    }
    if (spec.layout == Layout::segmented) {
        if (!(spec.spacing > 0.0) || !(spec.gap > 0.0)) {
            throw InvalidArgument("segmented layout needs spacing > 0 and gap > 0");
        }
    }
    if (spec.generator == Generator::kernel_planted) kernel::validate(spec.kernel, spec.d);
}

namespace {

// Segment boundaries E_1, O_12, E_2, ..., E_p as consecutive [begin, end) pairs.
std::vector<dd::Range> segments(const SyntheticSpec& spec) {
    const auto dec = dd::uniform_decompose(spec.n, spec.segments_p, spec.segments_overlap);
    std::vector<Eigen::Index> cuts{0};
    for (int i = 0; i + 1 < dec.p(); ++i) {
        const auto ov = dec.overlap(i, i + 1);
        cuts.push_back(ov.begin);
        cuts.push_back(ov.end);
    }
    cuts.push_back(spec.n);
    std::vector<dd::Range> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) out.push_back({cuts[k], cuts[k + 1]});
    return out;
}

} // namespace

Dataset generate(const SyntheticSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    Matrix points(spec.n, spec.d);
    if (spec.layout == Layout::uniform) {
        for (Eigen::Index i = 0; i < spec.n; ++i) {
            for (Eigen::Index j = 0; j < spec.d; ++j) points(i, j) = unit(rng);
        }
    } else {
        double origin = 0.0;
        for (const auto& seg : segments(spec)) {
            for (Eigen::Index i = seg.begin; i < seg.end; ++i) {
                points(i, 0) = origin + static_cast<double>(i - seg.begin) * spec.spacing;
                for (Eigen::Index j = 1; j < spec.d; ++j) points(i, j) = unit(rng);
            }
            origin += static_cast<double>(seg.size() - 1) * spec.spacing + spec.gap;
        }
    }

    Vector targets(spec.n);
    std::optional<Vector> planted;
    switch (spec.generator) {
    case Generator::smooth_sine:
        for (Eigen::Index i = 0; i < spec.n; ++i) {
            double sum = 0.0;
            for (Eigen::Index j = 0; j < spec.d; ++j) sum += std::sin(2.0 * std::numbers::pi * points(i, j));
            targets(i) = sum / static_cast<double>(spec.d);
        }
        break;
    case Generator::piecewise_linear:
        for (Eigen::Index i = 0; i < spec.n; ++i) {
            targets(i) = 1.0 - std::abs(2.0 * points.row(i).mean() - 1.0);
        }
        break;
    case Generator::kernel_planted: {
        Vector alpha(spec.n);
        for (Eigen::Index i = 0; i < spec.n; ++i) alpha(i) = normal(rng);
        Dataset tmp;
        tmp.points = points;
        tmp.targets = Vector::Zero(spec.n);
        targets = kernel::assemble(spec.kernel, tmp).entries * alpha;
        planted = std::move(alpha);
        break;
    }
    }

    if (spec.noise_sd > 0.0) {
        for (Eigen::Index i = 0; i < spec.n; ++i) targets(i) += spec.noise_sd * normal(rng);
    }

    Dataset out = make_dataset(std::move(points), std::move(targets));
    out.planted = std::move(planted);
    return out;
}

} // namespace d3l::data
