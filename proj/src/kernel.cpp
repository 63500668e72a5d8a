#include "d3l/kernel.hpp"

#include "d3l/errors.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace d3l::kernel {

namespace {

double activate(Activation a, double v) {
    switch (a) {
    case Activation::relu: return v > 0.0 ? v : 0.0;
    case Activation::tanh: return std::tanh(v);
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-v));
    case Activation::identity: return v;
    }
    return v;
}

void check_indices(std::span<const Index> idx, Index n, const char* which) {
    for (const auto k : idx) {
        if (k < 0 || k >= n) {
            throw InvalidArgument(std::string(which) + " index " + std::to_string(k) + " outside [0, "
                                  + std::to_string(n) + ")");
        }
    }
}

} // namespace

std::string to_string(Activation a) {
    switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "identity") return Activation::identity;
    throw InvalidArgument("unknown activation '" + name + "'");
}

std::string to_string(Outer o) {
    switch (o) {
    case Outer::gaussian: return "gaussian";
    case Outer::linear: return "linear";
    case Outer::polynomial: return "polynomial";
    }
    return "gaussian";
}

Outer outer_from_string(const std::string& name) {
    if (name == "gaussian") return Outer::gaussian;
    if (name == "linear") return Outer::linear;
    if (name == "polynomial") return Outer::polynomial;
    throw InvalidArgument("unknown outer kernel '" + name + "'");
}

KernelSpec KernelSpec::gaussian(double sigma, std::optional<double> radius) {
    KernelSpec spec;
    spec.outer = Outer::gaussian;
    spec.sigma = sigma;
    spec.truncation_radius = radius;
    return spec;
}

KernelSpec KernelSpec::linear() {
    KernelSpec spec;
    spec.outer = Outer::linear;
    return spec;
}

KernelSpec KernelSpec::polynomial(int degree, double offset) {
    KernelSpec spec;
    spec.outer = Outer::polynomial;
    spec.degree = degree;
    spec.offset = offset;
    return spec;
}

void validate(const KernelSpec& spec, std::optional<Index> input_dim) {
    if (spec.outer == Outer::gaussian && !(spec.sigma > 0.0 && std::isfinite(spec.sigma))) {
        throw InvalidArgument("gaussian kernel needs sigma > 0");
    }
    if (spec.outer == Outer::polynomial && (spec.degree < 1 || !(spec.offset >= 0.0))) {
        throw InvalidArgument("polynomial kernel needs degree >= 1 and offset >= 0");
    }
    if (spec.truncation_radius) {
        if (spec.outer != Outer::gaussian) {
            throw InvalidArgument("truncation is only valid with the gaussian outer kernel");
        }
        if (!(*spec.truncation_radius > 0.0)) {
            throw InvalidArgument("truncation radius must be > 0");
        }
    }
    std::optional<Index> dim = input_dim;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const auto& layer = spec.layers[l];
        if (layer.bias.size() != layer.weight.rows() || layer.weight.size() == 0) {
            throw InvalidArgument("layer " + std::to_string(l) + ": weight is "
                                  + std::to_string(layer.weight.rows()) + "x" + std::to_string(layer.weight.cols())
                                  + " but bias has " + std::to_string(layer.bias.size()) + " entries");
        }
        if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
            throw InvalidArgument("layer " + std::to_string(l) + " has non-finite entries");
        }
        if (dim && *dim != layer.in_dim()) {
            throw InvalidArgument("layer " + std::to_string(l) + " expects input dimension "
                                  + std::to_string(layer.in_dim()) + ", got " + std::to_string(*dim));
        }
        dim = layer.out_dim();
    }
}

Vector forward(std::span<const LayerMap> layers, const Vector& x) {
    Vector h = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (h.size() != layer.in_dim()) {
            throw InvalidArgument("layer " + std::to_string(l) + " expects input dimension "
                                  + std::to_string(layer.in_dim()) + ", got " + std::to_string(h.size()));
        }
        Vector next = layer.weight * h + layer.bias;
        for (Index k = 0; k < next.size(); ++k) next(k) = activate(layer.activation, next(k));
        h = std::move(next);
    }
    return h;
}

Matrix features(std::span<const LayerMap> layers, const Matrix& points) {
    if (layers.empty()) return points;
    Matrix out(points.rows(), layers.back().out_dim());
    for (Index i = 0; i < points.rows(); ++i) {
        out.row(i) = forward(layers, points.row(i).transpose()).transpose();
    }
    return out;
}

double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& z) {
    if (x.size() != z.size()) {
        throw InvalidArgument("kernel arguments have dimensions " + std::to_string(x.size()) + " and "
                              + std::to_string(z.size()));
    }
    const Vector u = forward(spec.layers, x);
    const Vector v = forward(spec.layers, z);
    return outer_value(spec, u, v);
}

KernelMatrix assemble(const KernelSpec& spec, const data::Dataset& data) {
    const auto start = std::chrono::steady_clock::now();
    validate(spec, data.dim());
    const Index n = data.size();
    if (n < 1) throw InvalidArgument("cannot assemble a kernel matrix of an empty dataset");

    // Row-major features keep each sample contiguous for the pair loop.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> phi =
        features(spec.layers, data.points);

    KernelMatrix km;
    km.spec = spec;
    km.entries.resize(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = j; i < n; ++i) {
            const double value = outer_value(spec, phi.row(i), phi.row(j));
            km.entries(i, j) = value;
            km.entries(j, i) = value;
        }
    }
    km.assembly_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return km;
}

Matrix assemble_block(const KernelSpec& spec, const data::Dataset& data, std::span<const Index> rows,
                      std::span<const Index> cols) {
    validate(spec, data.dim());
    check_indices(rows, data.size(), "row");
    check_indices(cols, data.size(), "column");

    const auto row_count = static_cast<Index>(rows.size());
    const auto col_count = static_cast<Index>(cols.size());
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> phi_rows(
        row_count, spec.layers.empty() ? data.dim() : spec.layers.back().out_dim());
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> phi_cols(col_count, phi_rows.cols());
    for (Index i = 0; i < row_count; ++i) {
        phi_rows.row(i) = forward(spec.layers, data.points.row(rows[i]).transpose()).transpose();
    }
    for (Index j = 0; j < col_count; ++j) {
        phi_cols.row(j) = forward(spec.layers, data.points.row(cols[j]).transpose()).transpose();
    }
    Matrix block(row_count, col_count);
    for (Index j = 0; j < col_count; ++j) {
        for (Index i = 0; i < row_count; ++i) {
            block(i, j) = outer_value(spec, phi_rows.row(i), phi_cols.row(j));
        }
    }
    return block;
}

Matrix assemble_block(const KernelSpec& spec, const data::Dataset& data, Index r0, Index nr, Index c0, Index nc) {
    std::vector<Index> rows(static_cast<std::size_t>(std::max<Index>(nr, 0)));
    std::vector<Index> cols(static_cast<std::size_t>(std::max<Index>(nc, 0)));
    std::iota(rows.begin(), rows.end(), r0);
    std::iota(cols.begin(), cols.end(), c0);
    return assemble_block(spec, data, rows, cols);
}

} // namespace d3l::kernel
