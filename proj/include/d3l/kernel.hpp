#pragma once

#include "d3l/dataset.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace d3l::kernel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Activation { relu, tanh, sigmoid, identity };

[[nodiscard]] std::string to_string(Activation a);
[[nodiscard]] Activation activation_from_string(const std::string& name);

/// One fixed layer x -> act(W x + b). Layers are configuration, never trained.
struct LayerMap {
    Matrix weight;  // out x in
    Vector bias;    // out
    Activation activation = Activation::identity;

    [[nodiscard]] Index in_dim() const noexcept { return weight.cols(); }
    [[nodiscard]] Index out_dim() const noexcept { return weight.rows(); }
};

enum class Outer { gaussian, linear, polynomial };

[[nodiscard]] std::string to_string(Outer o);
[[nodiscard]] Outer outer_from_string(const std::string& name);

struct KernelSpec {
    Outer outer = Outer::gaussian;
    double sigma = 1.0;   // gaussian bandwidth
    int degree = 2;       // polynomial
    double offset = 0.0;  // polynomial
    std::vector<LayerMap> layers;
    /// Gaussian only: entries with feature distance > radius are zeroed.
    std::optional<double> truncation_radius;

    [[nodiscard]] static KernelSpec gaussian(double sigma, std::optional<double> radius = std::nullopt);
    [[nodiscard]] static KernelSpec linear();
    [[nodiscard]] static KernelSpec polynomial(int degree, double offset);
};

/// Throws InvalidArgument if the kernel description violates its invariants. When
/// `input_dim` is given the layer chain is also checked against it.
void validate(const KernelSpec& spec, std::optional<Index> input_dim = std::nullopt);

/// Applies every layer in order; an empty stack returns x unchanged.
[[nodiscard]] Vector forward(std::span<const LayerMap> layers, const Vector& x);

/// Row-wise forward() of a whole point matrix.
[[nodiscard]] Matrix features(std::span<const LayerMap> layers, const Matrix& points);

/// Outer kernel on already-transformed feature vectors.
template <typename U, typename V>
[[nodiscard]] double outer_value(const KernelSpec& spec, const Eigen::MatrixBase<U>& u,
                                 const Eigen::MatrixBase<V>& v) {
    switch (spec.outer) {
    case Outer::gaussian: {
        double sq = 0.0;
        for (Index k = 0; k < u.size(); ++k) {
            const double diff = u(k) - v(k);
            sq += diff * diff;
        }
        if (spec.truncation_radius && sq > *spec.truncation_radius * *spec.truncation_radius) {
            return 0.0;
        }
        return std::exp(-sq / (2.0 * spec.sigma * spec.sigma));
    }
    case Outer::linear: {
        double dot = 0.0;
        for (Index k = 0; k < u.size(); ++k) dot += u(k) * v(k);
        return dot;
    }
    case Outer::polynomial: {
        double dot = 0.0;
        for (Index k = 0; k < u.size(); ++k) dot += u(k) * v(k);
        return std::pow(dot + spec.offset, spec.degree);
    }
    }
    return 0.0;
}

/// K(phi(x), phi(z)).
[[nodiscard]] double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& z);

struct KernelMatrix {
    Matrix entries;
    KernelSpec spec;
    double assembly_seconds = 0.0;

    [[nodiscard]] Index size() const noexcept { return entries.rows(); }
};

/// Dense N x N kernel matrix; each unordered pair is evaluated once and mirrored.
[[nodiscard]] KernelMatrix assemble(const KernelSpec& spec, const data::Dataset& data);

/// A[rows, cols] computed directly, without the full matrix.
[[nodiscard]] Matrix assemble_block(const KernelSpec& spec, const data::Dataset& data,
                                    std::span<const Index> rows, std::span<const Index> cols);

/// Contiguous-range convenience: rows [r0, r0+nr), cols [c0, c0+nc).
[[nodiscard]] Matrix assemble_block(const KernelSpec& spec, const data::Dataset& data,
                                    Index r0, Index nr, Index c0, Index nc);

} // namespace d3l::kernel
