#pragma once

#include "d3l/dataset.hpp"
#include "d3l/kernel.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <utility>
#include <vector>

namespace d3l::dd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Half-open index range [begin, end) over the sample indices 0..N-1.
struct Range {
    Index begin = 0;
    Index end = 0;

    [[nodiscard]] Index size() const noexcept { return end > begin ? end - begin : 0; }
    [[nodiscard]] bool empty() const noexcept { return end <= begin; }
    [[nodiscard]] bool contains(Index k) const noexcept { return k >= begin && k < end; }
    friend bool operator==(const Range&, const Range&) = default;
};

/// Undirected graph on nodes 0..nodes-1.
struct Graph {
    int nodes = 0;
    std::vector<std::pair<int, int>> edges;
};

// Ordered overlapping contiguous subdomains covering {0..N-1}. Only
// consecutive subdomains may intersect, so every index is covered once or
// twice and the adjacency graph is a path.
class Decomposition {
public:
    /// Validates covering, consecutive overlap and multiplicity <= 2.
    Decomposition(Index n, std::vector<Range> subdomains);

    [[nodiscard]] Index n() const noexcept { return n_; }
    [[nodiscard]] int p() const noexcept { return static_cast<int>(subdomains_.size()); }
    [[nodiscard]] const Range& subdomain(int i) const;
    [[nodiscard]] const std::vector<Range>& subdomains() const noexcept { return subdomains_; }

    /// Omega_i ∩ Omega_j (empty when not adjacent).
    [[nodiscard]] Range overlap(int i, int j) const;
    /// Adjacent subdomain ids in increasing order.
    [[nodiscard]] std::vector<int> neighbors(int i) const;
    /// Adjacency edges (i, i+1).
    [[nodiscard]] std::vector<std::pair<int, int>> edges() const;
    [[nodiscard]] Graph adjacency() const;

    /// Smallest overlap over all edges; 0 when p = 1.
    [[nodiscard]] Index overlap_width() const;

    /// Number of subdomains covering index k (1 or 2).
    [[nodiscard]] int multiplicity(Index k) const;
    /// Partition-of-unity weights 1/multiplicity restricted to Omega_i.
    [[nodiscard]] Vector weights(int i) const;
    /// Indices of Omega_i covered by no other subdomain.
    [[nodiscard]] Index exclusive_count(int i) const;

    friend bool operator==(const Decomposition&, const Decomposition&) = default;

private:
    void check_id(int i) const;

    Index n_ = 0;
    std::vector<Range> subdomains_;
};

/// Splits n indices into p contiguous ranges whose exclusive (non-overlap)
/// parts differ in size by at most one and where consecutive ranges share
/// exactly `overlap_width` indices. Throws SizingError when
/// n < p + (p - 1) * overlap_width.
[[nodiscard]] Decomposition uniform_decompose(Index n, int p, Index overlap_width);

/// w restricted to Omega_i, in index order.
[[nodiscard]] Vector restrict(const Vector& w, int i, const Decomposition& dec);

/// z placed on Omega_i of a length-N zero vector.
[[nodiscard]] Vector extend(const Vector& z, int i, const Decomposition& dec);

/// sum_i EO_i(h_i ⊙ locals_i) with h = 1/multiplicity.
[[nodiscard]] Vector reconstruct(const std::vector<Vector>& locals, const Decomposition& dec);

// Local least-squares functional on Omega_i:
//   J_i(v) = sum_k h_k (A[k, Omega_i] v - y_k)^2 + lambda sum_k h_k v_k^2,
// k over Omega_i, h_k = 1/multiplicity(k) halving rows shared with a neighbor.
struct LocalFunctional {
    int subdomain = 0;
    Range range;
    Matrix block;     // A[Omega_i, Omega_i]
    Vector targets;   // y on Omega_i
    Vector weights;   // h on Omega_i
    double lambda = 0.0;

    [[nodiscard]] Index size() const noexcept { return range.size(); }
    [[nodiscard]] double operator()(const Vector& v) const;
    /// Half Hessian A^T W A + lambda W.
    [[nodiscard]] Matrix normal_matrix() const;
    /// A^T W y.
    [[nodiscard]] Vector normal_rhs() const;
    /// y^T W y, so J_i(v) = v^T M v - 2 b^T v + c.
    [[nodiscard]] double constant() const;
};

[[nodiscard]] LocalFunctional restrict_functional(const Matrix& a, const Vector& y, double lambda, int i,
                                                  const Decomposition& dec);

/// Same functional with the diagonal block assembled straight from the kernel.
[[nodiscard]] LocalFunctional restrict_functional(const kernel::KernelSpec& spec, const data::Dataset& data,
                                                  double lambda, int i, const Decomposition& dec);

/// {"n": N, "overlap_width": w, "subdomains": [[begin, end], ...]} with
/// 0-based half-open ranges.
[[nodiscard]] nlohmann::json to_json(const Decomposition& dec);
[[nodiscard]] Decomposition decomposition_from_json(const nlohmann::json& j);

} // namespace d3l::dd
