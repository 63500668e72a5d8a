#include "d3l/decomposition.hpp"

#include "d3l/errors.hpp"
#include "d3l/linalg.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace d3l::dd {

namespace {

std::string range_string(const Range& r) {
    return "[" + std::to_string(r.begin) + ", " + std::to_string(r.end) + ")";
}

} // namespace

Decomposition::Decomposition(Index n, std::vector<Range> subdomains) : n_(n), subdomains_(std::move(subdomains)) {
    if (n_ < 1) throw InvalidArgument("decomposition needs N >= 1");
    if (subdomains_.empty()) throw InvalidArgument("decomposition needs at least one subdomain");
    if (subdomains_.front().begin != 0 || subdomains_.back().end != n_) {
        throw InvalidArgument("subdomains must cover [0, " + std::to_string(n_) + ")");
    }
    for (std::size_t i = 0; i < subdomains_.size(); ++i) {
        const auto& r = subdomains_[i];
        if (r.empty() || r.begin < 0 || r.end > n_) {
            throw InvalidArgument("subdomain " + std::to_string(i) + " " + range_string(r) + " is empty or out of range");
        }
        if (i + 1 < subdomains_.size()) {
            const auto& next = subdomains_[i + 1];
            if (!(next.begin > r.begin && next.end > r.end)) {
                throw InvalidArgument("subdomains must be ordered: " + range_string(r) + " then " + range_string(next));
            }
            if (next.begin >= r.end) {
                throw InvalidArgument("consecutive subdomains " + std::to_string(i) + " and " + std::to_string(i + 1)
                                      + " do not overlap");
            }
        }
        if (i + 2 < subdomains_.size() && subdomains_[i + 2].begin < r.end) {
            throw InvalidArgument("subdomains " + std::to_string(i) + " and " + std::to_string(i + 2)
                                  + " intersect; at most two subdomains may share an index");
        }
    }
}

void Decomposition::check_id(int i) const {
    if (i < 0 || i >= p()) {
        throw InvalidArgument("subdomain id " + std::to_string(i) + " outside [0, " + std::to_string(p()) + ")");
    }
}

const Range& Decomposition::subdomain(int i) const {
    check_id(i);
    return subdomains_[static_cast<std::size_t>(i)];
}

Range Decomposition::overlap(int i, int j) const {
    check_id(i);
    check_id(j);
    if (std::abs(i - j) != 1) return {};
    const auto& a = subdomain(i);
    const auto& b = subdomain(j);
    return {std::max(a.begin, b.begin), std::min(a.end, b.end)};
}

std::vector<int> Decomposition::neighbors(int i) const {
    check_id(i);
    std::vector<int> out;
    if (i > 0) out.push_back(i - 1);
    if (i + 1 < p()) out.push_back(i + 1);
    return out;
}

std::vector<std::pair<int, int>> Decomposition::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i + 1 < p(); ++i) out.emplace_back(i, i + 1);
    return out;
}

Graph Decomposition::adjacency() const {
    return {p(), edges()};
}

Index Decomposition::overlap_width() const {
    if (p() == 1) return 0;
    Index width = n_;
    for (const auto& [i, j] : edges()) width = std::min(width, overlap(i, j).size());
    return width;
}

int Decomposition::multiplicity(Index k) const {
    if (k < 0 || k >= n_) throw InvalidArgument("index " + std::to_string(k) + " outside the domain");
    int count = 0;
    for (const auto& r : subdomains_) count += r.contains(k) ? 1 : 0;
    return count;
}

Vector Decomposition::weights(int i) const {
    const auto& r = subdomain(i);
    Vector h = Vector::Ones(r.size());
    for (const int j : neighbors(i)) {
        const auto ov = overlap(i, j);
        h.segment(ov.begin - r.begin, ov.size()).setConstant(0.5);
    }
    return h;
}

Index Decomposition::exclusive_count(int i) const {
    const auto& r = subdomain(i);
    Index shared = 0;
    for (const int j : neighbors(i)) shared += overlap(i, j).size();
    return r.size() - shared;
}

Decomposition uniform_decompose(Index n, int p, Index overlap_width) {
    if (p < 1) throw InvalidArgument("number of subdomains must be >= 1");
    if (n < 1) throw InvalidArgument("domain size must be >= 1");
    if (p == 1) return Decomposition(n, {{0, n}});
    if (overlap_width < 1) throw InvalidArgument("overlap width must be >= 1 when p > 1");
    if (n < p + static_cast<Index>(p - 1) * overlap_width) {
        throw SizingError("cannot split " + std::to_string(n) + " indices into " + std::to_string(p)
                          + " subdomains with overlap " + std::to_string(overlap_width) + ": need at least "
                          + std::to_string(p + static_cast<Index>(p - 1) * overlap_width));
    }
    // Layout: E_1, O_12, E_2, O_23, ..., E_p with near-equal exclusive parts E_i.
    const Index exclusive_total = n - static_cast<Index>(p - 1) * overlap_width;
    const Index base = exclusive_total / p;
    const Index extra = exclusive_total % p;
    std::vector<Range> ranges;
    Index cursor = 0;
    for (int i = 0; i < p; ++i) {
        const Index begin = i == 0 ? 0 : cursor - overlap_width;
        cursor += base + (i < extra ? 1 : 0);
        if (i + 1 < p) cursor += overlap_width;
        ranges.push_back({begin, cursor});
    }
    return Decomposition(n, std::move(ranges));
}

Vector restrict(const Vector& w, int i, const Decomposition& dec) {
    if (w.size() != dec.n()) {
        throw InvalidArgument("vector length " + std::to_string(w.size()) + " does not match domain size "
                              + std::to_string(dec.n()));
    }
    const auto& r = dec.subdomain(i);
    return w.segment(r.begin, r.size());
}

Vector extend(const Vector& z, int i, const Decomposition& dec) {
    const auto& r = dec.subdomain(i);
    if (z.size() != r.size()) {
        throw InvalidArgument("local vector length " + std::to_string(z.size()) + " does not match subdomain "
                              + std::to_string(i) + " size " + std::to_string(r.size()));
    }
    Vector out = Vector::Zero(dec.n());
    out.segment(r.begin, r.size()) = z;
    return out;
}

Vector reconstruct(const std::vector<Vector>& locals, const Decomposition& dec) {
    if (static_cast<int>(locals.size()) != dec.p()) {
        throw InvalidArgument("expected " + std::to_string(dec.p()) + " local vectors, got "
                              + std::to_string(locals.size()));
    }
    Vector out = Vector::Zero(dec.n());
    for (int i = 0; i < dec.p(); ++i) {
        const auto& r = dec.subdomain(i);
        const auto& z = locals[static_cast<std::size_t>(i)];
        if (z.size() != r.size()) {
            throw InvalidArgument("local vector " + std::to_string(i) + " has length " + std::to_string(z.size())
                                  + ", subdomain has " + std::to_string(r.size()));
        }
        out.segment(r.begin, r.size()) += dec.weights(i).cwiseProduct(z);
    }
    return out;
}

double LocalFunctional::operator()(const Vector& v) const {
    if (v.size() != size()) {
        throw InvalidArgument("local vector length " + std::to_string(v.size()) + " does not match subdomain size "
                              + std::to_string(size()));
    }
    const Vector r = block * v - targets;
    return weights.dot(r.cwiseProduct(r)) + lambda * weights.dot(v.cwiseProduct(v));
}

Matrix LocalFunctional::normal_matrix() const {
    const Matrix scaled = weights.cwiseSqrt().asDiagonal() * block;
    return linalg::gram_plus_diagonal(scaled, lambda * weights);
}

Vector LocalFunctional::normal_rhs() const {
    return block.transpose() * weights.cwiseProduct(targets);
}

double LocalFunctional::constant() const {
    return weights.dot(targets.cwiseProduct(targets));
}

LocalFunctional restrict_functional(const Matrix& a, const Vector& y, double lambda, int i,
                                    const Decomposition& dec) {
    if (a.rows() != dec.n() || a.cols() != dec.n() || y.size() != dec.n()) {
        throw InvalidArgument("matrix/targets do not match the decomposed domain of size " + std::to_string(dec.n()));
    }
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
    const auto& r = dec.subdomain(i);
    LocalFunctional f;
    f.subdomain = i;
    f.range = r;
    f.block = a.block(r.begin, r.begin, r.size(), r.size());
    f.targets = y.segment(r.begin, r.size());
    f.weights = dec.weights(i);
    f.lambda = lambda;
    return f;
}

LocalFunctional restrict_functional(const kernel::KernelSpec& spec, const data::Dataset& data, double lambda, int i,
                                    const Decomposition& dec) {
    if (data.size() != dec.n()) {
        throw InvalidArgument("dataset size " + std::to_string(data.size()) + " does not match the decomposed domain "
                              + std::to_string(dec.n()));
    }
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
    const auto& r = dec.subdomain(i);
    LocalFunctional f;
    f.subdomain = i;
    f.range = r;
    f.block = kernel::assemble_block(spec, data, r.begin, r.size(), r.begin, r.size());
    f.targets = data.targets.segment(r.begin, r.size());
    f.weights = dec.weights(i);
    f.lambda = lambda;
    return f;
}

nlohmann::json to_json(const Decomposition& dec) {
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& r : dec.subdomains()) ranges.push_back({r.begin, r.end});
    return {{"n", dec.n()}, {"overlap_width", dec.overlap_width()}, {"subdomains", ranges}};
}

Decomposition decomposition_from_json(const nlohmann::json& j) {
    std::vector<Range> ranges;
    for (const auto& r : j.at("subdomains")) {
        ranges.push_back({r.at(0).get<Index>(), r.at(1).get<Index>()});
    }
    return Decomposition(j.at("n").get<Index>(), std::move(ranges));
}

} // namespace d3l::dd
