#pragma once

#include "d3l/decomposition.hpp"

#include <Eigen/Dense>

#include <vector>

namespace d3l::dd {

/// Signed migration along one edge: positive moves `count` observations from
/// `from` to `to`.
struct Move {
    int from = 0;
    int to = 0;
    long long count = 0;

    friend bool operator==(const Move&, const Move&) = default;
};

struct LoadSchedule {
    std::vector<Move> moves;              // nonzero integer flows only
    std::vector<long long> resulting_sizes;
    Eigen::VectorXd flows;                // real-valued flow per graph edge, before rounding
};

/// Minimum-Euclidean-norm edge flows f with B f = loads - mean(loads), where
/// B is the node-edge incidence matrix (+1 at the first endpoint). f_e > 0
/// means edge e = (i, j) carries load from i to j. Solved through the
/// grounded graph Laplacian. Throws DisconnectedGraph.
[[nodiscard]] Eigen::VectorXd diffusion_flows(const Graph& graph, const std::vector<double>& loads);

/// Diffusion flows rounded to integers while conserving the total exactly:
/// every resulting size is floor(mean) or ceil(mean).
[[nodiscard]] LoadSchedule balance(const Graph& graph, const std::vector<long long>& loads);

/// Balance over the decomposition's adjacency graph.
[[nodiscard]] LoadSchedule balance(const Decomposition& dec, const std::vector<long long>& loads);

/// Shifts shared boundaries: a move of c from i to i+1 moves both ends of
/// the overlap Omega_{i,i+1} down by c, and a move from i+1 to i moves them
/// up. Throws SizingError when a subdomain would keep fewer than one
/// exclusive index.
[[nodiscard]] Decomposition apply_schedule(const Decomposition& dec, const LoadSchedule& schedule);

} // namespace d3l::dd
