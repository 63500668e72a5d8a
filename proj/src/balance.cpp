#include "d3l/balance.hpp"

#include "d3l/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace d3l::dd {

namespace {

void check_graph(const Graph& graph, std::size_t loads) {
    if (graph.nodes < 1) throw InvalidArgument("graph needs at least one node");
    if (loads != static_cast<std::size_t>(graph.nodes)) {
        throw InvalidArgument("got " + std::to_string(loads) + " loads for " + std::to_string(graph.nodes)
                              + " nodes");
    }
    for (const auto& [i, j] : graph.edges) {
        if (i < 0 || j < 0 || i >= graph.nodes || j >= graph.nodes || i == j) {
            throw InvalidArgument("invalid edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        }
    }
}

struct Incidence {
    int edge;
    int other;
    double sign;  // +1 if the node is the edge's first endpoint
};

std::vector<std::vector<Incidence>> incidence_lists(const Graph& graph) {
    std::vector<std::vector<Incidence>> adj(static_cast<std::size_t>(graph.nodes));
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        const auto [i, j] = graph.edges[e];
        adj[static_cast<std::size_t>(i)].push_back({static_cast<int>(e), j, 1.0});
        adj[static_cast<std::size_t>(j)].push_back({static_cast<int>(e), i, -1.0});
    }
    return adj;
}

// Breadth-first order from node 0 plus the tree edge leading to each node.
struct BfsTree {
    std::vector<int> order;
    std::vector<int> parent_edge;
};

BfsTree bfs(const Graph& graph, const std::vector<std::vector<Incidence>>& adj) {
    BfsTree tree;
    tree.parent_edge.assign(static_cast<std::size_t>(graph.nodes), -1);
    std::vector<bool> seen(static_cast<std::size_t>(graph.nodes), false);
    std::queue<int> queue;
    queue.push(0);
    seen[0] = true;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop();
        tree.order.push_back(v);
        for (const auto& inc : adj[static_cast<std::size_t>(v)]) {
            if (!seen[static_cast<std::size_t>(inc.other)]) {
                seen[static_cast<std::size_t>(inc.other)] = true;
                tree.parent_edge[static_cast<std::size_t>(inc.other)] = inc.edge;
                queue.push(inc.other);
            }
        }
    }
    if (static_cast<int>(tree.order.size()) != graph.nodes) {
        throw DisconnectedGraph("adjacency graph is disconnected: only " + std::to_string(tree.order.size()) + " of "
                                + std::to_string(graph.nodes) + " nodes reachable from node 0");
    }
    return tree;
}

} // namespace

Eigen::VectorXd diffusion_flows(const Graph& graph, const std::vector<double>& loads) {
    check_graph(graph, loads.size());
    const auto adj = incidence_lists(graph);
    (void)bfs(graph, adj);

    const auto n = graph.nodes;
    const double mean = std::accumulate(loads.begin(), loads.end(), 0.0) / n;
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
    if (n > 1) {
        // Ground node 0: the reduced Laplacian of a connected graph is SPD.
        Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
        for (const auto& [i, j] : graph.edges) {
            lap(i, i) += 1.0;
            lap(j, j) += 1.0;
            lap(i, j) -= 1.0;
            lap(j, i) -= 1.0;
        }
        Eigen::VectorXd rhs(n - 1);
        for (int k = 1; k < n; ++k) rhs(k - 1) = loads[static_cast<std::size_t>(k)] - mean;
        const Eigen::LLT<Eigen::MatrixXd> llt(lap.bottomRightCorner(n - 1, n - 1));
        phi.tail(n - 1) = llt.solve(rhs);
    }
    Eigen::VectorXd flows(static_cast<Eigen::Index>(graph.edges.size()));
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        const auto [i, j] = graph.edges[e];
        flows(static_cast<Eigen::Index>(e)) = phi(i) - phi(j);
    }
    return flows;
}

LoadSchedule balance(const Graph& graph, const std::vector<long long>& loads) {
    check_graph(graph, loads.size());
    for (const auto l : loads) {
        if (l < 0) throw InvalidArgument("loads must be nonnegative");
    }
    const std::vector<double> real_loads(loads.begin(), loads.end());
    LoadSchedule schedule;
    schedule.flows = diffusion_flows(graph, real_loads);

    // Integer targets: floor(mean), with the remainder going to the most loaded nodes.
    const auto n = static_cast<std::size_t>(graph.nodes);
    const long long total = std::accumulate(loads.begin(), loads.end(), 0LL);
    const long long base = total / graph.nodes;
    const long long remainder = total % graph.nodes;
    std::vector<std::size_t> by_load(n);
    std::iota(by_load.begin(), by_load.end(), std::size_t{0});
    std::stable_sort(by_load.begin(), by_load.end(),
                     [&](std::size_t a, std::size_t b) { return loads[a] > loads[b]; });
    std::vector<long long> target(n, base);
    for (long long k = 0; k < remainder; ++k) target[by_load[static_cast<std::size_t>(k)]] += 1;

    // Round off-tree edges, then fix tree edges bottom-up so every node hits its target.
    const auto adj = incidence_lists(graph);
    const auto tree = bfs(graph, adj);
    std::vector<long long> flow(graph.edges.size(), 0);
    std::vector<bool> is_tree(graph.edges.size(), false);
    for (const int e : tree.parent_edge) {
        if (e >= 0) is_tree[static_cast<std::size_t>(e)] = true;
    }
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        if (!is_tree[e]) flow[e] = std::llround(schedule.flows(static_cast<Eigen::Index>(e)));
    }
    for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
        const auto v = static_cast<std::size_t>(*it);
        const int up = tree.parent_edge[v];
        if (up < 0) continue;
        long long outflow = 0;
        double up_sign = 0.0;
        for (const auto& inc : adj[v]) {
            if (inc.edge == up) {
                up_sign = inc.sign;
            } else {
                outflow += static_cast<long long>(inc.sign) * flow[static_cast<std::size_t>(inc.edge)];
            }
        }
        const long long needed = loads[v] - target[v] - outflow;
        flow[static_cast<std::size_t>(up)] = up_sign > 0.0 ? needed : -needed;
    }

    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        if (flow[e] == 0) continue;
        const auto [i, j] = graph.edges[e];
        schedule.moves.push_back(flow[e] > 0 ? Move{i, j, flow[e]} : Move{j, i, -flow[e]});
    }
    schedule.resulting_sizes = std::move(target);
    return schedule;
}

LoadSchedule balance(const Decomposition& dec, const std::vector<long long>& loads) {
    return balance(dec.adjacency(), loads);
}

Decomposition apply_schedule(const Decomposition& dec, const LoadSchedule& schedule) {
    // Net downward shift of the boundary pair between i and i+1.
    std::vector<long long> shift(static_cast<std::size_t>(dec.p()), 0);
    for (const auto& m : schedule.moves) {
        if (m.from < 0 || m.to < 0 || m.from >= dec.p() || m.to >= dec.p() || std::abs(m.from - m.to) != 1) {
            throw InvalidArgument("move " + std::to_string(m.from) + " -> " + std::to_string(m.to)
                                  + " is not along an adjacency edge");
        }
        if (m.to == m.from + 1) {
            shift[static_cast<std::size_t>(m.from)] += m.count;
        } else {
            shift[static_cast<std::size_t>(m.to)] -= m.count;
        }
    }
    auto ranges = dec.subdomains();
    for (int i = 0; i + 1 < dec.p(); ++i) {
        const auto s = static_cast<Index>(shift[static_cast<std::size_t>(i)]);
        ranges[static_cast<std::size_t>(i)].end -= s;
        ranges[static_cast<std::size_t>(i) + 1].begin -= s;
    }
    for (int i = 0; i < dec.p(); ++i) {
        const auto& r = ranges[static_cast<std::size_t>(i)];
        const Index left = i > 0 ? ranges[static_cast<std::size_t>(i) - 1].end : r.begin;
        const Index right = i + 1 < dec.p() ? ranges[static_cast<std::size_t>(i) + 1].begin : r.end;
        if (right - left < 1 || r.begin < 0 || r.end > dec.n()) {
            throw SizingError("schedule would leave subdomain " + std::to_string(i)
                              + " without exclusive indices (size below overlap width + 1)");
        }
    }
    return Decomposition(dec.n(), std::move(ranges));
}

} // namespace d3l::dd
