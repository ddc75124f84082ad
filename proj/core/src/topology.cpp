#include "posabm/topology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>

#include <fmt/format.h>

namespace posabm {

PeerGraph::PeerGraph(std::size_t node_count, std::vector<Edge> edges)
    : edges_(std::move(edges)), adjacency_(node_count) {
    for (auto& [a, b] : edges_) {
        if (a >= node_count || b >= node_count) {
            throw TopologyError(
                fmt::format("edge ({}, {}) out of range for {} nodes", a, b, node_count));
        }
        if (a == b) {
            throw TopologyError(fmt::format("self-loop at node {}", a));
        }
        if (a > b) std::swap(a, b);
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    for (NodeId v = 0; v < node_count; ++v) {
        auto& adj = adjacency_[v];
        std::sort(adj.begin(), adj.end());
        if (std::adjacent_find(adj.begin(), adj.end()) != adj.end()) {
            throw TopologyError(fmt::format("duplicate edge at node {}", v));
        }
    }
}

bool PeerGraph::adjacent(NodeId a, NodeId b) const {
    if (a >= node_count() || b >= node_count()) return false;
    const auto& adj = adjacency_[a];
    return std::binary_search(adj.begin(), adj.end(), b);
}

Channel PeerGraph::channel(std::size_t index) const {
    const auto& [low, high] = edges_.at(index / 2);
    return index % 2 == 0 ? Channel{low, high} : Channel{high, low};
}

double PeerGraph::mean_degree() const {
    if (adjacency_.empty()) return 0.0;
    return static_cast<double>(channel_count()) / static_cast<double>(node_count());
}

PeerGraph complete_graph(std::size_t n) {
    std::vector<PeerGraph::Edge> edges;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return PeerGraph(n, std::move(edges));
}

PeerGraph path_graph(std::size_t n) {
    std::vector<PeerGraph::Edge> edges;
    for (NodeId i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return PeerGraph(n, std::move(edges));
}

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

// Hop distances from `source`; kUnreached marks other components.
void bfs(const PeerGraph& g, NodeId source, std::vector<std::size_t>& dist,
         std::vector<NodeId>& queue) {
    std::fill(dist.begin(), dist.end(), kUnreached);
    queue.clear();
    dist[source] = 0;
    queue.push_back(source);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeId u = queue[head];
        for (NodeId w : g.neighbors(u)) {
            if (dist[w] == kUnreached) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
}

}  // namespace

bool is_connected(const PeerGraph& g) {
    if (g.node_count() == 0) return false;
    std::vector<std::size_t> dist(g.node_count());
    std::vector<NodeId> queue;
    bfs(g, 0, dist, queue);
    return queue.size() == g.node_count();
}

std::size_t diameter(const PeerGraph& g) {
    if (g.node_count() == 0) throw TopologyError("diameter of an empty graph is undefined");
    std::vector<std::size_t> dist(g.node_count());
    std::vector<NodeId> queue;
    std::size_t best = 0;
    for (NodeId s = 0; s < g.node_count(); ++s) {
        bfs(g, s, dist, queue);
        if (queue.size() != g.node_count()) {
            throw TopologyError("diameter is undefined: graph is disconnected");
        }
        best = std::max(best, dist[queue.back()]);
    }
    return best;
}

double predicted_diameter(std::size_t n, double p) {
    const double np = static_cast<double>(n) * p;
    if (!(np > 1.0)) {
        throw std::domain_error(
            fmt::format("ER diameter estimate needs n*p > 1 (got n={}, p={})", n, p));
    }
    return std::log(static_cast<double>(n)) / std::log(np);
}

Channel sample_directed_channel(const PeerGraph& g, Rng& rng) {
    if (g.channel_count() == 0) throw TopologyError("cannot sample a channel: graph has no edges");
    std::uniform_int_distribution<std::size_t> pick(0, g.channel_count() - 1);
    return g.channel(pick(rng));
}

ErdosRenyiGenerator::ErdosRenyiGenerator(std::size_t n, double avg_degree)
    : n_(n), avg_degree_(avg_degree) {
    if (n < 2) throw std::invalid_argument("ER graph needs at least 2 nodes");
    if (!(avg_degree > 0.0) || avg_degree > static_cast<double>(n - 1)) {
        throw std::invalid_argument(
            fmt::format("average degree must lie in (0, {}], got {}", n - 1, avg_degree));
    }
    p_ = avg_degree / static_cast<double>(n - 1);
}

PeerGraph ErdosRenyiGenerator::generate(Rng& rng) const {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::vector<PeerGraph::Edge> edges;
        for (NodeId i = 0; i < n_; ++i)
            for (NodeId j = i + 1; j < n_; ++j)
                if (coin(rng) < p_) edges.emplace_back(i, j);
        PeerGraph g(n_, std::move(edges));
        if (is_connected(g)) return g;
    }
    throw TopologyError(fmt::format(
        "no connected ER({}, p={:.4g}) sample in {} attempts; connectivity needs p above "
        "ln(N)/N = {:.4g}",
        n_, p_, kMaxAttempts, std::log(static_cast<double>(n_)) / static_cast<double>(n_)));
}

PeerGraph generate_er(std::size_t n, double avg_degree, Rng& rng) {
    return ErdosRenyiGenerator(n, avg_degree).generate(rng);
}

void write_edge_list(std::ostream& out, const PeerGraph& g) {
    out << "# nodes=" << g.node_count() << '\n';
    for (const auto& [a, b] : g.edges()) out << a << ' ' << b << '\n';
}

PeerGraph read_edge_list(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> nodes;
    std::vector<PeerGraph::Edge> edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.starts_with("#")) {
            if (auto pos = line.find("nodes="); pos != std::string::npos && !nodes) {
                nodes = std::stoul(line.substr(pos + 6));
            }
            continue;
        }
        std::istringstream fields(line);
        NodeId a = 0, b = 0;
        if (!(fields >> a >> b)) {
            throw TopologyError(fmt::format("edge list line {}: expected \"i j\"", line_no));
        }
        edges.emplace_back(a, b);
    }
    if (!nodes) throw TopologyError("edge list is missing the \"# nodes=N\" header");
    return PeerGraph(*nodes, std::move(edges));
}

}  // namespace posabm
