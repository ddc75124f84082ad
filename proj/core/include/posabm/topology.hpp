#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "posabm/types.hpp"

namespace posabm {

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One direction of an undirected link.
struct Channel {
    NodeId sender = 0;
    NodeId receiver = 0;

    friend bool operator==(const Channel&, const Channel&) = default;
};

/// Static, simple, undirected peer graph. Each link carries two independent
/// directed channels, so channel_count() is always twice the edge count.
class PeerGraph {
public:
    using Edge = std::pair<NodeId, NodeId>;

    /// Throws TopologyError on self-loops, duplicate edges or out-of-range ids.
    PeerGraph(std::size_t node_count, std::vector<Edge> edges);

    std::size_t node_count() const { return adjacency_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    std::size_t channel_count() const { return 2 * edges_.size(); }

    /// Edges normalized to (low, high), in insertion order.
    std::span<const Edge> edges() const { return edges_; }
    /// Neighbors sorted ascending.
    std::span<const NodeId> neighbors(NodeId node) const { return adjacency_.at(node); }
    std::size_t degree(NodeId node) const { return adjacency_.at(node).size(); }
    bool adjacent(NodeId a, NodeId b) const;

    /// Channel 2k is edge k low->high, channel 2k+1 is high->low.
    Channel channel(std::size_t index) const;

    double mean_degree() const;

private:
    std::vector<Edge> edges_;
    std::vector<std::vector<NodeId>> adjacency_;
};

PeerGraph complete_graph(std::size_t n);
PeerGraph path_graph(std::size_t n);

bool is_connected(const PeerGraph& g);

/// Exact diameter via BFS from every source. Throws TopologyError when the
/// graph is disconnected.
std::size_t diameter(const PeerGraph& g);

/// Diameter around which ER graphs concentrate: ln(n) / ln(n p). The ratio is
/// base invariant. Throws std::domain_error unless n p > 1.
double predicted_diameter(std::size_t n, double p);

/// Uniform over the 2E directed channels.
Channel sample_directed_channel(const PeerGraph& g, Rng& rng);

/// Graph ensembles are pluggable; the simulator only needs a connected sample.
class GraphGenerator {
public:
    virtual ~GraphGenerator() = default;
    virtual PeerGraph generate(Rng& rng) const = 0;
};

class ErdosRenyiGenerator final : public GraphGenerator {
public:
    static constexpr int kMaxAttempts = 1000;

    ErdosRenyiGenerator(std::size_t n, double avg_degree);

    /// Resamples the whole graph until connected.
    PeerGraph generate(Rng& rng) const override;

    double link_probability() const { return p_; }

private:
    std::size_t n_;
    double avg_degree_;
    double p_;
};

/// Connected G(n, p) with p = avg_degree / (n - 1).
PeerGraph generate_er(std::size_t n, double avg_degree, Rng& rng);

/// Edge list: header "# nodes=N" then one "i j" line per edge.
void write_edge_list(std::ostream& out, const PeerGraph& g);
PeerGraph read_edge_list(std::istream& in);

}  // namespace posabm
