#ifndef RISKNET_GRAPHS_HPP_
#define RISKNET_GRAPHS_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "risknet/stochmat.hpp"

namespace risknet {

using Edge = std::pair<std::size_t, std::size_t>;

// Undirected simple graph on {0,...,n-1}.
class Graph {
public:
    // Rejects self-loops, duplicate edges and out-of-range endpoints.
    Graph(std::size_t n, const std::vector<Edge>& edges);

    std::size_t n() const noexcept { return neighbors_.size(); }
    // Sorted ascending.
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_[i]; }
    std::size_t degree(std::size_t i) const { return neighbors_[i].size(); }
    std::vector<std::size_t> degrees() const;
    bool adjacent(std::size_t i, std::size_t j) const;
    std::size_t edge_count() const noexcept { return edge_count_; }
    // Each edge once as (i, j) with i < j, lexicographic order.
    std::vector<Edge> edges() const;

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    std::vector<std::vector<std::size_t>> neighbors_;
    std::size_t edge_count_ = 0;
};

enum class GraphKind { complete, ring, star, regular, erdos_renyi, barabasi_albert, watts_strogatz };

struct GraphSpec {
    GraphKind kind = GraphKind::complete;
    std::size_t n = 1;
    double p = 0.0;        // erdos_renyi
    std::size_t m = 1;     // barabasi_albert
    std::size_t d = 0;     // regular
    std::size_t k = 2;     // watts_strogatz
    double beta = 0.0;     // watts_strogatz

    static GraphSpec complete(std::size_t n) { return {GraphKind::complete, n}; }
    static GraphSpec ring(std::size_t n) { return {GraphKind::ring, n}; }
    static GraphSpec star(std::size_t n) { return {GraphKind::star, n}; }
    static GraphSpec regular(std::size_t n, std::size_t d);
    static GraphSpec erdos_renyi(std::size_t n, double p);
    static GraphSpec barabasi_albert(std::size_t n, std::size_t m);
    static GraphSpec watts_strogatz(std::size_t n, std::size_t k, double beta);
};

// Throws InvalidSpec when the parameters are out of range.
void validate(const GraphSpec& spec);

std::string to_string(GraphKind kind);
// Accepts the long names and the short aliases er, ba, ws.
GraphKind parse_graph_kind(const std::string& name);

// Deterministic in (spec, seed). Complete, ring and star ignore the seed;
// the star's center is node 0.
Graph generate(const GraphSpec& spec, std::uint64_t seed);

// 1/(d_i+1) on i and its neighbors.
SharingMatrix equal_neighbor_matrix(const Graph& g);
// D^{-1} A, or (I + D^{-1} A)/2 when lazy. Isolated nodes keep their own loss.
SharingMatrix random_walk_matrix(const Graph& g, bool lazy);
// (I + D^{-1/2} A D^{-1/2})/2. Throws IsolatedNode.
SharingMatrix lazy_symmetric_matrix(const Graph& g);
// Every agent hands its whole loss to agent 0. Requires n >= 2.
SharingMatrix naive_star_matrix(std::size_t n);

enum class MatrixRule { equal_neighbor, random_walk, lazy_random_walk };

std::string to_string(MatrixRule rule);
// Throws InvalidRule.
MatrixRule parse_matrix_rule(const std::string& name);
SharingMatrix build_matrix(const Graph& g, MatrixRule rule);

}  // namespace risknet

#endif  // RISKNET_GRAPHS_HPP_
