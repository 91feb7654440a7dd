#include "risknet/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "risknet/errors.hpp"
#include "risknet/rng.hpp"

namespace risknet {

namespace {

constexpr int kRegularRetries = 1000;

std::vector<Edge> ring_lattice_edges(std::size_t n, std::size_t half_k) {
    std::vector<Edge> edges;
    for (std::size_t j = 1; j <= half_k; ++j)
        for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + j) % n);
    return edges;
}

Graph erdos_renyi(std::size_t n, double p, Stream& rng) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < p) edges.emplace_back(i, j);
    return Graph(n, edges);
}

Graph barabasi_albert(std::size_t n, std::size_t m, Stream& rng) {
    std::vector<Edge> edges;
    // Each node appears once per unit of degree, so a uniform pick from this
    // list is a degree-proportional pick.
    std::vector<std::size_t> endpoints;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            edges.emplace_back(i, j);
            endpoints.push_back(i);
            endpoints.push_back(j);
        }
    }
    std::vector<std::size_t> targets;
    for (std::size_t v = m; v < n; ++v) {
        targets.clear();
        while (targets.size() < m) {
            std::size_t t = endpoints.empty() ? rng.below(v) : endpoints[rng.below(endpoints.size())];
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
        }
        for (std::size_t t : targets) {
            edges.emplace_back(t, v);
            endpoints.push_back(t);
            endpoints.push_back(v);
        }
    }
    return Graph(n, edges);
}

Graph random_regular(std::size_t n, std::size_t d, Stream& rng) {
    if (d == 0) return Graph(n, {});
    // Stubs are paired one pair at a time; a pair that would form a loop or a
    // repeated edge is redrawn, and a stuck pairing restarts from scratch.
    for (int attempt = 0; attempt < kRegularRetries; ++attempt) {
        std::vector<std::size_t> stubs(n * d);
        for (std::size_t s = 0; s < stubs.size(); ++s) stubs[s] = s / d;
        std::unordered_set<std::uint64_t> seen;
        std::vector<Edge> edges;
        bool stuck = false;
        while (!stubs.empty() && !stuck) {
            const std::size_t limit = 50 * stubs.size();
            bool placed = false;
            for (std::size_t tries = 0; tries < limit && !placed; ++tries) {
                std::size_t i = rng.below(stubs.size());
                std::size_t j = rng.below(stubs.size() - 1);
                if (j >= i) ++j;
                const auto [a, b] = std::minmax(stubs[i], stubs[j]);
                if (a == b || seen.count(static_cast<std::uint64_t>(a) * n + b)) continue;
                seen.insert(static_cast<std::uint64_t>(a) * n + b);
                edges.emplace_back(a, b);
                if (i < j) std::swap(i, j);
                std::swap(stubs[i], stubs.back());
                stubs.pop_back();
                std::swap(stubs[j], stubs.back());
                stubs.pop_back();
                placed = true;
            }
            stuck = !placed;
        }
        if (stuck) continue;
        std::sort(edges.begin(), edges.end());
        return Graph(n, edges);
    }
    throw RegularGenerationFailure("pairing model failed " + std::to_string(kRegularRetries) +
                                   " times for n=" + std::to_string(n) + ", d=" + std::to_string(d));
}

Graph watts_strogatz(std::size_t n, std::size_t k, double beta, Stream& rng) {
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    std::vector<std::size_t> deg(n, 0);
    for (auto [a, b] : ring_lattice_edges(n, k / 2)) {
        adj[a][b] = adj[b][a] = 1;
        ++deg[a];
        ++deg[b];
    }
    for (std::size_t j = 1; j <= k / 2; ++j) {
        for (std::size_t u = 0; u < n; ++u) {
            const std::size_t v = (u + j) % n;
            if (rng.uniform() >= beta) continue;
            if (!adj[u][v] || deg[u] >= n - 1) continue;
            std::size_t w;
            do {
                w = rng.below(n);
            } while (w == u || adj[u][w]);
            adj[u][v] = adj[v][u] = 0;
            --deg[v];
            adj[u][w] = adj[w][u] = 1;
            ++deg[w];
        }
    }
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (adj[i][j]) edges.emplace_back(i, j);
    return Graph(n, edges);
}

}  // namespace

Graph::Graph(std::size_t n, const std::vector<Edge>& edges) : neighbors_(n) {
    if (n == 0) throw InvalidArgument("graph needs at least one node");
    for (auto [a, b] : edges) {
        if (a >= n || b >= n) throw InvalidArgument("edge endpoint out of range");
        if (a == b) throw InvalidArgument("self-loop at node " + std::to_string(a));
        neighbors_[a].push_back(b);
        neighbors_[b].push_back(a);
    }
    for (auto& nb : neighbors_) {
        std::sort(nb.begin(), nb.end());
        if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
            throw InvalidArgument("duplicate edge");
    }
    edge_count_ = edges.size();
}

std::vector<std::size_t> Graph::degrees() const {
    std::vector<std::size_t> d(n());
    for (std::size_t i = 0; i < n(); ++i) d[i] = degree(i);
    return d;
}

bool Graph::adjacent(std::size_t i, std::size_t j) const {
    return std::binary_search(neighbors_[i].begin(), neighbors_[i].end(), j);
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (std::size_t i = 0; i < n(); ++i)
        for (std::size_t j : neighbors_[i])
            if (i < j) out.emplace_back(i, j);
    return out;
}

GraphSpec GraphSpec::regular(std::size_t n, std::size_t d) {
    GraphSpec s{GraphKind::regular, n};
    s.d = d;
    return s;
}

GraphSpec GraphSpec::erdos_renyi(std::size_t n, double p) {
    GraphSpec s{GraphKind::erdos_renyi, n};
    s.p = p;
    return s;
}

GraphSpec GraphSpec::barabasi_albert(std::size_t n, std::size_t m) {
    GraphSpec s{GraphKind::barabasi_albert, n};
    s.m = m;
    return s;
}

GraphSpec GraphSpec::watts_strogatz(std::size_t n, std::size_t k, double beta) {
    GraphSpec s{GraphKind::watts_strogatz, n};
    s.k = k;
    s.beta = beta;
    return s;
}

void validate(const GraphSpec& spec) {
    const std::size_t n = spec.n;
    if (n == 0) throw InvalidSpec("n must be positive");
    switch (spec.kind) {
        case GraphKind::complete:
        case GraphKind::star:
            break;
        case GraphKind::ring:
            if (n < 3) throw InvalidSpec("ring needs n >= 3");
            break;
        case GraphKind::regular:
            if (spec.d >= n) throw InvalidSpec("regular degree must satisfy d < n");
            if ((spec.d * n) % 2 != 0) throw InvalidSpec("regular graph needs d*n even");
            break;
        case GraphKind::erdos_renyi:
            if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw InvalidSpec("p must lie in [0,1]");
            break;
        case GraphKind::barabasi_albert:
            if (spec.m < 1 || spec.m >= n) throw InvalidSpec("BA needs 1 <= m < n");
            break;
        case GraphKind::watts_strogatz:
            if (spec.k % 2 != 0) throw InvalidSpec("Watts-Strogatz k must be even");
            if (spec.k >= n) throw InvalidSpec("Watts-Strogatz needs k < n");
            if (!(spec.beta >= 0.0 && spec.beta <= 1.0))
                throw InvalidSpec("beta must lie in [0,1]");
            break;
    }
}

std::string to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::complete: return "complete";
        case GraphKind::ring: return "ring";
        case GraphKind::star: return "star";
        case GraphKind::regular: return "regular";
        case GraphKind::erdos_renyi: return "erdos_renyi";
        case GraphKind::barabasi_albert: return "barabasi_albert";
        case GraphKind::watts_strogatz: return "watts_strogatz";
    }
    return "unknown";
}

GraphKind parse_graph_kind(const std::string& name) {
    if (name == "complete") return GraphKind::complete;
    if (name == "ring") return GraphKind::ring;
    if (name == "star") return GraphKind::star;
    if (name == "regular") return GraphKind::regular;
    if (name == "er" || name == "erdos_renyi") return GraphKind::erdos_renyi;
    if (name == "ba" || name == "barabasi_albert") return GraphKind::barabasi_albert;
    if (name == "ws" || name == "watts_strogatz") return GraphKind::watts_strogatz;
    throw InvalidSpec("unknown graph kind '" + name + "'");
}

Graph generate(const GraphSpec& spec, std::uint64_t seed) {
    validate(spec);
    const std::size_t n = spec.n;
    Stream rng(seed);
    switch (spec.kind) {
        case GraphKind::complete: {
            std::vector<Edge> edges;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
            return Graph(n, edges);
        }
        case GraphKind::ring:
            return Graph(n, ring_lattice_edges(n, 1));
        case GraphKind::star: {
            std::vector<Edge> edges;
            for (std::size_t i = 1; i < n; ++i) edges.emplace_back(0, i);
            return Graph(n, edges);
        }
        case GraphKind::regular:
            return random_regular(n, spec.d, rng);
        case GraphKind::erdos_renyi:
            return erdos_renyi(n, spec.p, rng);
        case GraphKind::barabasi_albert:
            return barabasi_albert(n, spec.m, rng);
        case GraphKind::watts_strogatz:
            return watts_strogatz(n, spec.k, spec.beta, rng);
    }
    throw InvalidSpec("unhandled graph kind");
}

SharingMatrix equal_neighbor_matrix(const Graph& g) {
    SquareMatrix m(g.n());
    for (std::size_t i = 0; i < g.n(); ++i) {
        const double w = 1.0 / static_cast<double>(g.degree(i) + 1);
        m(i, i) = w;
        for (std::size_t j : g.neighbors(i)) m(i, j) = w;
    }
    return SharingMatrix(std::move(m));
}

SharingMatrix random_walk_matrix(const Graph& g, bool lazy) {
    SquareMatrix m(g.n());
    const double share = lazy ? 0.5 : 1.0;
    for (std::size_t i = 0; i < g.n(); ++i) {
        if (g.degree(i) == 0) {
            m(i, i) = 1.0;
            continue;
        }
        const double w = share / static_cast<double>(g.degree(i));
        for (std::size_t j : g.neighbors(i)) m(i, j) = w;
        if (lazy) m(i, i) = 0.5;
    }
    return SharingMatrix(std::move(m));
}

SharingMatrix lazy_symmetric_matrix(const Graph& g) {
    SquareMatrix m(g.n());
    for (std::size_t i = 0; i < g.n(); ++i) {
        if (g.degree(i) == 0) throw IsolatedNode("node " + std::to_string(i) + " has degree 0");
        m(i, i) = 0.5;
        for (std::size_t j : g.neighbors(i))
            m(i, j) = 0.5 / std::sqrt(static_cast<double>(g.degree(i)) *
                                      static_cast<double>(g.degree(j)));
    }
    return SharingMatrix(std::move(m));
}

SharingMatrix naive_star_matrix(std::size_t n) {
    if (n < 2) throw InvalidArgument("naive star needs n >= 2");
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(0, i) = 1.0;
    return SharingMatrix(std::move(m));
}

std::string to_string(MatrixRule rule) {
    switch (rule) {
        case MatrixRule::equal_neighbor: return "equal_neighbor";
        case MatrixRule::random_walk: return "random_walk";
        case MatrixRule::lazy_random_walk: return "lazy_random_walk";
    }
    return "unknown";
}

MatrixRule parse_matrix_rule(const std::string& name) {
    if (name == "equal_neighbor") return MatrixRule::equal_neighbor;
    if (name == "random_walk") return MatrixRule::random_walk;
    if (name == "lazy_random_walk") return MatrixRule::lazy_random_walk;
    throw InvalidRule("unknown matrix rule '" + name + "'");
}

SharingMatrix build_matrix(const Graph& g, MatrixRule rule) {
    switch (rule) {
        case MatrixRule::equal_neighbor: return equal_neighbor_matrix(g);
        case MatrixRule::random_walk: return random_walk_matrix(g, false);
        case MatrixRule::lazy_random_walk: return random_walk_matrix(g, true);
    }
    throw InvalidRule("unhandled rule");
}

}  // namespace risknet
