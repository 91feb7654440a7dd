#include "risknet/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include <Eigen/Dense>

#include "risknet/errors.hpp"

namespace risknet {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr double kZeroLine = 1e-300;
constexpr long kStallWindow = 1000;
constexpr double kStallFactor = 0.999;

using Adjacency = std::vector<std::vector<std::size_t>>;

Adjacency support_lists(const SquareMatrix& a, double threshold) {
    Adjacency adj(a.n());
    for (std::size_t i = 0; i < a.n(); ++i)
        for (std::size_t j = 0; j < a.n(); ++j)
            if (a(i, j) > threshold) adj[i].push_back(j);
    return adj;
}

// Hopcroft-Karp on an n x n bipartite graph given by row adjacency lists.
class HopcroftKarp {
public:
    explicit HopcroftKarp(const Adjacency& adj)
        : adj_(adj), n_(adj.size()), row_match_(n_, kNone), col_match_(n_, kNone), dist_(n_) {}

    std::size_t run() {
        std::size_t size = 0;
        while (bfs()) {
            it_.assign(n_, 0);
            for (std::size_t r = 0; r < n_; ++r) {
                if (row_match_[r] == kNone) {
                    if (dfs(r)) ++size;
                }
            }
        }
        return size;
    }

    const std::vector<std::size_t>& row_match() const { return row_match_; }

private:
    bool bfs() {
        std::queue<std::size_t> q;
        bool found_free = false;
        for (std::size_t r = 0; r < n_; ++r) {
            if (row_match_[r] == kNone) {
                dist_[r] = 0;
                q.push(r);
            } else {
                dist_[r] = kNone;
            }
        }
        while (!q.empty()) {
            std::size_t r = q.front();
            q.pop();
            for (std::size_t c : adj_[r]) {
                std::size_t next = col_match_[c];
                if (next == kNone) {
                    found_free = true;
                } else if (dist_[next] == kNone) {
                    dist_[next] = dist_[r] + 1;
                    q.push(next);
                }
            }
        }
        return found_free;
    }

    // Iterative layered DFS from free row `root`.
    bool dfs(std::size_t root) {
        std::vector<std::size_t> stack{root};
        std::vector<std::size_t> via;  // column used to reach stack[k+1]
        while (!stack.empty()) {
            std::size_t r = stack.back();
            bool advanced = false;
            while (it_[r] < adj_[r].size()) {
                std::size_t c = adj_[r][it_[r]++];
                std::size_t next = col_match_[c];
                if (next == kNone) {
                    // Augment along the stack.
                    via.push_back(c);
                    for (std::size_t k = 0; k < stack.size(); ++k) {
                        row_match_[stack[k]] = via[k];
                        col_match_[via[k]] = stack[k];
                    }
                    return true;
                }
                if (dist_[next] == dist_[r] + 1) {
                    stack.push_back(next);
                    via.push_back(c);
                    advanced = true;
                    break;
                }
            }
            if (!advanced) {
                dist_[r] = kNone;
                stack.pop_back();
                if (!via.empty()) via.pop_back();
            }
        }
        return false;
    }

    const Adjacency& adj_;
    std::size_t n_;
    std::vector<std::size_t> row_match_;
    std::vector<std::size_t> col_match_;
    std::vector<std::size_t> dist_;
    std::vector<std::size_t> it_;
};

// Strongly connected components (iterative Tarjan). Returns component id per vertex.
std::vector<std::size_t> strong_components(const Adjacency& g) {
    const std::size_t n = g.size();
    std::vector<std::size_t> index(n, kNone), low(n, 0), comp(n, kNone), edge_pos(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> scc_stack, call;
    std::size_t counter = 0, ncomp = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (index[s] != kNone) continue;
        call.push_back(s);
        index[s] = low[s] = counter++;
        scc_stack.push_back(s);
        on_stack[s] = true;
        while (!call.empty()) {
            std::size_t v = call.back();
            if (edge_pos[v] < g[v].size()) {
                std::size_t w = g[v][edge_pos[v]++];
                if (index[w] == kNone) {
                    index[w] = low[w] = counter++;
                    scc_stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back(w);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::size_t w;
                do {
                    w = scc_stack.back();
                    scc_stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = ncomp;
                } while (w != v);
                ++ncomp;
            }
            call.pop_back();
            if (!call.empty()) low[call.back()] = std::min(low[call.back()], low[v]);
        }
    }
    return comp;
}

// Carathéodory pruning: while the permutation matrices are affinely
// dependent, shift weight along a dependence until a term vanishes.
void reduce_terms(std::vector<BvnTerm>& terms, std::size_t n) {
    const std::size_t bound = (n - 1) * (n - 1) + 1;
    while (terms.size() > bound) {
        const auto k = static_cast<Eigen::Index>(terms.size());
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * n + 1), k);
        for (Eigen::Index r = 0; r < k; ++r) {
            const auto& perm = terms[static_cast<std::size_t>(r)].perm;
            for (std::size_t i = 0; i < n; ++i)
                a(static_cast<Eigen::Index>(i * n + perm[i]), r) = 1.0;
            a(static_cast<Eigen::Index>(n * n), r) = 1.0;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        Eigen::MatrixXd kernel = lu.kernel();
        if (kernel.cols() == 0 || kernel.col(0).norm() == 0.0) break;
        Eigen::VectorXd c = kernel.col(0);
        double step = std::numeric_limits<double>::infinity();
        for (Eigen::Index r = 0; r < k; ++r)
            if (c(r) > 1e-12) step = std::min(step, terms[static_cast<std::size_t>(r)].weight / c(r));
        if (!std::isfinite(step)) break;
        std::vector<BvnTerm> kept;
        for (Eigen::Index r = 0; r < k; ++r) {
            BvnTerm t = terms[static_cast<std::size_t>(r)];
            t.weight -= step * c(r);
            if (t.weight > 1e-15) kept.push_back(std::move(t));
        }
        if (kept.size() >= terms.size()) break;
        terms = std::move(kept);
    }
}

}  // namespace

std::optional<Permutation> perfect_matching(const SquareMatrix& a, double threshold) {
    Adjacency adj = support_lists(a, threshold);
    HopcroftKarp hk(adj);
    if (hk.run() != a.n()) return std::nullopt;
    return hk.row_match();
}

bool has_total_support(const SharingMatrix& a) {
    const std::size_t n = a.n();
    Adjacency adj = support_lists(a.dense(), 0.0);
    HopcroftKarp hk(adj);
    const bool any_positive =
        std::any_of(adj.begin(), adj.end(), [](const auto& r) { return !r.empty(); });
    if (hk.run() != n) return !any_positive;

    // Entry (i,j) with j unmatched to i lies on a positive diagonal iff row i
    // and the row matched to column j are on a common alternating cycle,
    // i.e. in the same strongly connected component of i -> rowof(j).
    const auto& match = hk.row_match();
    std::vector<std::size_t> row_of_col(n);
    for (std::size_t i = 0; i < n; ++i) row_of_col[match[i]] = i;
    Adjacency directed(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : adj[i])
            if (j != match[i]) directed[i].push_back(row_of_col[j]);
    auto comp = strong_components(directed);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : adj[i])
            if (j != match[i] && comp[i] != comp[row_of_col[j]]) return false;
    return true;
}

double stochastic_residual(const SharingMatrix& m) {
    double r = 0.0;
    for (std::size_t i = 0; i < m.n(); ++i) {
        r = std::max(r, std::abs(m.row_sums()[i] - 1.0));
        r = std::max(r, std::abs(m.col_sums()[i] - 1.0));
    }
    return r;
}

SinkhornResult sinkhorn(const SharingMatrix& a, const SinkhornOptions& options) {
    const std::size_t n = a.n();
    if (!(options.tol > 0.0)) throw InvalidArgument("Sinkhorn tolerance must be positive");
    if (options.max_iter <= 0) throw InvalidArgument("max_iter must be positive");
    for (std::size_t i = 0; i < n; ++i) {
        if (a.row_sums()[i] < kZeroLine) throw ZeroLine("row " + std::to_string(i) + " is zero");
        if (a.col_sums()[i] < kZeroLine)
            throw ZeroLine("column " + std::to_string(i) + " is zero");
    }
    if (!has_total_support(a))
        throw NoTotalSupport("a positive entry lies on no positive diagonal");

    Vector d1(n, 1.0);
    Vector d2 = options.initial_col_scaling.empty() ? Vector(n, 1.0) : options.initial_col_scaling;
    if (d2.size() != n) throw DimensionMismatch("initial column scaling has wrong length");
    for (double v : d2)
        if (!(v > 0.0) || !std::isfinite(v))
            throw InvalidArgument("initial column scaling must be positive");

    const SquareMatrix& m = a.dense();
    Vector col_acc(n);
    double residual = std::numeric_limits<double>::infinity();
    double window_start_residual = residual;
    long it = 0;
    while (it < options.max_iter) {
        // Row normalization of diag(d1) A diag(d2).
        for (std::size_t i = 0; i < n; ++i) {
            auto r = m.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += r[j] * d2[j];
            if (s < kZeroLine) throw ZeroLine("row " + std::to_string(i) + " vanished");
            d1[i] = 1.0 / s;
        }
        // Column normalization.
        std::fill(col_acc.begin(), col_acc.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto r = m.row(i);
            for (std::size_t j = 0; j < n; ++j) col_acc[j] += d1[i] * r[j];
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (col_acc[j] < kZeroLine) throw ZeroLine("column " + std::to_string(j) + " vanished");
            d2[j] = 1.0 / col_acc[j];
        }
        ++it;

        // Columns are now exact; the row sums carry the deviation.
        residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto r = m.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += r[j] * d2[j];
            residual = std::max(residual, std::abs(d1[i] * s - 1.0));
        }
        if (residual <= options.tol) break;
        if (it % kStallWindow == 0) {
            if (residual > kStallFactor * window_start_residual)
                throw NoTotalSupport("Sinkhorn iteration stalled at residual " +
                                     std::to_string(residual));
            window_start_residual = residual;
        }
    }

    SquareMatrix b(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = d1[i] * m(i, j) * d2[j];
    SharingMatrix scaled(std::move(b));
    const double final_residual = stochastic_residual(scaled);
    if (final_residual > options.tol)
        throw NoTotalSupport("no convergence within " + std::to_string(options.max_iter) +
                             " iterations, residual " + std::to_string(final_residual));
    return SinkhornResult{std::move(d1), std::move(d2), std::move(scaled), it, final_residual};
}

BvnDecomposition bvn_decompose(const SharingMatrix& d, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (!classify(d, tol).is_doubly_stochastic)
        throw NotDoublyStochastic("residual " + std::to_string(stochastic_residual(d)) +
                                  " exceeds " + std::to_string(tol));
    const std::size_t n = d.n();
    SquareMatrix rest = d.dense();
    BvnDecomposition dec;
    auto residual_mass = [&] {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (double v : rest.row(i)) s += v;
            worst = std::max(worst, s);
        }
        return worst;
    };
    while (residual_mass() >= tol) {
        auto match = perfect_matching(rest, tol);
        if (!match)
            throw MatchingFailure("residual support has no perfect matching after " +
                                  std::to_string(dec.terms.size()) + " terms");
        double w = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) w = std::min(w, rest(i, (*match)[i]));
        for (std::size_t i = 0; i < n; ++i) {
            double& v = rest(i, (*match)[i]);
            v = (v - w <= tol * 1e-3) ? 0.0 : v - w;
        }
        dec.terms.push_back({w, std::move(*match)});
    }
    reduce_terms(dec.terms, n);
    dec.residual = max_abs_diff(reconstruct(dec, n).dense(), d.dense());
    return dec;
}

SharingMatrix reconstruct(const BvnDecomposition& dec, std::size_t n) {
    if (n == 0) throw InvalidArgument("n must be >= 1");
    SquareMatrix out(n);
    for (const auto& t : dec.terms) {
        if (t.perm.size() != n) throw DimensionMismatch("permutation length differs from n");
        if (!is_bijection(t.perm)) throw InvalidArgument("term is not a permutation");
        for (std::size_t i = 0; i < n; ++i) out(i, t.perm[i]) += t.weight;
    }
    return SharingMatrix(std::move(out));
}

}  // namespace risknet
