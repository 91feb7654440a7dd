#ifndef RISKNET_SCALING_HPP_
#define RISKNET_SCALING_HPP_

#include <optional>
#include <vector>

#include "risknet/stochmat.hpp"

namespace risknet {

// Perfect matching on the bipartite graph {(i,j) : A_ij > threshold}
// (Hopcroft-Karp). Returns row -> column, or nullopt when none exists.
std::optional<Permutation> perfect_matching(const SquareMatrix& a, double threshold = 0.0);

// True iff every positive entry of A lies on a positive diagonal.
bool has_total_support(const SharingMatrix& a);

struct SinkhornOptions {
    double tol = 1e-10;
    long max_iter = 100000;
    // Column scaling applied before the first row normalization; all ones
    // when empty. Different starts must reach the same B for positive A.
    Vector initial_col_scaling;
};

struct SinkhornResult {
    Vector d1;  // row scaling
    Vector d2;  // column scaling
    SharingMatrix b;
    long iterations = 0;
    double max_residual = 0.0;
};

// Alternating row/column normalization. B = diag(d1) A diag(d2).
// Throws ZeroLine for an all-zero row or column and NoTotalSupport when no
// doubly stochastic scaling exists or the iteration stalls.
SinkhornResult sinkhorn(const SharingMatrix& a, const SinkhornOptions& options = {});

// Largest |row sum - 1| or |column sum - 1|.
double stochastic_residual(const SharingMatrix& m);

struct BvnTerm {
    double weight = 0.0;
    Permutation perm;
};

struct BvnDecomposition {
    std::vector<BvnTerm> terms;
    // max entrywise |D - sum_r w_r P_r|
    double residual = 0.0;
};

// Greedy Birkhoff extraction. Throws NotDoublyStochastic if D is not DS
// within tol, MatchingFailure if the residual loses its perfect matching.
BvnDecomposition bvn_decompose(const SharingMatrix& d, double tol = 1e-9);

SharingMatrix reconstruct(const BvnDecomposition& dec, std::size_t n);

}  // namespace risknet

#endif  // RISKNET_SCALING_HPP_
