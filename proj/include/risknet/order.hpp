#ifndef RISKNET_ORDER_HPP_
#define RISKNET_ORDER_HPP_

#include <span>
#include <utility>
#include <vector>

#include "risknet/stochmat.hpp"

namespace risknet {

struct Atom {
    double value = 0.0;
    double prob = 0.0;
};

// Finite probability law. Atoms are sorted ascending and pairwise more than
// 1e-12 apart; probabilities sum to one within 1e-12.
class DiscreteDist {
public:
    // Sorts, merges near-equal values and validates. Throws InvalidArgument.
    explicit DiscreteDist(std::vector<Atom> atoms);

    static DiscreteDist point_mass(double value);
    // Equal weight on each value.
    static DiscreteDist uniform(std::span<const double> values);

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    double mean() const;
    double variance() const;

private:
    std::vector<Atom> atoms_;
};

// Exact law of sum_k w_k X_k with X_k i.i.d. from `marginal`, by full
// enumeration of |support|^len(w) outcomes.
DiscreteDist linear_combination_law(std::span<const double> weights, const DiscreteDist& marginal);

// True iff a is majorized by b within tol.
bool majorizes(std::span<const double> b, std::span<const double> a, double tol = 1e-9);

// Doubly stochastic D with a = D b, composed from at most n-1 T-transforms.
// Throws NotMajorized unless majorizes(b, a).
SharingMatrix hlp_transfer_matrix(std::span<const double> a, std::span<const double> b);

// E[(X - t)_+].
double stop_loss(const DiscreteDist& dist, double t);

struct CxReport {
    bool equal_means = false;
    bool dominates = false;
    // Threshold of the largest violation, or of the tightest margin when
    // there is none; gap is stop_loss(big) - stop_loss(small) there.
    double worst_threshold = 0.0;
    double worst_gap = 0.0;
};

// Decides small <=_cx big exactly via stop-loss transforms at every atom.
CxReport cx_dominates(const DiscreteDist& small, const DiscreteDist& big);

// Monte Carlo counterpart on samples: means within two standard errors,
// stop-loss gaps within three combined standard errors. Throws EmptyInput.
CxReport empirical_cx_check(std::span<const double> samples_small,
                            std::span<const double> samples_big,
                            std::span<const double> thresholds);

}  // namespace risknet

#endif  // RISKNET_ORDER_HPP_
