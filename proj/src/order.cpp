#include "risknet/order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "risknet/errors.hpp"

namespace risknet {

namespace {

constexpr double kMergeTol = 1e-12;
constexpr double kProbTol = 1e-12;
constexpr double kCxTol = 1e-10;

std::vector<double> sorted_descending(std::span<const double> x) {
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end(), std::greater<>());
    return s;
}

std::vector<std::size_t> descending_order(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] > x[j]; });
    return idx;
}

struct SampleStats {
    double mean = 0.0;
    double var = 0.0;  // unbiased; zero for a single sample
};

SampleStats stats(std::span<const double> x) {
    SampleStats s;
    double m = 0.0, m2 = 0.0;
    std::size_t k = 0;
    for (double v : x) {
        ++k;
        const double delta = v - m;
        m += delta / static_cast<double>(k);
        m2 += delta * (v - m);
    }
    s.mean = m;
    s.var = k > 1 ? m2 / static_cast<double>(k - 1) : 0.0;
    return s;
}

}  // namespace

DiscreteDist::DiscreteDist(std::vector<Atom> atoms) {
    if (atoms.empty()) throw InvalidArgument("distribution needs at least one atom");
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
    double total = 0.0;
    for (const Atom& a : atoms) {
        if (!std::isfinite(a.value) || !(a.prob > 0.0) || a.prob > 1.0 + kProbTol)
            throw InvalidArgument("atom probabilities must lie in (0,1] with finite values");
        total += a.prob;
        if (!atoms_.empty() && a.value - atoms_.back().value <= kMergeTol)
            atoms_.back().prob += a.prob;
        else
            atoms_.push_back(a);
    }
    if (std::abs(total - 1.0) > kProbTol)
        throw InvalidArgument("probabilities sum to " + std::to_string(total));
}

DiscreteDist DiscreteDist::point_mass(double value) {
    return DiscreteDist({{value, 1.0}});
}

DiscreteDist DiscreteDist::uniform(std::span<const double> values) {
    if (values.empty()) throw EmptyInput("no values");
    std::vector<Atom> atoms;
    const double p = 1.0 / static_cast<double>(values.size());
    for (double v : values) atoms.push_back({v, p});
    return DiscreteDist(std::move(atoms));
}

double DiscreteDist::mean() const {
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.prob * a.value;
    return m;
}

double DiscreteDist::variance() const {
    const double m = mean();
    double v = 0.0;
    for (const Atom& a : atoms_) v += a.prob * (a.value - m) * (a.value - m);
    return v;
}

DiscreteDist linear_combination_law(std::span<const double> weights, const DiscreteDist& marginal) {
    if (weights.empty()) throw EmptyInput("no weights");
    const auto& support = marginal.atoms();
    std::vector<Atom> outcomes{{0.0, 1.0}};
    for (double w : weights) {
        std::vector<Atom> next;
        next.reserve(outcomes.size() * support.size());
        for (const Atom& o : outcomes)
            for (const Atom& s : support) next.push_back({o.value + w * s.value, o.prob * s.prob});
        outcomes = std::move(next);
    }
    // Renormalize away rounding in the product probabilities.
    double total = 0.0;
    for (const Atom& o : outcomes) total += o.prob;
    for (Atom& o : outcomes) o.prob /= total;
    return DiscreteDist(std::move(outcomes));
}

bool majorizes(std::span<const double> b, std::span<const double> a, double tol) {
    if (a.size() != b.size()) throw DimensionMismatch("majorization needs equal lengths");
    auto as = sorted_descending(a);
    auto bs = sorted_descending(b);
    double sa = 0.0, sb = 0.0;
    for (std::size_t k = 0; k < as.size(); ++k) {
        sa += as[k];
        sb += bs[k];
        if (sa > sb + tol) return false;
    }
    return std::abs(sa - sb) <= tol;
}

SharingMatrix hlp_transfer_matrix(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("HLP needs equal lengths");
    if (a.empty()) throw EmptyInput("empty vectors");
    if (!majorizes(b, a)) throw NotMajorized("a is not majorized by b");
    const std::size_t n = a.size();
    const auto a_order = descending_order(a);
    const auto b_order = descending_order(b);
    std::vector<double> target(n), cur(n);
    for (std::size_t k = 0; k < n; ++k) {
        target[k] = a[a_order[k]];
        cur[k] = b[b_order[k]];
    }

    // Work in sorted coordinates; D_sorted accumulates T_m ... T_1.
    SquareMatrix d = SquareMatrix::identity(n);
    const double eps = 1e-14 * (1.0 + std::abs(*std::max_element(cur.begin(), cur.end())));
    for (std::size_t step = 0; step + 1 < n; ++step) {
        // j: largest index with cur > target; k: first index after j with cur < target.
        std::size_t j = n;
        for (std::size_t i = n; i-- > 0;) {
            if (cur[i] > target[i] + eps) {
                j = i;
                break;
            }
        }
        if (j == n) break;
        std::size_t k = n;
        for (std::size_t i = j + 1; i < n; ++i) {
            if (cur[i] < target[i] - eps) {
                k = i;
                break;
            }
        }
        if (k == n) break;
        const double delta = std::min(cur[j] - target[j], target[k] - cur[k]);
        const double t = delta / (cur[j] - cur[k]);
        // T = (1-t) I + t Q_jk; rows j and k of T * d.
        for (std::size_t c = 0; c < n; ++c) {
            const double rj = d(j, c), rk = d(k, c);
            d(j, c) = (1.0 - t) * rj + t * rk;
            d(k, c) = t * rj + (1.0 - t) * rk;
        }
        const double cj = cur[j], ck = cur[k];
        cur[j] = (1.0 - t) * cj + t * ck;
        cur[k] = t * cj + (1.0 - t) * ck;
        if (cur[j] - target[j] <= target[k] - cur[k]) cur[j] = target[j];
        else cur[k] = target[k];
    }

    // Back to original coordinates: a = P_a^T a_sorted, b_sorted = P_b b.
    SquareMatrix out(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) out(a_order[r], b_order[c]) = d(r, c);
    return SharingMatrix(std::move(out));
}

double stop_loss(const DiscreteDist& dist, double t) {
    double s = 0.0;
    for (const Atom& a : dist.atoms())
        if (a.value > t) s += a.prob * (a.value - t);
    return s;
}

CxReport cx_dominates(const DiscreteDist& small, const DiscreteDist& big) {
    CxReport r;
    r.equal_means = std::abs(small.mean() - big.mean()) <= kCxTol;
    std::vector<double> thresholds;
    for (const Atom& a : small.atoms()) thresholds.push_back(a.value);
    for (const Atom& a : big.atoms()) thresholds.push_back(a.value);
    std::sort(thresholds.begin(), thresholds.end());
    double worst = std::numeric_limits<double>::infinity();
    for (double t : thresholds) {
        const double gap = stop_loss(big, t) - stop_loss(small, t);
        if (gap < worst) {
            worst = gap;
            r.worst_threshold = t;
        }
    }
    r.worst_gap = worst;
    r.dominates = r.equal_means && worst >= -kCxTol;
    return r;
}

CxReport empirical_cx_check(std::span<const double> samples_small,
                            std::span<const double> samples_big,
                            std::span<const double> thresholds) {
    if (samples_small.empty() || samples_big.empty()) throw EmptyInput("empty sample set");
    const double ns = static_cast<double>(samples_small.size());
    const double nb = static_cast<double>(samples_big.size());
    const auto s = stats(samples_small);
    const auto b = stats(samples_big);
    const double mean_se = std::sqrt(s.var / ns + b.var / nb);

    CxReport r;
    r.equal_means = std::abs(s.mean - b.mean) <= 2.0 * mean_se + 1e-12;
    bool violated = false;
    double worst_score = std::numeric_limits<double>::infinity();
    std::vector<double> excess_s(samples_small.size()), excess_b(samples_big.size());
    for (double t : thresholds) {
        for (std::size_t i = 0; i < samples_small.size(); ++i)
            excess_s[i] = std::max(samples_small[i] - t, 0.0);
        for (std::size_t i = 0; i < samples_big.size(); ++i)
            excess_b[i] = std::max(samples_big[i] - t, 0.0);
        const auto es = stats(excess_s);
        const auto eb = stats(excess_b);
        const double gap = eb.mean - es.mean;
        const double se = std::sqrt(es.var / ns + eb.var / nb);
        if (gap < -3.0 * se - 1e-12) violated = true;
        // Rank thresholds by gap in units of its standard error.
        const double score = gap / (se + 1e-300);
        if (score < worst_score) {
            worst_score = score;
            r.worst_threshold = t;
            r.worst_gap = gap;
        }
    }
    r.dominates = r.equal_means && !violated;
    return r;
}

}  // namespace risknet
