#ifndef RISKNET_STOCHMAT_HPP_
#define RISKNET_STOCHMAT_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace risknet {

using Vector = std::vector<double>;

// Maps row i to column perm[i].
using Permutation = std::vector<std::size_t>;

// Dense row-major n x n matrix of reals. Used for covariance matrices and as
// scratch space; entries may be negative.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}
    SquareMatrix(std::size_t n, std::vector<double> row_major);

    static SquareMatrix identity(std::size_t n);

    std::size_t n() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }

    std::span<const double> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }
    std::span<double> row(std::size_t i) { return {a_.data() + i * n_, n_}; }
    const std::vector<double>& data() const noexcept { return a_; }

    double trace() const;
    SquareMatrix transpose() const;

    friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b);
Vector operator*(const SquareMatrix& a, std::span<const double> x);

// max_ij |a_ij - b_ij|; throws DimensionMismatch on differing sizes.
double max_abs_diff(const SquareMatrix& a, const SquareMatrix& b);

// Entrywise nonnegative square matrix with cached row and column sums.
// Immutable after construction.
class SharingMatrix {
public:
    // Entries in [-1e-12, 0) are clamped to zero; anything more negative,
    // non-finite, or an empty matrix is rejected with InvalidArgument.
    explicit SharingMatrix(SquareMatrix entries);
    SharingMatrix(std::size_t n, std::vector<double> row_major);

    std::size_t n() const noexcept { return m_.n(); }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    std::span<const double> row(std::size_t i) const { return m_.row(i); }

    const Vector& row_sums() const noexcept { return row_sums_; }
    const Vector& col_sums() const noexcept { return col_sums_; }
    const SquareMatrix& dense() const noexcept { return m_; }

private:
    SquareMatrix m_;
    Vector row_sums_;
    Vector col_sums_;
};

struct StochClass {
    bool is_row_stochastic = false;
    bool is_col_stochastic = false;
    bool is_doubly_stochastic = false;
    bool is_permutation = false;
};

inline constexpr double kDefaultClassifyTol = 1e-9;

StochClass classify(const SharingMatrix& m, double tol = kDefaultClassifyTol);

SharingMatrix identity_matrix(std::size_t n);

// J/n.
SharingMatrix averaging_operator(std::size_t n);

SharingMatrix permutation_matrix(const Permutation& perm);
bool is_bijection(const Permutation& perm);

Vector apply(const SharingMatrix& m, std::span<const double> x);

// (1 - lambda) I + lambda P.
SharingMatrix mix(double lambda, const SharingMatrix& p);

// Component i is sum_j M_ij^2.
Vector row_norms_sq(const SharingMatrix& m);

SharingMatrix operator*(const SharingMatrix& a, const SharingMatrix& b);

}  // namespace risknet

#endif  // RISKNET_STOCHMAT_HPP_
