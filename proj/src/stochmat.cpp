#include "risknet/stochmat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "risknet/errors.hpp"

namespace risknet {

namespace {

constexpr double kNegativeDust = 1e-12;

}  // namespace

SquareMatrix::SquareMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), a_(std::move(row_major)) {
    if (a_.size() != n_ * n_) {
        throw DimensionMismatch("expected " + std::to_string(n_ * n_) + " entries, got " +
                                std::to_string(a_.size()));
    }
}

SquareMatrix SquareMatrix::identity(std::size_t n) {
    SquareMatrix id(n);
    for (std::size_t i = 0; i < n; ++i) id(i, i) = 1.0;
    return id;
}

double SquareMatrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

SquareMatrix SquareMatrix::transpose() const {
    SquareMatrix t(n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.n() != b.n()) throw DimensionMismatch("matrix product of differing sizes");
    const std::size_t n = a.n();
    SquareMatrix c(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto out = c.row(i);
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto brow = b.row(k);
            for (std::size_t j = 0; j < n; ++j) out[j] += aik * brow[j];
        }
    }
    return c;
}

Vector operator*(const SquareMatrix& a, std::span<const double> x) {
    if (x.size() != a.n()) throw DimensionMismatch("matrix-vector product of differing sizes");
    Vector y(a.n(), 0.0);
    for (std::size_t i = 0; i < a.n(); ++i) {
        auto r = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

double max_abs_diff(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.n() != b.n()) throw DimensionMismatch("comparing matrices of differing sizes");
    double worst = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k)
        worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
    return worst;
}

SharingMatrix::SharingMatrix(SquareMatrix entries) : m_(std::move(entries)) {
    const std::size_t n = m_.n();
    if (n == 0) throw InvalidArgument("sharing matrix must have n >= 1");
    row_sums_.assign(n, 0.0);
    col_sums_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double& v = m_(i, j);
            if (!std::isfinite(v)) throw InvalidArgument("non-finite entry");
            if (v < 0.0) {
                if (v < -kNegativeDust) {
                    throw InvalidArgument("negative entry " + std::to_string(v) + " at (" +
                                          std::to_string(i) + "," + std::to_string(j) + ")");
                }
                v = 0.0;
            }
            row_sums_[i] += v;
            col_sums_[j] += v;
        }
    }
}

SharingMatrix::SharingMatrix(std::size_t n, std::vector<double> row_major)
    : SharingMatrix(SquareMatrix(n, std::move(row_major))) {}

StochClass classify(const SharingMatrix& m, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("classification tolerance must be positive");
    StochClass c;
    c.is_row_stochastic = true;
    c.is_col_stochastic = true;
    for (std::size_t i = 0; i < m.n(); ++i) {
        if (std::abs(m.row_sums()[i] - 1.0) > tol) c.is_row_stochastic = false;
        if (std::abs(m.col_sums()[i] - 1.0) > tol) c.is_col_stochastic = false;
    }
    c.is_doubly_stochastic = c.is_row_stochastic && c.is_col_stochastic;
    if (c.is_doubly_stochastic) {
        c.is_permutation = true;
        for (double v : m.dense().data()) {
            if (std::abs(v) > tol && std::abs(v - 1.0) > tol) {
                c.is_permutation = false;
                break;
            }
        }
    }
    return c;
}

SharingMatrix identity_matrix(std::size_t n) {
    if (n == 0) throw InvalidArgument("n must be >= 1");
    return SharingMatrix(SquareMatrix::identity(n));
}

SharingMatrix averaging_operator(std::size_t n) {
    if (n == 0) throw InvalidArgument("averaging operator needs n >= 1");
    return SharingMatrix(SquareMatrix(n, 1.0 / static_cast<double>(n)));
}

bool is_bijection(const Permutation& perm) {
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t v : perm) {
        if (v >= perm.size() || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

SharingMatrix permutation_matrix(const Permutation& perm) {
    if (perm.empty() || !is_bijection(perm))
        throw InvalidArgument("permutation must be a bijection of {0,...,n-1}");
    SquareMatrix p(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) p(i, perm[i]) = 1.0;
    return SharingMatrix(std::move(p));
}

Vector apply(const SharingMatrix& m, std::span<const double> x) {
    return m.dense() * x;
}

SharingMatrix mix(double lambda, const SharingMatrix& p) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw InvalidArgument("mixing intensity must lie in [0,1]");
    SquareMatrix out(p.n());
    for (std::size_t i = 0; i < p.n(); ++i) {
        for (std::size_t j = 0; j < p.n(); ++j) out(i, j) = lambda * p(i, j);
        out(i, i) += 1.0 - lambda;
    }
    return SharingMatrix(std::move(out));
}

Vector row_norms_sq(const SharingMatrix& m) {
    Vector out(m.n(), 0.0);
    for (std::size_t i = 0; i < m.n(); ++i)
        for (double v : m.row(i)) out[i] += v * v;
    return out;
}

SharingMatrix operator*(const SharingMatrix& a, const SharingMatrix& b) {
    return SharingMatrix(a.dense() * b.dense());
}

}  // namespace risknet
