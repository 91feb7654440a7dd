#include "risknet/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "risknet/errors.hpp"

namespace risknet {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kStochTol = 1e-9;
constexpr double kDegenerate = 1e-14;

double project_unit(double x) { return std::clamp(x, 0.0, 1.0); }

void check_rho(std::size_t n, double rho) {
    const double lo = n > 1 ? -1.0 / static_cast<double>(n - 1) : -1.0;
    if (!(rho >= lo - 1e-15 && rho < 1.0))
        throw RhoOutOfRange("rho=" + std::to_string(rho) + " outside [-1/(n-1), 1)");
}

double max_asymmetry(const SquareMatrix& a) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.n(); ++i)
        for (std::size_t j = i + 1; j < a.n(); ++j) worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
    return worst;
}

double frobenius_sq(const SharingMatrix& p) {
    double s = 0.0;
    for (double v : p.dense().data()) s += v * v;
    return s;
}

double spectral_ratio(std::span<const double> mu) {
    double num = 0.0, den = 0.0;
    for (double m : mu) {
        num += 1.0 - m;
        den += (1.0 - m) * (1.0 - m);
    }
    if (den < kDegenerate) return 0.0;
    return project_unit(num / den);
}

}  // namespace

CovarianceModel CovarianceModel::iid(std::size_t n, double sigma2) {
    if (n == 0) throw InvalidArgument("n must be positive");
    if (!(sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
    CovarianceModel c;
    c.kind_ = CovarianceKind::iid;
    c.n_ = n;
    c.sigma2_ = sigma2;
    return c;
}

CovarianceModel CovarianceModel::equicorrelated(std::size_t n, double sigma2, double rho) {
    CovarianceModel c = iid(n, sigma2);
    check_rho(n, rho);
    c.kind_ = CovarianceKind::equicorrelated;
    c.rho_ = rho;
    return c;
}

CovarianceModel CovarianceModel::explicit_matrix(SquareMatrix sigma) {
    if (sigma.n() == 0) throw InvalidArgument("empty covariance");
    if (max_asymmetry(sigma) > kSymmetryTol) throw NotSymmetric("covariance is not symmetric");
    auto ev = symmetric_eigenvalues(sigma);
    const double top = std::max(ev.front(), 0.0);
    if (ev.back() < -1e-9 * top - 1e-300)
        throw InvalidArgument("covariance is not positive semidefinite (min eigenvalue " +
                              std::to_string(ev.back()) + ")");
    for (std::size_t i = 0; i < sigma.n(); ++i)
        for (std::size_t j = i + 1; j < sigma.n(); ++j)
            sigma(i, j) = sigma(j, i) = 0.5 * (sigma(i, j) + sigma(j, i));
    CovarianceModel c;
    c.kind_ = CovarianceKind::explicit_matrix;
    c.n_ = sigma.n();
    c.explicit_ = std::move(sigma);
    return c;
}

SquareMatrix CovarianceModel::matrix() const {
    switch (kind_) {
        case CovarianceKind::iid: {
            SquareMatrix s(n_);
            for (std::size_t i = 0; i < n_; ++i) s(i, i) = sigma2_;
            return s;
        }
        case CovarianceKind::equicorrelated: {
            SquareMatrix s(n_, sigma2_ * rho_);
            for (std::size_t i = 0; i < n_; ++i) s(i, i) = sigma2_;
            return s;
        }
        case CovarianceKind::explicit_matrix:
            return explicit_;
    }
    return {};
}

SquareMatrix covariance_transform(const SharingMatrix& m, const CovarianceModel& cov) {
    if (m.n() != cov.n()) throw DimensionMismatch("matrix and covariance sizes differ");
    const SquareMatrix& a = m.dense();
    const std::size_t n = m.n();
    SquareMatrix out(n);
    if (cov.kind() == CovarianceKind::explicit_matrix) {
        return a * cov.matrix() * a.transpose();
    }
    const double s2 = cov.sigma2();
    const double idio = cov.kind() == CovarianceKind::iid ? 1.0 : 1.0 - cov.rho();
    const double common = cov.kind() == CovarianceKind::iid ? 0.0 : cov.rho();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            auto ri = a.row(i), rj = a.row(j);
            double dot = 0.0;
            for (std::size_t k = 0; k < n; ++k) dot += ri[k] * rj[k];
            const double v = s2 * (idio * dot + common * m.row_sums()[i] * m.row_sums()[j]);
            out(i, j) = out(j, i) = v;
        }
    }
    return out;
}

Vector per_agent_variance_iid(const SharingMatrix& m, double sigma2) {
    if (!(sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
    Vector v = row_norms_sq(m);
    for (double& x : v) x *= sigma2;
    return v;
}

LambdaQuadratic lambda_quadratic_agent(const SharingMatrix& p, std::size_t i, double sigma2) {
    if (i >= p.n()) throw InvalidArgument("agent index out of range");
    const double d = p(i, i);
    double a = 0.0;
    for (double v : p.row(i)) a += v * v;
    return {sigma2, 2.0 * sigma2 * (d - 1.0), sigma2 * (1.0 + a - 2.0 * d)};
}

double trace_variance_lambda(const SharingMatrix& p, double lambda, const CovarianceModel& cov) {
    if (p.n() != cov.n()) throw DimensionMismatch("matrix and covariance sizes differ");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0,1]");
    const std::size_t n = p.n();
    double tr_sigma = 0.0, tr_p_sigma = 0.0, tr_p_sigma_pt = 0.0;
    if (cov.kind() == CovarianceKind::explicit_matrix) {
        const SquareMatrix sigma = cov.matrix();
        tr_sigma = sigma.trace();
        const SquareMatrix ps = p.dense() * sigma;
        for (std::size_t i = 0; i < n; ++i) {
            tr_p_sigma += ps(i, i);
            auto pr = p.row(i);
            auto psr = ps.row(i);
            for (std::size_t j = 0; j < n; ++j) tr_p_sigma_pt += psr[j] * pr[j];
        }
    } else {
        const double s2 = cov.sigma2();
        const double rho = cov.kind() == CovarianceKind::iid ? 0.0 : cov.rho();
        double total = 0.0, row_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += p.row_sums()[i];
            row_sq += p.row_sums()[i] * p.row_sums()[i];
        }
        tr_sigma = static_cast<double>(n) * s2;
        tr_p_sigma = s2 * ((1.0 - rho) * p.dense().trace() + rho * total);
        tr_p_sigma_pt = s2 * ((1.0 - rho) * frobenius_sq(p) + rho * row_sq);
    }
    const double l = lambda;
    return (1.0 - l) * (1.0 - l) * tr_sigma + 2.0 * l * (1.0 - l) * tr_p_sigma + l * l * tr_p_sigma_pt;
}

double lambda_star_trace(const SharingMatrix& p) {
    const std::size_t n = p.n();
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = p(i, j) - (i == j ? 1.0 : 0.0);
            den += v * v;
        }
    if (den < kDegenerate) return 0.0;
    return project_unit((static_cast<double>(n) - p.dense().trace()) / den);
}

Vector symmetric_eigenvalues(const SquareMatrix& a) {
    if (max_asymmetry(a) > kSymmetryTol) throw NotSymmetric("matrix is not symmetric");
    const auto n = static_cast<Eigen::Index>(a.n());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
            m(i, j) = 0.5 * (a(ui, uj) + a(uj, ui));
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw InvalidArgument("eigenvalue solver failed");
    Vector ev(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

double lambda_star_spectral(const SharingMatrix& p) {
    if (max_asymmetry(p.dense()) > kSymmetryTol) throw NotSymmetric("P is not symmetric");
    if (!classify(p, kStochTol).is_doubly_stochastic)
        throw NotDoublyStochastic("P is not doubly stochastic");
    auto mu = symmetric_eigenvalues(p.dense());
    // The leading eigenvalue is 1 and contributes nothing.
    return spectral_ratio(std::span<const double>(mu).subspan(1));
}

double lambda_star_spectral_formal(const SharingMatrix& p) {
    auto mu = symmetric_eigenvalues(p.dense());
    return spectral_ratio(mu);
}

double lambda_star_weighted(const SharingMatrix& p, std::span<const double> w) {
    if (w.size() != p.n()) throw DimensionMismatch("weight vector length differs from n");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < p.n(); ++i) {
        if (!(w[i] > 0.0)) throw NonPositiveWeight("weight " + std::to_string(i) + " is not positive");
        const double d = p(i, i);
        double a = 0.0;
        for (double v : p.row(i)) a += v * v;
        num += w[i] * (1.0 - d);
        den += w[i] * (1.0 + a - 2.0 * d);
    }
    if (den < kDegenerate) return 0.0;
    return project_unit(num / den);
}

Vector equicorr_variance(const SharingMatrix& m, double sigma2, double rho) {
    if (!classify(m, kStochTol).is_row_stochastic)
        throw NotRowStochastic("equicorrelated variance formula needs row sums of one");
    check_rho(m.n(), rho);
    if (!(sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
    Vector v = row_norms_sq(m);
    for (double& x : v) x = sigma2 * ((1.0 - rho) * x + rho);
    return v;
}

std::map<std::size_t, std::size_t> degree_histogram(std::span<const std::size_t> degrees) {
    std::map<std::size_t, std::size_t> h;
    for (std::size_t d : degrees) ++h[d];
    return h;
}

InverseDegreeBounds inverse_degree_bounds(const std::map<std::size_t, std::size_t>& degree_counts,
                                          std::size_t k) {
    double total = 0.0, mean = 0.0, exact = 0.0, below = 0.0;
    for (auto [d, c] : degree_counts) {
        const double cd = static_cast<double>(c);
        total += cd;
        mean += cd * static_cast<double>(d);
        exact += cd / static_cast<double>(d + 1);
        if (d <= k) below += cd;
    }
    if (total <= 0.0) throw EmptyInput("degree histogram is empty");
    mean /= total;
    return {1.0 / (mean + 1.0), below / total + 1.0 / static_cast<double>(k + 1), exact / total};
}

double rep_agent_variance(const SquareMatrix& cov_of_xi) {
    if (cov_of_xi.n() == 0) throw InvalidArgument("empty covariance");
    return cov_of_xi.trace() / static_cast<double>(cov_of_xi.n());
}

HubGap hub_gap(std::span<const double> variances, std::span<const std::size_t> degrees, double alpha) {
    if (variances.size() != degrees.size()) throw DimensionMismatch("variances and degrees differ in length");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0,1)");
    const std::size_t n = variances.size();
    const auto top = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n)));
    if (top == 0) throw InvalidArgument("alpha selects no hubs");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return degrees[a] > degrees[b]; });
    HubGap g;
    for (std::size_t r = 0; r < n; ++r) (r < top ? g.top_mean : g.rest_mean) += variances[order[r]];
    g.top_mean /= static_cast<double>(top);
    g.rest_mean /= static_cast<double>(n - top);
    return g;
}

Vector incentive_derivatives(const SharingMatrix& p, double sigma2) {
    Vector out(p.n());
    for (std::size_t i = 0; i < p.n(); ++i) out[i] = 2.0 * sigma2 * (p(i, i) - 1.0);
    return out;
}

}  // namespace risknet
