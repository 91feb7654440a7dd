#ifndef RISKNET_ANALYTICS_HPP_
#define RISKNET_ANALYTICS_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "risknet/stochmat.hpp"

namespace risknet {

enum class CovarianceKind { iid, equicorrelated, explicit_matrix };

// Law of the loss vector's covariance: sigma2 I, the equicorrelated
// sigma2 [(1-rho) I + rho 11^T], or an explicit PSD matrix.
class CovarianceModel {
public:
    static CovarianceModel iid(std::size_t n, double sigma2);
    // Throws RhoOutOfRange unless -1/(n-1) <= rho < 1.
    static CovarianceModel equicorrelated(std::size_t n, double sigma2, double rho);
    // Throws NotSymmetric or InvalidArgument (not PSD). Negative eigenvalue
    // dust above -1e-9 * lambda_max is clamped.
    static CovarianceModel explicit_matrix(SquareMatrix sigma);

    CovarianceKind kind() const noexcept { return kind_; }
    std::size_t n() const noexcept { return n_; }
    double sigma2() const noexcept { return sigma2_; }
    double rho() const noexcept { return rho_; }
    SquareMatrix matrix() const;

private:
    CovarianceKind kind_ = CovarianceKind::iid;
    std::size_t n_ = 0;
    double sigma2_ = 1.0;
    double rho_ = 0.0;
    SquareMatrix explicit_;
};

// Var[MX] = M Sigma M^T.
SquareMatrix covariance_transform(const SharingMatrix& m, const CovarianceModel& cov);

Vector per_agent_variance_iid(const SharingMatrix& m, double sigma2);

// Var(xi_i(lambda)) = c0 + c1 lambda + c2 lambda^2 under i.i.d. losses.
struct LambdaQuadratic {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;

    double operator()(double lambda) const { return c0 + lambda * (c1 + lambda * c2); }
};

LambdaQuadratic lambda_quadratic_agent(const SharingMatrix& p, std::size_t i, double sigma2);

// tr(M(lambda) Sigma M(lambda)^T) via the quadratic trace identity.
double trace_variance_lambda(const SharingMatrix& p, double lambda, const CovarianceModel& cov);

// Representative-agent optimum (n - tr P) / ||P - I||_F^2 projected onto
// [0,1]; 0 when P = I (variance flat in lambda).
double lambda_star_trace(const SharingMatrix& p);

// Same optimum from the spectrum of a symmetric doubly stochastic P.
// Throws NotSymmetric or NotDoublyStochastic.
double lambda_star_spectral(const SharingMatrix& p);

// Spectral formula applied to any symmetric P (e.g. the lazy normalized
// adjacency of an irregular graph). No doubly stochastic guarantee attaches.
double lambda_star_spectral_formal(const SharingMatrix& p);

// Eigenvalues of a symmetric matrix, descending. Throws NotSymmetric when
// asymmetry exceeds 1e-9.
Vector symmetric_eigenvalues(const SquareMatrix& a);

// Minimizer of sum_i w_i Var(xi_i(lambda)) projected onto [0,1].
// Throws NonPositiveWeight; 0 when the denominator vanishes.
double lambda_star_weighted(const SharingMatrix& p, std::span<const double> w);

// sigma2((1-rho) ||M_i||^2 + rho). Throws NotRowStochastic, RhoOutOfRange.
Vector equicorr_variance(const SharingMatrix& m, double sigma2, double rho);

struct InverseDegreeBounds {
    double lower = 0.0;
    double upper = 0.0;
    double exact = 0.0;
};

// degree -> count. lower = 1/(mean+1), exact = E[1/(d+1)],
// upper = P(d <= K) + 1/(K+1), unclipped. Throws EmptyInput.
InverseDegreeBounds inverse_degree_bounds(const std::map<std::size_t, std::size_t>& degree_counts,
                                          std::size_t k);
std::map<std::size_t, std::size_t> degree_histogram(std::span<const std::size_t> degrees);

// tr(C) / n.
double rep_agent_variance(const SquareMatrix& cov_of_xi);

struct HubGap {
    double top_mean = 0.0;
    double rest_mean = 0.0;
};

// Mean variance over the floor(alpha n) highest-degree nodes (ties by
// ascending index) against the rest.
HubGap hub_gap(std::span<const double> variances, std::span<const std::size_t> degrees, double alpha);

// d/dlambda Var(xi_i(lambda)) at lambda = 0: 2 sigma2 (P_ii - 1).
Vector incentive_derivatives(const SharingMatrix& p, double sigma2);

}  // namespace risknet

#endif  // RISKNET_ANALYTICS_HPP_
