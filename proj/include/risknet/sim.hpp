#ifndef RISKNET_SIM_HPP_
#define RISKNET_SIM_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "risknet/analytics.hpp"
#include "risknet/graphs.hpp"
#include "risknet/rng.hpp"
#include "risknet/stochmat.hpp"

namespace risknet {

enum class LossFamily { exponential, gaussian, equicorrelated_gaussian };

struct LossModel {
    LossFamily family = LossFamily::exponential;
    std::size_t n = 1;
    double rate = 1.0;    // exponential
    double mean = 0.0;    // gaussian families
    double sigma2 = 1.0;  // gaussian families
    double rho = 0.0;     // equicorrelated

    static LossModel exponential(std::size_t n, double rate = 1.0);
    static LossModel gaussian(std::size_t n, double mean, double sigma2);
    static LossModel equicorrelated_gaussian(std::size_t n, double mean, double sigma2, double rho);

    double expected_value() const;
    double variance() const;
    // Covariance of the loss vector for closed-form overlays.
    CovarianceModel covariance() const;
};

// Throws InvalidArgument or RhoOutOfRange.
void validate(const LossModel& model);
std::string to_string(LossFamily family);
LossFamily parse_loss_family(const std::string& name);

// One loss vector. Equicorrelated draws use mean + sigma (sqrt(rho) Z0 +
// sqrt(1-rho) Z_i) for rho >= 0, and centered idiosyncratic terms plus a
// scaled common term for rho < 0.
void draw_losses(const LossModel& model, Stream& rng, std::span<double> out);
Vector draw_losses(const LossModel& model, Stream& rng);

struct SimReport {
    Vector per_node_mean;
    Vector per_node_var;  // unbiased, divisor B-1
    // std/mean; NaN when |mean| < 1e-12 (e.g. naive-star leaves).
    Vector per_node_cv;
    double trace_var = 0.0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    double elapsed_ms = 0.0;
};

// Replication b draws its losses from Stream(seed, "loss", b); the result is
// bit-identical for any thread count (0 = hardware concurrency).
SimReport simulate_fixed(const SharingMatrix& m, const LossModel& model, std::size_t replications,
                         std::uint64_t seed, unsigned threads = 0);

struct DegreeBin {
    std::size_t count = 0;
    double mean_var = 0.0;
};

struct TwoLayerReport {
    std::map<std::size_t, DegreeBin> degree_bins;
    // Law of total variance on the pooled R*B sample, summed over nodes:
    // total = within_graph + between_graph.
    double within_graph = 0.0;
    double between_graph = 0.0;
    double total = 0.0;
    // Mean over replications of the cross-node q90 - q10 range of variances.
    double spread_q90_q10 = 0.0;
    Vector spreads;  // per replication
    std::size_t graphs = 0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    double elapsed_ms = 0.0;
};

// Graph r is generated from derive_seed(seed, "graph", r) and its losses
// from derive_seed(seed, "losses", r).
TwoLayerReport simulate_two_layer(const GraphSpec& spec, MatrixRule rule, const LossModel& model,
                                  std::size_t graphs, std::size_t replications, std::uint64_t seed,
                                  unsigned threads = 0);

struct CurvePoint {
    double param = 0.0;
    double trace_var = 0.0;
    double closed_form = 0.0;  // lambda_sweep only
};

// trace Var(D(alpha) M X) with D(alpha) = alpha I + (1-alpha) J/n, using the
// same loss draws at every alpha.
std::vector<CurvePoint> post_mix_sweep(const SharingMatrix& m, std::span<const double> alphas,
                                       const LossModel& model, std::size_t replications,
                                       std::uint64_t seed, unsigned threads = 0);

// trace Var(((1-lambda) I + lambda P) X) with common random numbers, plus the
// closed-form trace.
std::vector<CurvePoint> lambda_sweep(const SharingMatrix& p, std::span<const double> lambdas,
                                     const LossModel& model, std::size_t replications,
                                     std::uint64_t seed, unsigned threads = 0);

// Linear-interpolation sample quantile (q in [0,1]).
double quantile(std::span<const double> values, double q);

}  // namespace risknet

#endif  // RISKNET_SIM_HPP_
