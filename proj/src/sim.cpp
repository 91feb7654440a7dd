#include "risknet/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "risknet/errors.hpp"

namespace risknet {

namespace {

// Chunk boundaries depend only on the replication count, never on the
// number of workers, so the merge order is fixed.
constexpr std::size_t kChunk = 256;

struct Moments {
    double count = 0.0;
    Vector mean;
    Vector m2;

    explicit Moments(std::size_t dim = 0) : mean(dim, 0.0), m2(dim, 0.0) {}

    void push(std::span<const double> x) {
        count += 1.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double delta = x[k] - mean[k];
            mean[k] += delta / count;
            m2[k] += delta * (x[k] - mean[k]);
        }
    }

    // Chan et al. pairwise combination.
    void merge(const Moments& o) {
        if (o.count == 0.0) return;
        if (count == 0.0) {
            *this = o;
            return;
        }
        const double total = count + o.count;
        for (std::size_t k = 0; k < mean.size(); ++k) {
            const double delta = o.mean[k] - mean[k];
            mean[k] += delta * o.count / total;
            m2[k] += o.m2[k] + delta * delta * count * o.count / total;
        }
        count = total;
    }

    double variance(std::size_t k) const { return count > 1.0 ? m2[k] / (count - 1.0) : 0.0; }
};

unsigned resolve_threads(unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    return threads;
}

// Runs `fill(b, out)` for b in [0, replications) and accumulates moments of
// the dim-length outputs. `fill` must be safe to call concurrently.
using FillFn = std::function<void(std::size_t, std::span<double>)>;

Moments accumulate(std::size_t replications, std::size_t dim, unsigned threads, const FillFn& fill) {
    const std::size_t chunks = (replications + kChunk - 1) / kChunk;
    std::vector<Moments> partial(chunks, Moments(dim));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        Vector buf(dim);
        for (std::size_t c = next++; c < chunks; c = next++) {
            const std::size_t end = std::min(replications, (c + 1) * kChunk);
            for (std::size_t b = c * kChunk; b < end; ++b) {
                fill(b, buf);
                partial[c].push(buf);
            }
        }
    };
    const unsigned workers = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(chunks, 1));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    Moments total(dim);
    for (const auto& p : partial) total.merge(p);
    return total;
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

void check_replications(std::size_t b) {
    if (b < 2) throw InvalidArgument("need at least two replications");
}

void check_grid(std::span<const double> grid, bool sorted) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] >= 0.0 && grid[k] <= 1.0)) throw InvalidArgument("grid values must lie in [0,1]");
        if (sorted && k > 0 && grid[k] < grid[k - 1]) throw InvalidArgument("grid must be sorted ascending");
    }
}

void matvec(const SquareMatrix& m, std::span<const double> x, std::span<double> y) {
    const std::size_t n = m.n();
    for (std::size_t i = 0; i < n; ++i) {
        auto r = m.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += r[j] * x[j];
        y[i] = s;
    }
}

}  // namespace

LossModel LossModel::exponential(std::size_t n, double rate) {
    LossModel m;
    m.family = LossFamily::exponential;
    m.n = n;
    m.rate = rate;
    return m;
}

LossModel LossModel::gaussian(std::size_t n, double mean, double sigma2) {
    LossModel m;
    m.family = LossFamily::gaussian;
    m.n = n;
    m.mean = mean;
    m.sigma2 = sigma2;
    return m;
}

LossModel LossModel::equicorrelated_gaussian(std::size_t n, double mean, double sigma2, double rho) {
    LossModel m = gaussian(n, mean, sigma2);
    m.family = LossFamily::equicorrelated_gaussian;
    m.rho = rho;
    return m;
}

double LossModel::expected_value() const {
    return family == LossFamily::exponential ? 1.0 / rate : mean;
}

double LossModel::variance() const {
    return family == LossFamily::exponential ? 1.0 / (rate * rate) : sigma2;
}

CovarianceModel LossModel::covariance() const {
    if (family == LossFamily::equicorrelated_gaussian)
        return CovarianceModel::equicorrelated(n, sigma2, rho);
    return CovarianceModel::iid(n, variance());
}

void validate(const LossModel& model) {
    if (model.n == 0) throw InvalidArgument("loss model needs n >= 1");
    switch (model.family) {
        case LossFamily::exponential:
            if (!(model.rate > 0.0)) throw InvalidArgument("exponential rate must be positive");
            break;
        case LossFamily::equicorrelated_gaussian: {
            const double lo = model.n > 1 ? -1.0 / static_cast<double>(model.n - 1) : -1.0;
            if (!(model.rho >= lo - 1e-15 && model.rho < 1.0))
                throw RhoOutOfRange("rho outside [-1/(n-1), 1)");
            [[fallthrough]];
        }
        case LossFamily::gaussian:
            if (!(model.sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
            if (!std::isfinite(model.mean)) throw InvalidArgument("mean must be finite");
            break;
    }
}

std::string to_string(LossFamily family) {
    switch (family) {
        case LossFamily::exponential: return "exponential";
        case LossFamily::gaussian: return "gaussian";
        case LossFamily::equicorrelated_gaussian: return "equicorrelated_gaussian";
    }
    return "unknown";
}

LossFamily parse_loss_family(const std::string& name) {
    if (name == "exponential" || name == "exp") return LossFamily::exponential;
    if (name == "gaussian" || name == "normal") return LossFamily::gaussian;
    if (name == "equicorrelated_gaussian" || name == "equicorr") return LossFamily::equicorrelated_gaussian;
    throw InvalidArgument("unknown loss family '" + name + "'");
}

void draw_losses(const LossModel& model, Stream& rng, std::span<double> out) {
    if (out.size() != model.n) throw DimensionMismatch("output length differs from model n");
    switch (model.family) {
        case LossFamily::exponential:
            for (double& x : out) x = rng.exponential(model.rate);
            break;
        case LossFamily::gaussian: {
            const double sd = std::sqrt(model.sigma2);
            for (double& x : out) x = model.mean + sd * rng.standard_normal();
            break;
        }
        case LossFamily::equicorrelated_gaussian: {
            const double sd = std::sqrt(model.sigma2);
            if (model.rho >= 0.0) {
                const double common = std::sqrt(model.rho) * rng.standard_normal();
                const double idio = std::sqrt(1.0 - model.rho);
                for (double& x : out) x = model.mean + sd * (common + idio * rng.standard_normal());
                break;
            }
            // rho < 0: Sigma = (1-rho)(I - J/n) + (1+(n-1)rho) J/n, built from
            // centered idiosyncratic draws plus one common draw.
            const double nn = static_cast<double>(model.n);
            double zbar = 0.0;
            for (double& x : out) {
                x = rng.standard_normal();
                zbar += x;
            }
            zbar /= nn;
            const double common =
                std::sqrt(std::max(0.0, 1.0 + (nn - 1.0) * model.rho) / nn) * rng.standard_normal();
            const double idio = std::sqrt(1.0 - model.rho);
            for (double& x : out) x = model.mean + sd * (idio * (x - zbar) + common);
            break;
        }
    }
}

Vector draw_losses(const LossModel& model, Stream& rng) {
    Vector out(model.n);
    draw_losses(model, rng, out);
    return out;
}

SimReport simulate_fixed(const SharingMatrix& m, const LossModel& model, std::size_t replications,
                         std::uint64_t seed, unsigned threads) {
    const auto start = std::chrono::steady_clock::now();
    validate(model);
    if (m.n() != model.n) throw DimensionMismatch("matrix and loss model sizes differ");
    check_replications(replications);
    const std::size_t n = m.n();
    Moments mom = accumulate(replications, n, threads, [&](std::size_t b, std::span<double> out) {
        Stream rng(seed, "loss", b);
        Vector x(n);
        draw_losses(model, rng, x);
        matvec(m.dense(), x, out);
    });
    SimReport r;
    r.per_node_mean = mom.mean;
    r.per_node_var.resize(n);
    r.per_node_cv.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.per_node_var[i] = mom.variance(i);
        r.trace_var += r.per_node_var[i];
        r.per_node_cv[i] = std::abs(r.per_node_mean[i]) < 1e-12
                               ? std::numeric_limits<double>::quiet_NaN()
                               : std::sqrt(r.per_node_var[i]) / r.per_node_mean[i];
    }
    r.replications = replications;
    r.seed = seed;
    r.elapsed_ms = elapsed_since(start);
    return r;
}

double quantile(std::span<const double> values, double q) {
    if (values.empty()) throw EmptyInput("quantile of empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must lie in [0,1]");
    std::vector<double> s(values.begin(), values.end());
    std::sort(s.begin(), s.end());
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

TwoLayerReport simulate_two_layer(const GraphSpec& spec, MatrixRule rule, const LossModel& model,
                                  std::size_t graphs, std::size_t replications, std::uint64_t seed,
                                  unsigned threads) {
    const auto start = std::chrono::steady_clock::now();
    validate(spec);
    validate(model);
    if (spec.n != model.n) throw DimensionMismatch("graph and loss model sizes differ");
    if (graphs < 2) throw InvalidArgument("need at least two graphs");
    check_replications(replications);
    const std::size_t n = spec.n;

    TwoLayerReport rep;
    rep.graphs = graphs;
    rep.replications = replications;
    rep.seed = seed;
    std::map<std::size_t, double> bin_sums;
    Moments pooled(n);
    double within_m2 = 0.0;
    std::vector<Vector> means;
    for (std::size_t r = 0; r < graphs; ++r) {
        const Graph g = generate(spec, derive_seed(seed, "graph", r));
        const SharingMatrix m = build_matrix(g, rule);
        const SimReport sim = simulate_fixed(m, model, replications, derive_seed(seed, "losses", r), threads);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t d = g.degree(i);
            ++rep.degree_bins[d].count;
            bin_sums[d] += sim.per_node_var[i];
            within_m2 += sim.per_node_var[i] * static_cast<double>(replications - 1);
        }
        Moments graph_moments(n);
        graph_moments.count = static_cast<double>(replications);
        graph_moments.mean = sim.per_node_mean;
        for (std::size_t i = 0; i < n; ++i)
            graph_moments.m2[i] = sim.per_node_var[i] * static_cast<double>(replications - 1);
        pooled.merge(graph_moments);
        means.push_back(sim.per_node_mean);
        const double spread = quantile(sim.per_node_var, 0.9) - quantile(sim.per_node_var, 0.1);
        rep.spreads.push_back(spread);
    }
    for (auto& [d, bin] : rep.degree_bins) bin.mean_var = bin_sums[d] / static_cast<double>(bin.count);

    const double denom = pooled.count - 1.0;
    double between_ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double grand = 0.0;
        for (const auto& mv : means) grand += mv[i];
        grand /= static_cast<double>(graphs);
        for (const auto& mv : means) between_ss += (mv[i] - grand) * (mv[i] - grand);
        rep.total += pooled.variance(i);
    }
    rep.within_graph = within_m2 / denom;
    rep.between_graph = between_ss * static_cast<double>(replications) / denom;
    double spread_sum = 0.0;
    for (double s : rep.spreads) spread_sum += s;
    rep.spread_q90_q10 = spread_sum / static_cast<double>(graphs);
    rep.elapsed_ms = elapsed_since(start);
    return rep;
}

std::vector<CurvePoint> post_mix_sweep(const SharingMatrix& m, std::span<const double> alphas,
                                       const LossModel& model, std::size_t replications,
                                       std::uint64_t seed, unsigned threads) {
    validate(model);
    if (m.n() != model.n) throw DimensionMismatch("matrix and loss model sizes differ");
    check_replications(replications);
    check_grid(alphas, true);
    const std::size_t n = m.n();
    const std::size_t k = alphas.size();
    Moments mom = accumulate(replications, n * k, threads, [&](std::size_t b, std::span<double> out) {
        Stream rng(seed, "loss", b);
        Vector x(n), xi(n);
        draw_losses(model, rng, x);
        matvec(m.dense(), x, xi);
        double avg = 0.0;
        for (double v : xi) avg += v;
        avg /= static_cast<double>(n);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t i = 0; i < n; ++i)
                out[a * n + i] = alphas[a] * xi[i] + (1.0 - alphas[a]) * avg;
    });
    std::vector<CurvePoint> curve(k);
    for (std::size_t a = 0; a < k; ++a) {
        curve[a].param = alphas[a];
        for (std::size_t i = 0; i < n; ++i) curve[a].trace_var += mom.variance(a * n + i);
        curve[a].closed_form = std::numeric_limits<double>::quiet_NaN();
    }
    return curve;
}

std::vector<CurvePoint> lambda_sweep(const SharingMatrix& p, std::span<const double> lambdas,
                                     const LossModel& model, std::size_t replications,
                                     std::uint64_t seed, unsigned threads) {
    validate(model);
    if (p.n() != model.n) throw DimensionMismatch("matrix and loss model sizes differ");
    check_replications(replications);
    check_grid(lambdas, false);
    const std::size_t n = p.n();
    const std::size_t k = lambdas.size();
    Moments mom = accumulate(replications, n * k, threads, [&](std::size_t b, std::span<double> out) {
        Stream rng(seed, "loss", b);
        Vector x(n), px(n);
        draw_losses(model, rng, x);
        matvec(p.dense(), x, px);
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t i = 0; i < n; ++i)
                out[l * n + i] = (1.0 - lambdas[l]) * x[i] + lambdas[l] * px[i];
    });
    const CovarianceModel cov = model.covariance();
    std::vector<CurvePoint> curve(k);
    for (std::size_t l = 0; l < k; ++l) {
        curve[l].param = lambdas[l];
        for (std::size_t i = 0; i < n; ++i) curve[l].trace_var += mom.variance(l * n + i);
        curve[l].closed_form = trace_variance_lambda(p, lambdas[l], cov);
    }
    return curve;
}

}  // namespace risknet
