#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "risknet/analytics.hpp"
#include "risknet/errors.hpp"
#include "risknet/graphs.hpp"
#include "test_util.hpp"

using namespace risknet;
using risknet::testing::random_ds;
using risknet::testing::random_psd;
using risknet::testing::random_symmetric_ds;

namespace {

// Direct tr(M Sigma M^T) with no shortcuts.
double direct_trace(const SharingMatrix& m, const SquareMatrix& sigma) {
    return (m.dense() * sigma * m.dense().transpose()).trace();
}

double grid_min(const std::function<double(double)>& f, double step = 1e-4) {
    double best = f(0.0);
    const int steps = static_cast<int>(std::lround(1.0 / step));
    for (int k = 1; k <= steps; ++k) best = std::min(best, f(k * step));
    return best;
}

}  // namespace

TEST_CASE("covariance model validation") {
    CHECK_THROWS_AS(CovarianceModel::equicorrelated(5, 1.0, 1.0), RhoOutOfRange);
    CHECK_THROWS_AS(CovarianceModel::equicorrelated(5, 1.0, -0.3), RhoOutOfRange);
    CHECK_NOTHROW(CovarianceModel::equicorrelated(5, 1.0, -0.25));
    CHECK_THROWS_AS(CovarianceModel::iid(3, 0.0), InvalidArgument);
    CHECK_THROWS_AS(CovarianceModel::explicit_matrix(SquareMatrix(2, {1, 0.5, 0, 1})), NotSymmetric);
    CHECK_THROWS_AS(CovarianceModel::explicit_matrix(SquareMatrix(2, {1, 2, 2, 1})), InvalidArgument);
    const SquareMatrix e = CovarianceModel::equicorrelated(3, 2.0, 0.5).matrix();
    CHECK(e(0, 0) == 2.0);
    CHECK(e(0, 1) == 1.0);
}

TEST_CASE("covariance transform") {
    Stream rng(1);
    const SquareMatrix s = random_psd(5, rng);
    const CovarianceModel cov = CovarianceModel::explicit_matrix(s);
    CHECK(max_abs_diff(covariance_transform(identity_matrix(5), cov), s) <= 1e-12);
    const SquareMatrix avg = covariance_transform(averaging_operator(4), CovarianceModel::iid(4, 3.0));
    for (double v : avg.data()) CHECK(v == doctest::Approx(0.75));
    CHECK_THROWS_AS(covariance_transform(identity_matrix(3), cov), DimensionMismatch);
}

TEST_CASE("trace contraction under DS mixing") {
    Stream rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(20);
        const SharingMatrix d = random_ds(n, 1 + rng.below(5), rng);
        const SquareMatrix s = random_psd(n, rng);
        CHECK(covariance_transform(d, CovarianceModel::explicit_matrix(s)).trace() <= s.trace() + 1e-9);
    }
}

TEST_CASE("per-agent variance under iid losses") {
    for (double v : per_agent_variance_iid(averaging_operator(8), 2.0)) CHECK(v == doctest::Approx(0.25));
    for (std::size_t n = 3; n <= 10; ++n)
        for (double v : per_agent_variance_iid(testing::ring_matrix(n), 1.5)) CHECK(v == doctest::Approx(0.5));
    const Graph g = generate(GraphSpec::barabasi_albert(60, 3), 4);
    const Vector v = per_agent_variance_iid(equal_neighbor_matrix(g), 1.0);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(v[i] == doctest::Approx(1.0 / (g.degree(i) + 1.0)));
}

TEST_CASE("lambda quadratic coefficients") {
    const LambdaQuadratic id = lambda_quadratic_agent(identity_matrix(4), 2, 1.7);
    CHECK(id.c0 == 1.7);
    CHECK(id.c1 == 0.0);
    CHECK(id.c2 == 0.0);
    const std::size_t n = 5;
    const LambdaQuadratic j = lambda_quadratic_agent(averaging_operator(n), 0, 2.0);
    CHECK(j.c1 == doctest::Approx(2 * 2.0 * (1.0 / n - 1)));
    CHECK(j.c2 == doctest::Approx(2.0 * (1 - 1.0 / n)));
    CHECK_THROWS_AS(lambda_quadratic_agent(averaging_operator(n), n, 1.0), InvalidArgument);

    Stream rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const SharingMatrix p = testing::random_rs(2 + rng.below(10), rng);
        const std::size_t i = rng.below(p.n());
        const LambdaQuadratic q = lambda_quadratic_agent(p, i, 1.3);
        CHECK(q.c2 >= -1e-12);
        CHECK(q.c1 == doctest::Approx(2 * 1.3 * (p(i, i) - 1)));
        for (double lambda : {0.0, 0.3, 0.75, 1.0})
            CHECK(std::abs(q(lambda) - per_agent_variance_iid(mix(lambda, p), 1.3)[i]) <= 1e-10);
    }
}

TEST_CASE("trace identity") {
    const std::size_t n = 7;
    const SharingMatrix j = averaging_operator(n);
    const CovarianceModel iid = CovarianceModel::iid(n, 2.0);
    CHECK(trace_variance_lambda(j, 0.0, iid) == doctest::Approx(n * 2.0));
    CHECK(trace_variance_lambda(j, 1.0, iid) == doctest::Approx(2.0));
    for (double lambda : {0.1, 0.4, 0.9})
        CHECK(trace_variance_lambda(j, lambda, iid) ==
              doctest::Approx(n * 2.0 * (1.0 / n + (1 - lambda) * (1 - lambda) * (n - 1.0) / n)));

    Stream rng(21);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t m = 1 + rng.below(12);
        const SharingMatrix p = testing::random_rs(m, rng);
        const double lambda = rng.uniform();
        const SquareMatrix s = random_psd(m, rng);
        for (const CovarianceModel& cov :
             {CovarianceModel::explicit_matrix(s), CovarianceModel::iid(m, 0.7),
              CovarianceModel::equicorrelated(m, 1.2, m > 1 ? 0.4 : 0.0)}) {
            const double direct = direct_trace(mix(lambda, p), cov.matrix());
            CHECK(std::abs(trace_variance_lambda(p, lambda, cov) - direct) <= 1e-9 * std::abs(direct));
        }
    }
}

TEST_CASE("lambda star by trace") {
    for (std::size_t n = 2; n <= 9; ++n) CHECK(lambda_star_trace(averaging_operator(n)) == doctest::Approx(1.0));
    for (std::size_t n = 3; n <= 12; ++n) CHECK(lambda_star_trace(testing::ring_matrix(n)) == doctest::Approx(1.0));
    CHECK(lambda_star_trace(identity_matrix(4)) == 0.0);
    for (std::size_t d : {2, 4, 6}) {
        const SharingMatrix p = random_walk_matrix(generate(GraphSpec::regular(30, d), d), false);
        const double expected = 1.0 / (1.0 + 1.0 / static_cast<double>(d));
        CHECK(lambda_star_trace(p) == doctest::Approx(expected));
        const CovarianceModel iid = CovarianceModel::iid(30, 1.0);
        auto f = [&](double l) { return trace_variance_lambda(p, l, iid); };
        CHECK(f(lambda_star_trace(p)) <= grid_min(f) + 1e-10);
    }
}

TEST_CASE("lambda star by spectrum") {
    CHECK(lambda_star_spectral(averaging_operator(6)) == doctest::Approx(1.0));
    CHECK(lambda_star_spectral(identity_matrix(6)) == 0.0);
    const Vector ev = symmetric_eigenvalues(testing::ring_matrix(6).dense());
    std::vector<double> expected;
    for (int k = 0; k < 6; ++k) expected.push_back((1 + 2 * std::cos(2 * std::numbers::pi * k / 6)) / 3);
    std::sort(expected.rbegin(), expected.rend());
    for (std::size_t k = 0; k < 6; ++k) CHECK(ev[k] == doctest::Approx(expected[k]));
    CHECK(lambda_star_spectral(testing::ring_matrix(6)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(lambda_star_spectral(permutation_matrix({1, 2, 0})), NotSymmetric);
    CHECK_THROWS_AS(lambda_star_spectral(lazy_symmetric_matrix(generate(GraphSpec::star(4), 0))),
                    NotDoublyStochastic);
    const double formal = lambda_star_spectral_formal(lazy_symmetric_matrix(generate(GraphSpec::star(4), 0)));
    CHECK(formal >= 0.0);
    CHECK(formal <= 1.0);

    Stream rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        const SharingMatrix p = random_symmetric_ds(2 + rng.below(29), 3, rng);
        CHECK(std::abs(lambda_star_spectral(p) - lambda_star_trace(p)) <= 1e-8);
    }
}

TEST_CASE("weighted lambda star") {
    CHECK(lambda_star_weighted(averaging_operator(5), std::vector<double>(5, 1.0)) == doctest::Approx(1.0));
    CHECK(lambda_star_weighted(identity_matrix(1), std::vector<double>{5.0}) == 0.0);
    CHECK(lambda_star_weighted(identity_matrix(3), std::vector<double>{1, 2, 3}) == 0.0);
    CHECK(lambda_star_weighted(averaging_operator(2), std::vector<double>{2, 1}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(lambda_star_weighted(averaging_operator(2), std::vector<double>{1, 0}), NonPositiveWeight);
    CHECK_THROWS_AS(lambda_star_weighted(averaging_operator(2), std::vector<double>{1}), DimensionMismatch);

    Stream rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        const SharingMatrix p = testing::random_rs(2 + rng.below(8), rng);
        CHECK(std::abs(lambda_star_weighted(p, std::vector<double>(p.n(), 1.0)) - lambda_star_trace(p)) <= 1e-10);
        std::vector<double> w(p.n());
        for (auto& x : w) x = 0.1 + rng.uniform();
        auto f = [&](double l) {
            const Vector v = per_agent_variance_iid(mix(l, p), 1.0);
            double s = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i];
            return s;
        };
        CHECK(f(lambda_star_weighted(p, w)) <= grid_min(f, 1e-3) + 1e-10);
    }
}

TEST_CASE("equicorrelated variance") {
    Stream rng(6);
    const SharingMatrix p = testing::random_rs(6, rng);
    const Vector iid = per_agent_variance_iid(p, 2.0);
    const Vector eq0 = equicorr_variance(p, 2.0, 0.0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(eq0[i] == doctest::Approx(iid[i]));
    for (double v : equicorr_variance(averaging_operator(10), 1.0, 0.3)) CHECK(v == doctest::Approx(0.7 / 10 + 0.3));
    for (double v : equicorr_variance(identity_matrix(4), 1.5, 0.6)) CHECK(v == doctest::Approx(1.5));
    CHECK_THROWS_AS(equicorr_variance(naive_star_matrix(3), 1.0, 0.2), NotRowStochastic);
    CHECK_THROWS_AS(equicorr_variance(identity_matrix(4), 1.0, -0.5), RhoOutOfRange);
    // Matches the diagonal of M Sigma M^T.
    const SquareMatrix c = covariance_transform(p, CovarianceModel::equicorrelated(6, 2.0, 0.35));
    const Vector v = equicorr_variance(p, 2.0, 0.35);
    for (std::size_t i = 0; i < 6; ++i) CHECK(v[i] == doctest::Approx(c(i, i)));
}

TEST_CASE("inverse-degree bounds") {
    const InverseDegreeBounds eq = inverse_degree_bounds({{4, 10}}, 3);
    CHECK(eq.lower == doctest::Approx(0.2));
    CHECK(eq.exact == doctest::Approx(0.2));
    const InverseDegreeBounds two = inverse_degree_bounds({{0, 1}, {2, 1}}, 0);
    CHECK(two.exact == doctest::Approx(2.0 / 3.0));
    CHECK(two.lower == doctest::Approx(0.5));
    CHECK(two.upper == doctest::Approx(1.5));
    CHECK_THROWS_AS(inverse_degree_bounds({}, 3), EmptyInput);
    const Graph g = generate(GraphSpec::barabasi_albert(1000, 2), 3);
    const auto hist = degree_histogram(g.degrees());
    const InverseDegreeBounds b = inverse_degree_bounds(hist, 10);
    CHECK(b.lower <= b.exact);
    CHECK(b.exact <= b.upper);
}

TEST_CASE("representative-agent variance") {
    CHECK(rep_agent_variance(CovarianceModel::iid(5, 2.5).matrix()) == doctest::Approx(2.5));
    CHECK(rep_agent_variance(covariance_transform(averaging_operator(5), CovarianceModel::iid(5, 2.0))) ==
          doctest::Approx(0.4));
    Stream rng(44);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng.below(8);
        const SharingMatrix m = testing::random_rs(n, rng);
        const SharingMatrix d = random_ds(n, 3, rng);
        const CovarianceModel iid = CovarianceModel::iid(n, 1.0);
        CHECK(rep_agent_variance(covariance_transform(d * m, iid)) <=
              rep_agent_variance(covariance_transform(m, iid)) + 1e-12);
        // Frobenius post-mixing bound with a general covariance.
        const CovarianceModel cov = CovarianceModel::explicit_matrix(random_psd(n, rng));
        CHECK(covariance_transform(d * m, cov).trace() <= covariance_transform(m, cov).trace() + 1e-9);
    }
}

TEST_CASE("hub gap") {
    const std::vector<double> v{1, 2, 3, 4};
    const std::vector<std::size_t> flat{3, 3, 3, 3};
    const HubGap g = hub_gap(v, flat, 0.5);
    CHECK(g.top_mean == doctest::Approx(1.5));
    CHECK(g.rest_mean == doctest::Approx(3.5));
    const std::vector<double> c{2, 2, 2, 2};
    const HubGap gc = hub_gap(c, flat, 0.5);
    CHECK(gc.top_mean == gc.rest_mean);

    const std::size_t n = 10;
    const Graph star = generate(GraphSpec::star(n), 0);
    const Vector sv = per_agent_variance_iid(equal_neighbor_matrix(star), 1.0);
    const HubGap hs = hub_gap(sv, star.degrees(), 0.1);
    CHECK(hs.top_mean == doctest::Approx(1.0 / n));
    CHECK(hs.rest_mean == doctest::Approx(0.5));
    CHECK_THROWS_AS(hub_gap(v, std::vector<std::size_t>{1, 2}, 0.5), DimensionMismatch);
    CHECK_THROWS_AS(hub_gap(v, flat, 1.0), InvalidArgument);
    CHECK_THROWS_AS(hub_gap(v, flat, 0.1), InvalidArgument);

    const Graph ba = generate(GraphSpec::barabasi_albert(1000, 2), 9);
    const Vector bv = per_agent_variance_iid(equal_neighbor_matrix(ba), 1.0);
    const HubGap hb = hub_gap(bv, ba.degrees(), 0.05);
    CHECK(hb.top_mean < hb.rest_mean);
}

TEST_CASE("incentive derivatives") {
    for (double v : incentive_derivatives(identity_matrix(3), 1.0)) CHECK(v == 0.0);
    for (double v : incentive_derivatives(averaging_operator(4), 2.0)) CHECK(v == doctest::Approx(4.0 * (0.25 - 1)));
    const SharingMatrix rw = random_walk_matrix(generate(GraphSpec::ring(5), 0), false);
    for (double v : incentive_derivatives(rw, 1.5)) CHECK(v == doctest::Approx(-3.0));
}

TEST_CASE("DS mixing: row quadratic, bounds and when it is monotone") {
    Stream rng(15);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng.below(15);
        const SharingMatrix p = random_ds(n, 1 + rng.below(4), rng);
        Vector prev(n, std::numeric_limits<double>::infinity());
        std::vector<char> increased(n, 0);
        for (int k = 0; k <= 20; ++k) {
            const double lambda = k / 20.0;
            const Vector v = per_agent_variance_iid(mix(lambda, p), 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                double sq = 0.0;
                for (std::size_t j = 0; j < n; ++j) sq += p(i, j) * p(i, j);
                const double expect = (1 - lambda) * (1 - lambda) + 2 * lambda * (1 - lambda) * p(i, i) +
                                      lambda * lambda * sq;
                CHECK(std::abs(v[i] - expect) <= 1e-12);
                CHECK(v[i] >= (1 - lambda) * (1 - lambda) + lambda * lambda / n - 1e-12);
                CHECK(v[i] <= 1.0 + 1e-12);
                if (v[i] > prev[i] + 1e-12) increased[i] = 1;
            }
            prev = v;
        }
        // The row quadratic is convex with slope 2(||p_i||^2 - p_ii) at 1.
        for (std::size_t i = 0; i < n; ++i) {
            double sq = 0.0;
            for (std::size_t j = 0; j < n; ++j) sq += p(i, j) * p(i, j);
            if (sq <= p(i, i)) CHECK_FALSE(increased[i]);
        }
    }
    const Vector cyc_mid = per_agent_variance_iid(mix(0.5, permutation_matrix({1, 2, 0})), 1.0);
    const Vector cyc_end = per_agent_variance_iid(mix(1.0, permutation_matrix({1, 2, 0})), 1.0);
    CHECK(cyc_mid[0] == doctest::Approx(0.5));
    CHECK(cyc_end[0] == doctest::Approx(1.0));
    for (std::size_t n : {3, 7, 20}) {
        Vector last(n, 2.0);
        for (int k = 0; k <= 20; ++k) {
            const Vector v = per_agent_variance_iid(mix(k / 20.0, averaging_operator(n)), 1.0);
            for (std::size_t i = 0; i < n; ++i) CHECK(v[i] <= last[i] + 1e-12);
            last = v;
        }
    }
}
