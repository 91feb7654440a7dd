#include <doctest.h>

#include <sstream>

#include "risknet/errors.hpp"
#include "risknet/matrix_io.hpp"
#include "test_util.hpp"

using namespace risknet;
using risknet::testing::random_ds;
using risknet::testing::random_rs;

TEST_CASE("classify the averaging operator") {
    const StochClass c = classify(averaging_operator(3), 1e-9);
    CHECK(c.is_row_stochastic);
    CHECK(c.is_col_stochastic);
    CHECK(c.is_doubly_stochastic);
    CHECK_FALSE(c.is_permutation);
}

TEST_CASE("classify non-row-stochastic matrices") {
    const StochClass c = classify(SharingMatrix(2, {2, 0, 0, 0}), 1e-9);
    // Column sums are (2, 0), so this one is neither RS nor CS.
    CHECK_FALSE(c.is_row_stochastic);
    CHECK_FALSE(c.is_col_stochastic);
    const StochClass cs = classify(SharingMatrix(2, {1, 1, 0, 0}), 1e-9);
    CHECK(cs.is_col_stochastic);
    CHECK_FALSE(cs.is_row_stochastic);
    CHECK_FALSE(cs.is_doubly_stochastic);
}

TEST_CASE("random walk on the 3-path is row-stochastic only") {
    const Graph path(3, {{0, 1}, {1, 2}});
    const SharingMatrix m = random_walk_matrix(path, false);
    const StochClass c = classify(m);
    CHECK(c.is_row_stochastic);
    CHECK_FALSE(c.is_col_stochastic);
    CHECK(m.col_sums()[1] == doctest::Approx(2.0));
    CHECK(m.col_sums()[0] == doctest::Approx(0.5));
    CHECK(m.col_sums()[2] == doctest::Approx(0.5));
}

TEST_CASE("averaging operator entries and idempotence") {
    CHECK(averaging_operator(1).dense() == SquareMatrix(1, 1.0));
    CHECK(averaging_operator(2).dense() == SquareMatrix(2, 0.5));
    for (std::size_t n = 1; n <= 64; ++n) {
        const SharingMatrix b = averaging_operator(n);
        CHECK(max_abs_diff((b * b).dense(), b.dense()) <= 1e-12);
        CHECK(classify(b).is_doubly_stochastic);
    }
    CHECK_THROWS_AS(averaging_operator(0), InvalidArgument);
}

TEST_CASE("permutation matrices") {
    CHECK(permutation_matrix({0, 1, 2}).dense() == SquareMatrix::identity(3));
    CHECK(permutation_matrix({1, 0}).dense() == SquareMatrix(2, {0, 1, 1, 0}));
    const SharingMatrix cyc = permutation_matrix({1, 2, 0});
    CHECK(cyc(0, 1) == 1.0);
    CHECK(cyc(1, 2) == 1.0);
    CHECK(cyc(2, 0) == 1.0);
    CHECK(cyc(0, 0) == 0.0);
    CHECK(classify(cyc).is_permutation);
    CHECK_THROWS_AS(permutation_matrix({0, 0}), InvalidArgument);
    CHECK_THROWS_AS(permutation_matrix({0, 2}), InvalidArgument);
    CHECK_FALSE(is_bijection({1, 1, 0}));
}

TEST_CASE("apply") {
    const Vector avg = risknet::apply(averaging_operator(2), std::vector<double>{4, 0});
    CHECK(avg == Vector{2, 2});
    const Vector star = risknet::apply(naive_star_matrix(3), std::vector<double>{1, 2, 3});
    CHECK(star == Vector{6, 0, 0});
    const Vector x{1.5, -2.0, 7.25};
    CHECK(risknet::apply(identity_matrix(3), x) == x);
    CHECK_THROWS_AS(risknet::apply(identity_matrix(3), std::vector<double>{1, 2}), DimensionMismatch);
}

TEST_CASE("mix") {
    const SharingMatrix p = averaging_operator(4);
    CHECK(mix(0.0, p).dense() == SquareMatrix::identity(4));
    CHECK(max_abs_diff(mix(1.0, p).dense(), p.dense()) == 0.0);
    const SharingMatrix half = mix(0.5, averaging_operator(2));
    CHECK(max_abs_diff(half.dense(), SquareMatrix(2, {0.75, 0.25, 0.25, 0.75})) <= 1e-15);
    CHECK(classify(half).is_doubly_stochastic);
    CHECK_THROWS_AS(mix(-0.1, p), InvalidArgument);
    CHECK_THROWS_AS(mix(1.1, p), InvalidArgument);
}

TEST_CASE("row norms") {
    CHECK(row_norms_sq(averaging_operator(5))[2] == doctest::Approx(0.2));
    CHECK(row_norms_sq(identity_matrix(3))[1] == 1.0);
    CHECK(row_norms_sq(testing::ring_matrix(7))[3] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("construction validation") {
    SharingMatrix dust(2, {1, -1e-13, 0, 1});
    CHECK(dust(0, 1) == 0.0);
    CHECK_THROWS_AS(SharingMatrix(2, {1, -1e-6, 0, 1}), InvalidArgument);
    CHECK_THROWS_AS(SharingMatrix(2, {1, std::nan(""), 0, 1}), InvalidArgument);
    CHECK_THROWS_AS(SharingMatrix(SquareMatrix(0)), InvalidArgument);
    CHECK_THROWS(SharingMatrix(2, {1, 2, 3}));
    const SharingMatrix m(2, {0.25, 0.5, 1, 2});
    CHECK(m.row_sums() == Vector{0.75, 3});
    CHECK(m.col_sums() == Vector{1.25, 2.5});
}

TEST_CASE("budget balance and convex-combination rows") {
    Stream rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.below(10);
        Vector x(n);
        double l1 = 0.0, sum = 0.0;
        for (auto& v : x) {
            v = 10.0 * rng.uniform() - 3.0;
            l1 += std::abs(v);
            sum += v;
        }
        const SharingMatrix ds = random_ds(n, 3, rng);
        const Vector y = risknet::apply(ds, x);
        double ysum = 0.0;
        for (double v : y) ysum += v;
        CHECK(std::abs(ysum - sum) <= 1e-9 * l1);

        const SharingMatrix rs = random_rs(n, rng);
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        for (double v : risknet::apply(rs, x)) {
            CHECK(v >= *lo - 1e-12);
            CHECK(v <= *hi + 1e-12);
        }
    }
}

TEST_CASE("mix preserves the class of P") {
    Stream rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const SharingMatrix p = random_ds(2 + rng.below(8), 3, rng);
        for (double lambda : {0.0, 0.25, 0.5, 1.0}) CHECK(classify(mix(lambda, p)).is_doubly_stochastic);
        const SharingMatrix rs = random_rs(p.n(), rng);
        CHECK(classify(mix(0.3, rs)).is_row_stochastic);
    }
}

TEST_CASE("matrix CSV round trip keeps every bit") {
    Stream rng(3);
    const SharingMatrix m = random_ds(6, 4, rng);
    std::stringstream ss;
    io::write_matrix(ss, m.dense());
    CHECK(io::read_matrix(ss) == m.dense());
    std::stringstream ragged("1,2\n3\n");
    CHECK_THROWS_AS(io::read_matrix(ragged), DimensionMismatch);
    std::stringstream bad("1,x\n3,4\n");
    CHECK_THROWS_AS(io::read_matrix(bad), InvalidArgument);
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(io::parse_double(" +2.5 ") == 2.5);
}
