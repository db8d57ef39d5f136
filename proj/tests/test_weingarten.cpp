#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "orthostat/pairing.hpp"
#include "orthostat/rational.hpp"
#include "orthostat/weingarten.hpp"

using namespace orthostat;

namespace {

Pairing make(std::vector<std::pair<int, int>> pairs) { return Pairing(std::move(pairs)); }

std::int64_t double_factorial_odd(int m) {
    std::int64_t v = 1;
    for (int k = 2 * m - 1; k > 0; k -= 2) v *= k;
    return v;
}

}  // namespace

TEST_CASE("pairing canonicalization and validation") {
    const Pairing p({{4, 3}, {2, 1}});
    CHECK(p.pairs() == std::vector<std::pair<int, int>>{{1, 2}, {3, 4}});
    CHECK(p.partner(1) == 2);
    CHECK(p.partner(4) == 3);
    CHECK_THROWS_AS(make({{1, 2}, {2, 3}}), std::domain_error);
    CHECK_THROWS_AS(make({{1, 1}, {2, 3}}), std::domain_error);
    CHECK_THROWS_AS(make({{1, 5}, {2, 3}}), std::domain_error);
}

TEST_CASE("enumeration counts and order") {
    CHECK(enumerate_pairings(1) == std::vector<Pairing>{make({{1, 2}})});

    const auto m2 = enumerate_pairings(2);
    CHECK(m2 == std::vector<Pairing>{make({{1, 2}, {3, 4}}), make({{1, 3}, {2, 4}}),
                                     make({{1, 4}, {2, 3}})});

    for (int m = 1; m <= 6; ++m) {
        const auto all = enumerate_pairings(m);
        CHECK(static_cast<std::int64_t>(all.size()) == double_factorial_odd(m));
        std::set<Pairing> unique(all.begin(), all.end());
        CHECK(unique.size() == all.size());
        CHECK(std::is_sorted(all.begin(), all.end()));
    }

    CHECK_THROWS_AS(enumerate_pairings(0), std::domain_error);
    CHECK_THROWS_AS(enumerate_pairings(7), std::domain_error);
}

TEST_CASE("six-point basis is the canonical fifteen") {
    const auto m3 = enumerate_pairings(3);
    const std::vector<Pairing> expected = {
        make({{1, 2}, {3, 4}, {5, 6}}), make({{1, 2}, {3, 5}, {4, 6}}),
        make({{1, 2}, {3, 6}, {4, 5}}), make({{1, 3}, {2, 4}, {5, 6}}),
        make({{1, 3}, {2, 5}, {4, 6}}), make({{1, 3}, {2, 6}, {4, 5}}),
        make({{1, 4}, {2, 3}, {5, 6}}), make({{1, 4}, {2, 5}, {3, 6}}),
        make({{1, 4}, {2, 6}, {3, 5}}), make({{1, 5}, {2, 3}, {4, 6}}),
        make({{1, 5}, {2, 4}, {3, 6}}), make({{1, 5}, {2, 6}, {3, 4}}),
        make({{1, 6}, {2, 3}, {4, 5}}), make({{1, 6}, {2, 4}, {3, 5}}),
        make({{1, 6}, {2, 5}, {3, 4}})};
    CHECK(m3 == expected);
}

TEST_CASE("coset cycle types") {
    CHECK(coset_cycle_type(make({{1, 2}, {3, 4}}), make({{1, 2}, {3, 4}})) ==
          CycleType({1, 1}));
    CHECK(coset_cycle_type(make({{1, 2}, {3, 4}}), make({{1, 3}, {2, 4}})) == CycleType({2}));
    CHECK(coset_cycle_type(make({{1, 2}, {3, 4}, {5, 6}}), make({{1, 2}, {3, 5}, {4, 6}})) ==
          CycleType({2, 1}));
    CHECK_THROWS_AS(coset_cycle_type(make({{1, 2}}), make({{1, 2}, {3, 4}})), std::domain_error);
}

TEST_CASE("coset cycle type is symmetric") {
    for (int m = 1; m <= 3; ++m) {
        const auto all = enumerate_pairings(m);
        for (const auto& a : all)
            for (const auto& b : all) CHECK(coset_cycle_type(a, b) == coset_cycle_type(b, a));
    }
}

TEST_CASE("class sequence against the first six-point reference pairing") {
    // relative to (12)(34)(56): one identity class, six (2,1), eight (3)
    const auto m3 = enumerate_pairings(3);
    const Pairing ref = m3[0];
    const std::vector<CycleType> expected = {
        CycleType({1, 1, 1}), CycleType({2, 1}), CycleType({2, 1}), CycleType({2, 1}),
        CycleType({3}),       CycleType({3}),   CycleType({2, 1}), CycleType({3}),
        CycleType({3}),       CycleType({3}),   CycleType({3}),    CycleType({2, 1}),
        CycleType({3}),       CycleType({3}),   CycleType({2, 1})};
    for (std::size_t i = 0; i < m3.size(); ++i)
        CHECK(coset_cycle_type(ref, m3[i]) == expected[i]);
}

TEST_CASE("exact Weingarten values at small n") {
    CHECK(weingarten_exact_k2(3, CycleType({1})) == Rational(1, 3));
    CHECK(weingarten_exact_k2(3, CycleType({1, 1})) == Rational(2, 15));
    CHECK(weingarten_exact_k2(3, CycleType({2})) == Rational(-1, 30));
    CHECK_THROWS_AS(weingarten_exact_k2(2, CycleType({1})), std::domain_error);
    CHECK_THROWS_AS(weingarten_exact_k2(10, CycleType({3})), std::domain_error);
}

TEST_CASE("series agrees with exact values to the first omitted order") {
    for (std::int64_t n : {5, 10, 20, 50}) {
        const double n6 = std::pow(static_cast<double>(n), 6.0);
        for (const auto& lambda : {CycleType({1, 1}), CycleType({2})}) {
            const double exact = weingarten_exact_k2(n, lambda).to_double();
            const double series = weingarten_series(n, lambda);
            CHECK(std::abs(exact - series) < 8.0 / n6);
        }
        CHECK(weingarten_series(n, CycleType({1}), 3) == doctest::Approx(1.0 / n).epsilon(1e-15));
    }
    CHECK_THROWS_AS(weingarten_series(10, CycleType({2, 2})), std::domain_error);
    CHECK_THROWS_AS(weingarten_series(10, CycleType({2}), 6), std::domain_error);
}

TEST_CASE("leading coefficients are signed Catalan products") {
    CHECK(beta_leading(CycleType({2})) == -1);
    CHECK(beta_leading(CycleType({2, 1})) == -1);
    CHECK(beta_leading(CycleType({3})) == 2);
    CHECK(beta_leading(CycleType({2, 1, 1})) == -1);
    CHECK(beta_leading(CycleType({2, 2})) == 1);
    CHECK(beta_leading(CycleType({3, 1})) == 2);
    CHECK(beta_leading(CycleType({4})) == -5);
    CHECK(beta_leading(CycleType({1, 1, 1})) == 1);
}

TEST_CASE("series leading term matches the Catalan coefficient and scaling") {
    for (const auto& lambda :
         {CycleType({2}), CycleType({1, 1}), CycleType({2, 1}), CycleType({3})}) {
        const auto value = weingarten_value(100, lambda);
        REQUIRE(!value.series.empty());
        const int m = lambda.m();
        const int len = static_cast<int>(lambda.parts.size());
        CHECK(value.series.front().first == m + (m - len));
        CHECK(value.series.front().second == Rational(beta_leading(lambda)));
    }
}

TEST_CASE("Mobius coefficients") {
    CHECK(mobius_coefficient(1) == 1);
    CHECK(mobius_coefficient(2) == -1);
    CHECK(mobius_coefficient(3) == 2);
    CHECK(mobius_coefficient(4) == -6);
    CHECK_THROWS_AS(mobius_coefficient(0), std::domain_error);
}

TEST_CASE("second moments") {
    CHECK(orthogonal_moment(4, 1.0, {1, 1}, {1, 1}) == doctest::Approx(0.25));
    CHECK(orthogonal_moment(4, 2.0, {1, 1}, {1, 1}) == doctest::Approx(0.5));
    CHECK(orthogonal_moment(4, 1.0, {1, 1}, {1, 2}) == 0.0);
    CHECK(orthogonal_moment(4, 1.0, {1, 2}, {1, 1}) == 0.0);
    CHECK(orthogonal_moment(4, 1.0, {1}, {1}) == 0.0);  // odd moment
}

TEST_CASE("row orthonormality reproduced through moments") {
    for (std::int64_t n : {3, 4, 7}) {
        Rational second(0);
        for (int j = 1; j <= n; ++j)
            second += orthogonal_moment_exact(n, {1, 1}, {j, j});
        CHECK(second == Rational(1));

        // E[(sum_j W_1j^2)^2] = 1 for a Haar orthogonal matrix
        Rational fourth(0);
        for (int j = 1; j <= n; ++j)
            for (int k = 1; k <= n; ++k)
                fourth += orthogonal_moment_exact(n, {1, 1, 1, 1}, {j, j, k, k});
        CHECK(fourth == Rational(1));
    }
}

TEST_CASE("fourth-moment family values") {
    const std::int64_t n = 4;
    // E[W_11^4] = 3 (Wg[1,1] + 2 Wg[2]) = 3 / (n (n+2))
    CHECK(orthogonal_moment_exact(n, {1, 1, 1, 1}, {1, 1, 1, 1}) == Rational(3, n * (n + 2)));
    // E[W_11^2 W_22^2]: i-pairing (12)(34), j-pairing (12)(34) only
    CHECK(orthogonal_moment_exact(n, {1, 1, 2, 2}, {1, 1, 2, 2}) ==
          weingarten_exact_k2(n, CycleType({1, 1})));
    // E[W_11 W_12 W_21 W_22]: i (12)(34), j (13)(24) -> Wg[2]
    CHECK(orthogonal_moment_exact(n, {1, 1, 2, 2}, {1, 2, 1, 2}) ==
          weingarten_exact_k2(n, CycleType({2})));
}

TEST_CASE("rational arithmetic stays exact") {
    const Rational a(1, 3), b(1, 6);
    CHECK(a + b == Rational(1, 2));
    CHECK(a - b == Rational(1, 6));
    CHECK(a * b == Rational(1, 18));
    CHECK(a / b == Rational(2));
    CHECK((-a).str() == "-1/3");
    CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

// The defining property of the Weingarten values: the matrix W[pi, sigma]
// indexed by pairings inverts the Gram matrix G[pi, sigma] = n^(number of
// parts of the coset type). This pins every exact value and every series
// coefficient independently of any printed table.
TEST_CASE("Weingarten matrix inverts the pairing Gram matrix exactly (m <= 2)") {
    for (std::int64_t n : {3, 4, 7, 19}) {
        for (int m : {1, 2}) {
            const auto pairings = enumerate_pairings(m);
            const std::size_t dim = pairings.size();
            std::vector<std::vector<Rational>> product(dim, std::vector<Rational>(dim, 0));
            for (std::size_t a = 0; a < dim; ++a) {
                for (std::size_t b = 0; b < dim; ++b) {
                    Rational acc(0);
                    for (std::size_t c = 0; c < dim; ++c) {
                        // G[a][c] = n^(parts of coset type)
                        const int blocks = static_cast<int>(
                            coset_cycle_type(pairings[a], pairings[c]).parts.size());
                        std::int64_t gram = 1;
                        for (int e = 0; e < blocks; ++e) gram *= n;
                        acc += Rational(gram) *
                               weingarten_exact_k2(n, coset_cycle_type(pairings[c], pairings[b]));
                    }
                    product[a][b] = acc;
                }
            }
            for (std::size_t a = 0; a < dim; ++a)
                for (std::size_t b = 0; b < dim; ++b)
                    CHECK(product[a][b] == Rational(a == b ? 1 : 0));
        }
    }
}

TEST_CASE("the six-entry series matches the inverted Gram matrix") {
    const auto pairings = enumerate_pairings(3);
    const int dim = 15;
    for (std::int64_t n : {30, 60, 100}) {
        // numeric inverse of the Gram matrix
        std::vector<double> gram(static_cast<std::size_t>(dim * dim));
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b)
                gram[static_cast<std::size_t>(a * dim + b)] = std::pow(
                    static_cast<double>(n),
                    static_cast<double>(coset_cycle_type(pairings[static_cast<std::size_t>(a)],
                                                         pairings[static_cast<std::size_t>(b)])
                                            .parts.size()));
        // Gauss-Jordan with partial pivoting
        std::vector<double> inv(static_cast<std::size_t>(dim * dim), 0.0);
        for (int i = 0; i < dim; ++i) inv[static_cast<std::size_t>(i * dim + i)] = 1.0;
        for (int col = 0; col < dim; ++col) {
            int pivot = col;
            for (int row = col + 1; row < dim; ++row)
                if (std::abs(gram[static_cast<std::size_t>(row * dim + col)]) >
                    std::abs(gram[static_cast<std::size_t>(pivot * dim + col)]))
                    pivot = row;
            for (int k = 0; k < dim; ++k) {
                std::swap(gram[static_cast<std::size_t>(col * dim + k)],
                          gram[static_cast<std::size_t>(pivot * dim + k)]);
                std::swap(inv[static_cast<std::size_t>(col * dim + k)],
                          inv[static_cast<std::size_t>(pivot * dim + k)]);
            }
            const double d = gram[static_cast<std::size_t>(col * dim + col)];
            for (int k = 0; k < dim; ++k) {
                gram[static_cast<std::size_t>(col * dim + k)] /= d;
                inv[static_cast<std::size_t>(col * dim + k)] /= d;
            }
            for (int row = 0; row < dim; ++row) {
                if (row == col) continue;
                const double f = gram[static_cast<std::size_t>(row * dim + col)];
                for (int k = 0; k < dim; ++k) {
                    gram[static_cast<std::size_t>(row * dim + k)] -=
                        f * gram[static_cast<std::size_t>(col * dim + k)];
                    inv[static_cast<std::size_t>(row * dim + k)] -=
                        f * inv[static_cast<std::size_t>(col * dim + k)];
                }
            }
        }
        // every entry of the inverse must equal the truncated series for its
        // coset class, to within the first omitted order
        const double tolerance = 40.0 / std::pow(static_cast<double>(n), 6.0);
        for (int a = 0; a < dim; ++a) {
            for (int b = 0; b < dim; ++b) {
                const CycleType lambda = coset_cycle_type(pairings[static_cast<std::size_t>(a)],
                                                          pairings[static_cast<std::size_t>(b)]);
                const double series = weingarten_series(n, lambda);
                CHECK(std::abs(inv[static_cast<std::size_t>(a * dim + b)] - series) < tolerance);
            }
        }
    }
}
