#include "orthostat/weingarten.hpp"

#include <cmath>
#include <stdexcept>

namespace orthostat {

namespace {

bool is_class(const CycleType& lambda, std::initializer_list<int> parts) {
    return lambda.parts == std::vector<int>(parts);
}

std::vector<std::pair<int, Rational>> series_terms(const CycleType& lambda) {
    if (is_class(lambda, {1})) return {{1, 1}};
    if (is_class(lambda, {1, 1})) return {{2, 1}, {4, 2}, {5, -2}};
    if (is_class(lambda, {2})) return {{3, -1}, {4, 1}, {5, -3}};
    if (is_class(lambda, {1, 1, 1})) return {{3, 1}, {5, 6}};
    if (is_class(lambda, {2, 1})) return {{4, -1}, {5, 1}};
    if (is_class(lambda, {3})) return {{5, 2}};
    throw std::domain_error("weingarten_series: unsupported class (m > 3)");
}

}  // namespace

Rational weingarten_exact_k2(std::int64_t n, const CycleType& lambda) {
    if (n < 3) throw std::domain_error("weingarten_exact_k2: requires n >= 3");
    if (is_class(lambda, {1})) return Rational(1, n);
    const std::int64_t d = (n - 1) * n * (n + 2);
    if (is_class(lambda, {1, 1})) return Rational(n + 1, d);
    if (is_class(lambda, {2})) return Rational(-1, d);
    throw std::domain_error(
        "weingarten_exact_k2: only m <= 2 classes have closed forms here; "
        "use weingarten_series for m = 3");
}

double weingarten_series(std::int64_t n, const CycleType& lambda, int order) {
    if (order < 1 || order > 5) throw std::domain_error("weingarten_series: order must be in [1,5]");
    const double inv_n = 1.0 / static_cast<double>(n);
    double value = 0.0;
    for (const auto& [power, coeff] : series_terms(lambda)) {
        if (power > order) break;
        value += coeff.to_double() * std::pow(inv_n, power);
    }
    return value;
}

WeingartenValue weingarten_value(std::int64_t n, const CycleType& lambda) {
    WeingartenValue v;
    v.series = series_terms(lambda);
    if (lambda.m() <= 2 && n >= 3) v.exact = weingarten_exact_k2(n, lambda);
    return v;
}

std::int64_t beta_leading(const CycleType& lambda) {
    auto catalan = [](int k) {
        std::int64_t c = 1;
        for (int i = 0; i < k; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
        return c;
    };
    std::int64_t result = 1;
    for (int part : lambda.parts) {
        std::int64_t factor = catalan(part - 1);
        if ((part - 1) % 2 != 0) factor = -factor;
        result *= factor;
    }
    return result;
}

std::int64_t mobius_coefficient(int s) {
    if (s < 1) throw std::domain_error("mobius_coefficient: s must be >= 1");
    std::int64_t fact = 1;
    for (int i = 2; i < s; ++i) fact *= i;
    return (s % 2 == 1) ? fact : -fact;
}

namespace {

// product of Kronecker deltas selected by a pairing over an index list
template <typename Int>
bool delta(const Pairing& p, const std::vector<Int>& idx) {
    for (const auto& [a, b] : p.pairs())
        if (idx[a - 1] != idx[b - 1]) return false;
    return true;
}

}  // namespace

double orthogonal_moment(std::int64_t n, double c_w, const std::vector<int>& row_indices,
                         const std::vector<int>& col_indices) {
    if (row_indices.size() != col_indices.size())
        throw std::domain_error("orthogonal_moment: index lists must have equal length");
    if (row_indices.size() % 2 != 0) return 0.0;  // odd moments vanish
    const int k = static_cast<int>(row_indices.size()) / 2;
    if (k == 0) return 1.0;
    if (k > 3) throw std::domain_error("orthogonal_moment: supported up to eight entries (k <= 3)");
    for (int i : row_indices)
        if (i < 1 || i > n) throw std::domain_error("orthogonal_moment: row index out of range");
    for (int j : col_indices)
        if (j < 1 || j > n) throw std::domain_error("orthogonal_moment: column index out of range");

    const auto pairings = enumerate_pairings(k);
    double sum = 0.0;
    for (const auto& pi : pairings) {
        if (!delta(pi, row_indices)) continue;
        for (const auto& sigma : pairings) {
            if (!delta(sigma, col_indices)) continue;
            const CycleType lambda = coset_cycle_type(pi, sigma);
            const double w = (k <= 2) ? weingarten_exact_k2(n, lambda).to_double()
                                      : weingarten_series(n, lambda);
            sum += w;
        }
    }
    return std::pow(c_w, k) * sum;
}

Rational orthogonal_moment_exact(std::int64_t n, const std::vector<int>& row_indices,
                                 const std::vector<int>& col_indices) {
    if (row_indices.size() != col_indices.size())
        throw std::domain_error("orthogonal_moment_exact: index lists must have equal length");
    if (row_indices.size() % 2 != 0) return Rational(0);
    const int k = static_cast<int>(row_indices.size()) / 2;
    if (k > 2) throw std::domain_error("orthogonal_moment_exact: exact values only for k <= 2");
    if (k == 0) return Rational(1);

    const auto pairings = enumerate_pairings(k);
    Rational sum(0);
    for (const auto& pi : pairings) {
        if (!delta(pi, row_indices)) continue;
        for (const auto& sigma : pairings) {
            if (!delta(sigma, col_indices)) continue;
            sum += weingarten_exact_k2(n, coset_cycle_type(pi, sigma));
        }
    }
    return sum;
}

}  // namespace orthostat
