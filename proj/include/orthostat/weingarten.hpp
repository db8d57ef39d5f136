#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "orthostat/pairing.hpp"
#include "orthostat/rational.hpp"

namespace orthostat {

/// Orthogonal-group Weingarten function values for the cycle types arising
/// from up to six matrix entries (m <= 3). Values for m <= 2 are exact
/// rationals in the matrix dimension n; the m = 3 classes are available only
/// as truncated 1/n series.
struct WeingartenValue {
    std::optional<Rational> exact;
    // (power of 1/n, coefficient) with strictly increasing powers
    std::vector<std::pair<int, Rational>> series;
};

/// Exact Weingarten value for m <= 2 classes:
///   Wg[1]   = 1/n
///   Wg[1,1] = (n+1) / ((n-1) n (n+2))
///   Wg[2]   = -1   / ((n-1) n (n+2))
/// Requires n >= 3 so the denominators are nonzero and the formulas apply.
Rational weingarten_exact_k2(std::int64_t n, const CycleType& lambda);

/// Truncated 1/n series value through 1/n^order (order <= 5):
///   Wg[1]     = 1/n                      (exact at every order)
///   Wg[1,1]   = 1/n^2 + 2/n^4 - 2/n^5
///   Wg[2]     = -1/n^3 + 1/n^4 - 3/n^5
///   Wg[1,1,1] = 1/n^3 + 6/n^5
///   Wg[2,1]   = -1/n^4 + 1/n^5
///   Wg[3]     = 2/n^5
double weingarten_series(std::int64_t n, const CycleType& lambda, int order = 5);

/// The series terms behind weingarten_series, exposed for table printing.
WeingartenValue weingarten_value(std::int64_t n, const CycleType& lambda);

/// Leading 1/n coefficient of the Weingarten function on class lambda:
/// the signed Catalan product prod_i (-1)^(lambda_i - 1) C_(lambda_i - 1).
std::int64_t beta_leading(const CycleType& lambda);

/// Sign-factorial weight (-1)^(s-1) (s-1)! attached to an s-block partition
/// when assembling cumulants from moments.
std::int64_t mobius_coefficient(int s);

/// Joint moment E[W_{i1 j1} ... W_{i2k j2k}] of the entries of a Haar
/// orthogonal matrix scaled by sqrt(c_w):
///   sum over pairings pi, sigma of delta_i^pi delta_j^sigma Wg(pi, sigma),
/// scaled by c_w^k. Exact k <= 2 Weingarten values are used; k = 3 falls back
/// to the truncated series. Odd-length index lists return 0 (odd moments of
/// the orthogonal group vanish).
double orthogonal_moment(std::int64_t n, double c_w,
                         const std::vector<int>& row_indices,
                         const std::vector<int>& col_indices);

/// Exact-rational variant of orthogonal_moment for k <= 2, used by the
/// identity tests that check row orthonormality through moments.
Rational orthogonal_moment_exact(std::int64_t n, const std::vector<int>& row_indices,
                                 const std::vector<int>& col_indices);

}  // namespace orthostat
