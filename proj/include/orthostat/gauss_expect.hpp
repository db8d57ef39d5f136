#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace orthostat {

/// tanh and its first four derivatives in closed form, plus the Taylor
/// coefficients sigma_m = sigma^(m)(0) used by the series cross-checks and the
/// deep-layer expansion machinery. Derivatives are expressed through
/// t = tanh(z) via t' = 1 - t^2, so no finite differencing enters downstream
/// recursions.
struct TanhActivation {
    static constexpr int max_taylor_order = 20;

    /// sigma^(m)(0); zero for even m, integers for odd m up to 19.
    static std::int64_t taylor_coefficient(int m);

    /// derivative of given order (0..4) evaluated at z
    static double derivative(int order, double z);
};

/// Product integrand z^a sigma^b (sigma')^c (sigma'')^d (sigma''')^e
/// (sigma'''')^f. Covers every Gaussian expectation entering the layer
/// recursions, including the six-sigma moment of the sextic vertex.
struct MomentSpec {
    int z = 0;       // explicit z factors (at most 2)
    int s = 0;       // sigma
    int s1 = 0;      // sigma'
    int s2 = 0;      // sigma''
    int s3 = 0;      // sigma'''
    int s4 = 0;      // sigma''''

    double eval(double zval) const;
    bool odd() const { return (z + s + s2 + s4) % 2 != 0; }
    void validate() const;
};

/// Symmetric 2x2 covariance of a preactivation pair.
struct Kernel2 {
    double k11 = 0.0;
    double k22 = 0.0;
    double k12 = 0.0;
};

/// Susceptibilities and auxiliary functions entering every recursion:
///   chi_par  = (c_w / K) <z sigma sigma'>
///   chi_perp = c_w <(sigma')^2>
///   h        = c_w / (4 K^2) <(z^2 - K)(sigma')^2>
///   g        = <sigma^2>
struct Susceptibilities {
    double chi_par = 0.0;
    double chi_perp = 0.0;
    double h = 0.0;
    double g = 0.0;
};

/// Gauss-Hermite expectation engine with a fixed node count. The node table is
/// built once and shared; all evaluation methods are const and thread-safe.
class GaussExpect {
public:
    static constexpr int default_nodes = 300;

    explicit GaussExpect(int nodes = default_nodes);

    int nodes() const { return static_cast<int>(points_.size()); }

    /// E[f(z)] for z ~ N(0, K), f given by spec. Throws on K <= 0 or a
    /// non-finite result.
    double expect1(const MomentSpec& spec, double variance) const;

    /// E[f(z1) g(z2)] for (z1, z2) ~ N(0, K). A numerically rank-1 K
    /// (|det| < 1e-14 k11 k22) collapses to a univariate integral along the
    /// correlated direction. Throws on an indefinite K.
    double expect2(const MomentSpec& spec_a, const MomentSpec& spec_b, const Kernel2& cov) const;

    Susceptibilities susceptibilities(double variance, double c_w) const;

private:
    // standard Gauss-Hermite pairs: sum_i w_i f(x_i) ~ integral f(x) e^{-x^2} dx
    std::vector<double> points_;
    std::vector<double> weights_;
};

}  // namespace orthostat
