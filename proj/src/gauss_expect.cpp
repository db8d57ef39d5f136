#include "orthostat/gauss_expect.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace orthostat {

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;
}

std::int64_t TanhActivation::taylor_coefficient(int m) {
    if (m < 0 || m > max_taylor_order)
        throw std::domain_error("TanhActivation: Taylor order out of range");
    if (m % 2 == 0) return 0;
    switch (m) {
        case 1: return 1;
        case 3: return -2;
        case 5: return 16;
        case 7: return -272;
        case 9: return 7936;
        case 11: return -353792;
        case 13: return 22368256;
        case 15: return -1903757312LL;
        case 17: return 209865342976LL;
        case 19: return -29088885112832LL;
    }
    return 0;  // unreachable
}

double TanhActivation::derivative(int order, double z) {
    const double t = std::tanh(z);
    const double u = 1.0 - t * t;
    switch (order) {
        case 0: return t;
        case 1: return u;
        case 2: return -2.0 * t * u;
        case 3: return u * (6.0 * t * t - 2.0);
        case 4: return 8.0 * t * u * (2.0 - 3.0 * t * t);
    }
    throw std::domain_error("TanhActivation: derivative order out of range");
}

double MomentSpec::eval(double zval) const {
    const double t = std::tanh(zval);
    const double u = 1.0 - t * t;
    double value = 1.0;
    for (int i = 0; i < z; ++i) value *= zval;
    for (int i = 0; i < s; ++i) value *= t;
    for (int i = 0; i < s1; ++i) value *= u;
    if (s2 > 0) {
        const double d2 = -2.0 * t * u;
        for (int i = 0; i < s2; ++i) value *= d2;
    }
    if (s3 > 0) {
        const double d3 = u * (6.0 * t * t - 2.0);
        for (int i = 0; i < s3; ++i) value *= d3;
    }
    if (s4 > 0) {
        const double d4 = 8.0 * t * u * (2.0 - 3.0 * t * t);
        for (int i = 0; i < s4; ++i) value *= d4;
    }
    return value;
}

void MomentSpec::validate() const {
    if (z < 0 || s < 0 || s1 < 0 || s2 < 0 || s3 < 0 || s4 < 0)
        throw std::domain_error("MomentSpec: negative multiplicity");
    if (z > 2) throw std::domain_error("MomentSpec: at most two explicit z factors");
    if (s1 + s2 + s3 + s4 > 4)
        throw std::domain_error("MomentSpec: at most four derivative factors");
    if (s > 8) throw std::domain_error("MomentSpec: sigma power too large");
}

namespace {

// eigenvalues of a symmetric tridiagonal matrix by the implicit QL method;
// d holds the diagonal (overwritten with eigenvalues), e the subdiagonal in
// e[1..n-1]
void tridiagonal_eigenvalues(std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(d.size());
    const double eps = std::numeric_limits<double>::epsilon();
    for (int i = 1; i < n; ++i) e[static_cast<std::size_t>(i - 1)] = e[static_cast<std::size_t>(i)];
    e[static_cast<std::size_t>(n - 1)] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m = l;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 50)
                    throw std::runtime_error("GaussExpect: tridiagonal QL did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace

GaussExpect::GaussExpect(int nodes) {
    if (nodes < 2) throw std::domain_error("GaussExpect: need at least two nodes");
    const int n = nodes;

    // Hermite nodes as eigenvalues of the Jacobi matrix (zero diagonal,
    // subdiagonal sqrt(k/2)), then a short Newton polish on the orthonormal
    // recurrence, which also yields the derivative for the weight
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
    std::vector<double> sub(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k < n; ++k) sub[static_cast<std::size_t>(k)] = std::sqrt(k / 2.0);
    tridiagonal_eigenvalues(diag, sub);
    std::sort(diag.begin(), diag.end());

    points_.assign(static_cast<std::size_t>(n), 0.0);
    weights_.assign(static_cast<std::size_t>(n), 0.0);
    const double norm0 = std::pow(M_PI, -0.25);
    for (int i = 0; i < n; ++i) {
        double z = diag[static_cast<std::size_t>(i)];
        double deriv = 0.0;
        for (int iter = 0; iter < 8; ++iter) {
            double p1 = norm0;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            deriv = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / deriv;
            z -= dz;
            if (std::abs(dz) < 1e-14 * (1.0 + std::abs(z))) break;
        }
        points_[static_cast<std::size_t>(i)] = z;
        weights_[static_cast<std::size_t>(i)] = 2.0 / (deriv * deriv);
    }
}

double GaussExpect::expect1(const MomentSpec& spec, double variance) const {
    if (!(variance > 0.0)) throw std::domain_error("expect1: variance must be positive");
    spec.validate();
    const double scale = std::sqrt(2.0 * variance);
    double acc = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i)
        acc += weights_[i] * spec.eval(scale * points_[i]);
    const double result = acc / kSqrtPi;
    if (!std::isfinite(result)) throw std::runtime_error("expect1: non-finite result");
    return result;
}

double GaussExpect::expect2(const MomentSpec& spec_a, const MomentSpec& spec_b,
                            const Kernel2& cov) const {
    spec_a.validate();
    spec_b.validate();
    if (!(cov.k11 > 0.0) || !(cov.k22 > 0.0))
        throw std::domain_error("expect2: diagonal covariance entries must be positive");
    const double det = cov.k11 * cov.k22 - cov.k12 * cov.k12;
    const double scale_det = 1e-14 * cov.k11 * cov.k22;
    if (det < -scale_det) throw std::domain_error("expect2: covariance is indefinite");

    const double a = std::sqrt(cov.k11);   // z1 = a u
    const double b = cov.k12 / a;          // z2 = b u + c v
    if (det <= scale_det) {
        // rank one: z2 is a deterministic multiple of z1
        double acc = 0.0;
        for (std::size_t i = 0; i < points_.size(); ++i) {
            const double u = std::sqrt(2.0) * points_[i];
            acc += weights_[i] * spec_a.eval(a * u) * spec_b.eval(b * u);
        }
        const double result = acc / kSqrtPi;
        if (!std::isfinite(result)) throw std::runtime_error("expect2: non-finite result");
        return result;
    }

    const double c = std::sqrt(det / cov.k11);
    double acc = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double u = std::sqrt(2.0) * points_[i];
        const double fa = spec_a.eval(a * u);
        double inner = 0.0;
        for (std::size_t j = 0; j < points_.size(); ++j) {
            const double v = std::sqrt(2.0) * points_[j];
            inner += weights_[j] * spec_b.eval(b * u + c * v);
        }
        acc += weights_[i] * fa * inner;
    }
    const double result = acc / (kSqrtPi * kSqrtPi);
    if (!std::isfinite(result)) throw std::runtime_error("expect2: non-finite result");
    return result;
}

Susceptibilities GaussExpect::susceptibilities(double variance, double c_w) const {
    if (!(variance > 0.0)) throw std::domain_error("susceptibilities: variance must be positive");
    Susceptibilities s;
    s.g = expect1({.s = 2}, variance);
    const double dd = expect1({.s1 = 2}, variance);
    s.chi_perp = c_w * dd;
    s.chi_par = (c_w / variance) * expect1({.z = 1, .s = 1, .s1 = 1}, variance);
    const double z2dd = expect1({.z = 2, .s1 = 2}, variance);
    s.h = c_w / (4.0 * variance * variance) * (z2dd - variance * dd);
    return s;
}

}  // namespace orthostat
