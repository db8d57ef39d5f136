#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "orthostat/recursion.hpp"

namespace orthostat {

/// Counter-addressed RNG stream: the same (seed, stream) always reproduces the
/// same sequence, and distinct stream ids give statistically independent
/// sequences. One stream per sampled network keeps the ensemble reproducible
/// under any parallel schedule.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

/// xoshiro256++ seeded through SplitMix64 from (seed, stream).
class Xoshiro256 {
public:
    explicit Xoshiro256(RngStream id);

    std::uint64_t next_u64();
    double uniform01();  // [0, 1)
    double normal();     // standard normal via Box-Muller

private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Draw from the orthogonal group scaled by sqrt(c_w): orthonormalize an
/// i.i.d. standard-normal matrix and flip column signs so the triangular
/// factor has a positive diagonal. Without the sign fix the factorization's
/// sign convention biases the distribution away from the invariant measure.
Eigen::MatrixXd sample_orthogonal(int n, double c_w, Xoshiro256& rng);

struct McConfig {
    int width = 50;
    int depth = 10;
    double c_w = 1.0;
    Schedule lambda_b = Schedule::inverse_depth();
    Schedule lambda_w = Schedule::constant(1.0);
    int n_net = 200;            // networks per repetition
    int n_stats = 5;            // repetitions for the cumulant error bars
    std::uint64_t seed = 1;
    bool exclude_diagonal = false;  // drop i = j terms in the F/B estimators
    int threads = 0;            // 0: ORTHOSTAT_THREADS, else hardware

    void validate() const;
};

/// Preactivations z^(1) = W^(1) x, z^(l) = W^(l) tanh(z^(l-1)).
std::vector<Eigen::VectorXd> forward_pass(const std::vector<Eigen::MatrixXd>& weights,
                                          const Eigen::VectorXd& x);

/// Layer-wise NTK propagation for one input pair: the layer-1 kernel is the
/// deterministic diagonal lambda_b(1) + lambda_w(1)/n x_a.x_b, and each later
/// layer adds the fresh-parameter diagonal and rotates the previous kernel
/// through W and the activation slopes. No parameter Jacobian is ever formed.
std::vector<Eigen::MatrixXd> ntk_forward(const std::vector<Eigen::MatrixXd>& weights,
                                         const std::vector<Eigen::VectorXd>& z_a,
                                         const std::vector<Eigen::VectorXd>& z_b,
                                         const Eigen::VectorXd& x_a, const Eigen::VectorXd& x_b,
                                         const McConfig& cfg);

struct EnsembleEstimate {
    double mean = 0.0;
    double stderr = 0.0;
    long n_samples = 0;
};

/// Single-input ensemble estimates per layer (index 0 = layer 1).
/// Kernel and NTK carry per-network standard errors; the cumulants carry the
/// across-repetition deviation.
struct TensorEstimates {
    std::vector<EnsembleEstimate> kernel, ntk, v4, d, f, a, b;
};

TensorEstimates estimate_tensors(const McConfig& cfg, const std::vector<double>& x);

/// Kernel/NTK components for an input pair across a list of c_w values.
struct PairSweep {
    double c_w = 0.0;
    std::vector<EnsembleEstimate> k11, k12, k22, th11, th12, th22;
};

std::vector<PairSweep> sweep_cw(const McConfig& cfg, const std::vector<double>& cw_values,
                                const std::vector<double>& x1, const std::vector<double>& x2);

/// Worker count for a config: explicit setting, else ORTHOSTAT_THREADS, else
/// hardware concurrency.
int resolve_threads(const McConfig& cfg);

}  // namespace orthostat
