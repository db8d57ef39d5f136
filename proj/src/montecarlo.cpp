#include "orthostat/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <thread>

namespace orthostat {

namespace {

constexpr double kTwoPi = 6.283185307179586477;

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256::Xoshiro256(RngStream id) {
    std::uint64_t sm = id.seed ^ (id.stream * 0xD2B74407B1CE6E93ULL + 0x8BB4C2D0E9A356D5ULL);
    for (auto& s : state_) s = splitmix64(sm);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t Xoshiro256::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Xoshiro256::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Xoshiro256::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return radius * std::cos(kTwoPi * u2);
}

Eigen::MatrixXd sample_orthogonal(int n, double c_w, Xoshiro256& rng) {
    if (n < 2) throw std::domain_error("sample_orthogonal: n must be >= 2");
    Eigen::MatrixXd gauss(n, n);
    for (int attempt = 0; attempt < 16; ++attempt) {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) gauss(i, j) = rng.normal();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
        const Eigen::MatrixXd& packed = qr.matrixQR();
        bool full_rank = true;
        for (int j = 0; j < n; ++j)
            if (std::abs(packed(j, j)) < 1e-300) full_rank = false;
        if (!full_rank) continue;  // measure-zero event; draw again
        Eigen::MatrixXd q = qr.householderQ();
        for (int j = 0; j < n; ++j)
            if (packed(j, j) < 0.0) q.col(j) = -q.col(j);
        return std::sqrt(c_w) * q;
    }
    throw std::runtime_error("sample_orthogonal: repeated rank deficiency");
}

void McConfig::validate() const {
    if (width < 3) throw std::domain_error("McConfig: width must be >= 3");
    if (width > 512) throw std::domain_error("McConfig: width above the 512 memory guard");
    if (depth < 1) throw std::domain_error("McConfig: depth must be >= 1");
    if (!(c_w > 0.0)) throw std::domain_error("McConfig: c_w must be positive");
    if (n_net < 2) throw std::domain_error("McConfig: need at least two networks");
    if (n_stats < 1) throw std::domain_error("McConfig: need at least one repetition");
}

std::vector<Eigen::VectorXd> forward_pass(const std::vector<Eigen::MatrixXd>& weights,
                                          const Eigen::VectorXd& x) {
    std::vector<Eigen::VectorXd> z;
    z.reserve(weights.size());
    for (std::size_t ell = 0; ell < weights.size(); ++ell) {
        if (ell == 0) {
            if (weights[0].cols() != x.size())
                throw std::domain_error("forward_pass: input length mismatch");
            z.push_back(weights[0] * x);
        } else {
            z.push_back(weights[ell] * z.back().array().tanh().matrix());
        }
    }
    return z;
}

std::vector<Eigen::MatrixXd> ntk_forward(const std::vector<Eigen::MatrixXd>& weights,
                                         const std::vector<Eigen::VectorXd>& z_a,
                                         const std::vector<Eigen::VectorXd>& z_b,
                                         const Eigen::VectorXd& x_a, const Eigen::VectorXd& x_b,
                                         const McConfig& cfg) {
    const int n = cfg.width;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<Eigen::MatrixXd> ntk;
    ntk.reserve(weights.size());

    Eigen::MatrixXd current = (cfg.lambda_b.at(1) + cfg.lambda_w.at(1) * inv_n * x_a.dot(x_b)) *
                              Eigen::MatrixXd::Identity(n, n);
    ntk.push_back(current);

    for (std::size_t ell = 1; ell < weights.size(); ++ell) {
        const int layer = static_cast<int>(ell) + 1;
        const Eigen::ArrayXd act_a = z_a[ell - 1].array().tanh();
        const Eigen::ArrayXd act_b = z_b[ell - 1].array().tanh();
        const Eigen::ArrayXd slope_a = 1.0 - act_a.square();
        const Eigen::ArrayXd slope_b = 1.0 - act_b.square();

        Eigen::MatrixXd scaled = current;
        scaled.array().colwise() *= slope_a;
        scaled.array().rowwise() *= slope_b.transpose();
        current.noalias() = weights[ell] * scaled * weights[ell].transpose();
        current += (cfg.lambda_b.at(layer) + cfg.lambda_w.at(layer) * inv_n * (act_a * act_b).sum()) *
                   Eigen::MatrixXd::Identity(n, n);
        ntk.push_back(current);
    }
    return ntk;
}

int resolve_threads(const McConfig& cfg) {
    int threads = cfg.threads;
    if (threads <= 0) {
        if (const char* env = std::getenv("ORTHOSTAT_THREADS")) threads = std::atoi(env);
    }
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
    return threads;
}

namespace {

constexpr int kChunkSamples = 8;

// chunked parallel-for whose work partition depends only on the total count;
// per-chunk outputs are folded in chunk order afterwards, so the result is
// identical for any worker count
void run_chunks(int total, int threads, const std::function<void(int, int)>& chunk_body) {
    const int chunks = (total + kChunkSamples - 1) / kChunkSamples;
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= chunks) return;
            const int begin = c * kChunkSamples;
            const int end = std::min(total, begin + kChunkSamples);
            chunk_body(begin, end);
        }
    };
    if (threads <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

// per-network, per-layer contractions entering the estimators
struct SampleSummary {
    double sum2 = 0.0;    // sum_i z_i^2
    double sum4 = 0.0;    // sum_i z_i^4
    double trace = 0.0;   // tr NTK
    double quad = 0.0;    // z^T NTK z
    double fro2 = 0.0;    // |NTK|_F^2
    Eigen::VectorXd z;    // preactivations
    Eigen::VectorXd diag; // diag(NTK)
};

struct Repetition {
    std::vector<std::vector<SampleSummary>> samples;  // [layer][sample]
    std::vector<Eigen::MatrixXd> ntk_mean;            // [layer]
};

Repetition run_repetition(const McConfig& cfg, const Eigen::VectorXd& x,
                          std::uint64_t stream_base, int threads) {
    const int n = cfg.width;
    const int depth = cfg.depth;
    const int chunks = (cfg.n_net + kChunkSamples - 1) / kChunkSamples;

    Repetition rep;
    rep.samples.assign(static_cast<std::size_t>(depth),
                       std::vector<SampleSummary>(static_cast<std::size_t>(cfg.n_net)));
    std::vector<std::vector<Eigen::MatrixXd>> chunk_sums(
        static_cast<std::size_t>(chunks),
        std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(depth),
                                     Eigen::MatrixXd::Zero(n, n)));

    run_chunks(cfg.n_net, threads, [&](int begin, int end) {
        const int chunk = begin / kChunkSamples;
        for (int sample = begin; sample < end; ++sample) {
            Xoshiro256 rng({cfg.seed, stream_base + static_cast<std::uint64_t>(sample)});
            std::vector<Eigen::MatrixXd> weights;
            weights.reserve(static_cast<std::size_t>(depth));
            for (int ell = 0; ell < depth; ++ell)
                weights.push_back(sample_orthogonal(n, cfg.c_w, rng));

            const auto z = forward_pass(weights, x);
            const auto ntk = ntk_forward(weights, z, z, x, x, cfg);

            for (int ell = 0; ell < depth; ++ell) {
                const auto l = static_cast<std::size_t>(ell);
                SampleSummary& s = rep.samples[l][static_cast<std::size_t>(sample)];
                const Eigen::VectorXd& zl = z[l];
                const Eigen::MatrixXd& tl = ntk[l];
                s.sum2 = zl.squaredNorm();
                s.sum4 = zl.array().square().square().sum();
                s.trace = tl.trace();
                s.quad = zl.dot(tl * zl);
                s.fro2 = tl.squaredNorm();
                s.z = zl;
                s.diag = tl.diagonal();
                chunk_sums[static_cast<std::size_t>(chunk)][l] += tl;
            }
        }
    });

    rep.ntk_mean.assign(static_cast<std::size_t>(depth), Eigen::MatrixXd::Zero(n, n));
    for (int c = 0; c < chunks; ++c)
        for (int ell = 0; ell < depth; ++ell)
            rep.ntk_mean[static_cast<std::size_t>(ell)] +=
                chunk_sums[static_cast<std::size_t>(c)][static_cast<std::size_t>(ell)];
    for (int ell = 0; ell < depth; ++ell)
        rep.ntk_mean[static_cast<std::size_t>(ell)] /= static_cast<double>(cfg.n_net);
    return rep;
}

EnsembleEstimate from_values(const std::vector<double>& values, bool divide_by_sqrt_n) {
    EnsembleEstimate e;
    e.n_samples = static_cast<long>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    if (values.size() > 1) var /= static_cast<double>(values.size() - 1);
    e.mean = mean;
    e.stderr = std::sqrt(var);
    if (divide_by_sqrt_n) e.stderr /= std::sqrt(static_cast<double>(values.size()));
    return e;
}

}  // namespace

TensorEstimates estimate_tensors(const McConfig& cfg, const std::vector<double>& x) {
    cfg.validate();
    if (static_cast<int>(x.size()) != cfg.width)
        throw std::domain_error("estimate_tensors: input length must equal the width");
    if (cfg.n_stats < 2)
        throw std::domain_error(
            "estimate_tensors: the cumulant error bars need at least two repetitions");
    const int threads = resolve_threads(cfg);
    const int depth = cfg.depth;
    const double dn = static_cast<double>(cfg.width);
    const Eigen::VectorXd input = Eigen::Map<const Eigen::VectorXd>(x.data(), cfg.width);

    // kernel/NTK samples pooled across repetitions; cumulants per repetition
    std::vector<std::vector<double>> k_samples(static_cast<std::size_t>(depth));
    std::vector<std::vector<double>> th_samples(static_cast<std::size_t>(depth));
    std::vector<std::vector<double>> v4_rep(static_cast<std::size_t>(depth));
    std::vector<std::vector<double>> d_rep(static_cast<std::size_t>(depth));
    std::vector<std::vector<double>> f_rep(static_cast<std::size_t>(depth));
    std::vector<std::vector<double>> a_rep(static_cast<std::size_t>(depth));
    std::vector<std::vector<double>> b_rep(static_cast<std::size_t>(depth));

    for (int rep_idx = 0; rep_idx < cfg.n_stats; ++rep_idx) {
        const std::uint64_t base =
            static_cast<std::uint64_t>(rep_idx) * static_cast<std::uint64_t>(cfg.n_net);
        const Repetition rep = run_repetition(cfg, input, base, threads);
        const double inv_net = 1.0 / static_cast<double>(cfg.n_net);

        for (int ell = 0; ell < depth; ++ell) {
            const auto l = static_cast<std::size_t>(ell);
            const auto& row = rep.samples[l];
            const Eigen::MatrixXd& mean_ntk = rep.ntk_mean[l];
            const Eigen::VectorXd mean_diag = mean_ntk.diagonal();
            const double mean_tr = mean_ntk.trace();

            double mean_sum2 = 0.0;
            for (const auto& s : row) mean_sum2 += s.sum2;
            mean_sum2 *= inv_net;
            const double kbar = mean_sum2 / dn;

            double v4_acc = 0.0, d_acc = 0.0, f_acc = 0.0, a_acc = 0.0, b_acc = 0.0;
            for (const auto& s : row) {
                k_samples[l].push_back(s.sum2 / dn);
                th_samples[l].push_back(s.trace / dn);

                v4_acc += (s.sum2 * s.sum2 - s.sum4) / (dn - 1.0);
                d_acc += s.sum2 * (s.trace - mean_tr);
                a_acc += (s.trace - mean_tr) * (s.trace - mean_tr);

                double f_term = s.quad - s.z.dot(mean_ntk * s.z);
                // mean_I |T_I - M|_F^2 = mean_I |T_I|_F^2 - |M|_F^2 with
                // M the ensemble mean; only |T_I|^2 needs the sample loop
                b_acc += s.fro2;
                if (cfg.exclude_diagonal) {
                    const Eigen::ArrayXd dd = s.diag.array() - mean_diag.array();
                    f_term -= (s.z.array().square() * dd).sum();
                    b_acc -= s.diag.squaredNorm();
                }
                f_acc += f_term;
            }
            v4_acc = v4_acc * inv_net - dn * kbar * kbar;
            d_acc *= inv_net / dn;
            f_acc *= inv_net / dn;
            a_acc *= inv_net / dn;

            // mean |T_I|^2 - |mean T|^2 (with or without the diagonal block)
            double mean_sq = b_acc * inv_net;
            double center_sq = mean_ntk.squaredNorm();
            if (cfg.exclude_diagonal) center_sq -= mean_diag.squaredNorm();
            b_acc = (mean_sq - center_sq) / dn;

            v4_rep[l].push_back(v4_acc);
            d_rep[l].push_back(d_acc);
            f_rep[l].push_back(f_acc);
            a_rep[l].push_back(a_acc);
            b_rep[l].push_back(b_acc);
        }
    }

    TensorEstimates out;
    for (int ell = 0; ell < depth; ++ell) {
        const auto l = static_cast<std::size_t>(ell);
        out.kernel.push_back(from_values(k_samples[l], true));
        out.ntk.push_back(from_values(th_samples[l], true));
        out.v4.push_back(from_values(v4_rep[l], false));
        out.d.push_back(from_values(d_rep[l], false));
        out.f.push_back(from_values(f_rep[l], false));
        out.a.push_back(from_values(a_rep[l], false));
        out.b.push_back(from_values(b_rep[l], false));
    }
    return out;
}

std::vector<PairSweep> sweep_cw(const McConfig& cfg, const std::vector<double>& cw_values,
                                const std::vector<double>& x1, const std::vector<double>& x2) {
    cfg.validate();
    if (static_cast<int>(x1.size()) != cfg.width || static_cast<int>(x2.size()) != cfg.width)
        throw std::domain_error("sweep_cw: input lengths must equal the width");
    const int threads = resolve_threads(cfg);
    const int n = cfg.width;
    const int depth = cfg.depth;
    const double dn = static_cast<double>(n);
    const Eigen::VectorXd xa = Eigen::Map<const Eigen::VectorXd>(x1.data(), n);
    const Eigen::VectorXd xb = Eigen::Map<const Eigen::VectorXd>(x2.data(), n);

    std::vector<PairSweep> results;
    results.reserve(cw_values.size());
    for (std::size_t cw_idx = 0; cw_idx < cw_values.size(); ++cw_idx) {
        McConfig local = cfg;
        local.c_w = cw_values[cw_idx];

        // [component][layer][sample]
        std::vector<std::vector<std::vector<double>>> vals(
            6, std::vector<std::vector<double>>(
                   static_cast<std::size_t>(depth),
                   std::vector<double>(static_cast<std::size_t>(cfg.n_net))));

        run_chunks(cfg.n_net, threads, [&](int begin, int end) {
            for (int sample = begin; sample < end; ++sample) {
                Xoshiro256 rng({cfg.seed, cw_idx * static_cast<std::uint64_t>(cfg.n_net) +
                                              static_cast<std::uint64_t>(sample)});
                std::vector<Eigen::MatrixXd> weights;
                weights.reserve(static_cast<std::size_t>(depth));
                for (int ell = 0; ell < depth; ++ell)
                    weights.push_back(sample_orthogonal(n, local.c_w, rng));
                const auto za = forward_pass(weights, xa);
                const auto zb = forward_pass(weights, xb);
                const auto taa = ntk_forward(weights, za, za, xa, xa, local);
                const auto tab = ntk_forward(weights, za, zb, xa, xb, local);
                const auto tbb = ntk_forward(weights, zb, zb, xb, xb, local);
                for (int ell = 0; ell < depth; ++ell) {
                    const auto l = static_cast<std::size_t>(ell);
                    const auto idx = static_cast<std::size_t>(sample);
                    vals[0][l][idx] = za[l].squaredNorm() / dn;
                    vals[1][l][idx] = za[l].dot(zb[l]) / dn;
                    vals[2][l][idx] = zb[l].squaredNorm() / dn;
                    vals[3][l][idx] = taa[l].trace() / dn;
                    vals[4][l][idx] = tab[l].trace() / dn;
                    vals[5][l][idx] = tbb[l].trace() / dn;
                }
            }
        });

        PairSweep sweep;
        sweep.c_w = local.c_w;
        for (int ell = 0; ell < depth; ++ell) {
            const auto l = static_cast<std::size_t>(ell);
            sweep.k11.push_back(from_values(vals[0][l], true));
            sweep.k12.push_back(from_values(vals[1][l], true));
            sweep.k22.push_back(from_values(vals[2][l], true));
            sweep.th11.push_back(from_values(vals[3][l], true));
            sweep.th12.push_back(from_values(vals[4][l], true));
            sweep.th22.push_back(from_values(vals[5][l], true));
        }
        results.push_back(std::move(sweep));
    }
    return results;
}

}  // namespace orthostat
