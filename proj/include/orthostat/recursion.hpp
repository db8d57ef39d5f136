#pragma once

#include <string>
#include <vector>

#include "orthostat/gauss_expect.hpp"

namespace orthostat {

/// Per-layer training hyperparameter schedule. The critical tanh choice is
/// lambda_b(l) = 1/l, lambda_w(l) = 1.
struct Schedule {
    enum class Kind { constant, inverse_depth };
    Kind kind = Kind::constant;
    double value = 1.0;

    double at(int ell) const {
        return kind == Kind::constant ? value : value / static_cast<double>(ell);
    }

    static Schedule constant(double v) { return {Kind::constant, v}; }
    static Schedule inverse_depth(double v = 1.0) { return {Kind::inverse_depth, v}; }
};

/// How the weight ensemble enters the quartic/sextic updates. The orthogonal
/// ensemble subtracts the two crossed kernel products in the quartic source
/// (and the matching terms in the sextic one); dropping those subtractions
/// recovers the i.i.d.-Gaussian recursion.
enum class WeightEnsemble { orthogonal, gaussian };

struct NetworkConfig {
    int width = 50;                 // hidden width n (>= 3)
    int depth = 10;                 // number of layers L (>= 1)
    double c_w = 1.0;               // weight variance hyperparameter
    Schedule lambda_b = Schedule::inverse_depth();
    Schedule lambda_w = Schedule::constant(1.0);
    WeightEnsemble ensemble = WeightEnsemble::orthogonal;

    void validate() const;
};

/// The twelve finite-width tensors tracked alongside K and Theta in the
/// single-input system.
struct TensorSet {
    double v4 = 0.0;
    double d = 0.0;
    double f = 0.0;
    double a = 0.0;
    double b = 0.0;
    double p = 0.0;
    double q = 0.0;
    double r = 0.0;
    double s = 0.0;
    double t = 0.0;
    double u = 0.0;
    double v6 = 0.0;

    bool finite() const;
};

struct LayerState {
    int ell = 1;
    double kernel = 0.0;  // K
    double ntk = 0.0;     // Theta
    TensorSet tensors;
};

struct Trajectory {
    std::vector<LayerState> states;  // ell = 1..L

    const LayerState& at(int ell) const { return states.at(static_cast<std::size_t>(ell - 1)); }
    int depth() const { return static_cast<int>(states.size()); }
};

/// Normalized tensors: ratios to the infinite-width kernels,
///   Dt = D/(K Theta), Ft = F/(K Theta), At = A/Theta^2, Bt = B/Theta^2,
///   Pt = P/Theta^2, Qt = Q/Theta^2, Rt = R K/Theta^3, St = S K/Theta^3,
///   Tt = T K/Theta^3, Ut = U K/Theta^3, V4t = V4/K^2, V6t = V6/K^3.
struct NormalizedState {
    int ell = 1;
    double kernel = 0.0;
    double ntk = 0.0;
    TensorSet tensors;  // holds the tilde values in the same slots
};

/// Deterministic layer-by-layer solver for the single-input system and the
/// two-input kernel/NTK pair.
class RecursionEngine {
public:
    explicit RecursionEngine(const GaussExpect& quad) : quad_(&quad) {}

    /// Layer-1 state: K = (c_w/n) x.x, Theta = lambda_b(1) + (lambda_w(1)/n) x.x,
    /// V4 = -2 K^2 for the orthogonal ensemble (0 for Gaussian), every other
    /// tensor zero.
    LayerState init_from_input(const std::vector<double>& x, const NetworkConfig& cfg) const;

    /// K at the next layer: c_w <sigma^2>_K. Throws on a degenerate kernel.
    double step_kernel(const LayerState& state, const NetworkConfig& cfg) const;

    /// Theta at the next layer:
    /// lambda_b + lambda_w <sigma sigma> + c_w <sigma' sigma'> Theta.
    double step_ntk(const LayerState& state, const NetworkConfig& cfg) const;

    /// All twelve tensors advanced one layer from the given snapshot.
    /// Every update reads the layer-l state; the one explicit forward
    /// reference (the dNTK trace uses F at l+1) is computed first.
    TensorSet step_tensors_single(const LayerState& state, const NetworkConfig& cfg) const;

    LayerState step(const LayerState& state, const NetworkConfig& cfg) const;

    Trajectory run(const std::vector<double>& x, const NetworkConfig& cfg) const;

    static std::vector<NormalizedState> normalize(const Trajectory& trajectory);

    /// Two-input mode: kernel and NTK 2x2 blocks only.
    struct PairState {
        int ell = 1;
        Kernel2 kernel;
        Kernel2 ntk;  // same symmetric layout
    };
    PairState init_pair(const std::vector<double>& x1, const std::vector<double>& x2,
                        const NetworkConfig& cfg) const;
    PairState step_pair(const PairState& state, const NetworkConfig& cfg) const;
    std::vector<PairState> run_pair(const std::vector<double>& x1, const std::vector<double>& x2,
                                    const NetworkConfig& cfg) const;

private:
    const GaussExpect* quad_;
};

/// Column order shared by the trajectory CSVs and the comparison report.
const std::vector<std::string>& tensor_names();  // K,Theta,V4,D,F,A,B,P,Q,R,S,T,U,V6

double tensor_component(const LayerState& state, const std::string& name);
double normalized_component(const NormalizedState& state, const std::string& name);

}  // namespace orthostat
