#include "orthostat/recursion.hpp"

#include <cmath>
#include <stdexcept>

namespace orthostat {

void NetworkConfig::validate() const {
    if (width < 3) throw std::domain_error("NetworkConfig: width must be >= 3");
    if (depth < 1) throw std::domain_error("NetworkConfig: depth must be >= 1");
    if (!(c_w > 0.0)) throw std::domain_error("NetworkConfig: c_w must be positive");
}

bool TensorSet::finite() const {
    for (double v : {v4, d, f, a, b, p, q, r, s, t, u, v6})
        if (!std::isfinite(v)) return false;
    return true;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// the Gaussian expectations feeding one layer step, evaluated once
struct LayerMoments {
    double s2;      // <sigma^2>                        (= g)
    double s4;      // <sigma^4>
    double s6;      // <sigma^6>
    double d2;      // <(sigma')^2>
    double d4;      // <(sigma')^4>
    double s2d2;    // <sigma^2 (sigma')^2>
    double sdds;    // <sigma'' sigma' sigma' sigma>
    double sdd;     // <sigma'' sigma>
    double t3d3;    // <sigma''' (sigma')^3>
    double t3d1;    // <sigma''' sigma'>
    double dd2;     // <(sigma'')^2>
    double dd2d2;   // <(sigma'')^2 (sigma')^2>
    double zsd;     // <z sigma sigma'>
    double zdds;    // <z sigma'' sigma'>
    double s3dd;    // <sigma^3 sigma''>
    double sq4;     // <sigma sigma''''>
};

LayerMoments layer_moments(const GaussExpect& quad, double kernel) {
    LayerMoments m;
    m.s2 = quad.expect1({.s = 2}, kernel);
    m.s4 = quad.expect1({.s = 4}, kernel);
    m.s6 = quad.expect1({.s = 6}, kernel);
    m.d2 = quad.expect1({.s1 = 2}, kernel);
    m.d4 = quad.expect1({.s1 = 4}, kernel);
    m.s2d2 = quad.expect1({.s = 2, .s1 = 2}, kernel);
    m.sdds = quad.expect1({.s = 1, .s1 = 2, .s2 = 1}, kernel);
    m.sdd = quad.expect1({.s = 1, .s2 = 1}, kernel);
    m.t3d3 = quad.expect1({.s1 = 3, .s3 = 1}, kernel);
    m.t3d1 = quad.expect1({.s1 = 1, .s3 = 1}, kernel);
    m.dd2 = quad.expect1({.s2 = 2}, kernel);
    m.dd2d2 = quad.expect1({.s1 = 2, .s2 = 2}, kernel);
    m.zsd = quad.expect1({.z = 1, .s = 1, .s1 = 1}, kernel);
    m.zdds = quad.expect1({.z = 1, .s1 = 1, .s2 = 1}, kernel);
    m.s3dd = quad.expect1({.s = 3, .s2 = 1}, kernel);
    m.sq4 = quad.expect1({.s = 1, .s4 = 1}, kernel);
    return m;
}

}  // namespace

LayerState RecursionEngine::init_from_input(const std::vector<double>& x,
                                            const NetworkConfig& cfg) const {
    cfg.validate();
    if (static_cast<int>(x.size()) != cfg.width)
        throw std::domain_error("init_from_input: input length must equal the width");
    const double norm2 = dot(x, x) / static_cast<double>(cfg.width);

    LayerState state;
    state.ell = 1;
    state.kernel = cfg.c_w * norm2;
    state.ntk = cfg.lambda_b.at(1) + cfg.lambda_w.at(1) * norm2;
    if (cfg.ensemble == WeightEnsemble::orthogonal)
        state.tensors.v4 = -2.0 * state.kernel * state.kernel;
    // a first Gaussian layer produces exactly Gaussian preactivations, so the
    // quartic (and every higher) cumulant starts at zero in that ensemble
    return state;
}

double RecursionEngine::step_kernel(const LayerState& state, const NetworkConfig& cfg) const {
    if (!(state.kernel > 0.0))
        throw std::domain_error("step_kernel: degenerate kernel (K <= 0)");
    return cfg.c_w * quad_->expect1({.s = 2}, state.kernel);
}

double RecursionEngine::step_ntk(const LayerState& state, const NetworkConfig& cfg) const {
    if (!(state.kernel > 0.0)) throw std::domain_error("step_ntk: degenerate kernel (K <= 0)");
    const int next = state.ell + 1;
    const double s2 = quad_->expect1({.s = 2}, state.kernel);
    const double d2 = quad_->expect1({.s1 = 2}, state.kernel);
    return cfg.lambda_b.at(next) + cfg.lambda_w.at(next) * s2 + cfg.c_w * d2 * state.ntk;
}

TensorSet RecursionEngine::step_tensors_single(const LayerState& state,
                                               const NetworkConfig& cfg) const {
    if (!(state.kernel > 0.0))
        throw std::domain_error("step_tensors_single: degenerate kernel (K <= 0)");

    const double cw = cfg.c_w;
    const double kernel = state.kernel;
    const double theta = state.ntk;
    const int next = state.ell + 1;
    const double lw = cfg.lambda_w.at(next);

    const LayerMoments mo = layer_moments(*quad_, kernel);
    const Susceptibilities su = quad_->susceptibilities(kernel, cw);
    const double xpar = su.chi_par;
    const double xperp = su.chi_perp;
    const double h = su.h;
    const double g = su.g;

    const TensorSet& in = state.tensors;
    TensorSet out;

    // quartic vertex; the ensemble decides how many kernel-squared products
    // are subtracted from the connected four-sigma moment
    const double v4_sub = (cfg.ensemble == WeightEnsemble::orthogonal) ? 3.0 : 1.0;
    out.v4 = cw * cw * (mo.s4 - v4_sub * g * g) + xpar * xpar * in.v4;

    // mixed kernel/NTK cumulants
    out.f = xpar * xpar * in.f + cw * cw * (mo.s2d2 - mo.s2 * mo.d2) * theta;

    const double src_par = cw * cw * mo.s4 - (cw * g) * (cw * g) + xpar * xpar * in.v4;
    const double src_mix = cw * cw * mo.s2d2 - cw * g * xperp + 2.0 * h * xpar * in.v4;
    out.d = xperp * xpar * in.d + (lw / cw) * src_par + theta * src_mix;

    // NTK variance pair
    out.b = xperp * xperp * in.b + cw * cw * (mo.d4 - mo.d2 * mo.d2) * theta * theta;
    out.a = xperp * xperp * in.a + (lw / cw) * (lw / cw) * src_par +
            2.0 * (lw / cw) * theta * src_mix + 2.0 * (lw / cw) * xperp * xpar * in.d +
            4.0 * h * xperp * theta * in.d +
            theta * theta * (cw * cw * mo.d4 - xperp * xperp + 4.0 * h * h * in.v4);

    // dNTK pair; the trace component references F at the next layer. The
    // F cross term enters with a minus: the deep-layer limits -17/12 for this
    // component and 17/9 for its double-derivative partner both require it,
    // and they pin the sign uniquely given the h that the D and A limits fix.
    const double damp = cw * xperp * mo.sdd + xperp * xperp;
    out.p = cw * cw * mo.sdds * theta * theta + cw * xperp * mo.sdd * in.b + damp * in.p;
    out.q = cw * cw * mo.sdds * theta * theta + (lw / cw) * out.f -
            2.0 * h * xpar * theta * in.f + damp * in.q;

    // ddNTK block
    out.r = xperp * xperp * in.r + lw * cw * mo.sdds * theta * theta +
            cw * cw * mo.t3d3 * theta * theta * theta +
            xperp * (lw * mo.sdd + cw * theta * mo.t3d1) * (in.b + in.p) +
            xperp * (lw * mo.d2 + cw * theta * mo.dd2) * in.p;

    out.s = xperp * xperp * in.s + lw * cw * mo.d4 * theta * theta +
            cw * cw * mo.dd2d2 * theta * theta * theta +
            xperp * (lw * mo.d2 + cw * theta * mo.dd2) * in.b;

    out.t = xperp * xperp * in.t + 2.0 * cw * lw * mo.sdds * theta * theta +
            cw * cw * mo.dd2d2 * theta * theta * theta + lw * lw * theta * mo.s2d2 +
            (lw * mo.zsd + cw * theta * mo.zdds) * (lw * mo.zsd + cw * theta * mo.zdds) * in.f /
                (kernel * kernel) +
            2.0 * xperp * (lw * (mo.sdd + mo.d2) + cw * theta * (mo.t3d1 + mo.dd2)) * in.q;

    out.u = xperp * xperp * in.u + cw * cw * mo.dd2d2 * theta * theta * theta;

    // sextic vertex at equal widths (the two width ratios are 1)
    const double v6_sub = (cfg.ensemble == WeightEnsemble::orthogonal) ? 15.0 : 3.0;
    const double v6_c3 = (cfg.ensemble == WeightEnsemble::orthogonal)
                             ? (30.0 * g * g * g)
                             : (2.0 * g * g * g);
    const double v6_bracket_sub = (cfg.ensemble == WeightEnsemble::orthogonal) ? 3.0 : 1.0;
    out.v6 = cw * cw * cw * (mo.s6 - v6_sub * mo.s4 * g + v6_c3) +
             6.0 * cw * cw * in.v4 * xpar *
                 (3.0 * mo.s2d2 + mo.s3dd - v6_bracket_sub * mo.d2 * g -
                  v6_bracket_sub * g * mo.sdd) +
             1.5 * cw * xpar * xpar * in.v4 * in.v4 * (3.0 * mo.dd2 + 4.0 * mo.t3d1 + mo.sq4) +
             xpar * xpar * xpar * in.v6;

    if (!out.finite()) {
        const char* names[] = {"V4", "D", "F", "A", "B", "P", "Q", "R", "S", "T", "U", "V6"};
        const double vals[] = {out.v4, out.d, out.f, out.a, out.b, out.p,
                               out.q,  out.r, out.s, out.t, out.u, out.v6};
        for (int i = 0; i < 12; ++i)
            if (!std::isfinite(vals[i]))
                throw std::runtime_error(std::string("step_tensors_single: non-finite ") +
                                         names[i]);
    }
    return out;
}

LayerState RecursionEngine::step(const LayerState& state, const NetworkConfig& cfg) const {
    LayerState next;
    next.ell = state.ell + 1;
    next.kernel = step_kernel(state, cfg);
    next.ntk = step_ntk(state, cfg);
    next.tensors = step_tensors_single(state, cfg);
    return next;
}

Trajectory RecursionEngine::run(const std::vector<double>& x, const NetworkConfig& cfg) const {
    Trajectory traj;
    traj.states.reserve(static_cast<std::size_t>(cfg.depth));
    traj.states.push_back(init_from_input(x, cfg));
    for (int ell = 1; ell < cfg.depth; ++ell)
        traj.states.push_back(step(traj.states.back(), cfg));
    return traj;
}

std::vector<NormalizedState> RecursionEngine::normalize(const Trajectory& trajectory) {
    std::vector<NormalizedState> out;
    out.reserve(trajectory.states.size());
    for (const LayerState& st : trajectory.states) {
        if (!(st.kernel > 0.0) || st.ntk == 0.0)
            throw std::domain_error("normalize: zero kernel or NTK denominator");
        const double k = st.kernel;
        const double th = st.ntk;
        NormalizedState ns;
        ns.ell = st.ell;
        ns.kernel = k;
        ns.ntk = th;
        const TensorSet& t = st.tensors;
        ns.tensors.v4 = t.v4 / (k * k);
        ns.tensors.d = t.d / (k * th);
        ns.tensors.f = t.f / (k * th);
        ns.tensors.a = t.a / (th * th);
        ns.tensors.b = t.b / (th * th);
        ns.tensors.p = t.p / (th * th);
        ns.tensors.q = t.q / (th * th);
        ns.tensors.r = t.r * k / (th * th * th);
        ns.tensors.s = t.s * k / (th * th * th);
        ns.tensors.t = t.t * k / (th * th * th);
        ns.tensors.u = t.u * k / (th * th * th);
        ns.tensors.v6 = t.v6 / (k * k * k);
        out.push_back(ns);
    }
    return out;
}

RecursionEngine::PairState RecursionEngine::init_pair(const std::vector<double>& x1,
                                                      const std::vector<double>& x2,
                                                      const NetworkConfig& cfg) const {
    cfg.validate();
    if (static_cast<int>(x1.size()) != cfg.width || static_cast<int>(x2.size()) != cfg.width)
        throw std::domain_error("init_pair: input lengths must equal the width");
    const double inv_n = 1.0 / static_cast<double>(cfg.width);
    PairState st;
    st.ell = 1;
    st.kernel = {cfg.c_w * dot(x1, x1) * inv_n, cfg.c_w * dot(x2, x2) * inv_n,
                 cfg.c_w * dot(x1, x2) * inv_n};
    const double lb = cfg.lambda_b.at(1), lw = cfg.lambda_w.at(1);
    st.ntk = {lb + lw * dot(x1, x1) * inv_n, lb + lw * dot(x2, x2) * inv_n,
              lb + lw * dot(x1, x2) * inv_n};
    return st;
}

RecursionEngine::PairState RecursionEngine::step_pair(const PairState& state,
                                                      const NetworkConfig& cfg) const {
    if (!(state.kernel.k11 > 0.0) || !(state.kernel.k22 > 0.0))
        throw std::domain_error("step_pair: degenerate kernel");
    const int next = state.ell + 1;
    const double lb = cfg.lambda_b.at(next), lw = cfg.lambda_w.at(next);
    const MomentSpec sig{.s = 1}, dsig{.s1 = 1};

    PairState out;
    out.ell = next;
    const double s11 = quad_->expect1({.s = 2}, state.kernel.k11);
    const double s22 = quad_->expect1({.s = 2}, state.kernel.k22);
    const double s12 = quad_->expect2(sig, sig, state.kernel);
    out.kernel = {cfg.c_w * s11, cfg.c_w * s22, cfg.c_w * s12};

    const double d11 = quad_->expect1({.s1 = 2}, state.kernel.k11);
    const double d22 = quad_->expect1({.s1 = 2}, state.kernel.k22);
    const double d12 = quad_->expect2(dsig, dsig, state.kernel);
    out.ntk = {lb + lw * s11 + cfg.c_w * d11 * state.ntk.k11,
               lb + lw * s22 + cfg.c_w * d22 * state.ntk.k22,
               lb + lw * s12 + cfg.c_w * d12 * state.ntk.k12};
    return out;
}

std::vector<RecursionEngine::PairState> RecursionEngine::run_pair(const std::vector<double>& x1,
                                                                  const std::vector<double>& x2,
                                                                  const NetworkConfig& cfg) const {
    std::vector<PairState> states;
    states.reserve(static_cast<std::size_t>(cfg.depth));
    states.push_back(init_pair(x1, x2, cfg));
    for (int ell = 1; ell < cfg.depth; ++ell) states.push_back(step_pair(states.back(), cfg));
    return states;
}

const std::vector<std::string>& tensor_names() {
    static const std::vector<std::string> names = {"K", "Theta", "V4", "D", "F", "A", "B",
                                                   "P", "Q",     "R",  "S", "T", "U", "V6"};
    return names;
}

double tensor_component(const LayerState& st, const std::string& name) {
    if (name == "K") return st.kernel;
    if (name == "Theta") return st.ntk;
    if (name == "V4") return st.tensors.v4;
    if (name == "D") return st.tensors.d;
    if (name == "F") return st.tensors.f;
    if (name == "A") return st.tensors.a;
    if (name == "B") return st.tensors.b;
    if (name == "P") return st.tensors.p;
    if (name == "Q") return st.tensors.q;
    if (name == "R") return st.tensors.r;
    if (name == "S") return st.tensors.s;
    if (name == "T") return st.tensors.t;
    if (name == "U") return st.tensors.u;
    if (name == "V6") return st.tensors.v6;
    throw std::domain_error("tensor_component: unknown tensor " + name);
}

double normalized_component(const NormalizedState& st, const std::string& name) {
    if (name == "K") return st.kernel;
    if (name == "Theta") return st.ntk;
    if (name == "V4") return st.tensors.v4;
    if (name == "D") return st.tensors.d;
    if (name == "F") return st.tensors.f;
    if (name == "A") return st.tensors.a;
    if (name == "B") return st.tensors.b;
    if (name == "P") return st.tensors.p;
    if (name == "Q") return st.tensors.q;
    if (name == "R") return st.tensors.r;
    if (name == "S") return st.tensors.s;
    if (name == "T") return st.tensors.t;
    if (name == "U") return st.tensors.u;
    if (name == "V6") return st.tensors.v6;
    throw std::domain_error("normalized_component: unknown tensor " + name);
}

}  // namespace orthostat
