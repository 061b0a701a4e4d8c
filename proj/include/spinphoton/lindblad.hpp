#pragma once

/// Truncated-Fock steady state of the driven, damped two-mode cavity coupled
/// to the active two-level transition. Used as an independent check of the
/// linear model and to expose saturation at stronger drive.

#include "device.hpp"
#include "error.hpp"
#include "model.hpp"
#include "polarisation.hpp"
#include "tomography.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace spinphoton::lindblad {

using Operator = Eigen::MatrixXcd;

struct HilbertConfig {
    int fock_cutoff = 2;             ///< max photons per mode
    std::size_t max_liouvillian = 4096; ///< cap on d^2

    [[nodiscard]] int dimension() const { return (fock_cutoff + 1) * (fock_cutoff + 1) * 2; }
};

/// Ladder operators on H_modeH (x) H_modeV (x) emitter{g, e}.
struct OperatorSet {
    Operator a_h, a_v, sigma, identity;
    int fock_cutoff = 0;
};

struct MasterEquation {
    Operator hamiltonian;
    std::vector<Operator> collapse;
    OperatorSet ops;
};

inline Operator kron(const Operator& a, const Operator& b) {
    Operator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline OperatorSet make_operators(const HilbertConfig& cfg) {
    if (cfg.fock_cutoff < 1) throw Error("Fock cutoff must be >= 1");
    const int n = cfg.fock_cutoff + 1;
    Operator a = Operator::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    const Operator id_f = Operator::Identity(n, n);
    const Operator id_e = Operator::Identity(2, 2);
    Operator lower = Operator::Zero(2, 2);
    lower(0, 1) = 1.0; // |g><e|

    OperatorSet ops;
    ops.a_h = kron(kron(a, id_f), id_e);
    ops.a_v = kron(kron(id_f, a), id_e);
    ops.sigma = kron(kron(id_f, id_f), lower);
    ops.identity = Operator::Identity(ops.a_h.rows(), ops.a_h.cols());
    ops.fock_cutoff = cfg.fock_cutoff;
    return ops;
}

/// Rotating-frame Hamiltonian and jump operators. The emitter couples to the
/// same cavity polarisation as in the linear model:
///   H = sum_X Delta_X a_X^dag a_X + Delta_e sigma^dag sigma
///     + sum_X (g_X a_X^dag sigma + g_X^* sigma^dag a_X)
///     + i sum_X (eps_X a_X^dag - eps_X^* a_X),   eps_X = sqrt(eta kappa_X) b_X A
inline MasterEquation build_operators(const DeviceParams& p, Complex amplitude, const DriveField& drive,
                                      GroundState ground, const HilbertConfig& cfg = {}) {
    p.validate();
    MasterEquation me;
    me.ops = make_operators(cfg);
    const OperatorSet& o = me.ops;
    const Operator ad_h = o.a_h.adjoint();
    const Operator ad_v = o.a_v.adjoint();
    const Operator sd = o.sigma.adjoint();

    const auto [g_h, g_v] = coupling_vector(p, ground);
    const double w = drive.omega_laser;
    const Complex eps_h = std::sqrt(p.eta_top * p.kappa_H) * drive.jones_in.h * amplitude;
    const Complex eps_v = std::sqrt(p.eta_top * p.kappa_V) * drive.jones_in.v * amplitude;

    Operator h = (p.omega_cav_H - w) * ad_h * o.a_h + (p.omega_cav_V - w) * ad_v * o.a_v;
    if (ground != GroundState::Empty) h += (transition_energy(p, ground) - w) * sd * o.sigma;
    h += g_h * ad_h * o.sigma + std::conj(g_h) * sd * o.a_h;
    h += g_v * ad_v * o.sigma + std::conj(g_v) * sd * o.a_v;
    const Complex i{0.0, 1.0};
    h += i * (eps_h * ad_h - std::conj(eps_h) * o.a_h);
    h += i * (eps_v * ad_v - std::conj(eps_v) * o.a_v);
    me.hamiltonian = h;

    me.collapse.push_back(std::sqrt(p.kappa_H) * o.a_h);
    me.collapse.push_back(std::sqrt(p.kappa_V) * o.a_v);
    if (ground != GroundState::Empty) {
        if (p.gamma_sp > 0.0) me.collapse.push_back(std::sqrt(p.gamma_sp) * o.sigma);
        if (p.gamma_pd > 0.0) me.collapse.push_back(std::sqrt(2.0 * p.gamma_pd) * sd * o.sigma);
    } else {
        // The emitter of an empty dot is decoupled; any relaxation pins it to
        // the ground level and keeps the steady state unique.
        me.collapse.push_back(std::sqrt(p.gamma_sp > 0.0 ? p.gamma_sp : 1.0) * o.sigma);
    }
    return me;
}

/// Liouvillian acting on column-major vec(rho): vec(A X B) = (B^T (x) A) vec(X).
inline Operator liouvillian(const Operator& h, const std::vector<Operator>& collapse) {
    const Eigen::Index d = h.rows();
    const Operator id = Operator::Identity(d, d);
    const Complex i{0.0, 1.0};
    Operator l = -i * (kron(id, h) - kron(h.transpose(), id));
    for (const Operator& c : collapse) {
        const Operator cdc = c.adjoint() * c;
        l += kron(c.conjugate(), c) - 0.5 * kron(id, cdc) - 0.5 * kron(cdc.transpose(), id);
    }
    return l;
}

struct SteadyState {
    Operator rho;
    double residual = 0.0; ///< ||L vec(rho)||
};

/// Solves L vec(rho) = 0 with the first row replaced by tr(rho) = 1.
inline SteadyState steady_state(const Operator& h, const std::vector<Operator>& collapse,
                                std::size_t max_liouvillian = 4096) {
    const Eigen::Index d = h.rows();
    if (static_cast<std::size_t>(d * d) > max_liouvillian)
        throw Error("Liouvillian dimension " + std::to_string(d * d) + " exceeds cap " +
                    std::to_string(max_liouvillian));
    const Operator l = liouvillian(h, collapse);
    Operator constrained = l;
    constrained.row(0).setZero();
    for (Eigen::Index k = 0; k < d; ++k) constrained(0, k * d + k) = 1.0;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(d * d);
    rhs(0) = 1.0;

    Eigen::FullPivLU<Operator> lu(constrained);
    if (!lu.isInvertible()) throw Error("non-unique steady state");
    const Eigen::VectorXcd x = lu.solve(rhs);

    SteadyState out;
    out.rho = Eigen::Map<const Operator>(x.data(), d, d);
    out.residual = (l * x).norm();
    return out;
}

inline SteadyState steady_state(const MasterEquation& me, const HilbertConfig& cfg = {}) {
    return steady_state(me.hamiltonian, me.collapse, cfg.max_liouvillian);
}

inline double expectation(const SteadyState& s, const Operator& op) { return (s.rho * op).trace().real(); }

inline double excited_population(const SteadyState& s, const OperatorSet& o) {
    return expectation(s, o.sigma.adjoint() * o.sigma);
}

/// Probability that either mode sits in its highest retained Fock state.
inline double top_fock_population(const SteadyState& s, const OperatorSet& o) {
    const int n = o.fock_cutoff + 1;
    double p = 0.0;
    for (int i_h = 0; i_h < n; ++i_h)
        for (int i_v = 0; i_v < n; ++i_v)
            if (i_h == n - 1 || i_v == n - 1)
                for (int e = 0; e < 2; ++e) {
                    const int idx = (i_h * n + i_v) * 2 + e;
                    p += s.rho(idx, idx).real();
                }
    return p;
}

/// G_XY = <B_Y^dag B_X> / |A|^2 with B_X = b_X A - sqrt(eta kappa_X) a_X,
/// which includes the incoherently scattered light.
inline CoherenceMatrix output_coherence_me(const DeviceParams& p, const DriveField& drive, const SteadyState& s,
                                           const OperatorSet& o, Complex amplitude) {
    if (std::abs(amplitude) == 0.0) throw Error("drive amplitude must be non-zero");
    const Operator b_h = drive.jones_in.h * amplitude * o.identity - std::sqrt(p.eta_top * p.kappa_H) * o.a_h;
    const Operator b_v = drive.jones_in.v * amplitude * o.identity - std::sqrt(p.eta_top * p.kappa_V) * o.a_v;
    const Operator* b[2] = {&b_h, &b_v};
    CoherenceMatrix g;
    const double norm = std::norm(amplitude);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) g.g(x, y) = (s.rho * b[y]->adjoint() * *b[x]).trace() / norm;
    return g;
}

struct SolvedPoint {
    SteadyState state;
    OperatorSet ops;
    double excited = 0.0;
};

inline SolvedPoint solve_point(const DeviceParams& p, Complex amplitude, const DriveField& drive, GroundState ground,
                               const HilbertConfig& cfg) {
    MasterEquation me = build_operators(p, amplitude, drive, ground, cfg);
    SolvedPoint out{steady_state(me, cfg), std::move(me.ops), 0.0};
    out.excited = excited_population(out.state, out.ops);
    return out;
}

/// Geometric bisection on the drive amplitude until the excited population
/// lies in [lo, hi]. The upper bracket is grown by doubling and never passes
/// the point where the top Fock level starts to fill. Returns the default
/// amplitude when the emitter stays dark (empty dot, g = 0).
inline double choose_drive_amplitude(const DeviceParams& p, const DriveField& drive, GroundState ground,
                                     const HilbertConfig& cfg = {}, double lo = 1e-5, double hi = 1e-4) {
    constexpr double kDefault = 1e-2;
    constexpr double kTopFockLimit = 1e-7;
    if (ground == GroundState::Empty || p.g == 0.0) return kDefault;

    double a_lo = 1e-8;
    double a_hi = 1e-4;
    for (;;) {
        const SolvedPoint sp = solve_point(p, a_hi, drive, ground, cfg);
        if (sp.excited >= lo && sp.excited <= hi) return a_hi;
        if (sp.excited > hi) break;
        if (top_fock_population(sp.state, sp.ops) > kTopFockLimit || a_hi > 1e6) return 0.5 * a_hi;
        a_lo = a_hi;
        a_hi *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(a_lo * a_hi);
        const double pe = solve_point(p, mid, drive, ground, cfg).excited;
        if (pe >= lo && pe <= hi) return mid;
        if (pe < lo)
            a_lo = mid;
        else
            a_hi = mid;
    }
    throw Error("drive amplitude search did not converge");
}

struct OracleReport {
    StokesVector oracle;
    StokesVector linear;
    double max_abs_dstokes = 0.0;
    double d_total = 0.0;
    double excited_population = 0.0;
    double top_fock_population = 0.0;
    double residual = 0.0;
    double amplitude = 0.0;
    bool cutoff_sufficient = true;
};

inline OracleReport compare_with_linear(const DeviceParams& p, const DriveField& drive, GroundState ground,
                                        std::optional<double> amplitude = std::nullopt,
                                        const HilbertConfig& cfg = {}) {
    drive.validate();
    const double a = amplitude ? *amplitude : choose_drive_amplitude(p, drive, ground, cfg);
    const SolvedPoint sp = solve_point(p, a, drive, ground, cfg);
    const CoherenceMatrix g_me = output_coherence_me(p, drive, sp.state, sp.ops, a);
    const CoherenceMatrix g_lin = reflect(p, drive, ground).coherence;

    OracleReport r;
    r.oracle = stokes_from_coherence(g_me);
    r.linear = stokes_from_coherence(g_lin);
    const auto so = r.oracle.components();
    const auto sl = r.linear.components();
    for (int k = 0; k < 3; ++k) r.max_abs_dstokes = std::max(r.max_abs_dstokes, std::abs(so[k] - sl[k]));
    r.d_total = g_me.trace() - g_lin.trace();
    r.excited_population = sp.excited;
    r.top_fock_population = top_fock_population(sp.state, sp.ops);
    r.residual = sp.state.residual;
    r.amplitude = a;
    r.cutoff_sufficient = r.top_fock_population < 1e-6;
    return r;
}

} // namespace spinphoton::lindblad
