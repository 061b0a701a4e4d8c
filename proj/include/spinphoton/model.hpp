#pragma once

/// Closed-form weak-drive input-output response of the two-mode cavity with a
/// spin-selective transition, conditioned on the dot ground state.

#include "device.hpp"
#include "error.hpp"
#include "polarisation.hpp"

#include <cmath>
#include <numbers>

namespace spinphoton {

/// Reflection matrix of the device. Column j is the output Jones vector for a
/// unit input along basis state j of the (H, V) basis.
struct ScatteringMatrix {
    Matrix2 hv;

    [[nodiscard]] JonesVector apply(const JonesVector& in) const { return hv * in; }

    /// Same operator expressed in the (R, L) basis.
    [[nodiscard]] Matrix2 circular() const {
        const Matrix2 u = circular_basis();
        return u.adjoint() * hv * u;
    }
};

/// Single-mode reflection r_X = 1 - eta kappa_X / (i(omega_cav,X - omega_L) + kappa_X/2).
inline Complex empty_cavity_reflection(const DeviceParams& p, double omega_laser, CavityMode mode) {
    const double kappa = mode == CavityMode::H ? p.kappa_H : p.kappa_V;
    const double omega_cav = mode == CavityMode::H ? p.omega_cav_H : p.omega_cav_V;
    const Complex denom{0.5 * kappa, omega_cav - omega_laser};
    return 1.0 - p.eta_top * kappa / denom;
}

/// Cavity-field coupling vector (g_H, g_V) of the active transition. It is
/// proportional to the Jones vector of the circular mode the trion drives.
inline std::array<Complex, 2> coupling_vector(const DeviceParams& p, GroundState ground) {
    if (ground == GroundState::Empty) return {Complex{}, Complex{}};
    const int chi = ground == GroundState::Up ? p.chirality : -p.chirality;
    const double s = p.g / std::numbers::sqrt2;
    return {Complex{s, 0.0}, Complex{0.0, chi * s}};
}

inline double transition_energy(const DeviceParams& p, GroundState ground) {
    return ground == GroundState::Down ? p.omega_qd_down : p.omega_qd_up;
}

/// Steady state of the rotating-frame amplitude equations
///
///   d_X alpha_X + i g_X beta = sqrt(eta kappa_X) b_X,   d_X = i(omega_cav,X - omega_L) + kappa_X/2
///   d_e beta + i (g_H^* alpha_H + g_V^* alpha_V) = 0,    d_e = i(omega_QD - omega_L) + gamma_tot/2
///   b_out,X = b_X - sqrt(eta kappa_X) alpha_X
///
/// Eliminating beta leaves (D + g g^dag / d_e) alpha = K b with
/// D = diag(d_H, d_V), K = diag(sqrt(eta kappa_H), sqrt(eta kappa_V)).
/// Multiplying through by d_e gives N = d_e D + g g^dag, whose adjugate over
/// det(N)/d_e stays finite when d_e = 0 (lossless emitter on resonance):
///
///   M^-1 = adj(N) / (d_e d_H d_V + |g_H|^2 d_V + |g_V|^2 d_H)
///
/// The denominator is the determinant of the full 3x3 system. Then
/// S = 1 - K M^-1 K.
inline ScatteringMatrix scattering_matrix(const DeviceParams& p, double omega_laser, GroundState ground) {
    const auto [g_h, g_v] = coupling_vector(p, ground);
    const Complex d_h{0.5 * p.kappa_H, p.omega_cav_H - omega_laser};
    const Complex d_v{0.5 * p.kappa_V, p.omega_cav_V - omega_laser};
    const Complex d_e{0.5 * p.gamma_total(), transition_energy(p, ground) - omega_laser};

    const Complex n_hh = d_e * d_h + std::norm(g_h);
    const Complex n_vv = d_e * d_v + std::norm(g_v);
    const Complex n_hv = g_h * std::conj(g_v);
    const Complex n_vh = g_v * std::conj(g_h);
    const Complex det = d_e * d_h * d_v + std::norm(g_h) * d_v + std::norm(g_v) * d_h;

    const double scale = std::abs(d_h * d_v) * (std::abs(d_e) + 1.0) + std::norm(g_h) + std::norm(g_v);
    if (!(std::abs(det) > 1e-14 * scale)) throw Error("degenerate model");

    const double k_h = std::sqrt(p.eta_top * p.kappa_H);
    const double k_v = std::sqrt(p.eta_top * p.kappa_V);

    ScatteringMatrix s;
    s.hv(0, 0) = 1.0 - k_h * k_h * n_vv / det;
    s.hv(0, 1) = k_h * k_v * n_hv / det;
    s.hv(1, 0) = k_v * k_h * n_vh / det;
    s.hv(1, 1) = 1.0 - k_v * k_v * n_hh / det;
    return s;
}

struct Reflection {
    JonesVector jones;
    CoherenceMatrix coherence;
};

inline Reflection reflect(const DeviceParams& p, const DriveField& drive, GroundState ground) {
    drive.validate();
    const JonesVector out = scattering_matrix(p, drive.omega_laser, ground).apply(drive.jones_in);
    return {out, CoherenceMatrix::outer(out)};
}

/// Diagonal of the circular-basis reflection matrix.
struct CircularDiagonal {
    Complex r_R;
    Complex r_L;
    /// arg(r_R) - arg(r_L), wrapped to (-pi, pi].
    double phase_diff = 0.0;
};

inline double wrap_phase(double phi) {
    double w = std::remainder(phi, 2.0 * std::numbers::pi);
    if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
    return w;
}

inline CircularDiagonal circular_diagonal(const DeviceParams& p, double omega_laser, GroundState ground) {
    const Matrix2 c = scattering_matrix(p, omega_laser, ground).circular();
    CircularDiagonal out{c(0, 0), c(1, 1), 0.0};
    if (std::abs(out.r_L) < 1e-300) throw Error("vanishing reference amplitude");
    out.phase_diff = wrap_phase(std::arg(out.r_R) - std::arg(out.r_L));
    return out;
}

/// Relative phase arg(c_R) - arg(c_L) of a state's circular components.
inline double circular_relative_phase(const JonesVector& j) {
    const Complex c_r = analysis_state(Basis::R).dot(j);
    const Complex c_l = analysis_state(Basis::L).dot(j);
    if (std::abs(c_r) < 1e-300 || std::abs(c_l) < 1e-300) throw Error("vanishing reference amplitude");
    return std::arg(c_r) - std::arg(c_l);
}

/// Phase the device adds between the circular components of the drive:
/// pi for V -> H, +-pi/2 for V -> A/D. Includes the R<->L mixing that the
/// birefringence introduces, unlike circular_diagonal().
inline double circular_phase_shift(const DeviceParams& p, const DriveField& drive, GroundState ground) {
    const Reflection r = reflect(p, drive, ground);
    return wrap_phase(circular_relative_phase(r.jones) - circular_relative_phase(drive.jones_in));
}

/// Total decay rate (full width) of the transition at omega_qd including the
/// Purcell contribution of both modes: twice the real part of the cavity
/// self-energy sum_X |g_X|^2 / (kappa_X/2 + i(omega_cav,X - omega_qd)).
inline double purcell_linewidth(const DeviceParams& p, double omega_qd) {
    const double g2 = 0.5 * p.g * p.g;
    auto mode = [&](double kappa, double omega_cav) {
        const double det = omega_qd - omega_cav;
        return g2 * kappa / (0.25 * kappa * kappa + det * det);
    };
    return p.gamma_total() + mode(p.kappa_H, p.omega_cav_H) + mode(p.kappa_V, p.omega_cav_V);
}

/// C = 2 g^2 / (kappa_mean gamma_sp).
inline double cooperativity(const DeviceParams& p) {
    if (!(p.gamma_sp > 0.0)) throw Error("infinite cooperativity");
    return 2.0 * p.g * p.g / (p.kappa_mean() * p.gamma_sp);
}

} // namespace spinphoton
