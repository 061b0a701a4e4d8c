#pragma once

#include "error.hpp"
#include "polarisation.hpp"

#include <cmath>
#include <string>

namespace spinphoton {

/// Physical constants of the micropillar and the charged dot. Energies and
/// rates in ueV with hbar = 1, relative to a declared reference (by
/// convention omega_cav_V = 0).
struct DeviceParams {
    double omega_cav_V = 0.0;
    double omega_cav_H = 146.0;
    double kappa_V = 162.0;
    double kappa_H = 155.0;
    double eta_top = 0.635;
    double g = 15.0;
    double gamma_sp = 0.35;
    double gamma_pd = 0.0;
    double omega_qd_up = 51.4;
    double omega_qd_down = -400.0;
    /// +1: the spin-up trion couples to R; -1: to L.
    int chirality = +1;

    /// Delta = omega_cav_H - omega_cav_V.
    [[nodiscard]] double birefringence() const { return omega_cav_H - omega_cav_V; }
    [[nodiscard]] double gamma_total() const { return gamma_sp + 2.0 * gamma_pd; }
    [[nodiscard]] double kappa_mean() const { return 0.5 * (kappa_H + kappa_V); }

    void validate() const {
        auto finite = [](double x, const char* name) {
            if (!std::isfinite(x)) throw Error(std::string("non-finite device parameter ") + name);
        };
        finite(omega_cav_V, "omega_cav_V");
        finite(omega_cav_H, "omega_cav_H");
        finite(kappa_V, "kappa_V");
        finite(kappa_H, "kappa_H");
        finite(eta_top, "eta_top");
        finite(g, "g");
        finite(gamma_sp, "gamma_sp");
        finite(gamma_pd, "gamma_pd");
        finite(omega_qd_up, "omega_qd_up");
        finite(omega_qd_down, "omega_qd_down");
        if (!(kappa_V > 0.0)) throw Error("kappa_V must be > 0");
        if (!(kappa_H > 0.0)) throw Error("kappa_H must be > 0");
        if (g < 0.0) throw Error("g must be >= 0");
        if (gamma_sp < 0.0) throw Error("gamma_sp must be >= 0");
        if (gamma_pd < 0.0) throw Error("gamma_pd must be >= 0");
        if (eta_top < 0.0 || eta_top > 1.0) throw Error("eta_top must lie in [0, 1]");
        if (chirality != 1 && chirality != -1) throw Error("chirality must be +1 or -1");
    }
};

/// Parameter set reported for the studied device (pi configuration).
inline DeviceParams paper_device() { return DeviceParams{}; }

enum class GroundState { Up, Down, Empty };
enum class CavityMode { H, V };

/// Monochromatic probe: laser energy and unit-norm input polarisation.
struct DriveField {
    double omega_laser = 0.0;
    JonesVector jones_in = analysis_state(Basis::V);

    void validate() const {
        if (!std::isfinite(omega_laser)) throw Error("non-finite laser energy");
        if (std::abs(jones_in.norm() - 1.0) > 1e-12) throw Error("drive Jones vector must have unit norm");
    }
};

inline const char* to_string(GroundState s) {
    switch (s) {
    case GroundState::Up: return "up";
    case GroundState::Down: return "down";
    case GroundState::Empty: return "empty";
    }
    return "?";
}

} // namespace spinphoton
