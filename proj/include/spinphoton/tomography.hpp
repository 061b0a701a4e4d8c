#pragma once

/// Polarisation observables: six-basis intensities, Stokes vectors, purity,
/// fidelity, density matrices and the conditional-state extrapolation.

#include "error.hpp"
#include "polarisation.hpp"

#include <array>
#include <cmath>
#include <optional>

namespace spinphoton {

/// Reflected intensities behind the six analysers, normalised to the input.
/// `raw` marks extrapolated values that may be negative or unphysical.
struct IntensitySextet {
    std::array<double, 6> values{}; // ordered as kAllBases: H V D A R L
    bool raw = false;

    double& operator[](Basis b) { return values[static_cast<int>(b)]; }
    double operator[](Basis b) const { return values[static_cast<int>(b)]; }

    [[nodiscard]] double pair_sum(Basis b) const {
        switch (b) {
        case Basis::H: case Basis::V: return (*this)[Basis::H] + (*this)[Basis::V];
        case Basis::D: case Basis::A: return (*this)[Basis::D] + (*this)[Basis::A];
        case Basis::R: case Basis::L: return (*this)[Basis::R] + (*this)[Basis::L];
        }
        return 0.0;
    }

    static IntensitySextet from(double h, double v, double d, double a, double r, double l) {
        return {{h, v, d, a, r, l}, false};
    }
};

/// (s_HV, s_DA, s_RL). `raw` marks vectors built from extrapolated data,
/// which may leave the Poincare ball.
struct StokesVector {
    double hv = 0.0;
    double da = 0.0;
    double rl = 0.0;
    std::optional<double> total;
    bool raw = false;

    [[nodiscard]] double dot(const StokesVector& o) const { return hv * o.hv + da * o.da + rl * o.rl; }
    [[nodiscard]] double norm() const { return std::sqrt(dot(*this)); }
    [[nodiscard]] StokesVector operator-() const { return {-hv, -da, -rl, total, raw}; }
    [[nodiscard]] std::array<double, 3> components() const { return {hv, da, rl}; }
};

/// Unit Stokes vector of an analysis state.
inline StokesVector stokes_of(Basis b) {
    switch (b) {
    case Basis::H: return {1, 0, 0, std::nullopt, false};
    case Basis::V: return {-1, 0, 0, std::nullopt, false};
    case Basis::D: return {0, 1, 0, std::nullopt, false};
    case Basis::A: return {0, -1, 0, std::nullopt, false};
    case Basis::R: return {0, 0, 1, std::nullopt, false};
    case Basis::L: return {0, 0, -1, std::nullopt, false};
    }
    return {};
}

inline StokesVector stokes_from_sextet(const IntensitySextet& x) {
    auto component = [&](Basis plus, Basis minus) {
        const double sum = x[plus] + x[minus];
        if (!(sum > 0.0)) throw Error("empty channel");
        return (x[plus] - x[minus]) / sum;
    };
    StokesVector s;
    s.hv = component(Basis::H, Basis::V);
    s.da = component(Basis::D, Basis::A);
    s.rl = component(Basis::R, Basis::L);
    s.raw = x.raw;
    return s;
}

inline IntensitySextet sextet_from_coherence(const CoherenceMatrix& g) {
    IntensitySextet out;
    for (Basis b : kAllBases) out[b] = g.project(analysis_state(b));
    return out;
}

/// Stokes vector with the total intensity attached.
inline StokesVector stokes_from_coherence(const CoherenceMatrix& g) {
    const double total = g.trace();
    if (!(total > 0.0)) throw Error("empty field");
    StokesVector s;
    s.hv = (g.g(0, 0).real() - g.g(1, 1).real()) / total;
    s.da = 2.0 * g.g(0, 1).real() / total;
    s.rl = -2.0 * g.g(0, 1).imag() / total;
    s.total = total;
    return s;
}

inline double purity(const StokesVector& s) { return s.norm(); }

/// F = (1 + S . S_target) / 2 for a pure target.
inline double fidelity(const StokesVector& s, const StokesVector& target) {
    if (std::abs(target.norm() - 1.0) > 1e-9) throw Error("fidelity target must be a unit Stokes vector");
    return 0.5 * (1.0 + s.dot(target));
}

/// avg = (1 - p_up) cav + p_up up, per analyser.
inline IntensitySextet compose_average(const IntensitySextet& cav, const IntensitySextet& up, double p_up) {
    IntensitySextet out;
    for (Basis b : kAllBases) out[b] = (1.0 - p_up) * cav[b] + p_up * up[b];
    return out;
}

/// Inverts the two-component mixture to recover the spin-up conditional
/// intensities. No clamping: negative entries are passed through.
inline IntensitySextet extrapolate_conditional(const IntensitySextet& avg, const IntensitySextet& cav, double p_up) {
    if (!(p_up > 0.0)) throw Error("non-invertible mixture");
    if (p_up > 1.0) throw Error("p_up must lie in (0, 1]");
    IntensitySextet out;
    for (Basis b : kAllBases) out[b] = (avg[b] - (1.0 - p_up) * cav[b]) / p_up;
    out.raw = true;
    return out;
}

/// Nearest physical state: vectors outside the unit ball are rescaled onto it.
inline StokesVector project_physical(const StokesVector& s) {
    const double n = s.norm();
    StokesVector out = s;
    if (n > 1.0) {
        out.hv /= n;
        out.da /= n;
        out.rl /= n;
    }
    return out;
}

/// Unit-trace polarisation density matrix in the (H, V) basis.
struct PolarisationDensityMatrix {
    Matrix2 rho;
};

inline PolarisationDensityMatrix density_from_stokes(const StokesVector& s) {
    if (s.norm() > 1.0 + 1e-12) throw Error("unphysical state");
    // G_HV = (s_DA - i s_RL)/2 for the handedness fixed in analysis_state().
    PolarisationDensityMatrix out;
    out.rho(0, 0) = 0.5 * (1.0 + s.hv);
    out.rho(1, 1) = 0.5 * (1.0 - s.hv);
    out.rho(0, 1) = Complex{0.5 * s.da, -0.5 * s.rl};
    out.rho(1, 0) = Complex{0.5 * s.da, 0.5 * s.rl};
    return out;
}

inline StokesVector stokes_from_density(const PolarisationDensityMatrix& d) {
    return stokes_from_coherence(CoherenceMatrix{d.rho});
}

} // namespace spinphoton
