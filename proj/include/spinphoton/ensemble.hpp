#pragma once

/// Incoherent averaging over spectral wandering of the transition and over
/// the ground-state occupation.

#include "device.hpp"
#include "error.hpp"
#include "model.hpp"
#include "tomography.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

namespace spinphoton {

/// Gaussian spectral wandering of the transition energy.
struct NoiseModel {
    double sigma = 0.0;  ///< std dev of omega_QD, ueV
    int quad_order = 15; ///< Gauss-Hermite nodes

    void validate() const {
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error("noise sigma must be >= 0");
        if (quad_order < 1) throw Error("quad_order must be >= 1");
    }
};

struct OccupationModel {
    double p_up = 0.5;
    double p_down = 0.5;
    double p_empty = 0.0;

    /// Co-tunnelling split: P_up = P_down = P_c / 2.
    static OccupationModel from_charge(double p_c) {
        if (!(p_c >= 0.0 && p_c <= 1.0)) throw Error("p_c must lie in [0, 1]");
        return {0.5 * p_c, 0.5 * p_c, 1.0 - p_c};
    }

    [[nodiscard]] double p_c() const { return p_up + p_down; }

    void validate() const {
        for (double p : {p_up, p_down, p_empty})
            if (!(p >= 0.0 && p <= 1.0)) throw Error("occupation probabilities must lie in [0, 1]");
        if (std::abs(p_up + p_down + p_empty - 1.0) > 1e-12) throw Error("occupation probabilities must sum to 1");
    }
};

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule for the standard normal weight (probabilists'
/// convention), built by Golub-Welsch. Weights sum to 1.
inline QuadratureRule gauss_hermite(int n) {
    if (n <= 0) throw Error("quadrature order must be >= 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    if (eig.info() != Eigen::Success) throw Error("Gauss-Hermite eigen-decomposition failed");

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = eig.eigenvalues()(i);
        const double v0 = eig.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;
        total += rule.weights[i];
    }
    // Symmetrise so that odd moments cancel exactly.
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = w;
        rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    for (double& w : rule.weights) w /= total;
    return rule;
}

/// Output coherence for a fixed spin, averaged over the Gaussian
/// distribution of that spin's transition energy.
inline CoherenceMatrix averaged_coherence_conditional(const DeviceParams& p, const DriveField& drive,
                                                      GroundState spin, const NoiseModel& noise) {
    noise.validate();
    if (spin == GroundState::Empty || noise.sigma == 0.0) return reflect(p, drive, spin).coherence;

    const QuadratureRule rule = gauss_hermite(noise.quad_order);
    CoherenceMatrix acc;
    DeviceParams shifted = p;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double offset = noise.sigma * rule.nodes[i];
        if (spin == GroundState::Up)
            shifted.omega_qd_up = p.omega_qd_up + offset;
        else
            shifted.omega_qd_down = p.omega_qd_down + offset;
        acc += rule.weights[i] * reflect(shifted, drive, spin).coherence;
    }
    return acc;
}

/// Occupation-weighted mixture of the three conditional outputs.
inline CoherenceMatrix averaged_coherence_population(const DeviceParams& p, const DriveField& drive,
                                                     const OccupationModel& occ, const NoiseModel& noise) {
    occ.validate();
    CoherenceMatrix acc;
    if (occ.p_up > 0.0) acc += occ.p_up * averaged_coherence_conditional(p, drive, GroundState::Up, noise);
    if (occ.p_down > 0.0) acc += occ.p_down * averaged_coherence_conditional(p, drive, GroundState::Down, noise);
    if (occ.p_empty > 0.0) acc += occ.p_empty * reflect(p, drive, GroundState::Empty).coherence;
    return acc;
}

/// Which ground-state ensemble a spectrum describes.
enum class Conditioning { Avg, Cav, Up, Down };

inline const char* to_string(Conditioning c) {
    switch (c) {
    case Conditioning::Avg: return "avg";
    case Conditioning::Cav: return "cav";
    case Conditioning::Up: return "up";
    case Conditioning::Down: return "down";
    }
    return "?";
}

inline Conditioning parse_conditioning(const std::string& s) {
    if (s == "avg") return Conditioning::Avg;
    if (s == "cav") return Conditioning::Cav;
    if (s == "up") return Conditioning::Up;
    if (s == "down") return Conditioning::Down;
    throw Error("unknown conditioning '" + s + "' (expected avg, cav, up or down)");
}

inline CoherenceMatrix conditioned_coherence(const DeviceParams& p, const DriveField& drive, Conditioning c,
                                             const OccupationModel& occ, const NoiseModel& noise) {
    switch (c) {
    case Conditioning::Avg: return averaged_coherence_population(p, drive, occ, noise);
    case Conditioning::Cav: return reflect(p, drive, GroundState::Empty).coherence;
    case Conditioning::Up: return averaged_coherence_conditional(p, drive, GroundState::Up, noise);
    case Conditioning::Down: return averaged_coherence_conditional(p, drive, GroundState::Down, noise);
    }
    throw Error("unknown conditioning");
}

/// One row of a laser scan.
struct SpectrumRecord {
    double omega_laser = 0.0;
    double det_cav_v = 0.0;  ///< omega_laser - omega_cav_V
    double det_qd_up = 0.0;  ///< omega_laser - omega_qd_up
    IntensitySextet intensities;
    double total = 0.0;
    StokesVector stokes;
    double purity = 0.0;
};

/// Builds a record from tomography intensities. `project` applies the
/// nearest-physical projection to the Stokes vector (and hence purity).
inline SpectrumRecord make_record(double omega_laser, double omega_cav_v, double omega_qd_up,
                                  const IntensitySextet& x, bool project = false) {
    SpectrumRecord rec;
    rec.omega_laser = omega_laser;
    rec.det_cav_v = omega_laser - omega_cav_v;
    rec.det_qd_up = omega_laser - omega_qd_up;
    rec.intensities = x;
    rec.total = x[Basis::H] + x[Basis::V];
    rec.stokes = stokes_from_sextet(x);
    if (project) rec.stokes = project_physical(rec.stokes);
    rec.stokes.total = rec.total;
    rec.purity = purity(rec.stokes);
    return rec;
}

/// Evenly spaced laser grid, inclusive of `stop` when it falls on a step.
struct ScanGrid {
    double start = -150.0;
    double stop = 250.0;
    double step = 1.0;

    [[nodiscard]] std::vector<double> points() const {
        if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step) || !(step > 0.0))
            throw Error("scan step must be finite and > 0");
        if (stop < start) throw Error("scan stop must be >= start");
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        std::vector<double> out(n);
        for (std::size_t k = 0; k < n; ++k) out[k] = start + static_cast<double>(k) * step;
        return out;
    }
};

inline std::vector<double> linspace(double start, double stop, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = start;
        return out;
    }
    for (std::size_t k = 0; k < n; ++k)
        out[k] = start + (stop - start) * static_cast<double>(k) / static_cast<double>(n - 1);
    return out;
}

/// Simulated tomography scan. Rows are evaluated in grid order.
inline std::vector<SpectrumRecord> spectrum_scan(const DeviceParams& p, const std::vector<double>& omegas,
                                                 const OccupationModel& occ, const NoiseModel& noise,
                                                 Conditioning conditioning,
                                                 const JonesVector& jones_in = analysis_state(Basis::V)) {
    p.validate();
    noise.validate();
    if (conditioning == Conditioning::Avg) occ.validate();
    if (omegas.empty()) throw Error("empty grid");
    for (std::size_t i = 1; i < omegas.size(); ++i)
        if (!(omegas[i] > omegas[i - 1])) throw Error("scan grid must be strictly increasing");

    std::vector<SpectrumRecord> rows;
    rows.reserve(omegas.size());
    for (double w : omegas) {
        const DriveField drive{w, jones_in};
        const CoherenceMatrix g = conditioned_coherence(p, drive, conditioning, occ, noise);
        rows.push_back(make_record(w, p.omega_cav_V, p.omega_qd_up, sextet_from_coherence(g)));
    }
    return rows;
}

} // namespace spinphoton
