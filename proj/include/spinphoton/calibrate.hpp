#pragma once

/// Inverse problems: least-squares device calibration from tomography
/// spectra, and operating-point search for a target output polarisation.

#include "device.hpp"
#include "ensemble.hpp"
#include "error.hpp"
#include "model.hpp"
#include "simplex.hpp"
#include "tomography.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace spinphoton {

/// Fittable quantities: every DeviceParams field plus charge occupation and
/// spectral-wandering width.
enum class ParamId {
    OmegaCavV,
    OmegaCavH,
    KappaV,
    KappaH,
    EtaTop,
    G,
    GammaSp,
    GammaPd,
    OmegaQdUp,
    OmegaQdDown,
    PC,
    Sigma,
};

inline constexpr std::array<ParamId, 12> kAllParams = {
    ParamId::OmegaCavV, ParamId::OmegaCavH, ParamId::KappaV,    ParamId::KappaH,
    ParamId::EtaTop,    ParamId::G,         ParamId::GammaSp,   ParamId::GammaPd,
    ParamId::OmegaQdUp, ParamId::OmegaQdDown, ParamId::PC,      ParamId::Sigma,
};

inline const char* param_name(ParamId id) {
    switch (id) {
    case ParamId::OmegaCavV: return "omega_cav_V";
    case ParamId::OmegaCavH: return "omega_cav_H";
    case ParamId::KappaV: return "kappa_V";
    case ParamId::KappaH: return "kappa_H";
    case ParamId::EtaTop: return "eta_top";
    case ParamId::G: return "g";
    case ParamId::GammaSp: return "gamma_sp";
    case ParamId::GammaPd: return "gamma_pd";
    case ParamId::OmegaQdUp: return "omega_qd_up";
    case ParamId::OmegaQdDown: return "omega_qd_down";
    case ParamId::PC: return "p_c";
    case ParamId::Sigma: return "sigma";
    }
    return "?";
}

inline ParamId parse_param(const std::string& name) {
    for (ParamId id : kAllParams)
        if (name == param_name(id)) return id;
    throw Error("unknown parameter '" + name + "'");
}

/// Everything the forward model needs for any conditioning.
struct ModelState {
    DeviceParams device;
    double p_c = 0.94;
    double sigma = 0.0;
    int quad_order = 15;

    [[nodiscard]] OccupationModel occupation() const { return OccupationModel::from_charge(p_c); }
    [[nodiscard]] NoiseModel noise() const { return {sigma, quad_order}; }

    [[nodiscard]] double get(ParamId id) const {
        switch (id) {
        case ParamId::OmegaCavV: return device.omega_cav_V;
        case ParamId::OmegaCavH: return device.omega_cav_H;
        case ParamId::KappaV: return device.kappa_V;
        case ParamId::KappaH: return device.kappa_H;
        case ParamId::EtaTop: return device.eta_top;
        case ParamId::G: return device.g;
        case ParamId::GammaSp: return device.gamma_sp;
        case ParamId::GammaPd: return device.gamma_pd;
        case ParamId::OmegaQdUp: return device.omega_qd_up;
        case ParamId::OmegaQdDown: return device.omega_qd_down;
        case ParamId::PC: return p_c;
        case ParamId::Sigma: return sigma;
        }
        return 0.0;
    }

    void set(ParamId id, double v) {
        switch (id) {
        case ParamId::OmegaCavV: device.omega_cav_V = v; break;
        case ParamId::OmegaCavH: device.omega_cav_H = v; break;
        case ParamId::KappaV: device.kappa_V = v; break;
        case ParamId::KappaH: device.kappa_H = v; break;
        case ParamId::EtaTop: device.eta_top = v; break;
        case ParamId::G: device.g = v; break;
        case ParamId::GammaSp: device.gamma_sp = v; break;
        case ParamId::GammaPd: device.gamma_pd = v; break;
        case ParamId::OmegaQdUp: device.omega_qd_up = v; break;
        case ParamId::OmegaQdDown: device.omega_qd_down = v; break;
        case ParamId::PC: p_c = v; break;
        case ParamId::Sigma: sigma = v; break;
        }
    }
};

/// One measured (or synthetic) tomography point.
struct Measurement {
    double omega_laser = 0.0;
    IntensitySextet intensities;
};

struct Dataset {
    Conditioning conditioning = Conditioning::Avg;
    std::vector<Measurement> points;
};

struct Bounds {
    double lo = 0.0;
    double hi = 0.0;
};

struct FitProblem {
    std::vector<Dataset> datasets;
    std::vector<ParamId> free;
    std::vector<Bounds> bounds; ///< aligned with `free`
    ModelState initial;
    std::array<double, 6> weights{1, 1, 1, 1, 1, 1}; ///< per analyser, H V D A R L; 0 drops a channel

    void validate() const {
        if (datasets.empty()) throw Error("fit problem needs at least one dataset");
        if (bounds.size() != free.size()) throw Error("one bound interval is required per free parameter");
        for (std::size_t i = 0; i < free.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j)
                if (free[i] == free[j]) throw Error(std::string("duplicate free parameter ") + param_name(free[i]));
            const Bounds& b = bounds[i];
            const double x = initial.get(free[i]);
            if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi))
                throw Error(std::string("bounds for ") + param_name(free[i]) + " must be finite with lo < hi");
            if (!(b.lo <= x && x <= b.hi))
                throw Error(std::string("initial point out of bounds for ") + param_name(free[i]));
        }
        for (double w : weights)
            if (!(w >= 0.0) || !std::isfinite(w)) throw Error("channel weights must be finite and >= 0");
    }

    [[nodiscard]] std::vector<double> initial_theta() const {
        std::vector<double> theta;
        for (ParamId id : free) theta.push_back(initial.get(id));
        return theta;
    }

    [[nodiscard]] ModelState state_at(const std::vector<double>& theta) const {
        if (theta.size() != free.size()) throw Error("parameter vector has the wrong length");
        ModelState s = initial;
        for (std::size_t i = 0; i < free.size(); ++i) s.set(free[i], theta[i]);
        return s;
    }
};

/// Simulated sextet for one conditioning at one laser energy.
inline IntensitySextet model_sextet(const ModelState& s, Conditioning c, double omega_laser,
                                    const JonesVector& jones_in = analysis_state(Basis::V)) {
    const DriveField drive{omega_laser, jones_in};
    const OccupationModel occ = c == Conditioning::Avg ? s.occupation() : OccupationModel{};
    return sextet_from_coherence(conditioned_coherence(s.device, drive, c, occ, s.noise()));
}

/// Weighted residuals (model - measured) over datasets, points and the
/// channels with non-zero weight, in that nesting order.
inline std::vector<double> model_residuals(const std::vector<double>& theta, const FitProblem& problem) {
    if (theta.size() != problem.free.size()) throw Error("parameter vector has the wrong length");
    for (std::size_t i = 0; i < theta.size(); ++i)
        if (!(problem.bounds[i].lo <= theta[i] && theta[i] <= problem.bounds[i].hi))
            throw Error(std::string("parameter ") + param_name(problem.free[i]) + " out of bounds");

    const ModelState s = problem.state_at(theta);
    s.device.validate();
    std::vector<double> out;
    for (const Dataset& ds : problem.datasets) {
        for (const Measurement& m : ds.points) {
            if (!std::isfinite(m.omega_laser)) throw Error("corrupt dataset");
            for (double v : m.intensities.values)
                if (!std::isfinite(v)) throw Error("corrupt dataset");
            const IntensitySextet model = model_sextet(s, ds.conditioning, m.omega_laser);
            for (std::size_t k = 0; k < 6; ++k)
                if (problem.weights[k] != 0.0)
                    out.push_back((model.values[k] - m.intensities.values[k]) * problem.weights[k]);
        }
    }
    return out;
}

inline double sum_of_squares(const std::vector<double>& r) {
    double acc = 0.0;
    for (double x : r) acc += x * x;
    return acc;
}

struct FitResult {
    ModelState best;
    std::vector<double> theta;
    double objective = 0.0;
    double initial_objective = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::vector<double> dataset_residual_norms;
};

/// Bound-clipped simplex descent on the sum of squared residuals. The search
/// runs in box-normalised coordinates so all parameters share one scale.
inline FitResult fit_parameters(const FitProblem& problem, SimplexOptions options = {}) {
    problem.validate();
    const std::size_t n = problem.free.size();
    std::vector<double> lo(n), span(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = problem.bounds[i].lo;
        span[i] = problem.bounds[i].hi - problem.bounds[i].lo;
    }
    auto to_theta = [&](const std::vector<double>& u) {
        std::vector<double> theta(n);
        for (std::size_t i = 0; i < n; ++i) theta[i] = std::min(lo[i] + u[i] * span[i], problem.bounds[i].hi);
        return theta;
    };
    std::vector<double> u0(n);
    const std::vector<double> theta0 = problem.initial_theta();
    for (std::size_t i = 0; i < n; ++i) u0[i] = (theta0[i] - lo[i]) / span[i];

    auto objective = [&](const std::vector<double>& u) {
        try {
            return sum_of_squares(model_residuals(to_theta(u), problem));
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    FitResult out;
    out.initial_objective = sum_of_squares(model_residuals(theta0, problem));
    if (!std::isfinite(out.initial_objective)) throw Error("non-finite objective at the initial point");

    const SimplexResult sr =
        minimize_simplex(objective, u0, std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), options);
    out.theta = sr.value <= out.initial_objective ? to_theta(sr.x) : theta0;
    out.objective = std::min(sr.value, out.initial_objective);
    out.best = problem.state_at(out.theta);
    out.iterations = sr.iterations;
    out.evaluations = sr.evaluations;
    out.converged = sr.converged;

    for (const Dataset& ds : problem.datasets) {
        FitProblem single = problem;
        single.datasets = {ds};
        out.dataset_residual_norms.push_back(std::sqrt(sum_of_squares(model_residuals(out.theta, single))));
    }
    return out;
}

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Target polarisation and search window. Ranges are detunings:
/// qd = omega_QD_up - omega_cav_V, laser = omega_laser - omega_QD_up.
struct TargetSpec {
    StokesVector target = stokes_of(Basis::H);
    Range qd_detuning{0.0, 146.0};
    Range laser_detuning{-20.0, 20.0};
    NoiseModel noise;
    int grid = 41;
    JonesVector jones_in = analysis_state(Basis::V);

    void validate() const {
        if (std::abs(target.norm() - 1.0) > 1e-9) throw Error("target must be a unit Stokes vector");
        if (!(qd_detuning.lo <= qd_detuning.hi) || !(laser_detuning.lo <= laser_detuning.hi))
            throw Error("search ranges must be non-empty");
        if (grid < 1) throw Error("grid resolution must be >= 1");
        noise.validate();
    }
};

struct OperatingPoint {
    double omega_qd_up = 0.0;
    double omega_laser = 0.0;
    double fidelity = 0.0;
    double purity = 0.0;
    StokesVector stokes;
    double coarse_fidelity = 0.0;
};

/// Evaluates the spin-up conditional output at one (qd, laser) detuning pair.
inline OperatingPoint evaluate_operating_point(const DeviceParams& p, const TargetSpec& t, double qd_det,
                                               double laser_det) {
    DeviceParams q = p;
    q.omega_qd_up = p.omega_cav_V + qd_det;
    const DriveField drive{q.omega_qd_up + laser_det, t.jones_in};
    const CoherenceMatrix g = averaged_coherence_conditional(q, drive, GroundState::Up, t.noise);
    OperatingPoint op;
    op.omega_qd_up = q.omega_qd_up;
    op.omega_laser = drive.omega_laser;
    op.stokes = stokes_from_coherence(g);
    op.fidelity = fidelity(op.stokes, t.target);
    op.purity = purity(op.stokes);
    return op;
}

/// Coarse grid over both detunings followed by simplex refinement of 1 - F.
inline OperatingPoint find_operating_point(const DeviceParams& p, const TargetSpec& t,
                                           SimplexOptions options = {}) {
    p.validate();
    t.validate();
    const std::vector<double> qd = linspace(t.qd_detuning.lo, t.qd_detuning.hi, static_cast<std::size_t>(t.grid));
    const std::vector<double> laser =
        linspace(t.laser_detuning.lo, t.laser_detuning.hi, static_cast<std::size_t>(t.grid));

    OperatingPoint best;
    double best_qd = qd.front(), best_laser = laser.front();
    best.fidelity = -1.0;
    for (double q : qd)
        for (double l : laser) {
            const OperatingPoint op = evaluate_operating_point(p, t, q, l);
            if (op.fidelity > best.fidelity) {
                best = op;
                best_qd = q;
                best_laser = l;
            }
        }
    best.coarse_fidelity = best.fidelity;

    const std::vector<double> lo{t.qd_detuning.lo, t.laser_detuning.lo};
    const std::vector<double> hi{t.qd_detuning.hi, t.laser_detuning.hi};
    if (hi[0] > lo[0] || hi[1] > lo[1]) {
        // Start from a simplex about one coarse cell wide.
        options.initial_step = 1.0 / std::max(1, t.grid - 1);
        auto loss = [&](const std::vector<double>& x) {
            return 1.0 - evaluate_operating_point(p, t, x[0], x[1]).fidelity;
        };
        const SimplexResult sr = minimize_simplex(loss, {best_qd, best_laser}, lo, hi, options);
        const OperatingPoint refined = evaluate_operating_point(p, t, sr.x[0], sr.x[1]);
        if (refined.fidelity > best.fidelity) {
            const double coarse = best.coarse_fidelity;
            best = refined;
            best.coarse_fidelity = coarse;
        }
    }
    return best;
}

/// One calibration anchor of the field-to-transition-energy map.
struct ZeemanAnchor {
    double field_tesla = 0.0;
    double omega_qd_up = 0.0;
};

/// Affine interpolation of omega_QD_up(B) through two anchors.
inline double zeeman_map(const ZeemanAnchor& a, const ZeemanAnchor& b, double field_tesla) {
    if (a.field_tesla == b.field_tesla) throw Error("coincident anchors");
    const double slope = (b.omega_qd_up - a.omega_qd_up) / (b.field_tesla - a.field_tesla);
    return a.omega_qd_up + slope * (field_tesla - a.field_tesla);
}

} // namespace spinphoton
