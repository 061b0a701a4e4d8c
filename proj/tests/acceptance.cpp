// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <spinphoton/cli.hpp>
#include <spinphoton/spinphoton.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

using namespace spinphoton;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

/// Best fidelity to `target` over a 0.01 ueV laser scan, spin-up conditioning.
std::pair<double, StokesVector> best_scan(const DeviceParams& p, const NoiseModel& noise, Basis target, double lo,
                                          double hi) {
    double best_f = -1.0;
    StokesVector best_s;
    for (double w = lo; w <= hi; w += 0.01) {
        const auto s = stokes_from_coherence(averaged_coherence_conditional(p, {w}, GroundState::Up, noise));
        const double f = fidelity(s, stokes_of(target));
        if (f > best_f) {
            best_f = f;
            best_s = s;
        }
    }
    return {best_f, best_s};
}

Outcome cooperativity_range() {
    const double c = cooperativity(paper_device());
    return {c >= 6.0 && c <= 10.0, fmt("C = %.4f, required [6, 10]", c)};
}

Outcome half_wave_point() {
    const auto [f, s] = best_scan(paper_device(), {0.5, 15}, Basis::H, 30.0, 80.0);
    const double pur = purity(s);
    return {std::abs(f - 0.905) <= 0.03 && std::abs(pur - 0.81) <= 0.05,
            fmt("F(H) = %.4f (0.905 +- 0.03), purity = %.4f (0.81 +- 0.05)", f, pur)};
}

Outcome quarter_wave_point() {
    DeviceParams p = paper_device();
    p.omega_qd_up = 14.1;
    const auto [f, s] = best_scan(p, {0.5, 15}, Basis::A, -10.0, 40.0);
    const double pur = purity(s);
    return {std::abs(f - 0.99) <= 0.01 && std::abs(pur - 0.98) <= 0.01,
            fmt("F(A) = %.4f (0.99 +- 0.01), purity = %.4f (0.98 +- 0.01)", f, pur)};
}

Outcome noiseless_purity() {
    const auto rows = spectrum_scan(paper_device(), linspace(-300.0, 300.0, 500), {}, {0.0, 15}, Conditioning::Up);
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, std::abs(r.purity - 1.0));
    return {rows.size() == 500 && worst <= 1e-9, fmt("max |purity - 1| = %.3e over %zu points", worst, rows.size())};
}

Outcome empty_cavity_dip() {
    const DeviceParams p = paper_device();
    const double r = reflect(p, {p.omega_cav_V}, GroundState::Empty).coherence.trace();
    const double expect = std::pow(1.0 - 2.0 * 0.635, 2);
    return {std::abs(r - expect) <= 1e-9 && std::abs(r - 0.0729) <= 1e-9,
            fmt("R_V = %.12f, expected 0.0729", r)};
}

Outcome passivity() {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    double worst_excess = -1.0, worst_lossless = 0.0;
    const int cases = 2000;
    for (int i = 0; i < cases; ++i) {
        DeviceParams p;
        p.omega_cav_H = 400.0 * (u(rng) - 0.5);
        p.kappa_V = 10.0 + 300.0 * u(rng);
        p.kappa_H = 10.0 + 300.0 * u(rng);
        p.eta_top = u(rng);
        p.g = 60.0 * u(rng);
        p.gamma_sp = 5.0 * u(rng);
        p.gamma_pd = 2.0 * u(rng);
        p.omega_qd_up = 400.0 * (u(rng) - 0.5);
        p.omega_qd_down = 400.0 * (u(rng) - 0.5);
        p.chirality = u(rng) < 0.5 ? 1 : -1;
        const JonesVector j = JonesVector{{n(rng), n(rng)}, {n(rng), n(rng)}}.normalized();
        const DriveField d{600.0 * (u(rng) - 0.5), j};
        const GroundState gs = static_cast<GroundState>(i % 3);
        worst_excess = std::max(worst_excess, reflect(p, d, gs).coherence.trace() - 1.0);

        p.eta_top = 1.0;
        p.gamma_sp = 0.0;
        p.gamma_pd = 0.0;
        try {
            worst_lossless = std::max(worst_lossless, std::abs(reflect(p, d, gs).coherence.trace() - 1.0));
        } catch (const Error&) {
            // Exactly singular lossless resonance; skipped.
        }
    }
    return {worst_excess <= 1e-9 && worst_lossless <= 1e-9,
            fmt("%d cases: max(trace - 1) = %.3e, lossless max |trace - 1| = %.3e", cases, worst_excess,
                worst_lossless)};
}

Outcome extrapolation_round_trip() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    const int cases = 2000;
    for (int i = 0; i < cases; ++i) {
        IntensitySextet up, cav;
        for (int k = 0; k < 6; ++k) {
            up.values[k] = u(rng);
            cav.values[k] = u(rng);
        }
        const IntensitySextet back = extrapolate_conditional(compose_average(cav, up, 0.47), cav, 0.47);
        for (int k = 0; k < 6; ++k) worst = std::max(worst, std::abs(back.values[k] - up.values[k]));
    }
    return {worst <= 1e-12, fmt("%d cases: max error %.3e", cases, worst)};
}

Outcome oracle_equivalence() {
    const DeviceParams p = paper_device();
    const double half = 0.5 * purcell_linewidth(p, p.omega_qd_up);
    bool ok = true;
    std::string detail;
    for (double w : {p.omega_qd_up, p.omega_qd_up - half, p.omega_qd_up + half}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = lindblad::compare_with_linear(p, {w}, GroundState::Up, std::nullopt, {2});
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool point_ok = r.max_abs_dstokes <= 1e-3 && r.excited_population < 1e-4 &&
                              r.top_fock_population < 1e-6 && secs < 5.0;
        ok = ok && point_ok;
        detail += fmt("[w=%.2f dS=%.2e Pe=%.1e top=%.1e %.2fs] ", w, r.max_abs_dstokes, r.excited_population,
                      r.top_fock_population, secs);
    }
    return {ok, detail};
}

std::vector<double> fit_grid(double qd) {
    std::vector<double> g = ScanGrid{-150.0, qd - 15.0, 5.0}.points();
    for (double w : ScanGrid{qd - 14.75, qd + 15.0, 0.25}.points()) g.push_back(w);
    for (double w : ScanGrid{qd + 20.0, 250.0, 5.0}.points()) g.push_back(w);
    return g;
}

Dataset synthesise(const ModelState& s, Conditioning c, const std::vector<double>& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Dataset ds{c, {}};
    for (double w : grid) {
        IntensitySextet x = model_sextet(s, c, w);
        for (double& v : x.values) v *= 1.0 + 0.01 * n(rng);
        ds.points.push_back({w, x});
    }
    return ds;
}

Outcome fit_recovery() {
    ModelState truth;
    truth.device = paper_device();
    truth.p_c = 0.94;
    truth.sigma = 0.5;
    std::mt19937_64 rng(2024);
    const auto grid = fit_grid(truth.device.omega_qd_up);

    FitProblem cavity;
    cavity.datasets = {synthesise(truth, Conditioning::Cav, grid, rng), synthesise(truth, Conditioning::Up, grid, rng)};
    cavity.free = {ParamId::G, ParamId::KappaV, ParamId::KappaH, ParamId::EtaTop};
    cavity.bounds = {{5.0, 40.0}, {50.0, 300.0}, {50.0, 300.0}, {0.2, 1.0}};
    cavity.initial = truth;
    cavity.initial.device.g *= 1.2;
    cavity.initial.device.kappa_V *= 0.8;
    cavity.initial.device.kappa_H *= 1.15;
    cavity.initial.device.eta_top *= 0.85;
    const FitResult a = fit_parameters(cavity);
    const double eg = std::abs(a.best.device.g / 15.0 - 1.0);
    const double ekv = std::abs(a.best.device.kappa_V / 162.0 - 1.0);
    const double ekh = std::abs(a.best.device.kappa_H / 155.0 - 1.0);
    const double eeta = std::abs(a.best.device.eta_top / 0.635 - 1.0);

    FitProblem occupancy;
    occupancy.datasets = {synthesise(truth, Conditioning::Avg, grid, rng)};
    occupancy.free = {ParamId::PC, ParamId::Sigma};
    occupancy.bounds = {{0.0, 1.0}, {0.0, 3.0}};
    occupancy.initial = truth;
    occupancy.initial.p_c = 0.8;
    occupancy.initial.sigma = 0.6;
    const FitResult b = fit_parameters(occupancy);
    const double epc = std::abs(b.best.p_c / 0.94 - 1.0);
    const double esig = std::abs(b.best.sigma / 0.5 - 1.0);

    const bool ok = std::max({eg, ekv, ekh, eeta}) <= 0.05 && std::max(epc, esig) <= 0.10;
    return {ok, fmt("rel. errors g %.4f kV %.4f kH %.4f eta %.4f (<= 0.05); p_c %.4f sigma %.4f (<= 0.10)", eg, ekv,
                    ekh, eeta, epc, esig)};
}

/// Worst |S - (-1, 0, 0)| over the cavity band with the dot `multiple` mean
/// linewidths above and below the laser.
std::pair<double, double> far_detuning_deviation(double multiple) {
    DeviceParams p = paper_device();
    const double offset = multiple * p.kappa_mean();
    double worst = 0.0, worst_w = 0.0;
    for (double w : ScanGrid{-100.0, 250.0, 1.0}.points())
        for (double sign : {-1.0, 1.0}) {
            p.omega_qd_up = w + sign * offset;
            const auto s = stokes_from_coherence(reflect(p, {w}, GroundState::Up).coherence);
            const double dev = std::max({std::abs(s.hv + 1.0), std::abs(s.da), std::abs(s.rl)});
            if (dev > worst) {
                worst = dev;
                worst_w = w;
            }
        }
    return {worst, worst_w};
}

Outcome far_detuning_identity() {
    const auto [worst, worst_w] = far_detuning_deviation(31.0);
    double needed = 31.0;
    while (needed < 200.0 && far_detuning_deviation(needed).first > 1e-3) needed += 1.0;
    return {worst <= 1e-3, fmt("|w - qd| = 31 kappa: max deviation from (-1, 0, 0) = %.3e at w = %.0f ueV; "
                               "band-wide 1e-3 first reached at %.0f kappa",
                               worst, worst_w, needed)};
}

Outcome determinism(const std::string& config) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "spinphoton_acceptance";
    fs::create_directories(dir);
    const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
    std::ostringstream out, err;
    const int ca = cli::run_command({"spectrum", "--config", config, "--out", a}, out, err);
    const int cb = cli::run_command({"spectrum", "--config", config, "--out", b}, out, err);
    const std::string ta = ca == 0 ? io::read_file(a) : "";
    const std::string tb = cb == 0 ? io::read_file(b) : "";
    fs::remove_all(dir);
    return {ca == 0 && cb == 0 && !ta.empty() && ta == tb,
            fmt("exit codes %d/%d, %zu bytes, identical = %s", ca, cb, ta.size(), ta == tb ? "yes" : "no")};
}

} // namespace

int main(int argc, char** argv) {
    const std::string config = argc > 1 ? argv[1] : std::string(SPINPHOTON_SOURCE_DIR) + "/configs/paper.json";
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"cooperativity in [6, 10]", cooperativity_range},
        {"pi configuration fidelity and purity", half_wave_point},
        {"pi/2 configuration fidelity and purity", quarter_wave_point},
        {"noiseless purity over a 500-point scan", noiseless_purity},
        {"empty-cavity V dip reflectivity", empty_cavity_dip},
        {"passivity and lossless limit", passivity},
        {"conditional extrapolation round trip", extrapolation_round_trip},
        {"master-equation oracle agreement", oracle_equivalence},
        {"fit recovery from noisy synthetic spectra", fit_recovery},
        {"far-detuned output equals input", far_detuning_identity},
        {"spectrum determinism", [&] { return determinism(config); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failures;
        std::printf("[%s] %2zu %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
