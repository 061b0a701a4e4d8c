#pragma once

/// Command-line front end. run_command() is the whole program minus main(),
/// so the exit-code contract can be tested in-process.
///
/// Exit status: 0 success, 1 runtime error, 2 usage error. Diagnostics go to
/// `err`; tables and reports go to --out or to `out`.

#include "calibrate.hpp"
#include "ensemble.hpp"
#include "error.hpp"
#include "io.hpp"
#include "lindblad.hpp"
#include "model.hpp"
#include "tomography.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace spinphoton::cli {

namespace detail {

/// Sends output to a file when a path is given, otherwise to `fallback`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw Error("cannot write '" + path + "'");
            out_ = file_.get();
        }
    }
    std::ostream& stream() { return *out_; }
    void finish(const std::string& path) {
        out_->flush();
        if (!*out_) throw Error("cannot write '" + (path.empty() ? std::string("<stdout>") : path) + "'");
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_;
};

inline Range parse_range(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("range", "expected lo:hi, got '" + s + "'");
    try {
        std::size_t used = 0;
        const std::string a = s.substr(0, colon), b = s.substr(colon + 1);
        Range r{std::stod(a, &used), 0.0};
        if (used != a.size()) throw std::invalid_argument(a);
        r.hi = std::stod(b, &used);
        if (used != b.size()) throw std::invalid_argument(b);
        if (!(r.lo <= r.hi)) throw CLI::ValidationError("range", "expected lo <= hi in '" + s + "'");
        return r;
    } catch (const std::logic_error&) {
        throw CLI::ValidationError("range", "expected numeric lo:hi, got '" + s + "'");
    }
}

inline StokesVector parse_target(const std::string& s) {
    if (s.size() == 1) {
        try {
            return stokes_of(io::parse_basis(s));
        } catch (const Error& e) {
            throw CLI::ValidationError("--target", e.what());
        }
    }
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::logic_error&) {
            throw CLI::ValidationError("--target", "expected H|V|D|A|R|L or x,y,z");
        }
    }
    if (v.size() != 3) throw CLI::ValidationError("--target", "expected H|V|D|A|R|L or x,y,z");
    StokesVector t{v[0], v[1], v[2], std::nullopt, false};
    if (std::abs(t.norm() - 1.0) > 1e-9) throw CLI::ValidationError("--target", "target must be a unit vector");
    return t;
}

/// Default search box for a free parameter centred on its initial value.
inline Bounds default_bounds(ParamId id, double x) {
    switch (id) {
    case ParamId::EtaTop:
    case ParamId::PC: return {0.0, 1.0};
    case ParamId::Sigma: return {0.0, std::max(2.0, 4.0 * x)};
    case ParamId::OmegaCavV:
    case ParamId::OmegaCavH:
    case ParamId::OmegaQdUp:
    case ParamId::OmegaQdDown: return {x - 50.0, x + 50.0};
    default: return x > 0.0 ? Bounds{0.5 * x, 2.0 * x} : Bounds{0.0, 1.0};
    }
}

inline io::Json state_json(const ModelState& s) {
    io::Json j;
    for (ParamId id : kAllParams) j[param_name(id)] = s.get(id);
    return j;
}

inline io::Json stokes_json(const StokesVector& s) { return {s.hv, s.da, s.rl}; }

inline GroundState parse_ground(const std::string& s) {
    if (s == "up") return GroundState::Up;
    if (s == "down") return GroundState::Down;
    if (s == "cav" || s == "empty") return GroundState::Empty;
    throw Error("oracle-compare conditioning must be up, down or cav");
}

} // namespace detail

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spin-photon interface polarisation simulator", "spinphoton"};
    app.require_subcommand(1);
    const std::vector<std::string> conditionings{"avg", "cav", "up", "down"};

    std::string config_path, out_path, conditioning, format, avg_path, cav_path, up_path, down_path;
    std::string target_text = "H", qd_range_text, laser_range_text, free_text;
    std::vector<std::string> bound_texts;
    double p_up = 0.0, omega_laser = 0.0, omega_qd_up_override = 0.0;
    std::optional<double> amplitude;
    bool project = false;
    int grid = 41, cutoff = 2, max_evals = 10000;

    auto* spectrum = app.add_subcommand("spectrum", "Simulated tomography spectrum over the configured laser scan");
    spectrum->add_option("--config", config_path, "Run configuration (JSON)")->required();
    spectrum->add_option("--conditioning", conditioning, "avg | cav | up | down")->check(CLI::IsMember(conditionings));
    spectrum->add_option("--out", out_path, "Output file (default: stdout)");
    spectrum->add_option("--format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

    auto* trajectory = app.add_subcommand("trajectory", "Stokes vector versus laser detuning from the up transition");
    trajectory->add_option("--config", config_path, "Run configuration (JSON)")->required();
    trajectory->add_option("--conditioning", conditioning, "avg | cav | up | down")
        ->check(CLI::IsMember(conditionings));
    trajectory->add_option("--out", out_path, "Output file (default: stdout)");

    auto* extrapolate = app.add_subcommand("extrapolate", "Spin-up conditional intensities from avg and cav data");
    extrapolate->add_option("--avg", avg_path, "Averaged tomography table")->required();
    extrapolate->add_option("--cav", cav_path, "Empty-cavity tomography table")->required();
    extrapolate->add_option("--p-up", p_up, "Spin-up occupation P_up")->required();
    extrapolate->add_option("--config", config_path, "Configuration supplying the detuning references");
    extrapolate->add_option("--omega-qd-up", omega_qd_up_override, "Reference for det_qd_up without --config");
    extrapolate->add_option("--out", out_path, "Output file (default: stdout)");
    extrapolate->add_option("--format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    extrapolate->add_flag("--project-physical", project, "Project Stokes vectors into the unit ball");

    auto* fit = app.add_subcommand("fit", "Least-squares calibration of model parameters");
    fit->add_option("--config", config_path, "Initial parameters (JSON)")->required();
    fit->add_option("--avg", avg_path, "Averaged tomography table");
    fit->add_option("--cav", cav_path, "Empty-cavity tomography table");
    fit->add_option("--up", up_path, "Spin-up conditional table");
    fit->add_option("--down", down_path, "Spin-down conditional table");
    fit->add_option("--free", free_text, "Comma-separated free parameters, e.g. g,kappa_V");
    fit->add_option("--bound", bound_texts, "name=lo:hi (repeatable)");
    fit->add_option("--max-evals", max_evals, "Objective evaluation budget")->check(CLI::PositiveNumber);
    fit->add_option("--out", out_path, "Report file (default: stdout)");

    auto* find = app.add_subcommand("find-operating-point", "Search detunings that realise a target polarisation");
    find->add_option("--config", config_path, "Device parameters and noise (JSON)")->required();
    find->add_option("--target", target_text, "H|V|D|A|R|L or unit Stokes x,y,z");
    find->add_option("--qd-range", qd_range_text, "omega_qd_up - omega_cav_V search range lo:hi (ueV)");
    find->add_option("--laser-range", laser_range_text, "omega_laser - omega_qd_up search range lo:hi (ueV)");
    find->add_option("--grid", grid, "Coarse grid points per axis")->check(CLI::PositiveNumber);
    find->add_option("--out", out_path, "Report file (default: stdout)");

    auto* oracle = app.add_subcommand("oracle-compare", "Master-equation steady state versus the linear model");
    oracle->add_option("--config", config_path, "Device parameters (JSON)")->required();
    oracle->add_option("--omega-laser", omega_laser, "Laser energy (ueV, device reference)")->required();
    oracle->add_option("--conditioning", conditioning, "up | down | cav")
        ->check(CLI::IsMember({"up", "down", "cav"}));
    oracle->add_option("--cutoff", cutoff, "Fock cutoff per mode")->check(CLI::PositiveNumber);
    oracle->add_option("--amplitude", amplitude, "Drive amplitude (default: weak-drive search)");
    oracle->add_option("--out", out_path, "Report file (default: stdout)");

    std::vector<std::string> argv_store;
    argv_store.emplace_back("spinphoton");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (std::string& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (spectrum->parsed() || trajectory->parsed()) {
            io::RunConfig cfg = io::load_config(config_path);
            if (!conditioning.empty()) cfg.conditioning = parse_conditioning(conditioning);
            if (!format.empty()) cfg.output_format = io::parse_format(format);
            if (out_path.empty()) out_path = cfg.output_path;
            const auto rows = spectrum_scan(cfg.device, cfg.laser_grid(), cfg.occupation, cfg.noise,
                                            cfg.conditioning, analysis_state(cfg.input));
            detail::Sink sink(out_path, out);
            if (spectrum->parsed())
                io::write_records(rows, sink.stream(), cfg.output_format);
            else
                io::write_trajectory(rows, sink.stream());
            sink.finish(out_path);
            return 0;
        }

        if (extrapolate->parsed()) {
            const auto avg = io::read_spectrum_csv(avg_path);
            const auto cav = io::read_spectrum_csv(cav_path);
            if (avg.size() != cav.size()) throw Error("avg and cav tables have different lengths");
            double omega_cav_v = 0.0, omega_qd = omega_qd_up_override;
            if (!config_path.empty()) {
                const io::RunConfig cfg = io::load_config(config_path);
                omega_cav_v = cfg.device.omega_cav_V;
                omega_qd = cfg.device.omega_qd_up;
            }
            std::vector<SpectrumRecord> rows;
            for (std::size_t i = 0; i < avg.size(); ++i) {
                if (avg[i].omega_laser != cav[i].omega_laser)
                    throw Error("avg and cav grids differ at row " + std::to_string(i + 2));
                const IntensitySextet up = extrapolate_conditional(avg[i].intensities, cav[i].intensities, p_up);
                try {
                    rows.push_back(make_record(avg[i].omega_laser, omega_cav_v, omega_qd, up, project));
                } catch (const Error& e) {
                    throw Error("row " + std::to_string(i + 2) + ": " + e.what());
                }
            }
            detail::Sink sink(out_path, out);
            io::write_records(rows, sink.stream(), format.empty() ? io::Format::Csv : io::parse_format(format));
            sink.finish(out_path);
            return 0;
        }

        if (fit->parsed()) {
            const io::RunConfig cfg = io::load_config(config_path);
            FitProblem problem;
            problem.initial = cfg.model_state();
            const std::pair<Conditioning, std::string*> inputs[] = {{Conditioning::Avg, &avg_path},
                                                                    {Conditioning::Cav, &cav_path},
                                                                    {Conditioning::Up, &up_path},
                                                                    {Conditioning::Down, &down_path}};
            for (const auto& [tag, path] : inputs)
                if (!path->empty()) problem.datasets.push_back({tag, io::read_spectrum_csv(*path)});
            if (problem.datasets.empty()) {
                err << "error: fit needs at least one of --avg, --cav, --up, --down\n";
                return 2;
            }
            std::stringstream ss(free_text);
            std::string name;
            while (std::getline(ss, name, ','))
                if (!name.empty()) problem.free.push_back(parse_param(name));
            for (ParamId id : problem.free)
                problem.bounds.push_back(detail::default_bounds(id, problem.initial.get(id)));
            for (const std::string& b : bound_texts) {
                const auto eq = b.find('=');
                if (eq == std::string::npos) {
                    err << "error: --bound expects name=lo:hi, got '" << b << "'\n";
                    return 2;
                }
                const ParamId id = parse_param(b.substr(0, eq));
                const Range r = detail::parse_range(b.substr(eq + 1));
                bool found = false;
                for (std::size_t i = 0; i < problem.free.size(); ++i)
                    if (problem.free[i] == id) {
                        problem.bounds[i] = {r.lo, r.hi};
                        found = true;
                    }
                if (!found) throw Error("--bound given for non-free parameter " + b.substr(0, eq));
            }
            SimplexOptions opt;
            opt.max_evaluations = max_evals;
            const FitResult res = fit_parameters(problem, opt);

            io::Json report;
            report["converged"] = res.converged;
            report["objective"] = res.objective;
            report["initial_objective"] = res.initial_objective;
            report["iterations"] = res.iterations;
            report["evaluations"] = res.evaluations;
            io::Json freej = io::Json::object();
            for (std::size_t i = 0; i < problem.free.size(); ++i) freej[param_name(problem.free[i])] = res.theta[i];
            report["free"] = freej;
            report["parameters"] = detail::state_json(res.best);
            io::Json norms = io::Json::array();
            for (std::size_t i = 0; i < problem.datasets.size(); ++i)
                norms.push_back({{"conditioning", to_string(problem.datasets[i].conditioning)},
                                 {"residual_norm", res.dataset_residual_norms[i]}});
            report["datasets"] = norms;
            detail::Sink sink(out_path, out);
            sink.stream() << report.dump(2) << '\n';
            sink.finish(out_path);
            return 0;
        }

        if (find->parsed()) {
            const io::RunConfig cfg = io::load_config(config_path);
            TargetSpec spec;
            spec.target = detail::parse_target(target_text);
            spec.qd_detuning = qd_range_text.empty() ? Range{0.0, cfg.device.birefringence()}
                                                     : detail::parse_range(qd_range_text);
            spec.laser_detuning = laser_range_text.empty() ? Range{-20.0, 20.0} : detail::parse_range(laser_range_text);
            spec.noise = cfg.noise;
            spec.grid = grid;
            spec.jones_in = analysis_state(cfg.input);
            const OperatingPoint op = find_operating_point(cfg.device, spec);

            io::Json report;
            report["target"] = detail::stokes_json(spec.target);
            report["omega_qd_up"] = op.omega_qd_up;
            report["qd_detuning"] = op.omega_qd_up - cfg.device.omega_cav_V;
            report["omega_laser"] = op.omega_laser;
            report["laser_detuning"] = op.omega_laser - op.omega_qd_up;
            report["fidelity"] = op.fidelity;
            report["coarse_fidelity"] = op.coarse_fidelity;
            report["purity"] = op.purity;
            report["stokes"] = detail::stokes_json(op.stokes);
            detail::Sink sink(out_path, out);
            sink.stream() << report.dump(2) << '\n';
            sink.finish(out_path);
            return 0;
        }

        if (oracle->parsed()) {
            const io::RunConfig cfg = io::load_config(config_path);
            const GroundState ground = detail::parse_ground(conditioning.empty() ? "up" : conditioning);
            lindblad::HilbertConfig hc;
            hc.fock_cutoff = cutoff;
            const DriveField drive{omega_laser, analysis_state(cfg.input)};
            const lindblad::OracleReport r = lindblad::compare_with_linear(cfg.device, drive, ground, amplitude, hc);

            io::Json report;
            report["omega_laser"] = omega_laser;
            report["ground"] = to_string(ground);
            report["fock_cutoff"] = cutoff;
            report["amplitude"] = r.amplitude;
            report["oracle_stokes"] = detail::stokes_json(r.oracle);
            report["linear_stokes"] = detail::stokes_json(r.linear);
            report["max_abs_dstokes"] = r.max_abs_dstokes;
            report["d_total"] = r.d_total;
            report["excited_population"] = r.excited_population;
            report["top_fock_population"] = r.top_fock_population;
            report["liouvillian_residual"] = r.residual;
            report["cutoff_sufficient"] = r.cutoff_sufficient;
            detail::Sink sink(out_path, out);
            sink.stream() << report.dump(2) << '\n';
            sink.finish(out_path);
            if (!r.cutoff_sufficient) err << "warning: top Fock occupancy " << r.top_fock_population << " > 1e-6\n";
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace spinphoton::cli
