#pragma once

/// Run configuration (JSON) and the plain-text table formats.

#include "calibrate.hpp"
#include "device.hpp"
#include "ensemble.hpp"
#include "error.hpp"
#include "tomography.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace spinphoton::io {

using Json = nlohmann::ordered_json;

enum class ScanReference { CavV, QdUp };
enum class Format { Csv, JsonLines };

inline Format parse_format(const std::string& s) {
    if (s == "csv") return Format::Csv;
    if (s == "jsonl" || s == "json-lines") return Format::JsonLines;
    throw Error("unknown format '" + s + "' (expected csv or jsonl)");
}

inline Basis parse_basis(const std::string& s) {
    static const char* names[] = {"H", "V", "D", "A", "R", "L"};
    for (int i = 0; i < 6; ++i)
        if (s == names[i]) return kAllBases[i];
    throw Error("unknown polarisation '" + s + "' (expected one of H V D A R L)");
}

inline const char* basis_name(Basis b) {
    static const char* names[] = {"H", "V", "D", "A", "R", "L"};
    return names[static_cast<int>(b)];
}

struct RunConfig {
    DeviceParams device;
    std::optional<double> reference_eV; ///< absolute energy of omega_cav_V, metadata only
    bool occupation_from_charge = true;
    double p_c = 1.0;
    OccupationModel occupation = OccupationModel::from_charge(1.0);
    NoiseModel noise;
    ScanGrid scan;
    ScanReference scan_reference = ScanReference::CavV;
    Basis input = Basis::V;
    Conditioning conditioning = Conditioning::Avg;
    std::string output_path;
    Format output_format = Format::Csv;

    /// Absolute laser energies of the scan (ueV, same reference as the device).
    [[nodiscard]] std::vector<double> laser_grid() const {
        const double offset = scan_reference == ScanReference::CavV ? device.omega_cav_V : device.omega_qd_up;
        std::vector<double> pts = scan.points();
        for (double& w : pts) w += offset;
        return pts;
    }

    [[nodiscard]] ModelState model_state() const { return {device, occupation.p_c(), noise.sigma, noise.quad_order}; }
};

namespace detail {

class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "expected an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        std::string where = path_;
        if (!key.empty()) where += (where.empty() ? "" : ".") + key;
        throw Error("config " + (where.empty() ? std::string("<root>") : where) + ": " + what);
    }

    [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) fail(key, "missing required key");
        const Json& v = j_.at(key);
        if (!v.is_number()) fail(key, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(key, "expected a finite number");
        return x;
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!j_.contains(key)) return std::nullopt;
        return number(key);
    }

    int integer(const std::string& key, int fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const Json& v = j_.at(key);
        if (!v.is_number_integer()) fail(key, "expected an integer");
        return v.get<int>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const Json& v = j_.at(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }

    std::optional<ObjectReader> object(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) return std::nullopt;
        return ObjectReader(j_.at(key), path_.empty() ? key : path_ + "." + key);
    }

    void reject_unknown() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key())) fail(item.key(), "unknown key");
    }

    [[nodiscard]] const std::string& path() const { return path_; }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class Fn>
auto addressed(const ObjectReader& r, const std::string& key, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        r.fail(key, e.what());
    }
}

} // namespace detail

inline RunConfig parse_config(const Json& root) {
    using detail::ObjectReader;
    RunConfig cfg;
    ObjectReader top(root, "");

    auto dev = top.object("device");
    if (!dev) top.fail("device", "missing required key");
    auto abs = top.object("absolute_eV");

    const char* energy_keys[] = {"omega_cav_V", "omega_cav_H", "omega_qd_up", "omega_qd_down"};
    double* energy_fields[] = {&cfg.device.omega_cav_V, &cfg.device.omega_cav_H, &cfg.device.omega_qd_up,
                               &cfg.device.omega_qd_down};
    std::optional<double> abs_values[4];
    if (abs) {
        for (int k = 0; k < 4; ++k) {
            abs_values[k] = abs->optional_number(energy_keys[k]);
            if (abs_values[k] && dev->has(energy_keys[k]))
                abs->fail(energy_keys[k], "also given in device block");
        }
        abs->reject_unknown();
        if (!abs_values[0]) abs->fail("omega_cav_V", "missing required key (defines the reference)");
        if (dev->has("reference_eV")) dev->fail("reference_eV", "conflicts with absolute_eV block");
    }
    for (int k = 0; k < 4; ++k) {
        if (abs_values[k]) {
            *energy_fields[k] = (*abs_values[k] - *abs_values[0]) * 1e6;
        } else if (k == 0) {
            *energy_fields[k] = dev->optional_number(energy_keys[k]).value_or(0.0);
        } else {
            *energy_fields[k] = dev->number(energy_keys[k]);
        }
    }
    if (abs) {
        // Re-reference everything so omega_cav_V = 0.
        cfg.reference_eV = abs_values[0];
    } else {
        cfg.reference_eV = dev->optional_number("reference_eV");
    }

    DeviceParams& d = cfg.device;
    d.kappa_V = dev->number("kappa_V");
    d.kappa_H = dev->number("kappa_H");
    d.eta_top = dev->number("eta_top");
    d.g = dev->number("g");
    d.gamma_sp = dev->number("gamma_sp");
    d.gamma_pd = dev->optional_number("gamma_pd").value_or(0.0);
    d.chirality = dev->integer("chirality", 1);
    dev->reject_unknown();
    if (!(d.kappa_V > 0.0)) dev->fail("kappa_V", "must be > 0");
    if (!(d.kappa_H > 0.0)) dev->fail("kappa_H", "must be > 0");
    if (d.eta_top < 0.0 || d.eta_top > 1.0) dev->fail("eta_top", "must lie in [0, 1]");
    if (d.g < 0.0) dev->fail("g", "must be >= 0");
    if (d.gamma_sp < 0.0) dev->fail("gamma_sp", "must be >= 0");
    if (d.gamma_pd < 0.0) dev->fail("gamma_pd", "must be >= 0");
    if (d.chirality != 1 && d.chirality != -1) dev->fail("chirality", "must be +1 or -1");

    if (auto occ = top.object("occupation")) {
        if (occ->has("p_c")) {
            cfg.occupation_from_charge = true;
            cfg.p_c = occ->number("p_c");
            cfg.occupation = detail::addressed(*occ, "p_c", [&] { return OccupationModel::from_charge(cfg.p_c); });
        } else {
            cfg.occupation_from_charge = false;
            cfg.occupation = {occ->number("p_up"), occ->number("p_down"), occ->number("p_empty")};
            detail::addressed(*occ, "", [&] { cfg.occupation.validate(); });
        }
        occ->reject_unknown();
    }

    if (auto noise = top.object("noise")) {
        cfg.noise.sigma = noise->optional_number("sigma").value_or(0.0);
        cfg.noise.quad_order = noise->integer("quad_order", 15);
        noise->reject_unknown();
        if (cfg.noise.sigma < 0.0) noise->fail("sigma", "must be >= 0");
        if (cfg.noise.quad_order < 1) noise->fail("quad_order", "must be >= 1");
    }

    if (auto scan = top.object("scan")) {
        cfg.scan.start = scan->number("start");
        cfg.scan.stop = scan->number("stop");
        cfg.scan.step = scan->number("step");
        const std::string ref = scan->string("reference", "cav_V");
        if (ref == "cav_V")
            cfg.scan_reference = ScanReference::CavV;
        else if (ref == "qd_up")
            cfg.scan_reference = ScanReference::QdUp;
        else
            scan->fail("reference", "expected \"cav_V\" or \"qd_up\"");
        scan->reject_unknown();
        if (!(cfg.scan.step > 0.0)) scan->fail("step", "must be > 0");
        if (cfg.scan.stop < cfg.scan.start) scan->fail("stop", "must be >= start");
    } else {
        top.fail("scan", "missing required key");
    }

    if (auto drive = top.object("drive")) {
        const std::string in = drive->string("input", "V");
        cfg.input = detail::addressed(*drive, "input", [&] { return parse_basis(in); });
        drive->reject_unknown();
    }

    const std::string cond = top.string("conditioning", "avg");
    cfg.conditioning = detail::addressed(top, "conditioning", [&] { return parse_conditioning(cond); });

    if (auto out = top.object("output")) {
        cfg.output_path = out->string("path", "");
        const std::string fmt = out->string("format", "csv");
        cfg.output_format = detail::addressed(*out, "format", [&] { return parse_format(fmt); });
        out->reject_unknown();
    }
    top.reject_unknown();
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>") {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(origin + ": " + e.what());
    }
    return parse_config(root);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline RunConfig load_config(const std::string& path) { return parse_config_text(read_file(path), path); }

/// Canonical serialised form; parse_config(to_json(c)) reproduces c.
inline Json to_json(const RunConfig& c) {
    Json j;
    Json& d = j["device"];
    d["omega_cav_V"] = c.device.omega_cav_V;
    d["omega_cav_H"] = c.device.omega_cav_H;
    d["kappa_V"] = c.device.kappa_V;
    d["kappa_H"] = c.device.kappa_H;
    d["eta_top"] = c.device.eta_top;
    d["g"] = c.device.g;
    d["gamma_sp"] = c.device.gamma_sp;
    d["gamma_pd"] = c.device.gamma_pd;
    d["omega_qd_up"] = c.device.omega_qd_up;
    d["omega_qd_down"] = c.device.omega_qd_down;
    d["chirality"] = c.device.chirality;
    if (c.reference_eV) d["reference_eV"] = *c.reference_eV;
    if (c.occupation_from_charge)
        j["occupation"] = {{"p_c", c.p_c}};
    else
        j["occupation"] = {{"p_up", c.occupation.p_up}, {"p_down", c.occupation.p_down},
                           {"p_empty", c.occupation.p_empty}};
    j["noise"] = {{"sigma", c.noise.sigma}, {"quad_order", c.noise.quad_order}};
    j["scan"] = {{"start", c.scan.start},
                 {"stop", c.scan.stop},
                 {"step", c.scan.step},
                 {"reference", c.scan_reference == ScanReference::CavV ? "cav_V" : "qd_up"}};
    j["drive"] = {{"input", basis_name(c.input)}};
    j["conditioning"] = to_string(c.conditioning);
    if (!c.output_path.empty() || c.output_format != Format::Csv)
        j["output"] = {{"path", c.output_path}, {"format", c.output_format == Format::Csv ? "csv" : "jsonl"}};
    return j;
}

// ---------------------------------------------------------------------------
// Tables

inline constexpr std::string_view kRecordHeader =
    "omega_laser_ueV,det_cavV_ueV,det_qd_up_ueV,i_h,i_v,i_d,i_a,i_r,i_l,total,s_hv,s_da,s_rl,purity";
inline constexpr std::string_view kMeasurementHeader = "omega_laser_ueV,i_h,i_v,i_d,i_a,i_r,i_l";
inline constexpr std::string_view kTrajectoryHeader = "det_qd_up_ueV,s_hv,s_da,s_rl,purity";

/// 17 significant digits, '.' decimal point, independent of the locale.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::array<double, 14> record_fields(const SpectrumRecord& r) {
    const auto& x = r.intensities.values;
    return {r.omega_laser, r.det_cav_v, r.det_qd_up, x[0],       x[1],       x[2],       x[3],
            x[4],          x[5],        r.total,     r.stokes.hv, r.stokes.da, r.stokes.rl, r.purity};
}

inline std::vector<std::string> record_field_names() {
    std::vector<std::string> names;
    std::string_view h = kRecordHeader;
    std::size_t pos = 0;
    while (pos <= h.size()) {
        const std::size_t comma = h.find(',', pos);
        const std::size_t end = comma == std::string_view::npos ? h.size() : comma;
        names.emplace_back(h.substr(pos, end - pos));
        pos = end + 1;
    }
    return names;
}

inline void write_records(const std::vector<SpectrumRecord>& records, std::ostream& out, Format format) {
    if (format == Format::Csv) {
        out << kRecordHeader << '\n';
        for (const SpectrumRecord& r : records) {
            const auto f = record_fields(r);
            for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << format_double(f[i]);
            out << '\n';
        }
        return;
    }
    const auto names = record_field_names();
    for (const SpectrumRecord& r : records) {
        const auto f = record_fields(r);
        Json obj = Json::object();
        for (std::size_t i = 0; i < f.size(); ++i) obj[names[i]] = f[i];
        out << obj.dump() << '\n';
    }
}

inline void write_records(const std::vector<SpectrumRecord>& records, const std::string& path, Format format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    write_records(records, out, format);
    if (!out) throw Error("cannot write '" + path + "'");
}

inline void write_trajectory(const std::vector<SpectrumRecord>& records, std::ostream& out) {
    out << kTrajectoryHeader << '\n';
    for (const SpectrumRecord& r : records) {
        out << format_double(r.det_qd_up) << ',' << format_double(r.stokes.hv) << ','
            << format_double(r.stokes.da) << ',' << format_double(r.stokes.rl) << ','
            << format_double(r.purity) << '\n';
    }
}

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

} // namespace detail

/// Reads the 7-column measurement table (or the full record table written by
/// write_records) into laser energies and sextets. The grid must be strictly
/// increasing.
inline std::vector<Measurement> read_spectrum_csv(std::istream& in, const std::string& origin = "<csv>") {
    std::string line;
    if (!std::getline(in, line)) throw Error(origin + ": missing header row");
    const std::string_view header = detail::trim(line);
    const bool full = header == kRecordHeader;
    if (!full && header != kMeasurementHeader)
        throw Error(origin + ":1: header does not match '" + std::string(kMeasurementHeader) + "'");
    const std::vector<std::string_view> names = detail::split_csv(full ? kRecordHeader : kMeasurementHeader);
    const std::size_t ncols = names.size();
    // Column indices of omega and the six intensities.
    const std::array<std::size_t, 7> cols = full ? std::array<std::size_t, 7>{0, 3, 4, 5, 6, 7, 8}
                                                 : std::array<std::size_t, 7>{0, 1, 2, 3, 4, 5, 6};

    std::vector<Measurement> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view text = detail::trim(line);
        if (text.empty()) continue;
        const auto cells = detail::split_csv(text);
        const std::string where = origin + ":" + std::to_string(lineno);
        if (cells.size() != ncols)
            throw Error(where + ": expected " + std::to_string(ncols) + " fields, got " +
                        std::to_string(cells.size()));
        std::array<double, 7> v{};
        for (std::size_t k = 0; k < 7; ++k) {
            const std::string_view cell = detail::trim(cells[cols[k]]);
            const std::string col(names[cols[k]]);
            double x = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), x);
            if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || cell.empty())
                throw Error(where + ", column " + col + ": non-numeric value '" + std::string(cell) + "'");
            if (!std::isfinite(x))
                throw Error(where + ", column " + col + ": non-finite value '" + std::string(cell) + "'");
            v[k] = x;
        }
        if (!rows.empty()) {
            if (v[0] == rows.back().omega_laser) throw Error(where + ": duplicate omega_laser_ueV");
            if (v[0] < rows.back().omega_laser) throw Error(where + ": omega_laser_ueV is not increasing");
        }
        rows.push_back({v[0], IntensitySextet::from(v[1], v[2], v[3], v[4], v[5], v[6])});
    }
    return rows;
}

inline std::vector<Measurement> read_spectrum_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    return read_spectrum_csv(in, path);
}

inline void write_measurements(const std::vector<Measurement>& rows, std::ostream& out) {
    out << kMeasurementHeader << '\n';
    for (const Measurement& m : rows) {
        out << format_double(m.omega_laser);
        for (double x : m.intensities.values) out << ',' << format_double(x);
        out << '\n';
    }
}

} // namespace spinphoton::io
