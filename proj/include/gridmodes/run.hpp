#pragma once

// Orchestration behind the CLI subcommands: load + validate a network file,
// run the requested criteria, and emit report/CSV/SVG artifacts into an
// output directory. Everything here is also callable as a library so the
// exit-code and artifact contracts can be tested in-process.

#include "gridmodes/gnc.hpp"
#include "gridmodes/modal.hpp"
#include "gridmodes/pmd.hpp"
#include "gridmodes/report.hpp"
#include "gridmodes/svg.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace gridmodes {

// process exit codes shared by all subcommands
inline constexpr int kExitStable = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUnstable = 2;
inline constexpr int kExitMarginal = 3;

inline int exit_code_for(SystemVerdict v) {
    switch (v) {
        case SystemVerdict::stable: return kExitStable;
        case SystemVerdict::unstable: return kExitUnstable;
        default: return kExitMarginal;
    }
}

struct AnalyzeConfig {
    std::string network_path;
    FrequencyGrid grid;
    bool run_pmd = true;
    bool run_gnc = false;
    std::string grouping_path; // optional
    std::string out_dir = ".";
    bool emit_csv = true;
    bool emit_svg = true;
    bool emit_report = true;
    PmdConfig pmd;
    GncConfig gnc;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("io.not_found", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("io.write_failed", "cannot write '" + path.string() + "'");
    out << content;
}

/// Load, parse, validate, and optionally apply a grouping file.
inline NetworkModel load_model(const std::string& network_path,
                               const std::string& grouping_path = {}) {
    NetworkModel model = parse_network(read_file(network_path));
    const auto violations = validate(model);
    if (!violations.empty()) {
        std::string msg = "network file violates model invariants:";
        for (const auto& v : violations)
            msg += " [" + v.element + "." + v.field + ": " + v.message + "]";
        throw Error("model.invalid", msg);
    }
    if (!grouping_path.empty())
        model = apply_grouping(model, parse_grouping(read_file(grouping_path)));
    return model;
}

namespace detail {

inline void emit_pmd_svgs(const SweepResult& sw, const StabilityReport& report,
                          const std::filesystem::path& plots_dir) {
    SvgPlot mag("modal impedance magnitude", "f [Hz]", "|lambda_z| [Ohm]");
    SvgPlot real("modal impedance real part", "f [Hz]", "Re lambda_z [Ohm]");
    for (const auto& trace : sw.traces) {
        std::vector<double> fs, mags, res;
        for (const auto& s : trace.samples) {
            fs.push_back(s.f_hz);
            mags.push_back(std::abs(s.lambda_z));
            res.push_back(s.lambda_z.real());
        }
        const std::string name = "lambda_z" + std::to_string(trace.id);
        mag.add_series(name, fs, mags);
        real.add_series(name, fs, res);
    }
    for (const auto& p : report.points) {
        if (p.verdict != ModeVerdict::unstable) continue;
        char label[64];
        std::snprintf(label, sizeof(label), "%.1f Hz", p.f_x_hz);
        const auto& trace = sw.trace(p.mode_id);
        for (size_t i = 0; i + 1 < trace.samples.size(); ++i) {
            if (trace.samples[i].f_hz <= p.f_x_hz && p.f_x_hz <= trace.samples[i + 1].f_hz) {
                mag.add_marker(p.f_x_hz, std::abs(trace.samples[i].lambda_z), label);
                real.add_marker(p.f_x_hz, trace.samples[i].lambda_z.real(), label);
                break;
            }
        }
    }
    write_file(plots_dir / "pmd_magnitude.svg", mag.render());
    write_file(plots_dir / "pmd_real.svg", real.render());
}

inline void emit_gnc_svg(const GncResult& gnc, const std::filesystem::path& plots_dir) {
    SvgPlot nyq("open-loop eigenvalue loci", "Re", "Im");
    for (const auto& locus : gnc.loci) {
        std::vector<double> re, im;
        for (const auto& p : locus.points) {
            re.push_back(p.value.real());
            im.push_back(p.value.imag());
        }
        nyq.add_series("lambda_n" + std::to_string(locus.id), re, im);
    }
    nyq.add_marker(-1.0, 0.0, "(-1, 0)");
    write_file(plots_dir / "nyquist.svg", nyq.render());
}

} // namespace detail

/// `analyze` subcommand. Returns the verdict exit code; emitted files land in
/// config.out_dir (report.json, modes.csv, loci.csv, plots/*.svg).
inline int run_analyze(const AnalyzeConfig& config) {
    if (!config.run_pmd && !config.run_gnc)
        throw Error("config.invalid", "at least one criterion must be selected");
    const NetworkModel model = load_model(config.network_path, config.grouping_path);
    const std::string fingerprint = model_fingerprint(model);

    std::filesystem::create_directories(config.out_dir);
    const std::filesystem::path out(config.out_dir);

    std::optional<StabilityReport> pmd_report;
    std::optional<GncResult> gnc_result;

    if (config.run_pmd) {
        const SweepResult sw = sweep(model, config.grid);
        pmd_report = pmd_assess(sw, config.pmd);
        if (config.emit_csv) write_file(out / "modes.csv", sweep_to_csv(sw));
        if (config.emit_svg) {
            std::filesystem::create_directories(out / "plots");
            detail::emit_pmd_svgs(sw, *pmd_report, out / "plots");
        }
    }
    if (config.run_gnc) {
        gnc_result = gnc_assess(model, config.grid, config.gnc);
        if (config.emit_csv) write_file(out / "loci.csv", loci_to_csv(*gnc_result));
        if (config.emit_svg) {
            std::filesystem::create_directories(out / "plots");
            detail::emit_gnc_svg(*gnc_result, out / "plots");
        }
    }
    if (config.emit_report)
        write_file(out / "report.json",
                   report_to_json(pmd_report, gnc_result, config.grid, fingerprint));

    const SystemVerdict verdict = pmd_report ? pmd_report->verdict : gnc_result->verdict;
    return exit_code_for(verdict);
}

/// Overwrite one numeric field addressed as "<element>.<field>" (VSC
/// operating-point fields as "<element>.operating_point.<field>"). Throws
/// param.unknown_path when the path does not resolve.
inline void set_parameter(NetworkModel& model, const std::string& path, double value) {
    const auto dot = path.find('.');
    if (dot == std::string::npos)
        throw Error("param.unknown_path",
                    "parameter path '" + path + "' must look like <element>.<field>");
    const std::string elem_name = path.substr(0, dot);
    const std::string field = path.substr(dot + 1);

    Element* el = nullptr;
    for (auto& e : model.elements)
        if (e.name == elem_name) el = &e;
    if (!el)
        throw Error("param.unknown_path", "no element named '" + elem_name + "'");

    auto vsc_field = [&](VscParams& p) -> double* {
        if (field == "kp_pll") return &p.kp_pll;
        if (field == "ki_pll") return &p.ki_pll;
        if (field == "kp_ol") return &p.kp_ol;
        if (field == "ki_ol") return &p.ki_ol;
        if (field == "kp_il") return &p.kp_il;
        if (field == "ki_il") return &p.ki_il;
        if (field == "tau_ffv") return &p.tau_ffv;
        if (field == "tau_sw") return &p.tau_sw;
        if (field == "q_d") return &p.q_d;
        if (field == "r_c") return &p.r_c;
        if (field == "l_c") return &p.l_c;
        if (field == "operating_point.v0_q") return &p.operating_point.v0_q;
        if (field == "operating_point.v0_d") return &p.operating_point.v0_d;
        if (field == "operating_point.ic0_q") return &p.operating_point.ic0_q;
        if (field == "operating_point.ic0_d") return &p.operating_point.ic0_d;
        if (field == "operating_point.theta0") return &p.operating_point.theta0;
        return nullptr;
    };

    double* target = std::visit(
        [&](auto& b) -> double* {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, RlSeries> || std::is_same_v<T, Transformer> ||
                          std::is_same_v<T, GridEquivalent>) {
                if (field == "r") return &b.r;
                if (field == "l") return &b.l;
            } else if constexpr (std::is_same_v<T, ShuntCap>) {
                if (field == "c") return &b.c;
            } else if constexpr (std::is_same_v<T, PiCable>) {
                if (field == "r") return &b.r;
                if (field == "l") return &b.l;
                if (field == "c_total") return &b.c_total;
            } else if constexpr (std::is_same_v<T, Vsc>) {
                return vsc_field(b.params);
            } else if constexpr (std::is_same_v<T, AggregatedVsc>) {
                if (field == "shunt_c") return &b.shunt_c;
                if (field == "series_r") return &b.series_r;
                if (field == "series_l") return &b.series_l;
                return vsc_field(b.params);
            }
            return nullptr;
        },
        el->body);
    if (!target)
        throw Error("param.unknown_path", "element '" + elem_name + "' (" + el->kind() +
                                              ") has no numeric field '" + field + "'");
    *target = value;
}

/// `param-sweep` subcommand: rerun the PMD assessment for each value of the
/// addressed parameter and tabulate verdicts. Returns the CSV text (also
/// written to out_dir/param_sweep.csv).
inline std::string run_param_sweep(const AnalyzeConfig& config, const std::string& param_path,
                                   const std::vector<double>& values) {
    const NetworkModel base = load_model(config.network_path, config.grouping_path);
    std::string csv = "value,verdict,f_unstable_hz\n";
    char buf[96];
    for (const double v : values) {
        NetworkModel model = base;
        set_parameter(model, param_path, v);
        const StabilityReport report = pmd_assess(sweep(model, config.grid), config.pmd);
        double f_unstable = std::numeric_limits<double>::quiet_NaN();
        for (const auto& p : report.points)
            if (p.verdict == ModeVerdict::unstable) {
                f_unstable = p.f_x_hz;
                break;
            }
        if (std::isfinite(f_unstable))
            std::snprintf(buf, sizeof(buf), "%.10g,%s,%.10g\n", v, to_string(report.verdict),
                          f_unstable);
        else
            std::snprintf(buf, sizeof(buf), "%.10g,%s,\n", v, to_string(report.verdict));
        csv += buf;
    }
    std::filesystem::create_directories(config.out_dir);
    write_file(std::filesystem::path(config.out_dir) / "param_sweep.csv", csv);
    return csv;
}

/// `dump-yt` subcommand: Y_T entries over the base grid, row-major re/im
/// pairs per frequency.
inline std::string dump_yt_csv(const NetworkModel& model, const FrequencyGrid& grid) {
    const std::vector<double> fs = grid.base_frequencies();
    const int n2 = 2 * static_cast<int>(model.buses.size());
    std::string csv = "f_hz";
    for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n2; ++j)
            csv += ",y" + std::to_string(i) + std::to_string(j) + "_re,y" + std::to_string(i) +
                   std::to_string(j) + "_im";
    csv += "\n";
    char buf[64];
    for (const double f : fs) {
        const SystemMatrices sm = assemble(model, cplx(0.0, 2.0 * M_PI * f));
        std::snprintf(buf, sizeof(buf), "%.10g", f);
        csv += buf;
        for (int i = 0; i < n2; ++i) {
            for (int j = 0; j < n2; ++j) {
                std::snprintf(buf, sizeof(buf), ",%.12g,%.12g", sm.y_t(i, j).real(),
                              sm.y_t(i, j).imag());
                csv += buf;
            }
        }
        csv += "\n";
    }
    return csv;
}

} // namespace gridmodes
