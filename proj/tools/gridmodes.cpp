// gridmodes CLI: frequency-domain resonance and stability analysis of
// converter-penetrated AC networks described as JSON network files.
//
//   gridmodes analyze net.json --criterion both --out results/
//   gridmodes param-sweep net.json --param vsc2.q_d --values 0.25,0.35,0.5
//   gridmodes validate net.json
//   gridmodes dump-yt net.json --fmin 10 --fmax 2000 --step 10
//
// Exit codes: 0 stable, 2 unstable, 3 marginal/indeterminate, 1 error.

#include <CLI11.hpp>

#include "gridmodes/report.hpp"
#include "gridmodes/run.hpp"

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonOpts {
    std::string network;
    gridmodes::FrequencyGrid grid;
    std::string grouping;
    std::string out_dir = "gridmodes_out";
};

void add_grid_options(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--fmin", o.grid.f_min_hz, "sweep start [Hz]")->check(CLI::PositiveNumber);
    cmd->add_option("--fmax", o.grid.f_max_hz, "sweep end [Hz]")->check(CLI::PositiveNumber);
    cmd->add_option("--step", o.grid.step_hz, "base grid step [Hz]")->check(CLI::PositiveNumber);
    cmd->add_option("--refine-factor", o.grid.refine_factor,
                    "local refinement factor around detected peaks");
    cmd->add_option("--refine-window", o.grid.refine_window_hz,
                    "half-width of the refinement window [Hz]");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"frequency-domain stability analysis of multi-infeed converter grids"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string criterion = "pmd";
    bool no_plots = false, csv = true, svg = true;
    std::string param_path;
    std::string values_arg;

    CLI::App* analyze = app.add_subcommand("analyze", "sweep a network and assess stability");
    analyze->add_option("network", opts.network, "network JSON file")->required();
    add_grid_options(analyze, opts);
    analyze->add_option("--criterion", criterion, "pmd, gnc, or both")
        ->check(CLI::IsMember({"pmd", "gnc", "both"}));
    analyze->add_option("--grouping", opts.grouping, "grouping directives JSON file");
    analyze->add_option("--out", opts.out_dir, "output directory");
    analyze->add_flag("--csv,!--no-csv", csv, "emit modes.csv / loci.csv");
    analyze->add_flag("--svg,!--no-svg", svg, "emit plots/*.svg");
    analyze->add_flag("--no-plots", no_plots, "shorthand for --no-svg");

    CLI::App* psweep = app.add_subcommand("param-sweep",
                                          "assess stability across values of one parameter");
    psweep->add_option("network", opts.network, "network JSON file")->required();
    add_grid_options(psweep, opts);
    psweep->add_option("--param", param_path, "parameter path, e.g. vsc2.q_d")->required();
    psweep->add_option("--values", values_arg, "comma-separated numeric values")->required();
    psweep->add_option("--grouping", opts.grouping, "grouping directives JSON file");
    psweep->add_option("--out", opts.out_dir, "output directory");

    CLI::App* validate_cmd = app.add_subcommand("validate", "parse and validate a network file");
    validate_cmd->add_option("network", opts.network, "network JSON file")->required();

    CLI::App* dump = app.add_subcommand("dump-yt", "dump Y_T(jw) over the grid as CSV");
    dump->add_option("network", opts.network, "network JSON file")->required();
    add_grid_options(dump, opts);
    dump->add_option("--grouping", opts.grouping, "grouping directives JSON file");
    dump->add_option("--out", opts.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze)) {
            gridmodes::AnalyzeConfig cfg;
            cfg.network_path = opts.network;
            cfg.grid = opts.grid;
            cfg.run_pmd = criterion != "gnc";
            cfg.run_gnc = criterion != "pmd";
            cfg.grouping_path = opts.grouping;
            cfg.out_dir = opts.out_dir;
            cfg.emit_csv = csv;
            cfg.emit_svg = svg && !no_plots;
            const int code = gridmodes::run_analyze(cfg);

            // echo the human-readable summary the files were built from
            const gridmodes::NetworkModel model =
                gridmodes::load_model(cfg.network_path, cfg.grouping_path);
            if (cfg.run_pmd) {
                const auto report = gridmodes::pmd_assess(gridmodes::sweep(model, cfg.grid), cfg.pmd);
                std::cout << gridmodes::pmd_report_to_text(report);
            }
            if (cfg.run_gnc) {
                const auto gnc = gridmodes::gnc_assess(model, cfg.grid, cfg.gnc);
                std::cout << gridmodes::gnc_result_to_text(gnc);
            }
            std::cout << "artifacts written to " << cfg.out_dir << "\n";
            return code;
        }
        if (app.got_subcommand(psweep)) {
            gridmodes::AnalyzeConfig cfg;
            cfg.network_path = opts.network;
            cfg.grid = opts.grid;
            cfg.grouping_path = opts.grouping;
            cfg.out_dir = opts.out_dir;
            std::vector<double> values;
            std::stringstream ss(values_arg);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (tok.empty()) continue;
                try {
                    values.push_back(std::stod(tok));
                } catch (const std::exception&) {
                    throw gridmodes::Error("config.invalid", "bad numeric value '" + tok + "'");
                }
            }
            std::cout << gridmodes::run_param_sweep(cfg, param_path, values);
            return 0;
        }
        if (app.got_subcommand(validate_cmd)) {
            const gridmodes::NetworkModel model =
                gridmodes::parse_network(gridmodes::read_file(opts.network));
            const auto violations = gridmodes::validate(model);
            if (violations.empty()) {
                std::cout << "ok: " << model.buses.size() << " buses, " << model.elements.size()
                          << " elements, fingerprint " << gridmodes::model_fingerprint(model)
                          << "\n";
                return 0;
            }
            for (const auto& v : violations)
                std::cout << v.element << "." << v.field << ": " << v.message << "\n";
            return gridmodes::kExitUnstable; // violations found
        }
        if (app.got_subcommand(dump)) {
            const gridmodes::NetworkModel model =
                gridmodes::load_model(opts.network, opts.grouping);
            std::filesystem::create_directories(opts.out_dir);
            const auto path = std::filesystem::path(opts.out_dir) / "yt_dump.csv";
            gridmodes::write_file(path, gridmodes::dump_yt_csv(model, opts.grid));
            std::cout << "wrote " << path.string() << "\n";
            return 0;
        }
    } catch (const gridmodes::Error& e) {
        std::cerr << "cause " << e.code() << ": " << e.what() << "\n";
        return gridmodes::kExitError;
    } catch (const std::exception& e) {
        std::cerr << "cause internal.error: " << e.what() << "\n";
        return gridmodes::kExitError;
    }
    return gridmodes::kExitError;
}
