#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qls/qls.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailures = 1;
constexpr int kExitConfig = 2;

// Renders a CSV with matplotlib if python3 and matplotlib are present.
void plot_csv(const fs::path& csv, const std::string& x_axis, bool log_x) {
    const fs::path png = fs::path(csv).replace_extension(".png");
    const fs::path script = fs::path(csv).replace_extension(".plot.py");
    {
        std::ofstream py(script);
        py << "import csv, sys\n"
              "import matplotlib\n"
              "matplotlib.use('Agg')\n"
              "import matplotlib.pyplot as plt\n"
              "curves, label = {}, 'all'\n"
              "rows = []\n"
              "with open(sys.argv[1]) as f:\n"
              "    for line in f:\n"
              "        if line.startswith('# curve') and ':' in line and 'solver=' not in line:\n"
              "            label = line.split(':', 1)[1].strip()\n"
              "            continue\n"
              "        if line.startswith('#') or line.startswith('omega,'):\n"
              "            continue\n"
              "        c = line.rstrip('\\n').split(',')\n"
              "        x = float(c[0] if sys.argv[3] == 'omega' else c[1])\n"
              "        curves.setdefault((label, c[5]), []).append((x, float(c[2])))\n"
              "fig, ax = plt.subplots()\n"
              "for (lab, br), pts in curves.items():\n"
              "    pts.sort()\n"
              "    ax.plot([p[0] for p in pts], [p[1] for p in pts],\n"
              "            '.' if br != 'unique' else '-', ms=2, label=lab + ('' if br == 'unique' else ' ' + br))\n"
              "ax.set_xlabel(sys.argv[3]); ax.set_ylabel('D')\n"
              "if sys.argv[4] == '1': ax.set_xscale('log')\n"
              "ax.legend(fontsize=6)\n"
              "fig.savefig(sys.argv[2], dpi=150)\n";
    }
    const std::string cmd = "python3 '" + script.string() + "' '" + csv.string() + "' '" + png.string() + "' " +
                            x_axis + (log_x ? " 1" : " 0") + " 2>/dev/null";
    if (std::system(cmd.c_str()) != 0)
        std::cerr << "warning: plotting needs python3 with matplotlib; skipped " << png << '\n';
    else
        std::cerr << "wrote " << png << '\n';
    fs::remove(script);
}

void print_params(std::ostream& out, const qls::ModelParams& p) {
    nlohmann::ordered_json j;
    j["gamma_q"] = p.gamma_q;
    j["coupling_g"] = p.coupling_g;
    j["eta"] = p.eta;
    j["line_damping"] = p.line_damping;
    j["length_kl"] = p.length_kl;
    j["spacing_ka"] = p.spacing_ka;
    j["qubit_count"] = p.qubit_count;
    out << j.dump(2) << '\n';
}

int cmd_sweep(const std::string& config_path, std::string out_path, int workers, bool plot) {
    const qls::SweepConfig config = qls::load_sweep_config(config_path);
    if (out_path.empty()) out_path = config.output;
    const qls::SweepTable table = qls::run_sweep(config, workers >= 0 ? workers : config.workers);

    const std::vector<std::string> comments = {std::string("qls ") + qls::kVersion + " sweep " +
                                               std::string(qls::to_string(config.solver))};
    if (out_path.empty()) {
        qls::write_csv(std::cout, table, comments);
    } else {
        std::ofstream out(out_path);
        if (!out) throw qls::ConfigError("cannot write '" + out_path + "'");
        qls::write_csv(out, table, comments);
        out.close();
        if (plot) plot_csv(out_path, config.omega_grid.count > 1 ? "omega" : "power", config.power_grid.log_scale);
    }
    if (table.failed > 0) std::cerr << table.failed << " of " << table.rows.size() << " rows failed\n";
    return table.mostly_failed() ? kExitFailures : kExitOk;
}

int cmd_repro(const std::string& id, const std::string& out_dir, int workers, bool plot) {
    const auto preset = qls::make_preset(id);
    if (!preset) throw qls::ConfigError("unknown figure '" + id + "'");
    const qls::PresetRun run = qls::run_preset(*preset, workers);
    fs::create_directories(out_dir);
    const fs::path csv = fs::path(out_dir) / (id + ".csv");
    {
        std::ofstream out(csv);
        if (!out) throw qls::ConfigError("cannot write '" + csv.string() + "'");
        qls::write_preset_csv(out, *preset, run, qls::kVersion);
    }
    std::cerr << "wrote " << csv << " (" << run.rows << " rows)\n";
    if (plot) plot_csv(csv, preset->x_axis, preset->log_x);
    if (run.failed > 0) std::cerr << run.failed << " of " << run.rows << " rows failed\n";
    return run.failed * 10 > run.rows ? kExitFailures : kExitOk;
}

int cmd_validate(const std::string& config_path) {
    const qls::SweepConfig config = qls::load_sweep_config(config_path);
    std::cout << "config ok: solver " << qls::to_string(config.solver) << ", " << config.omega_grid.count
              << " omega x " << config.power_grid.count << " power points\n";
    if (config.microscopic) {
        for (const auto& w : qls::microscopic_warnings(*config.microscopic)) std::cout << "warning: " << w << '\n';
    }
    const auto& p = config.params;
    if (p.spacing_ka >= 0.2) std::cout << "warning: ka >= 0.2, dense-array approximations are poor\n";
    if (p.qubit_count > 1 && std::abs(p.qubit_count * p.spacing_ka - p.length_kl) > 1e-9 * p.length_kl)
        std::cout << "warning: qubit_count * spacing_ka differs from length_kl\n";
    print_params(std::cout, p);
    return kExitOk;
}

int cmd_derive(const std::string& path) {
    const nlohmann::json doc = qls::read_json_file(path);
    const nlohmann::json& block = doc.contains("microscopic") ? doc.at("microscopic") : doc;
    const qls::MicroscopicParams m = qls::parse_microscopic(block);
    for (const auto& w : qls::microscopic_warnings(m)) std::cerr << "warning: " << w << '\n';
    print_params(std::cout, qls::derive_dimensionless(m));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transmission of microwaves through superconducting qubit lines"};
    app.require_subcommand(1);

    std::string config_path, out_path, out_dir = ".", figure;
    int workers = -1;
    bool plot = false;

    auto* sweep = app.add_subcommand("sweep", "evaluate a solver over an omega x power grid");
    sweep->add_option("--config", config_path, "JSON sweep configuration")->required();
    sweep->add_option("--out", out_path, "CSV output (default: config output, else stdout)");
    sweep->add_option("--workers", workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sweep->add_flag("--plot", plot, "render a PNG next to the CSV");

    auto* repro = app.add_subcommand("repro", "regenerate a reference figure as CSV");
    repro->add_option("figure", figure, "fig2, fig3, fig4, fig5 or fig6")
        ->required()
        ->check(CLI::IsMember(qls::preset_ids()));
    repro->add_option("--out-dir", out_dir, "output directory");
    repro->add_option("--workers", workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    repro->add_flag("--plot", plot, "render a PNG next to the CSV");

    auto* validate = app.add_subcommand("validate", "check a sweep configuration");
    validate->add_option("--config", config_path, "JSON sweep configuration")->required();

    auto* derive = app.add_subcommand("derive", "dimensionless parameters from circuit parameters");
    derive->add_option("--config", config_path, "JSON file with microscopic parameters")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*sweep) return cmd_sweep(config_path, out_path, workers, plot);
        if (*repro) return cmd_repro(figure, out_dir, workers, plot);
        if (*validate) return cmd_validate(config_path);
        if (*derive) return cmd_derive(config_path);
    } catch (const qls::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const qls::Error& e) {
        std::cerr << "error (" << e.kind() << "): " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}
