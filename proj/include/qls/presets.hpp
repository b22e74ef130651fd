#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qls/sweep.hpp"

namespace qls {

struct PresetCurve {
    std::string label;
    SweepConfig config;
};

struct Preset {
    std::string id;
    std::string title;
    std::string x_axis;  // "omega" or "power"
    bool log_x = false;
    std::vector<std::string> notes;
    std::vector<PresetCurve> curves;
};

namespace detail {

inline std::string short_number(double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

inline SweepConfig preset_config(Solver solver, const ModelParams& p, Grid omega, Grid power) {
    SweepConfig c;
    c.solver = solver;
    c.params = p;
    c.omega_grid = omega;
    c.power_grid = power;
    return c;
}

/// Coupling per unit length that gives the closed-form strength c at omega.
inline double coupling_for_strength(double c, double omega, const ModelParams& p) {
    const double delta = 1.0 - omega;
    return 2.0 * omega * c * (delta * delta + p.gamma_q * p.gamma_q) / (delta * p.length_kl) * p.eta * p.eta;
}

}  // namespace detail

inline std::vector<std::string> preset_ids() { return {"fig2", "fig3", "fig4", "fig5", "fig6"}; }

inline std::optional<Preset> make_preset(const std::string& id) {
    using detail::preset_config;
    Preset out;
    out.id = id;
    const Grid omega_window{0.9, 1.1, 2001, false};

    if (id == "fig2") {
        out.title = "single qubit, linear transmission D(omega)";
        out.x_axis = "omega";
        out.notes = {"eta = 1, line damping = 0"};
        const std::pair<double, double> cases[] = {{1e-2, 0.06}, {1e-2, 0.008}, {1e-1, 0.06}};
        for (auto [gamma, g] : cases) {
            ModelParams p;
            p.gamma_q = gamma;
            p.coupling_g = g;
            out.curves.push_back({"Gamma=" + detail::short_number(gamma) + " g=" + detail::short_number(g),
                                  preset_config(Solver::single_linear, p, omega_window, Grid::single(0.0))});
        }
        return out;
    }
    if (id == "fig3") {
        out.title = "single qubit, nonlinear transmission D(P0) on resonance";
        out.x_axis = "power";
        out.log_x = true;
        out.notes = {"omega = 1, Gamma = 0.01, eta = 1 (power is eta^2 P0)"};
        for (double ratio : {9.0, 16.0, 34.6}) {
            ModelParams p;
            p.gamma_q = 1e-2;
            p.coupling_g = ratio * p.gamma_q;
            out.curves.push_back({"g/Gamma=" + detail::short_number(ratio),
                                  preset_config(Solver::single_nonlinear, p, Grid::single(1.0),
                                                Grid{1e-6, 1.0, 601, true})});
        }
        return out;
    }
    if (id == "fig4" || id == "fig5") {
        const bool four = id == "fig4";
        out.x_axis = "omega";
        std::vector<std::pair<double, double>> cases;  // (G = g/a, kl)
        if (four) {
            out.title = "dense array, linear transmission D(omega) for weak and strong coupling";
            out.notes = {"Gamma = 0.003, kl = 0.01, N = 100, eta = 1"};
            cases = {{9.0, 0.01}, {900.0, 0.01}};
        } else {
            out.title = "dense array, linear transmission D(omega) for short and long arrays";
            out.notes = {"Gamma = 0.003, g/a = 9, N = 100, eta = 1"};
            cases = {{9.0, 0.08}, {9.0, 0.32}};
        }
        for (auto [strength, kl] : cases) {
            ModelParams p;
            p.gamma_q = 3e-3;
            p.qubit_count = 100;
            p.length_kl = kl;
            p.spacing_ka = kl / p.qubit_count;
            p.coupling_g = strength * p.spacing_ka;
            out.curves.push_back({"g/a=" + detail::short_number(strength) + " kl=" + detail::short_number(kl),
                                  preset_config(Solver::array_linear, p, Grid{0.9, 1.1, 8001, false},
                                                Grid::single(0.0))});
        }
        return out;
    }
    if (id == "fig6") {
        out.title = "dense array, strongly nonlinear transmission D(P)";
        out.x_axis = "power";
        const double omega = 0.99;
        for (double c : {8.0, 34.0}) {
            ModelParams p;
            p.gamma_q = 3e-3;
            p.length_kl = 20.0;
            p.qubit_count = 1000;
            p.spacing_ka = p.length_kl / p.qubit_count;
            const double per_length = detail::coupling_for_strength(c, omega, p);
            p.coupling_g = per_length * p.spacing_ka;
            const double xi_sq = make_nonlinear_array_params(omega, p).xi_sq;
            out.notes.push_back("c=" + detail::short_number(c) + ": omega = 0.99, Gamma = 0.003, kl = 20, xi^2 = " +
                                format_number(xi_sq) + " (P/xi^2 = power / xi^2)");
            out.curves.push_back({"c=" + detail::short_number(c),
                                  preset_config(Solver::array_closed_form, p, Grid::single(omega),
                                                Grid{0.0, 200.0 * xi_sq, 801, false})});
        }
        return out;
    }
    return std::nullopt;
}

struct PresetRun {
    std::vector<SweepTable> tables;
    std::size_t rows = 0;
    std::size_t failed = 0;
};

inline PresetRun run_preset(const Preset& preset, int workers) {
    PresetRun out;
    for (const auto& curve : preset.curves) {
        out.tables.push_back(run_sweep(curve.config, workers));
        out.rows += out.tables.back().rows.size();
        out.failed += out.tables.back().failed;
    }
    return out;
}

/// Provenance comments, the column header, then one block per curve opened
/// by a "# curve" comment line.
inline void write_preset_csv(std::ostream& out, const Preset& preset, const PresetRun& run,
                             const std::string& version) {
    out << "# qls " << version << " repro " << preset.id << '\n';
    out << "# " << preset.title << '\n';
    for (const auto& n : preset.notes) out << "# " << n << '\n';
    for (std::size_t i = 0; i < preset.curves.size(); ++i) {
        const auto& c = preset.curves[i].config;
        out << "# curve " << i << ": " << preset.curves[i].label << " solver=" << to_string(c.solver)
            << " gamma_q=" << format_number(c.params.gamma_q) << " coupling_g=" << format_number(c.params.coupling_g)
            << " eta=" << format_number(c.params.eta) << " length_kl=" << format_number(c.params.length_kl)
            << " spacing_ka=" << format_number(c.params.spacing_ka) << " qubit_count=" << c.params.qubit_count
            << '\n';
    }
    out << kCsvHeader << '\n';
    for (std::size_t i = 0; i < run.tables.size(); ++i) {
        out << "# curve " << i << ": " << preset.curves[i].label << '\n';
        write_csv_rows(out, run.tables[i].rows);
    }
}

}  // namespace qls
