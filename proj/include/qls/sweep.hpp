#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qls/core_model.hpp"
#include "qls/linear_solvers.hpp"
#include "qls/nonlinear_array.hpp"
#include "qls/nonlinear_single.hpp"
#include "qls/scattering_lattice.hpp"
#include "qls/types.hpp"

namespace qls {

enum class Solver { single_linear, single_nonlinear, array_linear, array_lattice, array_nonlinear, array_closed_form };

inline std::string_view to_string(Solver s) {
    switch (s) {
    case Solver::single_linear: return "single-linear";
    case Solver::single_nonlinear: return "single-nonlinear";
    case Solver::array_linear: return "array-linear";
    case Solver::array_lattice: return "array-lattice";
    case Solver::array_nonlinear: return "array-nonlinear";
    case Solver::array_closed_form: return "array-closed-form";
    }
    return "single-linear";
}

inline std::optional<Solver> parse_solver(std::string_view name) {
    for (Solver s : {Solver::single_linear, Solver::single_nonlinear, Solver::array_linear, Solver::array_lattice,
                     Solver::array_nonlinear, Solver::array_closed_form})
        if (to_string(s) == name) return s;
    return std::nullopt;
}

struct Grid {
    double min = 0;
    double max = 0;
    int count = 1;
    bool log_scale = false;

    static Grid single(double v) { return {v, v, 1, false}; }

    std::vector<double> values() const {
        std::vector<double> out(static_cast<std::size_t>(std::max(count, 0)));
        if (count == 1) {
            out[0] = min;
            return out;
        }
        for (int i = 0; i < count; ++i) {
            const double t = static_cast<double>(i) / (count - 1);
            out[static_cast<std::size_t>(i)] =
                log_scale ? std::exp(std::log(min) + t * (std::log(max) - std::log(min))) : min + t * (max - min);
        }
        out.back() = max;
        return out;
    }
};

struct SweepConfig {
    Solver solver = Solver::single_linear;
    ModelParams params{};
    std::optional<MicroscopicParams> microscopic;
    Grid omega_grid = Grid::single(1.0);
    Grid power_grid = Grid::single(0.0);
    std::string output;
    int workers = 0;  // 0 = hardware concurrency
};

struct ResultRow {
    double omega = 0;
    double power = 0;
    TransmissionResult result;
    Solver solver = Solver::single_linear;
};

struct SweepTable {
    std::vector<ResultRow> rows;
    std::size_t failed = 0;

    bool mostly_failed() const { return !rows.empty() && failed * 10 > rows.size(); }
};

// ---------------------------------------------------------------------------
// configuration

namespace detail {

inline void check_known_keys(const nlohmann::json& obj, std::string_view where,
                             std::initializer_list<std::string_view> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
            throw ConfigError(std::string(where) + ": unknown field '" + it.key() + "'");
    }
}

inline double number_field(const nlohmann::json& obj, std::string_view where, const char* key, double fallback,
                           bool required = false) {
    if (!obj.contains(key)) {
        if (required) throw ConfigError(std::string(where) + "." + key + ": missing required field");
        return fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(std::string(where) + "." + key + ": expected a number");
    return v.get<double>();
}

inline int int_field(const nlohmann::json& obj, std::string_view where, const char* key, int fallback,
                     bool required = false) {
    if (!obj.contains(key)) {
        if (required) throw ConfigError(std::string(where) + "." + key + ": missing required field");
        return fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(std::string(where) + "." + key + ": expected an integer");
    return v.get<int>();
}

inline Grid parse_grid(const nlohmann::json& obj, std::string_view where) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    check_known_keys(obj, where, {"min", "max", "count", "scale"});
    Grid g;
    g.min = number_field(obj, where, "min", 0, true);
    g.max = number_field(obj, where, "max", 0, true);
    g.count = int_field(obj, where, "count", 0, true);
    if (obj.contains("scale")) {
        const auto& s = obj.at("scale");
        if (!s.is_string() || (s != "linear" && s != "log"))
            throw ConfigError(std::string(where) + ".scale: expected \"linear\" or \"log\"");
        g.log_scale = s == "log";
    }
    if (g.count < 1) throw ConfigError(std::string(where) + ".count: must be >= 1");
    if (!(g.min < g.max)) throw ConfigError(std::string(where) + ": min must be < max");
    if (g.log_scale && !(g.min > 0)) throw ConfigError(std::string(where) + ".min: log scale needs min > 0");
    return g;
}

inline ModelParams parse_model_params(const nlohmann::json& obj) {
    if (!obj.is_object()) throw ConfigError("params: expected an object");
    check_known_keys(obj, "params",
                     {"gamma_q", "coupling_g", "eta", "line_damping", "length_kl", "spacing_ka", "qubit_count"});
    ModelParams p;
    p.gamma_q = number_field(obj, "params", "gamma_q", p.gamma_q);
    p.coupling_g = number_field(obj, "params", "coupling_g", p.coupling_g);
    p.eta = number_field(obj, "params", "eta", p.eta);
    p.line_damping = number_field(obj, "params", "line_damping", p.line_damping);
    p.length_kl = number_field(obj, "params", "length_kl", p.length_kl);
    p.spacing_ka = number_field(obj, "params", "spacing_ka", p.spacing_ka);
    p.qubit_count = int_field(obj, "params", "qubit_count", p.qubit_count);

    auto field_error = [](const char* name, const char* rule) {
        return ConfigError(std::string("params.") + name + ": " + rule);
    };
    if (!(p.gamma_q >= 0)) throw field_error("gamma_q", "must be >= 0");
    if (!(p.coupling_g >= 0)) throw field_error("coupling_g", "must be >= 0");
    if (!(p.eta > 0)) throw field_error("eta", "must be > 0");
    if (!(p.line_damping >= 0)) throw field_error("line_damping", "must be >= 0");
    if (!(p.length_kl > 0)) throw field_error("length_kl", "must be > 0");
    if (!(p.spacing_ka > 0)) throw field_error("spacing_ka", "must be > 0");
    if (p.qubit_count < 1) throw field_error("qubit_count", "must be >= 1");
    return p;
}

}  // namespace detail

inline MicroscopicParams parse_microscopic(const nlohmann::json& obj) {
    using detail::number_field;
    if (!obj.is_object()) throw ConfigError("microscopic: expected an object");
    detail::check_known_keys(obj, "microscopic",
                             {"josephson_energy", "plasma_frequency", "coupling_alpha", "qubit_size",
                              "line_inductance_per_length", "line_capacitance_per_length", "system_length",
                              "qubit_spacing", "qubit_count", "relaxation_time", "line_damping"});
    MicroscopicParams m;
    m.josephson_energy = number_field(obj, "microscopic", "josephson_energy", 0, true);
    m.plasma_frequency = number_field(obj, "microscopic", "plasma_frequency", 0, true);
    m.coupling_alpha = number_field(obj, "microscopic", "coupling_alpha", 0, true);
    m.qubit_size = number_field(obj, "microscopic", "qubit_size", 0, true);
    m.line_inductance_per_length = number_field(obj, "microscopic", "line_inductance_per_length", 0, true);
    m.line_capacitance_per_length = number_field(obj, "microscopic", "line_capacitance_per_length", 0, true);
    m.system_length = number_field(obj, "microscopic", "system_length", 0, true);
    m.qubit_spacing = number_field(obj, "microscopic", "qubit_spacing", 0, true);
    m.qubit_count = detail::int_field(obj, "microscopic", "qubit_count", 0, true);
    m.relaxation_time = number_field(obj, "microscopic", "relaxation_time", 0, true);
    m.line_damping = number_field(obj, "microscopic", "line_damping", 0, true);
    try {
        validate(m);
    } catch (const Error& e) {
        throw ConfigError(std::string("microscopic: ") + e.what());
    }
    return m;
}

inline SweepConfig parse_sweep_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    detail::check_known_keys(doc, "config",
                             {"solver", "params", "microscopic", "omega_grid", "power_grid", "output", "workers"});
    SweepConfig c;
    if (!doc.contains("solver") || !doc.at("solver").is_string())
        throw ConfigError("solver: missing or not a string");
    const auto solver = parse_solver(doc.at("solver").get<std::string>());
    if (!solver) throw ConfigError("solver: unknown solver '" + doc.at("solver").get<std::string>() + "'");
    c.solver = *solver;

    if (doc.contains("params") && doc.contains("microscopic"))
        throw ConfigError("config: give either params or microscopic, not both");
    if (doc.contains("microscopic")) {
        c.microscopic = parse_microscopic(doc.at("microscopic"));
        c.params = derive_dimensionless(*c.microscopic);
    } else if (doc.contains("params")) {
        c.params = detail::parse_model_params(doc.at("params"));
    } else {
        throw ConfigError("config: missing params (or microscopic) block");
    }

    if (!doc.contains("omega_grid")) throw ConfigError("omega_grid: missing required field");
    c.omega_grid = detail::parse_grid(doc.at("omega_grid"), "omega_grid");
    if (!(c.omega_grid.min > 0)) throw ConfigError("omega_grid.min: must be > 0");
    if (doc.contains("power_grid")) {
        c.power_grid = detail::parse_grid(doc.at("power_grid"), "power_grid");
        if (!(c.power_grid.min >= 0)) throw ConfigError("power_grid.min: must be >= 0");
    }
    if (doc.contains("output")) {
        if (!doc.at("output").is_string()) throw ConfigError("output: expected a string");
        c.output = doc.at("output").get<std::string>();
    }
    c.workers = detail::int_field(doc, "config", "workers", 0);
    if (c.workers < 0) throw ConfigError("workers: must be >= 0");
    return c;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline SweepConfig load_sweep_config(const std::string& path) { return parse_sweep_config(read_json_file(path)); }

/// Worker count after the QLS_WORKERS override; 0 means hardware concurrency.
inline int resolve_workers(int requested) {
    if (const char* env = std::getenv("QLS_WORKERS")) {
        int v = 0;
        const std::string_view s{env};
        if (std::from_chars(s.data(), s.data() + s.size(), v).ec == std::errc{} && v >= 0) requested = v;
    }
    if (requested == 0) requested = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return requested;
}

// ---------------------------------------------------------------------------
// evaluation

namespace detail {

/// Every x in (lo, hi] with h(x) = target, found on a log grid plus bisection.
template <class H>
std::vector<double> solve_monotone_pieces(H&& h, double target, double lo, double hi, int samples) {
    std::vector<double> xs(static_cast<std::size_t>(samples)), fs(xs.size());
    for (int i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / (samples - 1);
        xs[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
        fs[static_cast<std::size_t>(i)] = h(xs[static_cast<std::size_t>(i)]) - target;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (fs[i] == 0.0) out.push_back(xs[i]);
        if ((fs[i] < 0) != (fs[i + 1] < 0) && fs[i] != 0.0 && fs[i + 1] != 0.0) {
            double a = xs[i], b = xs[i + 1], fa = fs[i];
            for (int it = 0; it < 100; ++it) {
                const double m = 0.5 * (a + b);
                if (m == a || m == b) break;
                const double fm = h(m) - target;
                if ((fm < 0) == (fa < 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            out.push_back(0.5 * (a + b));
        }
    }
    return out;
}

inline ResultRow make_row(double omega, double power, Solver solver, TransmissionResult r) {
    return {omega, power, r, solver};
}

inline std::vector<ResultRow> label_rows(std::vector<ResultRow> rows) {
    std::sort(rows.begin(), rows.end(),
              [](const ResultRow& a, const ResultRow& b) { return a.result.d_coefficient < b.result.d_coefficient; });
    const auto labels = labels_for_root_count(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].result.branch = labels[i];
    return rows;
}

inline constexpr int kForwardSamples = 240;
inline constexpr double kForwardFloor = 1e-6;  // smallest output amplitude / sqrt(P) scanned

inline std::vector<ResultRow> evaluate_point(const SweepConfig& c, double omega, double power) {
    const ModelParams& p = c.params;
    std::vector<ResultRow> rows;
    switch (c.solver) {
    case Solver::single_linear: {
        auto r = single_qubit_linear_d(omega, p);
        if (p.eta * std::sqrt(power) >= p.gamma_q && power > 0) r.flags |= Flag::low_power_violation;
        rows.push_back(make_row(omega, power, c.solver, r));
        break;
    }
    case Solver::array_linear: {
        auto r = array_linear_d(omega, p);
        if (p.eta * std::sqrt(power) >= p.gamma_q && power > 0) r.flags |= Flag::low_power_violation;
        rows.push_back(make_row(omega, power, c.solver, r));
        break;
    }
    case Solver::single_nonlinear: {
        ModelParams single = p;
        single.qubit_count = 1;
        single.spacing_ka = std::min(p.spacing_ka, p.length_kl);
        for (double d : single_qubit_nonlinear_roots(omega, p, power)) {
            TransmissionResult r = make_result(d, kNaN, std::abs(single_qubit_nonlinear_residual(d, omega, p, power)));
            if (power * d > 0) {
                // reflection of the scatterer at its self-consistent amplitude
                const auto lattice = nonlinear_backward_recursion_d(omega, single, std::sqrt(power * d));
                r.reflection = lattice.result.reflection;
                r.absorption = 1.0 - d - r.reflection;
            } else {
                const auto lin = linear_transfer_matrix_d(omega, single);
                r.reflection = lin.reflection;
                r.absorption = 1.0 - d - r.reflection;
            }
            rows.push_back(make_row(omega, power, c.solver, r));
        }
        rows = label_rows(std::move(rows));
        break;
    }
    case Solver::array_closed_form: {
        const auto cf = closed_form_nonlinear_d(omega, p, power);
        const NonlinearArrayParams np = make_nonlinear_array_params(omega, p);
        for (double d : cf.roots) {
            TransmissionResult r =
                make_result(d, 1.0 - d, std::abs(closed_form_residual(d, np.closed_form_strength(), power / np.xi_sq)));
            r.flags = cf.flags;
            rows.push_back(make_row(omega, power, c.solver, r));
        }
        rows = label_rows(std::move(rows));
        break;
    }
    case Solver::array_lattice: {
        if (power == 0.0) {
            rows.push_back(make_row(omega, power, c.solver, linear_transfer_matrix_d(omega, p)));
            break;
        }
        auto incident_power = [&](double t) { return nonlinear_backward_recursion_d(omega, p, t).power; };
        const double top = std::sqrt(power);
        for (double t : solve_monotone_pieces(incident_power, power, kForwardFloor * top, top, kForwardSamples)) {
            const auto res = nonlinear_backward_recursion_d(omega, p, t);
            TransmissionResult r = res.result;
            r.residual = std::abs(res.power - power) / power;
            rows.push_back(make_row(omega, power, c.solver, r));
        }
        if (rows.empty()) throw NoRoot("no transmitted amplitude reproduces the requested power");
        rows = label_rows(std::move(rows));
        break;
    }
    case Solver::array_nonlinear: {
        if (power == 0.0) {
            const NonlinearArrayParams np = make_nonlinear_array_params(omega, p);
            auto res = shoot_nonlinear_bvp(omega, p, 1e-6 * std::sqrt(np.xi_sq));
            rows.push_back(make_row(omega, power, c.solver, res.result));
            break;
        }
        auto incident_power = [&](double r) { return shoot_nonlinear_bvp(omega, p, r).power; };
        const double top = std::sqrt(power);
        for (double r_ell : solve_monotone_pieces(incident_power, power, kForwardFloor * top, top, kForwardSamples)) {
            const auto res = shoot_nonlinear_bvp(omega, p, r_ell);
            TransmissionResult r = res.result;
            r.residual = std::abs(res.power - power) / power;
            rows.push_back(make_row(omega, power, c.solver, r));
        }
        if (rows.empty()) throw NoRoot("no output amplitude reproduces the requested power");
        rows = label_rows(std::move(rows));
        break;
    }
    }
    return rows;
}

}  // namespace detail

/// Evaluates the configured solver over omega_grid x power_grid. Row order
/// depends only on the configuration, never on the worker count.
inline SweepTable run_sweep(const SweepConfig& config, int workers = -1) {
    validate(config.params);
    const auto omegas = config.omega_grid.values();
    const auto powers = config.power_grid.values();
    const std::size_t total = omegas.size() * powers.size();
    std::vector<std::vector<ResultRow>> per_point(total);
    std::vector<char> failed(total, 0);

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            const double omega = omegas[i / powers.size()];
            const double power = powers[i % powers.size()];
            try {
                per_point[i] = detail::evaluate_point(config, omega, power);
            } catch (const std::exception&) {
                TransmissionResult r;
                r.converged = false;
                r.flags = Flag::solver_error;
                per_point[i] = {detail::make_row(omega, power, config.solver, r)};
                failed[i] = 1;
            }
        }
    };

    const int n_workers = resolve_workers(workers < 0 ? config.workers : workers);
    std::vector<std::thread> pool;
    for (int w = 1; w < std::min<int>(n_workers, static_cast<int>(total)); ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    SweepTable table;
    for (std::size_t i = 0; i < total; ++i) {
        table.rows.insert(table.rows.end(), per_point[i].begin(), per_point[i].end());
        table.failed += failed[i] ? per_point[i].size() : 0;
    }
    std::stable_sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.omega != b.omega) return a.omega < b.omega;
        if (a.power != b.power) return a.power < b.power;
        return a.result.branch < b.result.branch;
    });
    return table;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kCsvHeader = "omega,power,D,R,absorption,branch,residual,converged,solver,flags";

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline void write_csv_rows(std::ostream& out, const std::vector<ResultRow>& rows) {
    for (const auto& row : rows) {
        const auto& r = row.result;
        out << format_number(row.omega) << ',' << format_number(row.power) << ',' << format_number(r.d_coefficient)
            << ',' << format_number(r.reflection) << ',' << format_number(r.absorption) << ',' << to_string(r.branch)
            << ',' << format_number(r.residual) << ',' << (r.converged ? "true" : "false") << ','
            << to_string(row.solver) << ',' << to_string(r.flags) << '\n';
    }
}

inline void write_csv(std::ostream& out, const SweepTable& table, const std::vector<std::string>& comments = {}) {
    for (const auto& c : comments) out << "# " << c << '\n';
    out << kCsvHeader << '\n';
    write_csv_rows(out, table.rows);
}

}  // namespace qls
