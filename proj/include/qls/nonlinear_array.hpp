#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <boost/numeric/odeint/integrate/integrate_adaptive.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "qls/root_scan.hpp"
#include "qls/types.hpp"

// Dense array in the high-power regime, absorption neglected:
//     q'' + [k^2 + chi / (|q|^2 + xi^2)] q = 0   on 0 <= x <= l
// with q = r e^{i phi}. Two first integrals hold along any solution:
//     C = r^2 phi' = Im(conj(q) q')
//     E = |q'|^2 + k^2 |q|^2 + chi ln(1 + |q|^2 / xi^2)
// (|q'|^2 = r'^2 + C^2 / r^2, so E is the Kepler-like energy; the log is
// referenced to |q| = 0, which only shifts E by a constant.)

namespace qls {

struct NonlinearArrayParams {
    double chi = 0;    // (g c0 / (eta^2 omega_q a)) (omega_q - omega)
    double xi_sq = 0;  // ((omega_q - omega)^2 + Gamma^2) / eta^2
    double k = 0;      // omega / c0, real
    double length = 0; // l
    Flag flags = Flag::none;

    /// chi l / (2 k xi^2), the coefficient of the closed-form relation.
    double closed_form_strength() const { return chi * length / (2.0 * k * xi_sq); }
};

inline NonlinearArrayParams make_nonlinear_array_params(double omega, const ModelParams& p) {
    validate(p);
    if (!(omega > 0)) throw InvalidArgument("omega must be > 0");
    const double delta = 1.0 - omega;
    const double eta_sq = p.eta * p.eta;
    NonlinearArrayParams out;
    out.chi = p.coupling_per_length() * delta / eta_sq;
    out.xi_sq = (delta * delta + p.gamma_q * p.gamma_q) / eta_sq;
    out.k = omega;
    out.length = p.length_kl;
    if (p.line_damping != 0.0) out.flags |= Flag::line_damping_ignored;
    if (out.chi < 0) out.flags |= Flag::negative_chi;
    return out;
}

/// Intensity-dependent part of the wave equation, V(s) with s = |q|^2, and
/// its primitive (zero at s = 0).
struct WavePotential {
    std::function<double(double)> value;
    std::function<double(double)> primitive;

    static WavePotential saturable(double chi, double xi_sq) {
        return {[=](double s) { return chi / (s + xi_sq); },
                [=](double s) { return chi * std::log1p(s / xi_sq); }};
    }
    static WavePotential constant(double v) {
        return {[=](double) { return v; }, [=](double s) { return v * s; }};
    }
};

struct ShootOptions {
    double tolerance = 1e-10;
};

struct ShootResult {
    TransmissionResult result;
    double power = kNaN;         // |A|^2 at x = 0
    complex incident = 0.0;      // A
    complex reflected = 0.0;     // B
    double r_start = kNaN;       // r(0)
    double r_end = kNaN;         // r(l)
    double angular_constant = 0; // C at x = l
    double energy_constant = 0;  // E at x = l
    double c_drift = 0;          // max relative drift of C along the trajectory
    double e_drift = 0;          // max relative drift of E
    std::size_t steps = 0;

    double z_ratio() const { return r_start / r_end; }
};

namespace detail {

using FieldState = std::array<double, 4>;  // Re q, Im q, Re q', Im q'

struct Invariants {
    double c;
    double e;
    double e_scale;
};

inline Invariants invariants_of(const FieldState& y, double k, const WavePotential& pot) {
    const double s = y[0] * y[0] + y[1] * y[1];
    const double kinetic = y[2] * y[2] + y[3] * y[3];
    const double potential = pot.primitive(s);
    return {y[0] * y[3] - y[1] * y[2], kinetic + k * k * s + potential,
            kinetic + k * k * s + std::abs(potential)};
}

}  // namespace detail

/// Integrates the wave equation from the outgoing boundary x = l, where
/// q = r_end and q' = i k r_end, back to x = 0 and reads off the incident
/// and reflected waves there.
inline ShootResult shoot_wave_equation(double k, double length, const WavePotential& pot, double r_end,
                                       const ShootOptions& opt = {}) {
    using namespace boost::numeric::odeint;
    if (!(r_end > 0)) throw InvalidArgument("output amplitude must be > 0");
    if (!(k > 0) || !(length > 0)) throw InvalidArgument("k and length must be > 0");

    auto rhs = [&](const detail::FieldState& y, detail::FieldState& dy, double) {
        const double s = y[0] * y[0] + y[1] * y[1];
        const double w = k * k + pot.value(s);
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -w * y[0];
        dy[3] = -w * y[1];
    };

    detail::FieldState y{r_end, 0.0, 0.0, k * r_end};
    const auto start = detail::invariants_of(y, k, pot);

    ShootResult out;
    out.r_end = r_end;
    out.angular_constant = start.c;
    out.energy_constant = start.e;
    auto observe = [&](const detail::FieldState& st, double) {
        const auto now = detail::invariants_of(st, k, pot);
        out.c_drift = std::max(out.c_drift, std::abs(now.c - start.c) / std::abs(start.c));
        out.e_drift = std::max(out.e_drift, std::abs(now.e - start.e) / start.e_scale);
        ++out.steps;
    };

    auto stepper = make_controlled<runge_kutta_fehlberg78<detail::FieldState>>(opt.tolerance * r_end * 1e-2,
                                                                                opt.tolerance);
    const double h0 = -std::min(0.01 / k, 0.01 * length);
    try {
        integrate_adaptive(stepper, rhs, y, length, 0.0, h0, observe);
    } catch (const std::exception& e) {
        throw StepFailure(std::string("adaptive integrator failed: ") + e.what());
    }
    for (double v : y)
        if (!std::isfinite(v)) throw StepFailure("integration produced a non-finite field");

    const complex q0{y[0], y[1]};
    const complex dq0{y[2], y[3]};
    const complex ik{0.0, k};
    out.incident = 0.5 * (q0 + dq0 / ik);
    out.reflected = 0.5 * (q0 - dq0 / ik);
    out.power = std::norm(out.incident);
    out.r_start = std::abs(q0);
    const double d = r_end * r_end / out.power;
    const double r = std::norm(out.reflected) / out.power;
    out.result = make_result(d, r, std::max(out.c_drift, out.e_drift));
    return out;
}

/// Nonlinear array transmission for a given output amplitude r(l).
inline ShootResult shoot_nonlinear_bvp(double omega, const ModelParams& p, double r_ell,
                                       const ShootOptions& opt = {}) {
    if (!(p.gamma_q > 0)) throw InvalidArgument("shoot_nonlinear_bvp needs gamma_q > 0");
    if (!(r_ell > 0)) throw InvalidArgument("r_ell must be > 0");
    const NonlinearArrayParams np = make_nonlinear_array_params(omega, p);

    if (np.chi == 0.0) {
        // free propagation
        ShootResult out;
        out.result = make_result(1.0, 0.0);
        out.power = r_ell * r_ell;
        out.incident = r_ell;
        out.r_start = out.r_end = r_ell;
        out.angular_constant = np.k * r_ell * r_ell;
        out.energy_constant = 2.0 * np.k * np.k * r_ell * r_ell;
        out.result.flags = np.flags;
        return out;
    }
    ShootResult out = shoot_wave_equation(np.k, np.length, WavePotential::saturable(np.chi, np.xi_sq), r_ell, opt);
    out.result.flags |= np.flags;
    return out;
}

/// Linear continuum transmission for a uniform real coupling per length,
///   q'' + (k^2 + v) q = 0, solved with the same integrator.
inline double continuum_linear_d(double k, double coupling_per_length, double length,
                                 const ShootOptions& opt = {}) {
    return shoot_wave_equation(k, length, WavePotential::constant(coupling_per_length), 1.0, opt)
        .result.d_coefficient;
}

/// z = 1 - chi l^2 / (2 [r(l)^2 + xi^2]), the amplitude ratio r(0)/r(l)
/// predicted for a slowly varying envelope.
inline double z_parameter(double omega, const ModelParams& p, double r_ell) {
    const NonlinearArrayParams np = make_nonlinear_array_params(omega, p);
    return 1.0 - np.chi * np.length * np.length / (2.0 * (r_ell * r_ell + np.xi_sq));
}

struct ClosedFormRoots {
    std::vector<double> roots;
    Flag flags = Flag::none;
};

/// Closed-form relation of the strongly nonlinear array,
///   1/D = 1 + [c / (P D / xi^2 + 1)]^2,   c = chi l / (2 k xi^2).
/// The power enters normalized by the saturation scale xi^2.
inline double closed_form_residual(double d, double strength, double normalized_power) {
    const double bracket = strength / (normalized_power * d + 1.0);
    return d - 1.0 / (1.0 + bracket * bracket);
}

inline ClosedFormRoots closed_form_nonlinear_d(double omega, const ModelParams& p, double power_p,
                                               const RootScanOptions& opt = {}) {
    if (!(power_p >= 0)) throw InvalidArgument("power must be >= 0");
    const NonlinearArrayParams np = make_nonlinear_array_params(omega, p);
    const double c = np.closed_form_strength();
    const double x = power_p / np.xi_sq;

    ClosedFormRoots out;
    out.flags = np.flags;
    out.roots = scan_unit_interval_roots([&](double d) { return closed_form_residual(d, c, x); }, opt);
    if (np.k * np.length < 10.0) out.flags |= Flag::short_system;
    for (double d : out.roots) {
        const double z = 1.0 - np.chi * np.length * np.length / (2.0 * (power_p * d + np.xi_sq));
        if (std::abs(1.0 - z) >= 0.05) {
            out.flags |= Flag::z_not_small;
            break;
        }
    }
    return out;
}

}  // namespace qls
