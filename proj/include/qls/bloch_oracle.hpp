#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include "qls/types.hpp"

namespace qls {

struct BlochOracleOptions {
    int steps_per_period = 64;
    double tolerance = 1e-3;      // allowed relative drift of the extracted component
    double window_fraction = 0.2; // trailing part of [0, t_max] used for extraction
};

struct BlochOracleResult {
    complex response;      // comparable with qubit_response(...).s_value
    complex coherence;     // e^{-i omega t} Fourier amplitude of rho_eg
    double drift = 0.0;    // relative change between the two halves of the window
};

namespace detail {

// Lab-frame two-level system, omega_q = 1, hbar = 1:
//   H = sigma_z / 2 + Omega cos(omega t) sigma_x,   Omega = eta |q|
// with equal longitudinal and transverse relaxation rates Gamma.
// State: rho_eg = u + i v, inversion w = rho_ee - rho_gg.
struct DrivenTwoLevel {
    double rabi;
    double omega;
    double gamma;

    void operator()(const std::array<double, 3>& s, std::array<double, 3>& ds, double t) const {
        const double drive = rabi * std::cos(omega * t);
        ds[0] = -gamma * s[0] + s[1];
        ds[1] = -s[0] - gamma * s[1] + drive * s[2];
        ds[2] = -4.0 * drive * s[1] - gamma * (s[2] + 1.0);
    }
};

}  // namespace detail

/// Time-domain reference for qubit_response. The qubit starts in its ground
/// state, is driven by a classical field of amplitude q_amp until t_max, and
/// the coherence is projected onto e^{-i omega t} over the trailing window.
/// No rotating-wave approximation is made; the counter-rotating part of the
/// coherence lives at e^{+i omega t} and drops out of the projection.
inline BlochOracleResult bloch_oracle(double omega, double q_amp, const ModelParams& p, double t_max,
                                      const BlochOracleOptions& opt = {}) {
    if (!(omega > 0)) throw InvalidArgument("omega must be > 0");
    if (!(p.gamma_q > 0)) throw InvalidArgument("bloch_oracle needs gamma_q > 0 for a steady state");
    if (!(t_max > 0)) throw InvalidArgument("t_max must be > 0");
    if (opt.steps_per_period < 8) throw InvalidArgument("steps_per_period must be >= 8");

    BlochOracleResult out{};
    if (q_amp == 0.0) return out;

    const double period = 2.0 * std::numbers::pi / omega;
    const double h = period / opt.steps_per_period;
    const long total_periods = static_cast<long>(std::ceil(t_max / period));
    long window_periods = static_cast<long>(std::floor(total_periods * opt.window_fraction));
    window_periods -= window_periods % 2;
    if (window_periods < 2)
        throw InvalidArgument("t_max too short: the extraction window needs at least two drive periods");
    const long half = window_periods / 2;
    const long first_window_period = total_periods - window_periods;

    detail::DrivenTwoLevel rhs{p.eta * std::abs(q_amp), omega, p.gamma_q};
    boost::numeric::odeint::runge_kutta4<std::array<double, 3>> stepper;
    std::array<double, 3> state{0.0, 0.0, -1.0};

    // Trapezoidal projection over whole periods. The integrand is periodic in
    // steady state, so the rule reduces to a plain sum of the samples.
    complex halves[2] = {0.0, 0.0};
    double t = 0.0;
    for (long period_index = 0; period_index < total_periods; ++period_index) {
        const bool in_window = period_index >= first_window_period;
        const int slot = (period_index - first_window_period) < half ? 0 : 1;
        for (int j = 0; j < opt.steps_per_period; ++j) {
            t = (period_index * opt.steps_per_period + j) * h;
            if (in_window) {
                const complex rho_eg{state[0], state[1]};
                halves[slot] += rho_eg * std::polar(1.0, omega * t);
            }
            stepper.do_step(rhs, state, t, h);
        }
    }
    const double samples = static_cast<double>(half) * opt.steps_per_period;
    halves[0] /= samples;
    halves[1] /= samples;

    out.coherence = 0.5 * (halves[0] + halves[1]);
    const double scale = std::abs(out.coherence);
    out.drift = scale > 0 ? std::abs(halves[1] - halves[0]) / scale : 0.0;
    if (!std::isfinite(scale) || out.drift > opt.tolerance)
        throw NotConverged("bloch_oracle: coherence still drifting over the extraction window");

    // Weak-drive steady state: rho_eg = -(Omega/2)(delta + i Gamma)/(delta^2 + Gamma^2) e^{-i omega t}.
    const double sign = q_amp < 0 ? -1.0 : 1.0;
    out.response = -2.0 * sign * out.coherence;
    return out;
}

}  // namespace qls
