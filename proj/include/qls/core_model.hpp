#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qls/types.hpp"

namespace qls {

namespace si {
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
}  // namespace si

/// Non-fatal remarks about a microscopic parameter set.
inline std::vector<std::string> microscopic_warnings(const MicroscopicParams& m) {
    std::vector<std::string> out;
    if (m.system_length > 0 && m.qubit_size / m.system_length >= 0.1)
        out.push_back("qubit_size / system_length >= 0.1: the point-scatterer model assumes w << l");
    return out;
}

inline void validate(const MicroscopicParams& m) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0)) throw NonPositiveParameter(std::string(name) + " must be > 0");
    };
    positive(m.josephson_energy, "josephson_energy");
    positive(m.plasma_frequency, "plasma_frequency");
    positive(m.coupling_alpha, "coupling_alpha");
    positive(m.qubit_size, "qubit_size");
    positive(m.line_inductance_per_length, "line_inductance_per_length");
    positive(m.line_capacitance_per_length, "line_capacitance_per_length");
    positive(m.system_length, "system_length");
    positive(m.qubit_spacing, "qubit_spacing");
    positive(m.relaxation_time, "relaxation_time");
    positive(m.line_damping, "line_damping");
    if (m.qubit_count < 1) throw NonPositiveParameter("qubit_count must be > 0");
    if (m.qubit_count * m.qubit_spacing > m.system_length * (1 + 1e-12))
        throw InvalidArgument("qubit_count * qubit_spacing exceeds system_length");
}

/// Maps device constants onto the dimensionless groups used by every solver.
///
///   eta   = alpha [hbar omega_p / (2 E_J)]^2
///   g     = 2 eta^2 hbar w / (e^2 c0 L0 l),   c0 = 1 / sqrt(L0 C0)
///   Gamma = 1 / (T omega_q),                   omega_q = E_J / hbar
inline ModelParams derive_dimensionless(const MicroscopicParams& m) {
    validate(m);
    const double omega_q = m.josephson_energy / si::hbar;
    const double c0 = 1.0 / std::sqrt(m.line_inductance_per_length * m.line_capacitance_per_length);
    const double ratio = si::hbar * m.plasma_frequency / (2.0 * m.josephson_energy);

    ModelParams p;
    p.eta = m.coupling_alpha * ratio * ratio;
    p.coupling_g = 2.0 * p.eta * p.eta * si::hbar * m.qubit_size /
                   (si::elementary_charge * si::elementary_charge * c0 *
                    m.line_inductance_per_length * m.system_length);
    p.gamma_q = 1.0 / (m.relaxation_time * omega_q);
    p.line_damping = m.line_damping / omega_q;
    p.length_kl = omega_q * m.system_length / c0;
    p.spacing_ka = omega_q * m.qubit_spacing / c0;
    p.qubit_count = m.qubit_count;
    return p;
}

struct QubitResponse {
    complex s_value;          // S, the correlation function at the drive frequency
    complex beta;             // effective scatterer strength of one qubit
    double saturation_term;   // eta^2 |q|^2
};

/// Steady-state response of one driven qubit to a local charge amplitude q.
///
/// S    = eta (delta + i Gamma) / (delta^2 + Gamma^2 + eta^2 |q|^2) q,  delta = 1 - omega
/// beta = g omega (delta + i Gamma) / (same denominator)
///
/// beta carries omega rather than omega_q in its prefactor, so that the
/// Green-function strength beta / (2k) is exactly g (delta + i Gamma) / (2 den)
/// on a lossless line.
inline QubitResponse qubit_response(double omega, complex q_amp, const ModelParams& p) {
    if (!(omega > 0)) throw InvalidArgument("omega must be > 0");
    const double delta = 1.0 - omega;
    const double sat = p.eta * p.eta * std::norm(q_amp);
    const double den = delta * delta + p.gamma_q * p.gamma_q + sat;
    const complex num{delta, p.gamma_q};

    QubitResponse out{};
    out.saturation_term = sat;
    if (den == 0.0) {
        // lossless qubit driven exactly on resonance at vanishing amplitude
        out.s_value = 0.0;
        out.beta = complex{std::numeric_limits<double>::infinity(), 0.0};
        return out;
    }
    out.s_value = p.eta * num / den * q_amp;
    out.beta = p.coupling_g * omega * num / den;
    return out;
}

/// Non-dissipative limit of the response (Gamma = 0).
inline complex qubit_response_nd(double omega, complex q_amp, const ModelParams& p) {
    ModelParams nd = p;
    nd.gamma_q = 0.0;
    return qubit_response(omega, q_amp, nd).s_value;
}

}  // namespace qls
