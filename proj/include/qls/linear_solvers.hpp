#pragma once

#include <cmath>

#include "qls/core_model.hpp"
#include "qls/scattering_lattice.hpp"
#include "qls/types.hpp"
#include "qls/wave.hpp"

namespace qls {

/// Low-power transmission of a single qubit:
///   D = [1 + (g/4)(g + 4 Gamma) / ((omega - 1)^2 + Gamma^2)]^{-1}
/// R comes from the N = 1 transfer matrix.
inline TransmissionResult single_qubit_linear_d(double omega, const ModelParams& p) {
    validate(p);
    if (!(omega > 0)) throw InvalidArgument("omega must be > 0");
    const double detuning = omega - 1.0;
    const double den = detuning * detuning + p.gamma_q * p.gamma_q;
    const double g = p.coupling_g;

    if (den == 0.0) {
        // lossless qubit exactly on resonance: total reflection for g > 0
        const double d = g > 0 ? 0.0 : 1.0;
        return make_result(d, 1.0 - d);
    }
    const double d = 1.0 / (1.0 + 0.25 * g * (g + 4.0 * p.gamma_q) / den);

    ModelParams single = p;
    single.qubit_count = 1;
    const TransmissionResult tm = linear_transfer_matrix_d(omega, single);
    TransmissionResult out = make_result(d, tm.reflection);
    out.residual = std::abs(tm.d_coefficient - d);
    return out;
}

struct BarrierCoefficient {
    complex k_value;     // K(omega)
    complex wavevector;  // k = sqrt(omega^2 + i gamma omega)
    complex kl_product;  // k l
};

/// K(omega) = (g c0 / (omega_q a)) (1 - omega + i Gamma) / ((1 - omega)^2 + Gamma^2)
inline BarrierCoefficient barrier_coefficient(double omega, const ModelParams& p) {
    validate(p);
    if (!(omega > 0)) throw InvalidArgument("omega must be > 0");
    const double delta = 1.0 - omega;
    const double den = delta * delta + p.gamma_q * p.gamma_q;
    BarrierCoefficient out;
    const double strength = p.coupling_per_length();
    out.k_value = den == 0.0 ? complex{strength > 0 ? INFINITY : 0.0, 0.0}
                             : strength * complex{delta, p.gamma_q} / den;
    out.wavevector = line_wavevector(omega, p.line_damping);
    out.kl_product = out.wavevector * p.length_kl;
    return out;
}

enum class BarrierForm {
    reduced,   // |cos(kl sqrt K) + (i/2) sqrt K sin(kl sqrt K)|^{-2}, the K >> 1 form
    textbook,  // uniform slab with index^2 = K, (sqrt K + 1/sqrt K)/2 coupling factor
};

struct SlabTransmission {
    double d;
    double r;
};

/// Transmission through a uniform slab of thickness l whose wave number is
/// k sqrt(index_sq), embedded in the line. kl = k l.
inline SlabTransmission slab_transmission(complex kl, complex index_sq, BarrierForm form) {
    const complex n = principal_sqrt(index_sq);
    const complex theta = kl * n;
    const complex c = ccos(theta);
    const complex s = csin(theta);
    const complex i{0.0, 1.0};
    if (form == BarrierForm::reduced) {
        const complex denom = c + 0.5 * i * n * s;
        const double d = 1.0 / std::norm(denom);
        return {d, std::norm(0.5 * n * s) * d};
    }
    const complex denom = c - 0.5 * i * (n + 1.0 / n) * s;
    const complex refl = 0.5 * i * (n - 1.0 / n) * s;
    return {1.0 / std::norm(denom), std::norm(refl / denom)};
}

/// Dense array treated as an effective rectangular barrier.
inline TransmissionResult array_linear_d(double omega, const ModelParams& p,
                                         BarrierForm form = BarrierForm::reduced) {
    const BarrierCoefficient bc = barrier_coefficient(omega, p);
    const SlabTransmission s = slab_transmission(bc.kl_product, bc.k_value, form);
    TransmissionResult out = make_result(s.d, s.r);

    const double ka = std::abs(bc.wavevector) * p.spacing_ka;
    if (ka >= 0.2) out.flags |= Flag::dense_array_violation;
    if (std::abs(bc.kl_product) >= 1.0) out.flags |= Flag::long_wavelength_violation;
    if (std::abs(bc.k_value) < 10.0) out.flags |= Flag::weak_barrier;
    if (s.d + s.r > 1.0 + 1e-10) out.flags |= Flag::non_unitary;
    return out;
}

}  // namespace qls
