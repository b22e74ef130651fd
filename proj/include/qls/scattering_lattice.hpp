#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qls/core_model.hpp"
#include "qls/types.hpp"
#include "qls/wave.hpp"

// Qubit array as N point scatterers on the line. The field is carried as the
// pair (q, q'); a free segment of length d is the matrix
//     [  cos kd    sin kd / k ]
//     [ -k sin kd  cos kd     ]
// and a qubit with strength beta imposes q'(x+) - q'(x-) = -beta q (c0 = 1).
// Sites sit at x_n = (n - 1/2) a, so the array is N identical symmetric cells
// and N a = l.

namespace qls {

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

/// Sign of the derivative jump relative to beta.
inline constexpr double kJumpSign = -1.0;

inline Mat2 free_propagation(complex k, double length) {
    const complex arg = k * length;
    const complex c = ccos(arg);
    const complex s = csin(arg);
    Mat2 m;
    m << c, s / k, -k * s, c;
    return m;
}

inline Mat2 site_jump(complex beta) {
    Mat2 m;
    m << 1.0, 0.0, kJumpSign * beta, 1.0;
    return m;
}

/// Half segment, qubit, half segment.
inline Mat2 cell_matrix(complex k, double spacing, complex beta) {
    const Mat2 half = free_propagation(k, 0.5 * spacing);
    return half * site_jump(beta) * half;
}

/// exp(log_scale) * m; keeps long products away from overflow.
struct ScaledMatrix {
    Mat2 m = Mat2::Identity();
    double log_scale = 0.0;

    void renormalize() {
        const double biggest = m.cwiseAbs().maxCoeff();
        if (biggest > 0 && std::isfinite(biggest)) {
            m /= biggest;
            log_scale += std::log(biggest);
        }
    }

    /// this <- left * this
    void push_left(const Mat2& left) {
        m = left * m;
        renormalize();
    }

    Mat2 value() const { return m * std::exp(log_scale); }
};

/// Transfer matrix of the whole array, composed right-to-left
/// (cell N ... cell 1) from per-site strengths.
inline ScaledMatrix lattice_transfer_matrix(complex k, double spacing, std::span<const complex> betas) {
    ScaledMatrix out;
    for (const complex& b : betas) out.push_left(cell_matrix(k, spacing, b));
    return out;
}

struct ScatteringAmplitudes {
    complex incident = 1.0;    // A at x = 0
    complex reflected = 0.0;   // B at x = 0
    complex transmitted = 0.0; // t at x = l
    double d = kNaN;
    double r = kNaN;
};

/// Unit wave incident from the left, nothing incoming from the right.
/// In the travelling-wave basis (A e^{ikx}, B e^{-ikx}) the array matrix W
/// has unit determinant, so t = 1 / W22 and r = -W21 / W22 with no inverse.
inline ScatteringAmplitudes scatter_from_left(const ScaledMatrix& total, complex k) {
    const Mat2& m = total.m;
    const complex ik{0.0, 1.0};
    // W = V^{-1} M V with V = [[1, 1], [ik, -ik]]
    const complex w21 = 0.5 * (m(0, 0) - m(1, 1) + ik * k * m(0, 1) - m(1, 0) / (ik * k));
    const complex w22 = 0.5 * (m(0, 0) + m(1, 1) - ik * k * m(0, 1) - m(1, 0) / (ik * k));
    if (!std::isfinite(std::abs(w22)) || std::abs(w22) == 0.0)
        throw SingularMatrix("transfer matrix is numerically singular");

    ScatteringAmplitudes out;
    out.transmitted = std::exp(-total.log_scale) / w22;
    out.reflected = -w21 / w22;
    out.d = std::exp(-2.0 * (total.log_scale + std::log(std::abs(w22))));
    out.r = std::norm(out.reflected);
    return out;
}

/// Unit wave incident from the right.
inline ScatteringAmplitudes scatter_from_right(const ScaledMatrix& total, complex k) {
    const complex ik{0.0, 1.0};
    const Vec2 right = total.m * Vec2{1.0, -ik * k};
    const complex a = 0.5 * (right(0) - right(1) / (ik * k));
    const complex b = 0.5 * (right(0) + right(1) / (ik * k));
    if (std::abs(a) == 0.0) throw SingularMatrix("zero incident amplitude: the array is not passive");

    ScatteringAmplitudes out;
    out.incident = 1.0;
    out.transmitted = std::exp(-total.log_scale) / a;
    out.reflected = b / a;
    out.d = std::exp(-2.0 * (total.log_scale + std::log(std::abs(a))));
    out.r = std::norm(b / a);
    return out;
}

/// Exact linear-regime transmission of N identical qubits of strength
/// beta_linear (beta at |q| = 0).
inline TransmissionResult linear_transfer_matrix_d(double omega, const ModelParams& p, complex beta_linear) {
    validate(p);
    if (!(omega > 0)) throw InvalidArgument("omega must be > 0");
    const complex k = line_wavevector(omega, p.line_damping);
    const std::vector<complex> betas(static_cast<std::size_t>(p.qubit_count), beta_linear);
    const ScaledMatrix total = lattice_transfer_matrix(k, p.spacing_ka, betas);
    const ScatteringAmplitudes s = scatter_from_left(total, k);

    // every factor has unit determinant
    const double det_error = std::abs(total.value().determinant() - 1.0);
    TransmissionResult out = make_result(s.d, s.r, std::isfinite(det_error) ? det_error : 0.0);
    if (s.d + s.r > 1.0 + 1e-10) out.flags |= Flag::non_unitary;
    return out;
}

/// Linear transmission with beta taken from the qubit response at |q| = 0.
inline TransmissionResult linear_transfer_matrix_d(double omega, const ModelParams& p) {
    return linear_transfer_matrix_d(omega, p, qubit_response(omega, 0.0, p).beta);
}

// ---------------------------------------------------------------------------
// field profile

struct LatticeField {
    std::vector<complex> site_amplitudes;   // q_n, n = 1..N
    std::vector<double> site_positions;     // x_n
    // q(x) = A_j e^{ik(x - s_j)} + B_j e^{-ik(x - s_j)} on segment j, where
    // s_0 = 0 and s_j = x_j; segment j runs from s_j to the next site (or l).
    std::vector<complex> segment_right;     // A_j, j = 0..N
    std::vector<complex> segment_left;      // B_j
    std::vector<double> segment_start;
    complex k;
    double spacing = 0;
};

/// Full field for unit incidence in the linear regime.
inline LatticeField solve_lattice_field(double omega, const ModelParams& p, complex beta_linear) {
    validate(p);
    const complex k = line_wavevector(omega, p.line_damping);
    const std::vector<complex> betas(static_cast<std::size_t>(p.qubit_count), beta_linear);
    const ScatteringAmplitudes s = scatter_from_left(lattice_transfer_matrix(k, p.spacing_ka, betas), k);

    LatticeField f;
    f.k = k;
    f.spacing = p.spacing_ka;
    const complex ik{0.0, 1.0};
    auto to_waves = [&](const Vec2& st, complex& a, complex& b) {
        a = 0.5 * (st(0) + st(1) / (ik * k));
        b = 0.5 * (st(0) - st(1) / (ik * k));
    };

    Vec2 state{1.0 + s.reflected, ik * k * (1.0 - s.reflected)};
    complex a, b;
    to_waves(state, a, b);
    f.segment_right.push_back(a);
    f.segment_left.push_back(b);
    f.segment_start.push_back(0.0);

    for (int n = 1; n <= p.qubit_count; ++n) {
        const double dx = n == 1 ? 0.5 * p.spacing_ka : p.spacing_ka;
        state = free_propagation(k, dx) * state;
        f.site_amplitudes.push_back(state(0));
        f.site_positions.push_back((n - 0.5) * p.spacing_ka);
        state = site_jump(beta_linear) * state;
        to_waves(state, a, b);
        f.segment_right.push_back(a);
        f.segment_left.push_back(b);
        f.segment_start.push_back(f.site_positions.back());
    }
    return f;
}

// ---------------------------------------------------------------------------
// infinite lattice

struct BlochFactor {
    complex cos_bloch;    // cos(K a) for the Bloch wavevector K
    complex bloch_phase;  // K a
    bool band_gap = false;
};

/// cos(K a) = cos ka - beta / (2 k) sin ka for the infinite periodic array.
inline BlochFactor lattice_dispersion_check(double omega, const ModelParams& p, complex beta_linear) {
    if (!(omega > 0)) throw InvalidArgument("omega must be > 0");
    const complex k = line_wavevector(omega, p.line_damping);
    const complex ka = k * p.spacing_ka;
    BlochFactor out;
    out.cos_bloch = ccos(ka) + kJumpSign * beta_linear / (2.0 * k) * csin(ka);
    out.bloch_phase = std::acos(out.cos_bloch);
    out.band_gap = std::abs(out.cos_bloch) > 1.0;
    return out;
}

// ---------------------------------------------------------------------------
// nonlinear regime

struct BackwardRecursionResult {
    TransmissionResult result;
    double power = kNaN;                 // |A|^2
    std::vector<complex> site_amplitudes;
};

/// Fixes the outgoing wave at x = l with |t| = transmitted_amp and recurses
/// toward the input, evaluating each qubit's saturated beta at its own
/// amplitude. Returns D = |t/A|^2 and P = |A|^2.
inline BackwardRecursionResult nonlinear_backward_recursion_d(double omega, const ModelParams& p,
                                                              double transmitted_amp) {
    validate(p);
    if (!(omega > 0)) throw InvalidArgument("omega must be > 0");
    if (!(transmitted_amp > 0)) throw InvalidArgument("transmitted_amp must be > 0");
    if (!(p.gamma_q > 0)) throw InvalidArgument("backward recursion needs gamma_q > 0");

    const complex k = line_wavevector(omega, p.line_damping);
    const complex ik{0.0, 1.0};
    const double a = p.spacing_ka;
    const double limit = 1e6 * transmitted_amp;
    const Mat2 back_half = free_propagation(k, -0.5 * a);
    const Mat2 back_full = free_propagation(k, -a);

    BackwardRecursionResult out;
    out.site_amplitudes.resize(static_cast<std::size_t>(p.qubit_count));

    Vec2 state{transmitted_amp, ik * k * transmitted_amp};
    for (int n = p.qubit_count; n >= 1; --n) {
        state = (n == p.qubit_count ? back_half : back_full) * state;
        const complex q = state(0);
        if (!(std::abs(q) <= limit))
            throw Diverged("backward recursion: site amplitude exceeds 1e6 x transmitted amplitude");
        out.site_amplitudes[static_cast<std::size_t>(n - 1)] = q;
        const complex beta = qubit_response(omega, q, p).beta;
        state(1) -= kJumpSign * beta * q;
    }
    state = back_half * state;

    const complex incident = 0.5 * (state(0) + state(1) / (ik * k));
    const complex reflected = 0.5 * (state(0) - state(1) / (ik * k));
    out.power = std::norm(incident);
    const double d = transmitted_amp * transmitted_amp / out.power;
    out.result = make_result(d, std::norm(reflected) / out.power);
    if (out.result.d_coefficient + out.result.reflection > 1.0 + 1e-10) out.result.flags |= Flag::non_unitary;
    return out;
}

struct BackwardSweep {
    std::vector<double> transmitted_amp;
    std::vector<double> power;
    std::vector<double> d;
    BranchCurve curve;
};

/// Sweeps the transmitted amplitude (ascending) and locates folds of P(t)
/// from sign changes of the 3-point derivative, refined by a parabola
/// through the neighbouring samples.
inline BackwardSweep backward_recursion_sweep(double omega, const ModelParams& p, std::span<const double> amps) {
    BackwardSweep out;
    for (double t : amps) {
        const auto r = nonlinear_backward_recursion_d(omega, p, t);
        out.transmitted_amp.push_back(t);
        out.power.push_back(r.power);
        out.d.push_back(r.result.d_coefficient);
    }
    const std::size_t n = out.power.size();

    std::vector<double> slope(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 < n ? i + 1 : n - 1;
        if (hi > lo) slope[i] = (out.power[hi] - out.power[lo]) / (amps[hi] - amps[lo]);
    }

    std::vector<std::size_t> fold_index;
    for (std::size_t i = 1; i < n; ++i) {
        if ((slope[i - 1] > 0) != (slope[i] > 0)) {
            // extremum of P lies at i-1 or i; take the more extreme one
            const bool is_max = slope[i - 1] > 0;
            std::size_t j = i - 1;
            if (is_max ? out.power[i] > out.power[i - 1] : out.power[i] < out.power[i - 1]) j = i;
            j = std::clamp<std::size_t>(j, 1, n - 2);
            fold_index.push_back(j);

            // parabola through (x_{j-1}, x_j, x_{j+1}) in the sweep variable
            const double x0 = amps[j - 1], x1 = amps[j], x2 = amps[j + 1];
            const double p0 = out.power[j - 1], p1 = out.power[j], p2 = out.power[j + 1];
            const double d0 = out.d[j - 1], d1 = out.d[j], d2 = out.d[j + 1];
            const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
            const double ca = (x2 * (p1 - p0) + x1 * (p0 - p2) + x0 * (p2 - p1)) / denom;
            const double cb = (x2 * x2 * (p0 - p1) + x1 * x1 * (p2 - p0) + x0 * x0 * (p1 - p2)) / denom;
            FoldPoint fp{p1, d1};
            if (ca != 0.0) {
                const double xv = std::clamp(-cb / (2.0 * ca), x0, x2);
                auto lagrange = [&](double y0, double y1, double y2) {
                    return y0 * (xv - x1) * (xv - x2) / ((x0 - x1) * (x0 - x2)) +
                           y1 * (xv - x0) * (xv - x2) / ((x1 - x0) * (x1 - x2)) +
                           y2 * (xv - x0) * (xv - x1) / ((x2 - x0) * (x2 - x1));
                };
                fp = {lagrange(p0, p1, p2), lagrange(d0, d1, d2)};
            }
            out.curve.fold_points.push_back(fp);
        }
    }

    const std::size_t segments = fold_index.size() + 1;
    std::size_t segment = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (segment < fold_index.size() && i > fold_index[segment]) ++segment;
        BranchLabel label = BranchLabel::unique;
        if (segments > 1)
            label = segment == 0 ? BranchLabel::lower
                    : segment + 1 == segments ? BranchLabel::upper
                                              : BranchLabel::middle;
        out.curve.points.push_back({out.power[i], out.d[i], label, label != BranchLabel::middle});
    }
    return out;
}

}  // namespace qls
