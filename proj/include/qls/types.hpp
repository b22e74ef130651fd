#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qls {

using complex = std::complex<double>;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// errors

/// Base class for every error raised by the solvers.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual std::string_view kind() const noexcept { return "Error"; }
};

#define QLS_DEFINE_ERROR(Name)                                                 \
    class Name : public Error {                                                \
    public:                                                                    \
        using Error::Error;                                                    \
        std::string_view kind() const noexcept override { return #Name; }      \
    };

QLS_DEFINE_ERROR(NonPositiveParameter)
QLS_DEFINE_ERROR(InvalidArgument)
QLS_DEFINE_ERROR(NotConverged)
QLS_DEFINE_ERROR(SingularMatrix)
QLS_DEFINE_ERROR(Diverged)
QLS_DEFINE_ERROR(StepFailure)
QLS_DEFINE_ERROR(NoRoot)
QLS_DEFINE_ERROR(BranchAmbiguity)
QLS_DEFINE_ERROR(ArgumentOverflow)
QLS_DEFINE_ERROR(ConfigError)

#undef QLS_DEFINE_ERROR

// ---------------------------------------------------------------------------
// diagnostic flags (warnings that do not abort a solve)

enum class Flag : std::uint32_t {
    none = 0,
    dense_array_violation = 1u << 0,   // ka >= 0.2
    long_wavelength_violation = 1u << 1, // kl not << 1 for the barrier formula
    weak_barrier = 1u << 2,            // |K| <= 1, outside beta/a >> omega_q^2
    non_unitary = 1u << 3,             // D + R > 1 beyond rounding
    line_damping_ignored = 1u << 4,    // gamma forced to zero
    negative_chi = 1u << 5,            // blue detuning, outside the closed-form derivation
    z_not_small = 1u << 6,             // 1 - z not << 1
    short_system = 1u << 7,            // kl not >> 1 for the closed form
    low_power_violation = 1u << 8,     // linear formula used beyond its regime
    qubit_size_warning = 1u << 9,      // w / l >= 0.1
    solver_error = 1u << 10,
};

inline constexpr Flag operator|(Flag a, Flag b) {
    return static_cast<Flag>(static_cast<std::uint32_t>(a) | static_cast<std::uint32_t>(b));
}
inline constexpr Flag operator&(Flag a, Flag b) {
    return static_cast<Flag>(static_cast<std::uint32_t>(a) & static_cast<std::uint32_t>(b));
}
inline Flag& operator|=(Flag& a, Flag b) { return a = a | b; }
inline constexpr bool has_flag(Flag set, Flag f) { return (set & f) != Flag::none; }

inline std::string to_string(Flag flags) {
    static constexpr std::pair<Flag, std::string_view> names[] = {
        {Flag::dense_array_violation, "dense_array_violation"},
        {Flag::long_wavelength_violation, "long_wavelength_violation"},
        {Flag::weak_barrier, "weak_barrier"},
        {Flag::non_unitary, "non_unitary"},
        {Flag::line_damping_ignored, "line_damping_ignored"},
        {Flag::negative_chi, "negative_chi"},
        {Flag::z_not_small, "z_not_small"},
        {Flag::short_system, "short_system"},
        {Flag::low_power_violation, "low_power_violation"},
        {Flag::qubit_size_warning, "qubit_size_warning"},
        {Flag::solver_error, "solver_error"},
    };
    std::string out;
    for (auto [f, name] : names) {
        if (has_flag(flags, f)) {
            if (!out.empty()) out += '|';
            out += name;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// parameters

/// Physical constants of one device, SI units.
struct MicroscopicParams {
    double josephson_energy = 0;            // E_J [J]
    double plasma_frequency = 0;            // omega_p [rad/s]
    double coupling_alpha = 0;              // alpha
    double qubit_size = 0;                  // w [m]
    double line_inductance_per_length = 0;  // L0 [H/m]
    double line_capacitance_per_length = 0; // C0 [F/m]
    double system_length = 0;               // l [m]
    double qubit_spacing = 0;               // a [m]
    int qubit_count = 1;                    // N
    double relaxation_time = 0;             // T [s]
    double line_damping = 0;                // gamma [rad/s]
};

/// Dimensionless model constants. Frequencies are in units of omega_q and
/// lengths in units of c0 / omega_q, so omega_q = c0 = 1 throughout.
struct ModelParams {
    double gamma_q = 1e-2;      // relaxation rate Gamma = 1 / (T omega_q)
    double coupling_g = 0.06;   // per-qubit interaction strength g
    double eta = 1.0;           // interaction strength eta
    double line_damping = 0.0;  // gamma / omega_q
    double length_kl = 1.0;     // omega_q l / c0
    double spacing_ka = 1e-2;   // omega_q a / c0
    int qubit_count = 1;        // N

    /// g c0 / (omega_q a), the array coupling per unit length.
    double coupling_per_length() const { return coupling_g / spacing_ka; }
};

/// Throws NonPositiveParameter / InvalidArgument if the invariants fail.
inline void validate(const ModelParams& p) {
    if (!(p.gamma_q >= 0)) throw NonPositiveParameter("gamma_q must be >= 0");
    if (!(p.coupling_g >= 0)) throw NonPositiveParameter("coupling_g must be >= 0");
    if (!(p.eta > 0)) throw NonPositiveParameter("eta must be > 0");
    if (!(p.line_damping >= 0)) throw NonPositiveParameter("line_damping must be >= 0");
    if (!(p.length_kl > 0)) throw NonPositiveParameter("length_kl must be > 0");
    if (!(p.spacing_ka > 0)) throw NonPositiveParameter("spacing_ka must be > 0");
    if (p.qubit_count < 1) throw NonPositiveParameter("qubit_count must be >= 1");
}

struct DriveSpec {
    double omega = 1.0;  // omega / omega_q
    double power = 0.0;  // |A|^2, incident amplitude in units of e
};

// ---------------------------------------------------------------------------
// results

enum class BranchLabel { lower, middle, upper, unique };

inline std::string_view to_string(BranchLabel b) {
    switch (b) {
    case BranchLabel::lower: return "lower";
    case BranchLabel::middle: return "middle";
    case BranchLabel::upper: return "upper";
    case BranchLabel::unique: return "unique";
    }
    return "unique";
}

/// Labels for a sorted set of roots at one drive point.
inline std::vector<BranchLabel> labels_for_root_count(std::size_t n) {
    if (n == 1) return {BranchLabel::unique};
    if (n == 3) return {BranchLabel::lower, BranchLabel::middle, BranchLabel::upper};
    std::vector<BranchLabel> out(n, BranchLabel::middle);
    if (n > 0) {
        out.front() = BranchLabel::lower;
        out.back() = BranchLabel::upper;
    }
    return out;
}

struct TransmissionResult {
    double d_coefficient = kNaN;
    double reflection = kNaN;
    double absorption = kNaN;
    BranchLabel branch = BranchLabel::unique;
    double residual = 0.0;
    bool converged = true;
    Flag flags = Flag::none;
};

inline TransmissionResult make_result(double d, double r, double residual = 0.0) {
    TransmissionResult out;
    out.d_coefficient = d;
    out.reflection = r;
    out.absorption = 1.0 - d - r;
    out.residual = residual;
    return out;
}

struct CurvePoint {
    double power = 0;
    double d = 0;
    BranchLabel branch = BranchLabel::unique;
    bool stable = true;  // heuristic: the middle branch of an S-curve is marked unstable
};

struct FoldPoint {
    double power = 0;
    double d = 0;
};

/// Multi-valued D(P) curve. Points are grouped by branch and ordered by power
/// inside each branch.
struct BranchCurve {
    std::vector<CurvePoint> points;
    std::vector<FoldPoint> fold_points;

    bool bistable() const { return fold_points.size() >= 2; }
};

}  // namespace qls
