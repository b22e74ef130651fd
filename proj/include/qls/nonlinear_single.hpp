#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "qls/root_scan.hpp"
#include "qls/types.hpp"

namespace qls {

/// Right-hand side of the transcendental single-qubit relation
///   D = {1 + (g/4) [(4G + g) s + 4 G eta^2 P0 D] / (s + eta^2 P0 D)^2}^{-1},
/// s = (omega - 1)^2 + Gamma^2.
inline double single_qubit_nonlinear_rhs(double d, double omega, const ModelParams& p, double power_p0) {
    const double detuning = omega - 1.0;
    const double s = detuning * detuning + p.gamma_q * p.gamma_q;
    const double u = p.eta * p.eta * power_p0 * d;
    const double g = p.coupling_g;
    const double den = s + u;
    return 1.0 / (1.0 + 0.25 * g * ((4.0 * p.gamma_q + g) * s + 4.0 * p.gamma_q * u) / (den * den));
}

inline double single_qubit_nonlinear_residual(double d, double omega, const ModelParams& p, double power_p0) {
    return d - single_qubit_nonlinear_rhs(d, omega, p, power_p0);
}

/// Every D in (0, 1] solving the relation at incident power P0, ascending.
inline std::vector<double> single_qubit_nonlinear_roots(double omega, const ModelParams& p, double power_p0,
                                                        const RootScanOptions& opt = {}) {
    validate(p);
    if (!(omega > 0)) throw InvalidArgument("omega must be > 0");
    if (!(power_p0 >= 0)) throw InvalidArgument("power must be >= 0");
    if (!(p.gamma_q > 0)) throw InvalidArgument("single_qubit_nonlinear_roots needs gamma_q > 0");

    auto f = [&](double d) { return single_qubit_nonlinear_residual(d, omega, p, power_p0); };
    auto roots = scan_unit_interval_roots(f, opt);
    if (roots.empty()) throw NoRoot("no root of the single-qubit relation on (0, 1]");
    return roots;
}

struct TraceOptions {
    RootScanOptions scan{};
    double match_tolerance = 1e-9;  // two new roots this close to one predecessor is ambiguous
    int fold_bisection_steps = 60;
};

namespace detail {

struct OpenBranch {
    std::vector<CurvePoint> points;
    int max_rank_seen = -1;       // rank among coexisting roots, for labelling
    std::size_t max_count_seen = 0;
};

inline BranchLabel label_for(const OpenBranch& b) {
    if (b.max_count_seen <= 1) return BranchLabel::unique;
    const auto labels = labels_for_root_count(b.max_count_seen);
    return labels[static_cast<std::size_t>(b.max_rank_seen)];
}

/// Cost of continuing `old_roots` onto `new_roots` when a pair is inserted at
/// new index j (new_roots.size() == old_roots.size() + 2).
inline double insertion_cost(const std::vector<double>& old_roots, const std::vector<double>& new_roots,
                             std::size_t j) {
    double cost = 0;
    for (std::size_t i = 0; i < old_roots.size(); ++i) {
        const std::size_t target = i < j ? i : i + 2;
        cost += std::abs(old_roots[i] - new_roots[target]);
    }
    return cost;
}

}  // namespace detail

/// Follows every root of the single-qubit relation across an ascending power
/// grid, stitching roots into branches and locating folds where the root
/// count changes.
inline BranchCurve trace_d_vs_power(double omega, const ModelParams& p, std::span<const double> p_grid,
                                    const TraceOptions& opt = {}) {
    if (p_grid.size() < 2) throw InvalidArgument("power grid needs at least two points");
    if (!std::is_sorted(p_grid.begin(), p_grid.end()))
        throw InvalidArgument("power grid must be sorted ascending");

    auto roots_at = [&](double power) { return single_qubit_nonlinear_roots(omega, p, power, opt.scan); };

    std::vector<detail::OpenBranch> finished;
    std::vector<detail::OpenBranch> active;  // ordered by D
    BranchCurve curve;

    auto record = [&](const std::vector<double>& roots, double power) {
        for (std::size_t r = 0; r < roots.size(); ++r) {
            auto& b = active[r];
            b.points.push_back({power, roots[r], BranchLabel::unique, true});
            if (roots.size() > b.max_count_seen) {
                b.max_count_seen = roots.size();
                b.max_rank_seen = static_cast<int>(r);
            }
        }
    };

    // Bisects the root count between two adjacent powers; the fold D is the
    // midpoint of the nearly coincident pair on the multi-valued side.
    auto locate_fold = [&](double lo, std::size_t count_lo, double hi, std::size_t count_hi) {
        double multi = count_hi > count_lo ? hi : lo;
        double fewer = count_hi > count_lo ? lo : hi;
        const std::size_t multi_count = std::max(count_lo, count_hi);
        for (int it = 0; it < opt.fold_bisection_steps; ++it) {
            const double mid = 0.5 * (multi + fewer);
            if (mid == multi || mid == fewer) break;
            (roots_at(mid).size() >= multi_count ? multi : fewer) = mid;
        }
        const auto r = roots_at(multi);
        std::size_t best = 0;
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            if (r[i + 1] - r[i] < gap) {
                gap = r[i + 1] - r[i];
                best = i;
            }
        }
        if (r.size() >= 2) curve.fold_points.push_back({multi, 0.5 * (r[best] + r[best + 1])});
    };

    std::vector<double> prev = roots_at(p_grid[0]);
    active.resize(prev.size());
    record(prev, p_grid[0]);

    for (std::size_t i = 1; i < p_grid.size(); ++i) {
        const double power = p_grid[i];
        std::vector<double> cur = roots_at(power);

        if (cur.size() == prev.size()) {
            // order is preserved: match by rank
        } else if (cur.size() == prev.size() + 2) {
            std::size_t best = 0;
            double best_cost = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j + 1 < cur.size(); ++j) {
                const double c = detail::insertion_cost(prev, cur, j);
                if (c < best_cost) {
                    best_cost = c;
                    best = j;
                }
            }
            active.insert(active.begin() + static_cast<std::ptrdiff_t>(best), 2, detail::OpenBranch{});
            locate_fold(p_grid[i - 1], prev.size(), power, cur.size());
        } else if (cur.size() + 2 == prev.size()) {
            std::size_t best = 0;
            double best_cost = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j + 1 < prev.size(); ++j) {
                const double c = detail::insertion_cost(cur, prev, j);
                if (c < best_cost) {
                    best_cost = c;
                    best = j;
                }
            }
            for (int k = 0; k < 2; ++k) {
                finished.push_back(std::move(active[best]));
                active.erase(active.begin() + static_cast<std::ptrdiff_t>(best));
            }
            locate_fold(p_grid[i - 1], prev.size(), power, cur.size());
        } else {
            throw BranchAmbiguity("root count jumped by more than two between adjacent powers; refine the grid");
        }

        // two new roots both within tolerance of one predecessor
        for (double old : prev) {
            int close = 0;
            for (double d : cur)
                if (std::abs(d - old) < opt.match_tolerance) ++close;
            if (close > 1) throw BranchAmbiguity("two roots match the same predecessor; refine the grid");
        }

        record(cur, power);
        prev = std::move(cur);
    }
    for (auto& b : active) finished.push_back(std::move(b));

    for (auto& b : finished) {
        const BranchLabel label = detail::label_for(b);
        for (auto& pt : b.points) {
            pt.branch = label;
            pt.stable = label != BranchLabel::middle;
        }
    }
    std::stable_sort(finished.begin(), finished.end(), [](const auto& a, const auto& b) {
        return detail::label_for(a) < detail::label_for(b);
    });
    for (const auto& b : finished) curve.points.insert(curve.points.end(), b.points.begin(), b.points.end());
    std::sort(curve.fold_points.begin(), curve.fold_points.end(),
              [](const FoldPoint& a, const FoldPoint& b) { return a.power < b.power; });
    return curve;
}

/// True if some power on the grid gives three or more roots.
inline bool has_multi_root_window(double omega, const ModelParams& p, std::span<const double> p_grid,
                                  const RootScanOptions& opt = {}) {
    return std::any_of(p_grid.begin(), p_grid.end(), [&](double power) {
        return single_qubit_nonlinear_roots(omega, p, power, opt).size() >= 3;
    });
}

/// rho = g / sqrt((omega - 1)^2 + Gamma^2), the bistability control ratio.
inline double bistability_ratio(double omega, const ModelParams& p) {
    const double detuning = omega - 1.0;
    return p.coupling_g / std::sqrt(detuning * detuning + p.gamma_q * p.gamma_q);
}

/// Smallest rho (varying g at fixed omega and Gamma) that opens a
/// multi-root window on the grid, bracketed in [rho_lo, rho_hi].
inline double bistability_threshold(double omega, ModelParams p, std::span<const double> p_grid,
                                    double rho_lo = 1.0, double rho_hi = 40.0, int steps = 40) {
    const double detuning = omega - 1.0;
    const double scale = std::sqrt(detuning * detuning + p.gamma_q * p.gamma_q);
    auto opens = [&](double rho) {
        p.coupling_g = rho * scale;
        return has_multi_root_window(omega, p, p_grid);
    };
    if (opens(rho_lo)) return rho_lo;
    if (!opens(rho_hi)) return std::numeric_limits<double>::infinity();
    for (int i = 0; i < steps; ++i) {
        const double mid = 0.5 * (rho_lo + rho_hi);
        (opens(mid) ? rho_hi : rho_lo) = mid;
    }
    return rho_hi;
}

}  // namespace qls
