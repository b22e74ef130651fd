#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "qls/types.hpp"

namespace qls {

struct RootScanOptions {
    int points = 2000;          // log-spaced samples on [d_floor, 1]
    double d_floor = 1e-12;
    double residual_tol = 1e-12;
};

namespace detail {

template <class F>
double bisect(F& f, double lo, double hi, double f_lo, double tol) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = f(mid);
        if (f_mid == 0.0) return mid;
        if ((f_mid < 0) == (f_lo < 0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if (std::abs(f_mid) < tol && hi - lo < 1e-15 * hi) break;
    }
    const double f_hi = f(hi);
    return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

}  // namespace detail

/// All roots of f on (0, 1]: a dense log-spaced scan for sign changes, then
/// bisection. Pairs of roots closer than the scan spacing show up as a local
/// minimum of |f| without a sign change; those are split at the extremum of
/// f located by Brent's method. Roots are returned ascending.
template <class F>
std::vector<double> scan_unit_interval_roots(F&& f, const RootScanOptions& opt = {}) {
    const int n = std::max(opt.points, 3);
    std::vector<double> x(static_cast<std::size_t>(n)), fx(x.size());
    const double log_lo = std::log(opt.d_floor);
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] =
            i + 1 == n ? 1.0 : std::exp(log_lo + (0.0 - log_lo) * i / (n - 1));
        fx[static_cast<std::size_t>(i)] = f(x[static_cast<std::size_t>(i)]);
    }

    std::vector<double> roots;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (fx[i] == 0.0) roots.push_back(x[i]);
        if (i + 1 < x.size() && fx[i] != 0.0 && fx[i + 1] != 0.0 && (fx[i] < 0) != (fx[i + 1] < 0))
            roots.push_back(detail::bisect(f, x[i], x[i + 1], fx[i], opt.residual_tol));
    }

    // hidden pairs between samples
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double a = fx[i - 1], b = fx[i], c = fx[i + 1];
        if (a == 0.0 || b == 0.0 || c == 0.0) continue;
        if ((a < 0) != (b < 0) || (b < 0) != (c < 0)) continue;
        if (!(std::abs(b) < std::abs(a) && std::abs(b) <= std::abs(c))) continue;
        const double sign = b < 0 ? -1.0 : 1.0;
        auto objective = [&](double t) { return sign * f(t); };
        const auto [x_min, f_min] = boost::math::tools::brent_find_minima(objective, x[i - 1], x[i + 1], 52);
        if (f_min < 0) {
            const double f_ext = f(x_min);
            roots.push_back(detail::bisect(f, x[i - 1], x_min, a, opt.residual_tol));
            roots.push_back(detail::bisect(f, x_min, x[i + 1], f_ext, opt.residual_tol));
        }
    }

    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double u, double v) { return std::abs(u - v) <= 1e-14 * std::max(u, v); }),
                roots.end());
    return roots;
}

}  // namespace qls
