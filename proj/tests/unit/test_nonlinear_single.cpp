#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "qls/nonlinear_single.hpp"

using namespace qls;

namespace {

ModelParams qubit(double gamma, double g, double eta = 1.0) {
    ModelParams p;
    p.gamma_q = gamma;
    p.coupling_g = g;
    p.eta = eta;
    return p;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return out;
}

// Oracle: with u = eta^2 P D the relation is explicit in u,
//   D(u) = 1 / (1 + (g/4) [(4 Gamma + g) s + 4 Gamma u] / (s + u)^2),  P(u) = u / (eta^2 D(u)),
// so folds are the extrema of P(u), found by bisection on dP/du.
struct UParam {
    double omega;
    ModelParams p;

    double d(double u) const {
        const double s = (omega - 1.0) * (omega - 1.0) + p.gamma_q * p.gamma_q;
        const double g = p.coupling_g;
        return 1.0 / (1.0 + 0.25 * g * ((4.0 * p.gamma_q + g) * s + 4.0 * p.gamma_q * u) / ((s + u) * (s + u)));
    }
    double power(double u) const { return u / (p.eta * p.eta * d(u)); }
    double slope(double u) const { return (power(u * (1 + 1e-7)) - power(u * (1 - 1e-7))) / (2e-7 * u); }

    std::vector<FoldPoint> folds() const {
        std::vector<FoldPoint> out;
        const auto us = log_grid(1e-10, 10.0, 20000);
        for (std::size_t i = 0; i + 1 < us.size(); ++i) {
            double lo = us[i], hi = us[i + 1];
            const double s_lo = slope(lo);
            if ((s_lo > 0) == (slope(hi) > 0)) continue;
            for (int it = 0; it < 100; ++it) {
                const double mid = std::sqrt(lo * hi);
                ((slope(mid) > 0) == (s_lo > 0) ? lo : hi) = mid;
            }
            out.push_back({power(lo), d(lo)});
        }
        return out;
    }
};

}  // namespace

TEST(SingleQubitNonlinear, LowPowerLimitIsLinear) {
    const ModelParams p = qubit(1e-2, 0.06);
    const auto roots = single_qubit_nonlinear_roots(1.0, p, 0.0);
    ASSERT_EQ(roots.size(), 1u);
    EXPECT_NEAR(roots[0], 0.0625, 1e-12);
}

TEST(SingleQubitNonlinear, RejectsLosslessQubit) {
    EXPECT_THROW(single_qubit_nonlinear_roots(1.0, qubit(0.0, 0.06), 1e-3), InvalidArgument);
    EXPECT_THROW(single_qubit_nonlinear_roots(1.0, qubit(1e-2, 0.06), -1.0), InvalidArgument);
}

TEST(SingleQubitNonlinear, ThreeRootWindowForStrongCoupling) {
    const ModelParams p = qubit(1e-2, 0.346);
    const auto grid = log_grid(1e-6, 1.0, 1000);
    std::size_t three = 0;
    for (double power : grid) {
        const auto roots = single_qubit_nonlinear_roots(1.0, p, power);
        ASSERT_TRUE(roots.size() == 1 || roots.size() == 3);
        three += roots.size() == 3;
    }
    EXPECT_GT(three, 10u);
}

TEST(SingleQubitNonlinear, MonotoneForModerateCoupling) {
    const auto grid = log_grid(1e-6, 1.0, 1000);
    for (double ratio : {9.0, 16.0}) {
        const ModelParams p = qubit(1e-2, ratio * 1e-2);
        EXPECT_FALSE(has_multi_root_window(1.0, p, grid)) << "g/Gamma " << ratio;
        const BranchCurve c = trace_d_vs_power(1.0, p, grid);
        EXPECT_FALSE(c.bistable());
        for (std::size_t i = 1; i < c.points.size(); ++i) EXPECT_GE(c.points[i].d, c.points[i - 1].d);
    }
}

TEST(SingleQubitNonlinear, NoWindowBelowUnitRatio) {
    const auto grid = log_grid(1e-8, 10.0, 1000);
    for (double detuning : {0.0, 0.01, 0.05, -0.03}) {
        const ModelParams base = qubit(1e-2, 1.0);
        const double scale = std::sqrt(detuning * detuning + base.gamma_q * base.gamma_q);
        for (double rho : {0.2, 0.6, 1.0}) {
            const ModelParams p = qubit(1e-2, rho * scale);
            ASSERT_NEAR(bistability_ratio(1.0 + detuning, p), rho, 1e-12);
            EXPECT_FALSE(has_multi_root_window(1.0 + detuning, p, grid));
        }
    }
}

TEST(SingleQubitNonlinear, FoldsMatchExplicitParameterization) {
    const ModelParams p = qubit(1e-2, 0.346);
    const BranchCurve c = trace_d_vs_power(1.0, p, log_grid(1e-4, 1e-1, 600));
    const auto oracle = UParam{1.0, p}.folds();
    ASSERT_EQ(oracle.size(), 2u);
    ASSERT_EQ(c.fold_points.size(), 2u);
    // the oracle orders by u, i.e. upper fold (larger P) first
    EXPECT_NEAR(c.fold_points[0].power / oracle[1].power, 1.0, 1e-6);
    EXPECT_NEAR(c.fold_points[1].power / oracle[0].power, 1.0, 1e-6);
    EXPECT_NEAR(c.fold_points[0].d, oracle[1].d, 1e-3);
    EXPECT_NEAR(c.fold_points[1].d, oracle[0].d, 1e-3);
}

TEST(SingleQubitNonlinear, BranchLabels) {
    const ModelParams p = qubit(1e-2, 0.346);
    const BranchCurve c = trace_d_vs_power(1.0, p, log_grid(1e-4, 1e-1, 600));
    int lower = 0, middle = 0, upper = 0;
    for (const auto& pt : c.points) {
        lower += pt.branch == BranchLabel::lower;
        middle += pt.branch == BranchLabel::middle;
        upper += pt.branch == BranchLabel::upper;
        EXPECT_EQ(pt.stable, pt.branch != BranchLabel::middle);
    }
    EXPECT_GT(lower, 0);
    EXPECT_GT(middle, 0);
    EXPECT_GT(upper, 0);
    // the lower branch starts at low power, the upper one reaches high power
    double lower_min_p = 1e9, upper_max_p = 0;
    for (const auto& pt : c.points) {
        if (pt.branch == BranchLabel::lower) lower_min_p = std::min(lower_min_p, pt.power);
        if (pt.branch == BranchLabel::upper) upper_max_p = std::max(upper_max_p, pt.power);
    }
    EXPECT_EQ(lower_min_p, 1e-4);
    EXPECT_NEAR(upper_max_p, 1e-1, 1e-12);
}

TEST(SingleQubitNonlinear, DetuningShrinksWindow) {
    const auto grid = log_grid(1e-6, 1.0, 2000);
    const ModelParams p = qubit(1e-2, 0.346);
    auto window = [&](double omega) {
        std::size_t n = 0;
        for (double power : grid) n += single_qubit_nonlinear_roots(omega, p, power).size() == 3;
        return n;
    };
    EXPECT_LT(window(1.05), window(1.0));
}

TEST(SingleQubitNonlinear, ThresholdRatio) {
    // oracle threshold: smallest g/Gamma for which P(u) turns non-monotone.
    // On resonance dP/dx ~ (1 + x)^3 + (r/4)[(4 + r) - (r - 4) x] with
    // x = u / Gamma^2, r = g / Gamma, whose minimum first touches zero at
    // r = 16, x = 3.
    ModelParams p = qubit(1e-2, 0.0);
    double lo = 1.0, hi = 40.0;
    for (int i = 0; i < 50; ++i) {
        const double mid = 0.5 * (lo + hi);
        p.coupling_g = mid * p.gamma_q;
        (UParam{1.0, p}.folds().empty() ? lo : hi) = mid;
    }
    EXPECT_NEAR(hi, 16.0, 1e-6);

    const double rho_star = bistability_threshold(1.0, qubit(1e-2, 0.1), log_grid(1e-4, 1e-1, 4000));
    EXPECT_GE(rho_star, hi - 1e-6);
    EXPECT_NEAR(rho_star, hi, 0.1);
    EXPECT_TRUE(has_multi_root_window(1.0, qubit(1e-2, 0.2), log_grid(1e-6, 1.0, 1000)));
}

TEST(SingleQubitNonlinearProperty, RootsSolveRelationAndCountIsOdd) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double gamma = std::pow(10.0, -3.0 + 2.0 * unit(rng));
        const ModelParams p = qubit(gamma, gamma * std::pow(10.0, 2.0 * unit(rng)), 0.5 + unit(rng));
        const double omega = 1.0 + (unit(rng) - 0.5) * 20.0 * gamma;
        const double power = std::pow(10.0, -8.0 + 8.0 * unit(rng));
        const auto roots = single_qubit_nonlinear_roots(omega, p, power);
        ASSERT_EQ(roots.size() % 2, 1u) << "omega " << omega << " power " << power;
        for (double d : roots) {
            ASSERT_GT(d, 0.0);
            ASSERT_LE(d, 1.0);
            ASSERT_LT(std::abs(single_qubit_nonlinear_residual(d, omega, p, power)), 1e-10);
        }
    }
}

TEST(TraceDvsPower, RejectsBadGrids) {
    const ModelParams p = qubit(1e-2, 0.06);
    const std::vector<double> one{1e-3};
    const std::vector<double> descending{1e-2, 1e-3};
    EXPECT_THROW(trace_d_vs_power(1.0, p, one), InvalidArgument);
    EXPECT_THROW(trace_d_vs_power(1.0, p, descending), InvalidArgument);
}
