#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "strichartz/functionals.hpp"
#include "strichartz/grid_field.hpp"
#include "strichartz/propagators.hpp"

using namespace strichartz;

namespace {

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

double relative_diff(const GridFunction& a, const GridFunction& b) {
    return max_abs_diff(a, b) / lp_norm(b, Exponent::infinity());
}

// Analytic Laplacian of the 1-D real Gaussian density of variance s.
double gaussian_second_derivative(double x, double s) {
    const double g = std::exp(-x * x / (2.0 * s)) / std::sqrt(2.0 * std::numbers::pi * s);
    return g * (x * x / (s * s) - 1.0 / s);
}

GridFunction smooth_random(const Grid& g, std::mt19937& rng) {
    // Random combination of shifted Gaussians: smooth and well inside the box.
    std::uniform_real_distribution<double> shift(-2.0, 2.0), amp(-1.0, 1.0), var(0.5, 2.0);
    auto f = GridFunction::zero(g);
    for (int j = 0; j < 4; ++j) {
        const double c = shift(rng), s = var(rng);
        const Complex a(amp(rng), amp(rng));
        f = f + a * GridFunction::from_coordinates(g, [&](std::span<const double> x) -> Complex {
                double r2 = 0.0;
                for (double xi : x) r2 += (xi - c) * (xi - c);
                return std::exp(-r2 / (2.0 * s));
            });
    }
    return f;
}

}  // namespace

TEST(Propagate, HeatGaussianExactness) {
    const auto g = make_grid(1, 40.0, 1024);
    const auto u = propagate(gaussian_sample(g, {1.0, 1}), PropagatorKind::heat(), 3.0);
    EXPECT_LT(max_abs_diff(u, gaussian_sample(g, {4.0, 1})), 1e-8);
}

TEST(Propagate, SchrodingerGaussianIsComplexVarianceGaussian) {
    const auto g = make_grid(1, 40.0, 1024);
    const auto f = gaussian_sample(g, {1.0, 1});
    const auto u = propagate(f, PropagatorKind::schrodinger(), 5.0);
    EXPECT_LT(max_abs_diff(u, gaussian_sample(g, {{1.0, 5.0}, 1})), 1e-10);
    EXPECT_NEAR(lp_norm(u, 2.0) / lp_norm(f, 2.0), 1.0, 1e-10);
}

TEST(Propagate, ZeroTimeIsIdentity) {
    const auto g = make_grid(1, 10.0, 64);
    const auto f = gaussian_sample(g, {1.0, 1});
    for (const auto& k : {PropagatorKind::heat(), PropagatorKind::schrodinger(), PropagatorKind::fractional(0.7)}) {
        const auto u = propagate(f, k, 0.0);
        EXPECT_EQ(u.values().size(), f.values().size());
        EXPECT_TRUE(std::equal(u.values().begin(), u.values().end(), f.values().begin()));
    }
}

TEST(Propagate, RejectsBadArguments) {
    const auto f = gaussian_sample(make_grid(1, 10.0, 64), {1.0, 1});
    EXPECT_THROW(propagate(f, PropagatorKind::heat(), -1.0), std::invalid_argument);
    EXPECT_THROW(propagate(f, PropagatorKind::fractional(1.0), -1.0), std::invalid_argument);
    EXPECT_NO_THROW(propagate(f, PropagatorKind::schrodinger(), -1.0));
    EXPECT_THROW(PropagatorKind::fractional(0.0), std::invalid_argument);
    EXPECT_THROW(PropagatorKind::fractional(2.5), std::invalid_argument);
    EXPECT_THROW(laplacian_propagate(f, 2.0, 0.0), std::invalid_argument);
}

TEST(PropagateGaussianExact, VarianceShifts) {
    EXPECT_EQ(propagate_gaussian_exact({1.0, 1}, PropagatorKind::heat(), 3.0).sigma2, Complex(4.0, 0.0));
    EXPECT_EQ(propagate_gaussian_exact({1.0, 1}, PropagatorKind::schrodinger(), 7.0).sigma2, Complex(1.0, 7.0));
    EXPECT_EQ(propagate_gaussian_exact({1.0, 1}, PropagatorKind::heat(), 0.0).sigma2, Complex(1.0, 0.0));
    EXPECT_EQ(propagate_gaussian_exact({1.0, 1}, PropagatorKind::fractional(2.0), 3.0).sigma2, Complex(7.0, 0.0));
    EXPECT_THROW(propagate_gaussian_exact({1.0, 1}, PropagatorKind::fractional(1.0), 3.0), std::invalid_argument);
}

TEST(Propagate, FractionalTwoIsHeatAtDoubleTime) {
    const auto g = make_grid(2, 20.0, 128);
    const auto f = gaussian_sample(g, {1.0, 2});
    for (double t : {0.5, 3.0, 10.0}) {
        const auto a = propagate(f, PropagatorKind::fractional(2.0), t);
        const auto b = propagate(f, PropagatorKind::heat(), 2.0 * t);
        EXPECT_LT(relative_diff(a, b), 1e-10);
    }
}

TEST(LaplacianPropagate, MatchesAnalyticSecondDerivative) {
    const auto g = make_grid(1, 40.0, 1024);
    const auto f = gaussian_sample(g, {1.0, 1});
    for (double t : {0.5, 4.0, 16.0}) {
        const auto u = laplacian_propagate(f, 2.0, t);
        const auto exact = GridFunction::from_coordinates(
            g, [&](std::span<const double> x) -> Complex { return gaussian_second_derivative(x[0], 1.0 + 2.0 * t); });
        EXPECT_LT(max_abs_diff(u, exact), 1e-8) << t;
    }
}

TEST(LaplacianPropagate, Linearity) {
    std::mt19937 rng(8);
    const auto g = make_grid(1, 20.0, 256);
    const auto f = smooth_random(g, rng);
    const auto k = smooth_random(g, rng);
    const Complex a(0.3, -1.2), b(-2.0, 0.5);
    for (double alpha : {0.5, 1.0, 2.0}) {
        const auto lhs = laplacian_propagate(a * f + b * k, alpha, 1.0);
        const auto rhs = a * laplacian_propagate(f, alpha, 1.0) + b * laplacian_propagate(k, alpha, 1.0);
        EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12);
    }
}

// The fitted slope of |Delta S_2(t) g_1|_inf: Delta g_s peaks at g_s(0)/s ~ s^{-3/2}.
TEST(LaplacianPropagate, DerivativeDecaySlopeIsMinusThreeHalves) {
    const auto g = make_grid(1, 640.0, 16384);
    const auto f = gaussian_sample(g, {1.0, 1});
    const auto ts = geometric_times(16.0, 1024.0, 13);
    std::vector<double> ys;
    for (double t : ts) ys.push_back(lp_norm(laplacian_propagate(f, 2.0, t), Exponent::infinity()));
    const auto fit = fit_rate(ts, ys, false);
    std::vector<double> exact;
    for (double t : ts) exact.push_back(std::abs(gaussian_second_derivative(0.0, 1.0 + 2.0 * t)));
    const auto fit_exact = fit_rate(ts, exact, false);
    EXPECT_NEAR(fit.slope, fit_exact.slope, 1e-8);
    EXPECT_NEAR(fit.slope, -1.5, 0.02);
}

// Property: semigroup law for every kind.
TEST(Properties, SemigroupLaw) {
    std::mt19937 rng(21);
    const auto g = make_grid(1, 20.0, 256);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (const auto& k : {PropagatorKind::heat(), PropagatorKind::schrodinger(), PropagatorKind::fractional(0.6),
                          PropagatorKind::fractional(1.5)}) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto f = smooth_random(g, rng);
            const double s = u(rng), t = u(rng);
            EXPECT_LT(relative_diff(propagate(propagate(f, k, s), k, t), propagate(f, k, s + t)), 1e-10) << k.describe();
        }
    }
}

TEST(Properties, SchrodingerUnitarityAndReversal) {
    std::mt19937 rng(22);
    const auto g = make_grid(2, 20.0, 64);
    const auto k = PropagatorKind::schrodinger();
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = smooth_random(g, rng);
        for (double t : {1.0, 10.0, 100.0}) {
            const auto u = propagate(f, k, t);
            EXPECT_NEAR(lp_norm(u, 2.0) / lp_norm(f, 2.0), 1.0, 1e-10);
            EXPECT_LT(relative_diff(propagate(u, k, -t), f), 1e-10);
        }
    }
}

// Nonnegative data are smooth bumps: the band-limited discrete heat kernel has
// tiny negative side lobes, so rough data would dip below zero at round-off scale.
TEST(Properties, HeatPositivityAndContraction) {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> shift(-3.0, 3.0), amp(0.0, 2.0), var(0.3, 2.0);
    const auto g = make_grid(1, 20.0, 256);
    for (int trial = 0; trial < 5; ++trial) {
        auto f = GridFunction::zero(g);
        for (int j = 0; j < 5; ++j) {
            const double c = shift(rng), s = var(rng), a = amp(rng);
            f = f + Complex(a) * GridFunction::from_coordinates(g, [&](std::span<const double> x) -> Complex {
                    return std::exp(-(x[0] - c) * (x[0] - c) / (2.0 * s));
                });
        }
        std::vector<double> prev(4, kInf);
        for (double t : {0.0, 0.1, 0.5, 2.0, 8.0}) {
            const auto w = propagate(f, PropagatorKind::heat(), t);
            for (const auto& x : w.values()) EXPECT_GE(x.real(), -1e-12);
            std::size_t i = 0;
            for (Exponent p : {Exponent(1.0), Exponent(2.0), Exponent(5.0), Exponent::infinity()}) {
                const double n = lp_norm(w, p);
                EXPECT_LE(n, prev[i] * (1.0 + 1e-12));
                prev[i++] = n;
            }
        }
    }
}

TEST(Properties, MassConservation) {
    std::mt19937 rng(24);
    const auto g = make_grid(2, 10.0, 64);
    const auto f = smooth_random(g, rng);
    Complex m0 = 0.0;
    for (const auto& x : f.values()) m0 += x * g.cell_volume();
    for (const auto& k : {PropagatorKind::heat(), PropagatorKind::fractional(0.8), PropagatorKind::fractional(2.0)}) {
        for (double t : {0.5, 5.0, 50.0}) {
            const auto u = propagate(f, k, t);
            Complex m = 0.0;
            for (const auto& x : u.values()) m += x * g.cell_volume();
            EXPECT_LT(std::abs(m - m0), 1e-12 * std::max(1.0, std::abs(m0)));
        }
    }
}

TEST(DecaySlopes, HeatLebesgue) {
    const auto g = make_grid(1, 640.0, 16384);
    const auto f = gaussian_sample(g, {1.0, 1});
    const auto ts = geometric_times(16.0, 1024.0, 13);
    for (double r : {2.0, 3.0, 8.0}) {
        std::vector<double> ys;
        for (double t : ts) ys.push_back(lp_norm(propagate(f, PropagatorKind::heat(), t), r));
        const double predicted = 0.5 * (1.0 / r - 1.0);
        EXPECT_NEAR(fit_rate(ts, ys, false).slope / predicted, 1.0, 0.02) << r;
    }
}

TEST(DecaySlopes, SchrodingerSup) {
    const auto g = make_grid(1, 8192.0, 65536);
    const auto f = gaussian_sample(g, {1.0, 1});
    const auto ts = geometric_times(16.0, 1024.0, 13);
    std::vector<double> ys;
    for (double t : ts) ys.push_back(lp_norm(propagate(f, PropagatorKind::schrodinger(), t), Exponent::infinity()));
    EXPECT_NEAR(fit_rate(ts, ys, false).slope, -0.5, 0.01);
}

TEST(DecaySlopes, FractionalSup) {
    const auto g = make_grid(1, 32768.0, 1 << 18);
    const auto f = gaussian_sample(g, {1.0, 1});
    const auto ts = geometric_times(16.0, 1024.0, 7);
    std::vector<double> ys;
    for (double t : ts) ys.push_back(lp_norm(propagate(f, PropagatorKind::fractional(1.0), t), Exponent::infinity()));
    EXPECT_NEAR(fit_rate(ts, ys, false).slope, -1.0, 0.03);
}

TEST(MaxSafeTime, GaussianAndHeavyTailBounds) {
    const auto g = make_grid(1, 40.0, 1024);
    const double z = detail::tail_radius_multiple(1);
    const double max_var = (40.0 / z) * (40.0 / z);
    EXPECT_NEAR(max_safe_time(g, PropagatorKind::heat(), 1.0), max_var - 1.0, 1e-9);
    EXPECT_NEAR(max_safe_time(g, PropagatorKind::fractional(2.0), 1.0), 0.5 * (max_var - 1.0), 1e-9);
    EXPECT_NEAR(max_safe_time(g, PropagatorKind::schrodinger(), 1.0), std::sqrt(max_var - 1.0), 1e-9);
    EXPECT_NEAR(max_safe_time(g, PropagatorKind::fractional(1.0)), 40.0 * std::pow(1e-3, 0.5), 1e-12);
    EXPECT_LT(max_safe_time(g, PropagatorKind::heat(), 1.0, 41.0), 0.0);

    // At the bound the evolved heat Gaussian keeps its tail mass under the guard.
    const double t = max_safe_time(g, PropagatorKind::heat(), 1.0);
    EXPECT_LE(detail::truncated_mass_fraction(1.0 + t, 40.0, 1), 1.0001e-10);
}
