#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "strichartz/witness.hpp"

using namespace strichartz;

namespace {

const std::vector<double> kQuarterTimes{4, 16, 64, 256, 1024};

// Independent closed form for the parabolic witness with X = L_1 and a constant
// weight nu = level on (a, b): sup_r |g_{1+t}|_r / level divided by
// phi(G(nu), t^{d/2}), times phi(L_1, t^{d/2}) = t^{d/2}.
double sp_closed_form(double a, double b, double level, double t) {
    double sup = 0.0;
    double phi = 0.0;
    const double delta = std::sqrt(t);
    // Closed interval: the open-interval supremum is the max over its closure.
    for (int k = 0; k <= 20000; ++k) {
        const double r = a + (b - a) * k / 20000.0;
        // |g_s|_r in 1-D: (2 pi s)^{-(1 - 1/r)/2} r^{-1/(2r)}.
        const double s = 1.0 + t;
        const double m = std::pow(2.0 * std::numbers::pi * s, -0.5 * (1.0 - 1.0 / r)) * std::pow(r, -0.5 / r);
        sup = std::max(sup, m / level);
        phi = std::max(phi, std::pow(delta, 1.0 / r) / level);
    }
    return sup / phi * delta;
}

}  // namespace

TEST(SpWitness, ConstantWeightMatchesIndependentClosedForm) {
    const auto g = make_grid(1, 256.0, 4096);
    const auto nu = PsiSpec::constant(2.0, 4.0, 1.0);
    const auto report = sp_witness(nu, kQuarterTimes, g);
    ASSERT_EQ(report.rows.size(), kQuarterTimes.size());
    for (const auto& row : report.rows) {
        EXPECT_NEAR(row.closed_form_value / sp_closed_form(2.0, 4.0, 1.0, row.t), 1.0, 1e-6) << row.t;
        EXPECT_LT(row.rel_gap, 1e-6) << row.t;
    }
    EXPECT_GT(report.min_value, 0.01);
    EXPECT_LT(report.ratio, 3.0);
    EXPECT_TRUE(report.liminf_positive());
}

TEST(SpWitness, ZetaWeight) {
    const auto g = make_grid(1, 256.0, 4096);
    const auto report = sp_witness(PsiSpec::zeta(2, 5, 1, 1), kQuarterTimes, g);
    EXPECT_LT(report.max_rel_gap, 1e-6);
    EXPECT_LT(report.ratio, 3.0);
    EXPECT_TRUE(report.liminf_positive());
}

TEST(SpWitness, FractionalTwoInverseAssertion) {
    const auto g = make_grid(1, 512.0, 8192);
    const auto report = sp_witness(PsiSpec::constant(2.0, 4.0, 1.0), kQuarterTimes, g, PropagatorKind::fractional(2.0));
    EXPECT_LT(report.max_rel_gap, 1e-6);
    EXPECT_GT(report.min_value, 0.0);
    EXPECT_LT(report.ratio, 3.0);
}

TEST(SpWitness, Rejections) {
    const auto g = make_grid(1, 256.0, 4096);
    const auto nu = PsiSpec::constant(2.0, 4.0, 1.0);
    EXPECT_THROW(sp_witness(nu, std::vector<double>{2.0, 4.0}, g), std::invalid_argument);
    EXPECT_THROW(sp_witness(nu, std::vector<double>{4.0, 3.0}, g), std::invalid_argument);
    EXPECT_THROW(sp_witness(nu, std::vector<double>{4.0, 1e5}, g), std::invalid_argument);
    EXPECT_THROW(sp_witness(PsiSpec::constant(1.0, 4.0, 1.0), kQuarterTimes, g), std::invalid_argument);
    EXPECT_THROW(sp_witness(PsiSpec::degenerate(2.0), kQuarterTimes, g), std::invalid_argument);
    EXPECT_THROW(sp_witness(nu, kQuarterTimes, g, PropagatorKind::fractional(1.0)), std::invalid_argument);
}

TEST(SpWitness, HeatMomentsMatchClosedForm) {
    const auto g = make_grid(1, 256.0, 4096);
    const auto f = gaussian_sample(g, {1.0, 1});
    for (double t : kQuarterTimes) {
        const auto u = propagate(f, PropagatorKind::heat(), t);
        for (Exponent r : {Exponent(1.5), Exponent(2.0), Exponent(3.0), Exponent(7.0), Exponent::infinity()}) {
            EXPECT_NEAR(lp_norm(u, r) / gaussian_lp_exact(1.0 + t, 1, r), 1.0, 1e-8);
        }
    }
}

TEST(SrWitness, ValueAtHundred) {
    const auto g = make_grid(1, 8192.0, 65536);
    const auto report = sr_witness(std::vector<double>{50.0, 100.0, 200.0, 400.0}, g);
    const auto& row = report.rows[1];
    const double closed = std::pow(2.0 * std::numbers::pi, -0.5) * std::pow(1.0 + 1e4, -0.25) * std::pow(100.0, 0.5);
    EXPECT_NEAR(row.closed_form_value, closed, 1e-14);
    EXPECT_LT(row.rel_gap, 1e-6);
}

TEST(SrWitness, AsymptoticallyConstant) {
    const auto g = make_grid(1, 8192.0, 65536);
    const auto report = sr_witness(geometric_times(16.0, 1024.0, 13), g);
    EXPECT_NEAR(report.fit.slope, 0.0, 0.02);
    EXPECT_NEAR(report.rows.back().grid_value / (1.0 / std::sqrt(2.0 * std::numbers::pi)), 1.0, 0.02);
    EXPECT_LT(report.max_rel_gap, 1e-6);
    EXPECT_LT(report.ratio, 3.0);
    EXPECT_TRUE(report.liminf_positive());
}

TEST(SrWitness, ProofNormalizationGrows) {
    // phi(L_1, t^{1/2}) / phi(L_1, t^{-1}) = t^{3/2}: the two readings differ by that factor.
    const auto g = make_grid(1, 8192.0, 65536);
    const std::vector<double> ts{16.0, 64.0, 256.0, 1024.0};
    const auto def = sr_witness(ts, g, SrNormalization::definition);
    const auto proof = sr_witness(ts, g, SrNormalization::proof);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        EXPECT_NEAR(proof.rows[k].grid_value / def.rows[k].grid_value, std::pow(ts[k], -0.5), 1e-12);
    }
    EXPECT_NEAR(proof.fit.slope, -0.5, 0.02);
}

TEST(MomentLaw, SchrodingerSlopes) {
    const auto g = make_grid(1, 8192.0, 65536);
    const std::vector<Exponent> rs{Exponent::infinity(), 2.0, 4.0};
    const auto rows = gaussian_moment_law_check(g, rs, geometric_times(16.0, 1024.0, 13));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_DOUBLE_EQ(rows[0].predicted_slope, -0.5);
    EXPECT_DOUBLE_EQ(rows[1].predicted_slope, 0.0);
    EXPECT_DOUBLE_EQ(rows[2].predicted_slope, -0.25);
    EXPECT_LT(rows[0].rel_error, 0.02);
    EXPECT_LT(rows[1].abs_error, 1e-10);
    EXPECT_LT(rows[2].rel_error, 0.02);
    for (const auto& row : rows) EXPECT_NEAR(row.fitted_slope, row.closed_form_slope, 1e-8);
}

TEST(MomentLaw, L1NormGrowsInsteadOfStayingBounded) {
    // |g_{1+it}|_1 = (1 + t^2)^{1/4}: growth like t^{1/2}, not a constant.
    for (double t : {10.0, 100.0, 1000.0}) {
        EXPECT_NEAR(gaussian_lp_exact(Complex(1.0, t), 1, 1.0), std::pow(1.0 + t * t, 0.25), 1e-10 * std::pow(t, 0.5));
    }
    EXPECT_THROW(gaussian_moment_law_check(make_grid(1, 8192.0, 65536), std::vector<Exponent>{1.0},
                                           geometric_times(16.0, 1024.0, 5)),
                 std::invalid_argument);
}
