#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "strichartz/functionals.hpp"
#include "strichartz/grid_field.hpp"
#include "strichartz/propagators.hpp"
#include "strichartz/spaces.hpp"

namespace strichartz {

// Gaussian lower-bound witnesses: the functional at f = g_1, once through the grid
// pipeline and once through the exact Gaussian channel. The closed form is the
// ground truth; the grid run validates the generic pipeline.

struct WitnessRow {
    double t;
    double grid_value;
    double closed_form_value;
    double rel_gap;
};

struct WitnessReport {
    std::string functional;
    std::vector<WitnessRow> rows;
    double min_value = 0.0;
    double max_value = 0.0;
    double ratio = 0.0;
    double max_rel_gap = 0.0;
    // Minimum over the largest decade of t, on both channels.
    double tail_min_grid = 0.0;
    double tail_min_closed_form = 0.0;
    RateFit fit;

    // liminf > 0 at desk scale: the grid tail minimum is positive and reproduces the
    // closed-form tail minimum up to the gap tolerance.
    bool liminf_positive(double gap_tol = 1e-6) const {
        return tail_min_closed_form > 0.0 && tail_min_grid >= (1.0 - gap_tol) * tail_min_closed_form;
    }
};

namespace detail {

inline void check_witness_times(std::span<const double> t_grid, double safe) {
    if (t_grid.empty()) throw std::invalid_argument("witness: empty time grid");
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        if (!(t_grid[k] > 2.0)) throw std::invalid_argument("witness: times must exceed 2");
        if (k > 0 && !(t_grid[k] > t_grid[k - 1])) throw std::invalid_argument("witness: times must increase strictly");
    }
    if (t_grid.back() > safe) {
        throw std::invalid_argument("witness: t = " + std::to_string(t_grid.back()) +
                                    " exceeds the wrap-around-safe bound " + std::to_string(safe) + " of this grid");
    }
}

inline WitnessReport summarize(std::string functional, std::vector<WitnessRow> rows) {
    WitnessReport r;
    r.functional = std::move(functional);
    r.rows = std::move(rows);
    r.min_value = kInf;
    r.max_value = -kInf;
    r.tail_min_grid = kInf;
    r.tail_min_closed_form = kInf;
    const double tail_start = r.rows.back().t / 10.0;
    std::vector<double> t, y;
    for (const auto& row : r.rows) {
        r.min_value = std::min(r.min_value, row.grid_value);
        r.max_value = std::max(r.max_value, row.grid_value);
        r.max_rel_gap = std::max(r.max_rel_gap, row.rel_gap);
        if (row.t >= tail_start) {
            r.tail_min_grid = std::min(r.tail_min_grid, row.grid_value);
            r.tail_min_closed_form = std::min(r.tail_min_closed_form, row.closed_form_value);
        }
        t.push_back(row.t);
        y.push_back(row.grid_value);
    }
    r.ratio = r.max_value / r.min_value;
    if (r.rows.size() >= 4 && r.min_value > 0.0) r.fit = fit_rate(t, y, false);
    return r;
}

inline double rel_gap(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace detail

/**
 * W_SP(L_1, G(nu); t) at f = g_1 (unit variance) for t in `t_grid`.
 *
 * `kind` is heat, or fractional(2) for the inverse assertion of the fractional
 * estimate (S_2(t) = T_{2t}, fundamental-function scale t^{d/2}).
 */
inline WitnessReport sp_witness(const PsiSpec& nu, std::span<const double> t_grid, const Grid& grid,
                                const PropagatorKind& kind = PropagatorKind::heat()) {
    if (nu.is_degenerate() || !(nu.lower() > 1.0)) {
        throw std::invalid_argument("sp_witness: nu must be a weight on (a, b) with a > 1");
    }
    const bool gaussian_kind = kind.family() == PropagatorKind::Family::heat ||
                               (kind.family() == PropagatorKind::Family::fractional && kind.alpha() == 2.0);
    if (!gaussian_kind) throw std::invalid_argument("sp_witness: propagator must be heat or fractional(2)");
    detail::check_witness_times(t_grid, max_safe_time(grid, kind, 1.0));

    const int d = grid.dim();
    const GaussianSpec g1{1.0, d};
    const auto f = gaussian_sample(grid, g1);
    const auto l1 = PsiSpec::degenerate(1.0);
    const double scale = kind.time_scale_exponent();

    std::vector<WitnessRow> rows;
    for (double t : t_grid) {
        const double grid_value = w_sp(f, l1, nu, t, 1.0, 1.0, kind);
        const auto evolved = propagate_gaussian_exact(g1, kind, t);
        const double ny = gaussian_gls_norm(evolved.sigma2, d, nu);
        const double nx = gaussian_lp_exact(g1.sigma2, d, 1.0);
        const double closed = sp_value_from_norms(ny, nx, l1, nu, t, d, scale, 1.0, 1.0);
        rows.push_back({t, grid_value, closed, detail::rel_gap(grid_value, closed)});
    }
    return detail::summarize("SP", std::move(rows));
}

// V_SR(L_1, L_inf; t) at f = g_1; closed form uses |U_t g|_inf = (2 pi)^{-d/2} (1 + t^2)^{-d/4}.
inline WitnessReport sr_witness(std::span<const double> t_grid, const Grid& grid,
                                SrNormalization norm = SrNormalization::definition) {
    const auto kind = PropagatorKind::schrodinger();
    detail::check_witness_times(t_grid, max_safe_time(grid, kind, 1.0));
    const int d = grid.dim();
    const GaussianSpec g1{1.0, d};
    const auto f = gaussian_sample(grid, g1);
    const auto l1 = PsiSpec::degenerate(1.0);
    const auto linf = PsiSpec::degenerate(Exponent::infinity());

    std::vector<WitnessRow> rows;
    for (double t : t_grid) {
        const double grid_value = v_sr(f, l1, linf, t, 1.0, norm);
        const auto evolved = propagate_gaussian_exact(g1, kind, t);
        const double ny = gaussian_lp_exact(evolved.sigma2, d, Exponent::infinity());
        const double closed = sr_value_from_norms(ny, 1.0, l1, t, d, 1.0, norm);
        rows.push_back({t, grid_value, closed, detail::rel_gap(grid_value, closed)});
    }
    return detail::summarize("SR", std::move(rows));
}

struct MomentLawRow {
    Exponent r;
    double fitted_slope;
    double closed_form_slope;
    double predicted_slope;
    double abs_error;
    double rel_error;  // relative to |predicted|; equals abs_error when predicted is 0
};

// Fitted decay slope of |U_t g_1|_r against -d(1/2 - 1/r), for each r in (1, inf].
inline std::vector<MomentLawRow> gaussian_moment_law_check(const Grid& grid, std::span<const Exponent> r_list,
                                                           std::span<const double> t_grid) {
    const auto kind = PropagatorKind::schrodinger();
    if (t_grid.size() < 4) throw std::invalid_argument("moment law: need at least 4 times");
    detail::check_witness_times(t_grid, max_safe_time(grid, kind, 1.0));
    for (auto r : r_list) {
        require_valid_exponent(r, "moment law");
        if (!(Exponent(1.0) < r)) throw std::invalid_argument("moment law: r must lie in (1, inf]");
    }
    const int d = grid.dim();
    const GaussianSpec g1{1.0, d};
    const auto f = gaussian_sample(grid, g1);

    std::vector<std::vector<double>> grid_vals(r_list.size()), exact_vals(r_list.size());
    for (double t : t_grid) {
        const detail::ModulusTable table(propagate(f, kind, t));
        const auto s = propagate_gaussian_exact(g1, kind, t).sigma2;
        for (std::size_t i = 0; i < r_list.size(); ++i) {
            grid_vals[i].push_back(table.norm(r_list[i]));
            exact_vals[i].push_back(gaussian_lp_exact(s, d, r_list[i]));
        }
    }
    std::vector<MomentLawRow> out;
    for (std::size_t i = 0; i < r_list.size(); ++i) {
        const double predicted = -static_cast<double>(d) * (0.5 - r_list[i].reciprocal());
        const double fitted = fit_rate(t_grid, grid_vals[i], false).slope;
        const double exact = fit_rate(t_grid, exact_vals[i], false).slope;
        const double err = std::abs(fitted - predicted);
        out.push_back({r_list[i], fitted, exact, predicted, err, predicted == 0.0 ? err : err / std::abs(predicted)});
    }
    return out;
}

}  // namespace strichartz
