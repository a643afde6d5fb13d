#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "strichartz/grid_field.hpp"
#include "strichartz/propagators.hpp"
#include "strichartz/spaces.hpp"

namespace strichartz {

// ---------------------------------------------------------------------------
// Sampled functional curves
// ---------------------------------------------------------------------------

struct CurveSample {
    double t;
    double value;
    bool excluded = false;
    std::string reason;
};

struct CurveLabel {
    std::string functional;  // "SP", "SR", "raw-ratio", ...
    std::string x_space;
    std::string y_space;
    std::string datum;
    std::vector<std::pair<std::string, double>> constants;
};

// Values of a functional over t > 2. Zero or non-finite values are kept as
// exclusions with a reason instead of entering fits and extrema.
class FunctionalCurve {
public:
    explicit FunctionalCurve(CurveLabel label = {}) : label_(std::move(label)) {}

    void append(double t, double value) {
        check_time(t);
        if (!std::isfinite(value)) {
            samples_.push_back({t, value, true, "non-finite value"});
        } else if (!(value > 0.0)) {
            samples_.push_back({t, value, true, "nonpositive value"});
        } else {
            samples_.push_back({t, value, false, {}});
        }
    }

    void exclude(double t, double value, std::string reason) {
        check_time(t);
        samples_.push_back({t, value, true, std::move(reason)});
    }

    const CurveLabel& label() const { return label_; }
    std::span<const CurveSample> samples() const { return samples_; }

    std::vector<double> included_times() const {
        std::vector<double> out;
        for (const auto& s : samples_) if (!s.excluded) out.push_back(s.t);
        return out;
    }
    std::vector<double> included_values() const {
        std::vector<double> out;
        for (const auto& s : samples_) if (!s.excluded) out.push_back(s.value);
        return out;
    }

    double min_value() const { return extreme([](double a, double b) { return std::min(a, b); }, kInf); }
    double max_value() const { return extreme([](double a, double b) { return std::max(a, b); }, -kInf); }

private:
    void check_time(double t) const {
        if (!(t > 2.0) || !std::isfinite(t)) throw std::invalid_argument("FunctionalCurve: times must exceed 2");
        if (!samples_.empty() && !(t > samples_.back().t)) {
            throw std::invalid_argument("FunctionalCurve: times must increase strictly");
        }
    }

    template <typename Op>
    double extreme(Op op, double init) const {
        double acc = init;
        bool any = false;
        for (const auto& s : samples_) {
            if (s.excluded) continue;
            acc = op(acc, s.value);
            any = true;
        }
        if (!any) throw std::invalid_argument("FunctionalCurve: no included samples");
        return acc;
    }

    CurveLabel label_;
    std::vector<CurveSample> samples_;
};

// ---------------------------------------------------------------------------
// Two-space functionals
// ---------------------------------------------------------------------------

namespace detail {

inline double checked_x_norm(const GridFunction& f, const PsiSpec& x) {
    if (f.is_zero()) throw std::domain_error("functional: initial datum is identically zero");
    const double nx = gls_norm(f, x);
    if (nx == kInf) throw std::domain_error("functional: initial datum is not in X = " + x.describe());
    if (!(nx > 0.0)) throw std::domain_error("functional: ||f||_X vanished");
    return nx;
}

inline void check_functional_time(double t) {
    if (!(t > 2.0) || !std::isfinite(t)) throw std::invalid_argument("functional: requires t > 2");
}

inline void check_constant(double k, const char* name) {
    if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument(std::string("functional: constant ") + name + " must be positive");
}

}  // namespace detail

// [||P_t f||_Y / phi(Y, K1 t^{d e})] / [||f||_X / phi(X, K2 t^{d e})], assembled from norms.
inline double sp_value_from_norms(double norm_y, double norm_x, const PsiSpec& x, const PsiSpec& y, double t, int dim,
                                  double scale_exponent, double k1, double k2) {
    const double delta = std::pow(t, dim * scale_exponent);
    const double phi_y = fundamental_gls(y, k1 * delta).value;
    const double phi_x = fundamental_gls(x, k2 * delta).value;
    return (norm_y / phi_y) / (norm_x / phi_x);
}

/**
 * Parabolic two-space functional at one f (the sup over f is replaced by the caller's
 * test family). P_t is the heat semigroup by default; a fractional kind uses the
 * t^{d/alpha} scale. K1 = K2 = 1 gives W_SP(X, Y; t).
 */
inline double w_sp(const GridFunction& f, const PsiSpec& x, const PsiSpec& y, double t, double k1 = 1.0,
                   double k2 = 1.0, const PropagatorKind& kind = PropagatorKind::heat()) {
    detail::check_functional_time(t);
    detail::check_constant(k1, "K1");
    detail::check_constant(k2, "K2");
    if (kind.family() == PropagatorKind::Family::schrodinger) {
        throw std::invalid_argument("w_sp: parabolic functional needs a heat or fractional propagator");
    }
    const double nx = detail::checked_x_norm(f, x);
    const double ny = gls_norm(propagate(f, kind, t), y);
    return sp_value_from_norms(ny, nx, x, y, t, f.grid().dim(), kind.time_scale_exponent(), k1, k2);
}

// Which fundamental-function argument the Schroedinger functional uses:
//   definition: t^{-d/2} ||U_t f||_Y / (||f||_X phi(X, K t^{-d}))
//   proof:      t^{-d/2} ||U_t f||_Y phi(X, K t^{d/2}) / ||f||_X
enum class SrNormalization { definition, proof };

inline std::string to_string(SrNormalization n) { return n == SrNormalization::definition ? "definition" : "proof"; }

inline double sr_value_from_norms(double norm_y, double norm_x, const PsiSpec& x, double t, int dim, double k,
                                  SrNormalization norm) {
    const double d = static_cast<double>(dim);
    const double decay = std::pow(t, -0.5 * d);
    if (norm == SrNormalization::definition) {
        return decay * norm_y / (norm_x * fundamental_gls(x, k * std::pow(t, -d)).value);
    }
    return decay * norm_y * fundamental_gls(x, k * std::pow(t, 0.5 * d)).value / norm_x;
}

inline double v_sr(const GridFunction& f, const PsiSpec& x, const PsiSpec& y, double t, double k = 1.0,
                   SrNormalization norm = SrNormalization::definition) {
    detail::check_functional_time(t);
    detail::check_constant(k, "K");
    const double nx = detail::checked_x_norm(f, x);
    const double ny = gls_norm(propagate(f, PropagatorKind::schrodinger(), t), y);
    return sr_value_from_norms(ny, nx, x, t, f.grid().dim(), k, norm);
}

// Hypothesis notes for the pair (X, Y); empty when the pair is in the proven regime.
inline std::vector<std::string> parabolic_pair_warnings(const PsiSpec& x, const PsiSpec& y) {
    std::vector<std::string> w;
    if (!msupp_precedes(x, y)) {
        w.push_back("moment support of X = " + x.describe() + " does not precede that of Y = " + y.describe() +
                    "; boundedness over t is not guaranteed");
    }
    return w;
}

inline std::vector<std::string> schrodinger_pair_warnings(const PsiSpec& x, const PsiSpec& y) {
    auto w = parabolic_pair_warnings(x, y);
    if (y.lower() < 2.0) {
        w.push_back("moment support of Y = " + y.describe() + " starts below 2; outside the Schroedinger pair regime");
    }
    return w;
}

// ---------------------------------------------------------------------------
// Mixed space-time norm
// ---------------------------------------------------------------------------

// Samples of t -> ||u(t)||_Y on (0, T], T = last time.
struct TimeCurve {
    std::vector<double> t;
    std::vector<double> value;

    void validate() const {
        if (t.size() != value.size() || t.size() < 2) throw std::invalid_argument("TimeCurve: need >= 2 matched samples");
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (!(t[k] > 0.0) || !std::isfinite(t[k])) throw std::invalid_argument("TimeCurve: times must be positive");
            if (k > 0 && !(t[k] > t[k - 1])) throw std::invalid_argument("TimeCurve: times must increase strictly");
            if (!(value[k] >= 0.0) || !std::isfinite(value[k])) throw std::invalid_argument("TimeCurve: values must be finite and >= 0");
        }
    }
};

/**
 * (int_0^T c(t)^q dt)^{1/q} for the curve interpolated as a power law between samples
 * (linearly where a sample vanishes). On (0, t_0) the first panel's power law is
 * extended, so integrable singularities at 0 are integrated exactly and
 * non-integrable ones return +inf. For q = inf the result is the sample maximum.
 */
inline double time_moment(const TimeCurve& c, Exponent q) {
    c.validate();
    require_valid_exponent(q, "time_moment");
    const double peak = *std::max_element(c.value.begin(), c.value.end());
    if (peak == 0.0) return 0.0;
    if (q.is_infinite()) return peak;
    const double qv = q.value();

    // integral of (y/peak)^q over one power-law panel from t0 (value y0) to t0 * ratio
    const auto power_panel = [&](double t0, double y0, double slope, double log_ratio) {
        const double x = (slope * qv + 1.0) * log_ratio;
        const double factor = std::abs(x) < 1e-12 ? log_ratio : log_ratio * std::expm1(x) / x;
        return std::pow(y0 / peak, qv) * t0 * factor;
    };

    double acc = 0.0;
    const double y0 = c.value[0];
    if (y0 > 0.0) {
        const double k = c.value[1] > 0.0 ? std::log(c.value[1] / y0) / std::log(c.t[1] / c.t[0]) : 0.0;
        if (k * qv + 1.0 <= 0.0) return kInf;
        acc += std::pow(y0 / peak, qv) * c.t[0] / (k * qv + 1.0);
    }
    for (std::size_t i = 0; i + 1 < c.t.size(); ++i) {
        const double ya = c.value[i], yb = c.value[i + 1];
        const double width = c.t[i + 1] - c.t[i];
        if (ya > 0.0 && yb > 0.0) {
            const double log_ratio = std::log(c.t[i + 1] / c.t[i]);
            acc += power_panel(c.t[i], ya, std::log(yb / ya) / log_ratio, log_ratio);
        } else {
            // linear panel: int (linear y)^q = width (yb^{q+1} - ya^{q+1}) / ((q+1)(yb - ya))
            const double sa = ya / peak, sb = yb / peak;
            acc += sa == sb ? width * std::pow(sa, qv)
                            : width * (std::pow(sb, qv + 1.0) - std::pow(sa, qv + 1.0)) / ((qv + 1.0) * (sb - sa));
        }
    }
    return peak * std::pow(acc, 1.0 / qv);
}

// |||c|||_{G(theta)} over S_T = (0, T); +inf when a relevant time moment diverges.
inline double mixed_norm(const TimeCurve& c, const PsiSpec& theta) {
    return gls_norm_of([&](Exponent q) { return time_moment(c, q); }, theta);
}

// ---------------------------------------------------------------------------
// Predicted decay rates
// ---------------------------------------------------------------------------

enum class RateSource {
    gls_parabolic,               // G(a1,b1;..) -> G(a2,b2;..) under the heat semigroup
    gls_schrodinger,             // same pair under the Schroedinger group, b1 <= 2 <= a2
    fractional_decay,            // |S_alpha(t) f|_r vs |f|_p
    fractional_laplacian_decay,  // |Laplacian S_alpha(t) f|_r vs |f|_p
    heat_lp,                     // |T_t f|_r vs |f|_p
    schrodinger_lp,              // |U_t f|_r vs |f|_{r'}
};

inline std::string to_string(RateSource s) {
    switch (s) {
        case RateSource::gls_parabolic: return "gls-parabolic";
        case RateSource::gls_schrodinger: return "gls-schrodinger";
        case RateSource::fractional_decay: return "fractional-decay";
        case RateSource::fractional_laplacian_decay: return "fractional-laplacian-decay";
        case RateSource::heat_lp: return "heat-lp";
        case RateSource::schrodinger_lp: return "schrodinger-lp";
    }
    return {};
}

inline RateSource rate_source_from_string(const std::string& s) {
    for (auto src : {RateSource::gls_parabolic, RateSource::gls_schrodinger, RateSource::fractional_decay,
                     RateSource::fractional_laplacian_decay, RateSource::heat_lp, RateSource::schrodinger_lp}) {
        if (to_string(src) == s) return src;
    }
    throw std::invalid_argument("unknown rate source '" + s + "'");
}

// C t^power (log t)^log_power
struct PredictedRate {
    double power;
    double log_power;
    RateSource source;
};

struct GlsPairParams {
    int dim = 1;
    double a1 = 1, b1 = 2, a2 = 2, b2 = kInf;
    double alpha1 = 0, beta1 = 0, alpha2 = 0, beta2 = 0;
};

struct LebesgueParams {
    int dim = 1;
    Exponent p{1.0};
    Exponent r{Exponent::infinity()};
    double alpha = 2.0;
};

inline PredictedRate predicted_rate(RateSource src, const GlsPairParams& g) {
    if (g.dim < 1) throw std::invalid_argument("predicted_rate: dimension must be positive");
    if (!(1.0 <= g.a1 && g.a1 < g.b1 && g.b1 < g.a2 && g.a2 < g.b2)) {
        throw std::invalid_argument("predicted_rate: need 1 <= a1 < b1 < a2 < b2 <= inf");
    }
    const double d = static_cast<double>(g.dim);
    switch (src) {
        case RateSource::gls_parabolic:
            return {-0.5 * d * (1.0 / g.a1 - 1.0 / g.a2), g.alpha2 - g.alpha1, src};
        case RateSource::gls_schrodinger: {
            if (!(g.b1 <= 2.0 && g.a2 >= 2.0)) throw std::invalid_argument("predicted_rate: Schroedinger pair needs b1 <= 2 <= a2");
            const double b1_conj = Exponent(g.b1).conjugate().reciprocal();
            return {0.5 * d - d * b1_conj, -g.beta1, src};
        }
        default:
            throw std::invalid_argument("predicted_rate: " + to_string(src) + " takes Lebesgue exponents");
    }
}

inline PredictedRate predicted_rate(RateSource src, const LebesgueParams& l) {
    if (l.dim < 1) throw std::invalid_argument("predicted_rate: dimension must be positive");
    require_valid_exponent(l.p, "predicted_rate");
    require_valid_exponent(l.r, "predicted_rate");
    const double d = static_cast<double>(l.dim);
    const double gap = l.r.reciprocal() - l.p.reciprocal();
    switch (src) {
        case RateSource::fractional_decay:
        case RateSource::fractional_laplacian_decay: {
            if (!(l.alpha > 0.0 && l.alpha <= 2.0)) throw std::invalid_argument("predicted_rate: alpha must lie in (0, 2]");
            if (l.r < l.p) throw std::invalid_argument("predicted_rate: need p <= r");
            const double base = (d / l.alpha) * gap;
            return {src == RateSource::fractional_decay ? base : base - 1.0 / l.alpha, 0.0, src};
        }
        case RateSource::heat_lp:
            if (!(l.p < l.r)) throw std::invalid_argument("predicted_rate: need r > p");
            return {0.5 * d * gap, 0.0, src};
        case RateSource::schrodinger_lp:
            if (l.r < Exponent(2.0)) throw std::invalid_argument("predicted_rate: need r >= 2");
            return {d * (0.5 - l.r.conjugate().reciprocal()), 0.0, src};
        default:
            throw std::invalid_argument("predicted_rate: " + to_string(src) + " takes a GLS pair");
    }
}

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

// log y = c + s log t (+ gamma log log t); residual is the RMS in log space.
struct RateFit {
    double slope = 0.0;
    double log_exponent = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    bool with_log = false;
};

inline RateFit fit_rate(std::span<const double> t, std::span<const double> y, bool with_log) {
    if (t.size() != y.size()) throw std::invalid_argument("fit_rate: size mismatch");
    if (t.size() < 4) throw std::invalid_argument("fit_rate: need at least 4 samples");
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(y[k] > 0.0) || !std::isfinite(y[k])) throw std::invalid_argument("fit_rate: values must be positive and finite");
        if (!(t[k] > (with_log ? 1.0 : 0.0))) throw std::invalid_argument("fit_rate: times out of range for the fit model");
    }
    const auto n = static_cast<Eigen::Index>(t.size());
    const Eigen::Index cols = with_log ? 3 : 2;
    Eigen::MatrixXd a(n, cols);
    Eigen::VectorXd b(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double lt = std::log(t[static_cast<std::size_t>(k)]);
        a(k, 0) = 1.0;
        a(k, 1) = lt;
        if (with_log) a(k, 2) = std::log(lt);
        b(k) = std::log(y[static_cast<std::size_t>(k)]);
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
    const Eigen::VectorXd res = a * coef - b;

    RateFit fit;
    fit.intercept = coef(0);
    fit.slope = coef(1);
    fit.log_exponent = with_log ? coef(2) : 0.0;
    fit.residual = std::sqrt(res.squaredNorm() / static_cast<double>(n));
    fit.t_min = *std::min_element(t.begin(), t.end());
    fit.t_max = *std::max_element(t.begin(), t.end());
    fit.with_log = with_log;
    return fit;
}

inline RateFit fit_rate(const FunctionalCurve& curve, bool with_log) {
    const auto t = curve.included_times();
    const auto y = curve.included_values();
    return fit_rate(t, y, with_log);
}

// Geometric or linear time ladders.
inline std::vector<double> geometric_times(double start, double stop, std::size_t count) {
    if (count < 2 || !(start > 0.0) || !(stop > start)) throw std::invalid_argument("geometric_times: bad range");
    std::vector<double> t(count);
    const double step = std::log(stop / start) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k) t[k] = start * std::exp(step * static_cast<double>(k));
    t.back() = stop;
    return t;
}

inline std::vector<double> linear_times(double start, double stop, std::size_t count) {
    if (count < 2 || !(stop > start)) throw std::invalid_argument("linear_times: bad range");
    std::vector<double> t(count);
    for (std::size_t k = 0; k < count; ++k) t[k] = start + (stop - start) * static_cast<double>(k) / static_cast<double>(count - 1);
    return t;
}

}  // namespace strichartz
