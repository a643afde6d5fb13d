#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "strichartz/grid_field.hpp"

namespace strichartz {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

inline std::string fmt(double x) {
    if (x == kInf) return "inf";
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

}  // namespace detail

// Parameters of the piecewise power weight zeta(a, b; alpha, beta) and its crossover root h.
class ZetaParams {
public:
    static ZetaParams make(double a, double b, double alpha, double beta);

    double a() const { return a_; }
    double b() const { return b_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double crossover() const { return h_; }
    bool unbounded() const { return b_ == kInf; }

private:
    ZetaParams(double a, double b, double alpha, double beta, double h)
        : a_(a), b_(b), alpha_(alpha), beta_(beta), h_(h) {}

    double a_, b_, alpha_, beta_, h_;
};

// Root h of (h-a)^alpha = (b-h)^beta on (a, b), or (h-a)^alpha = h^beta when b = inf.
//
// Solved on the log form alpha log(h-a) - beta log(b-h), which is monotone in h.
// Degenerate exponents: alpha = beta = 0 gives the midpoint; a single zero exponent
// has the closed-form root and needs b - a > 1; alpha = 0 with b = inf only has the
// boundary root h = a = 1.
inline double zeta_crossover(double a, double b, double alpha, double beta) {
    using detail::fmt;
    const std::string args = "(" + fmt(a) + ", " + fmt(b) + ", " + fmt(alpha) + ", " + fmt(beta) + ")";
    if (!(a >= 1.0) || !std::isfinite(a)) throw std::invalid_argument("zeta: need a >= 1, got " + args);
    if (!(b > a)) throw std::invalid_argument("zeta: need b > a, got " + args);
    if (!std::isfinite(alpha) || !std::isfinite(beta)) throw std::invalid_argument("zeta: non-finite exponent " + args);

    const auto tol = [](double lo, double hi) { return hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi; };

    if (b < kInf) {
        if (std::min(alpha, beta) < 0.0) {
            throw std::invalid_argument("zeta: bounded b requires min(alpha, beta) >= 0, got " + args);
        }
        if (alpha == 0.0 && beta == 0.0) return 0.5 * (a + b);
        if (alpha == 0.0 || beta == 0.0) {
            if (!(b - a > 1.0)) throw std::invalid_argument("zeta: crossover has no root in (a, b) for " + args);
            return alpha == 0.0 ? b - 1.0 : a + 1.0;
        }
        const auto f = [&](double h) { return alpha * std::log(h - a) - beta * std::log(b - h); };
        const auto [lo, hi] = boost::math::tools::bisect(f, a, b, tol);
        return 0.5 * (lo + hi);
    }

    if (!(alpha >= 0.0) || !(beta < 0.0)) {
        throw std::invalid_argument("zeta: b = inf requires alpha >= 0 and beta < 0, got " + args);
    }
    if (alpha == 0.0) {
        if (a != 1.0) throw std::invalid_argument("zeta: crossover has no root in (a, inf) for " + args);
        return a;
    }
    const auto f = [&](double h) { return alpha * std::log(h - a) - beta * std::log(h); };
    double hi = 2.0 * a + 1.0;
    while (f(hi) <= 0.0) {
        hi *= 2.0;
        if (hi > 1e300) throw std::invalid_argument("zeta: crossover bracket overflow for " + args);
    }
    const auto [lo, up] = boost::math::tools::bisect(f, a, hi, tol);
    return 0.5 * (lo + up);
}

inline ZetaParams ZetaParams::make(double a, double b, double alpha, double beta) {
    const double h = zeta_crossover(a, b, alpha, beta);
    return ZetaParams(a, b, alpha, beta, h);
}

inline double zeta_log_eval(const ZetaParams& z, double p) {
    if (!(p > z.a() && p < z.b())) {
        throw std::invalid_argument("zeta_eval: p = " + detail::fmt(p) + " outside (" + detail::fmt(z.a()) + ", " +
                                    detail::fmt(z.b()) + ")");
    }
    if (p < z.crossover()) return z.alpha() == 0.0 ? 0.0 : z.alpha() * std::log(p - z.a());
    if (z.beta() == 0.0) return 0.0;
    return z.unbounded() ? z.beta() * std::log(p) : z.beta() * std::log(z.b() - p);
}

inline double zeta_eval(const ZetaParams& z, double p) { return std::exp(zeta_log_eval(z, p)); }

// Dense exponent sample of the open interval (a, b): geometric in the distance to
// each endpoint, 64 points per decade from 1e-8 relative distance inward.
inline std::vector<double> default_exponent_grid(double a, double b) {
    constexpr int kPerDecade = 64;
    constexpr double kFirstDecade = -8.0;
    std::vector<double> pts;
    if (b < kInf) {
        const double w = b - a;
        for (int k = 0;; ++k) {
            const double u = std::pow(10.0, kFirstDecade + static_cast<double>(k) / kPerDecade);
            if (u > 0.5) break;
            pts.push_back(a + w * u);
            pts.push_back(b - w * u);
        }
        pts.push_back(a + 0.5 * w);
    } else {
        const double scale = std::max(a, 1.0);
        constexpr double kLastDecade = 6.0;
        for (int k = 0;; ++k) {
            const double e = kFirstDecade + static_cast<double>(k) / kPerDecade;
            if (e > kLastDecade + 1e-12) break;
            pts.push_back(a + scale * std::pow(10.0, e));
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::erase_if(pts, [&](double p) { return !(p > a && p < b); });
    return pts;
}

/**
 * A weight psi in Psi(a, b) defining the Grand Lebesgue norm sup_p |f|_p / psi(p).
 *
 * The degenerate variant stands for plain L_s: psi_s(s) = 1 and psi_s = inf elsewhere,
 * with inf/inf = inf, so the norm reduces to |f|_s.
 */
class PsiSpec {
public:
    enum class Variant { zeta, degenerate, constant, table, closure };

    static PsiSpec zeta(const ZetaParams& z) {
        PsiSpec s(Variant::zeta, z.a(), z.b());
        s.zeta_ = z;
        return s;
    }

    static PsiSpec zeta(double a, double b, double alpha, double beta) { return zeta(ZetaParams::make(a, b, alpha, beta)); }

    static PsiSpec degenerate(Exponent s) {
        require_valid_exponent(s, "PsiSpec::degenerate");
        PsiSpec out(Variant::degenerate, s.value(), s.value());
        out.degenerate_ = s;
        return out;
    }

    static PsiSpec constant(double a, double b, double level) {
        check_interval(a, b);
        if (!(level > 0.0) || !std::isfinite(level)) throw std::invalid_argument("PsiSpec::constant: level must be positive");
        PsiSpec s(Variant::constant, a, b);
        s.level_ = level;
        return s;
    }

    // Tabulated (p, psi(p)) pairs, log-linearly interpolated; msupp is (first p, last p).
    static PsiSpec table(std::vector<std::pair<double, double>> points) {
        if (points.size() < 2) throw std::invalid_argument("PsiSpec::table: need at least two points");
        for (std::size_t k = 0; k < points.size(); ++k) {
            const auto [p, v] = points[k];
            if (!std::isfinite(p) || p < 1.0) throw std::invalid_argument("PsiSpec::table: exponents must be finite and >= 1");
            if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("PsiSpec::table: values must be positive and finite");
            if (k > 0 && !(points[k - 1].first < p)) throw std::invalid_argument("PsiSpec::table: exponents must increase strictly");
        }
        PsiSpec s(Variant::table, points.front().first, points.back().first);
        s.table_ = std::move(points);
        return s;
    }

    static PsiSpec closure(double a, double b, std::function<double(double)> fn, std::string label) {
        check_interval(a, b);
        PsiSpec s(Variant::closure, a, b);
        s.closure_ = std::move(fn);
        s.label_ = std::move(label);
        for (double p : default_exponent_grid(a, b)) {
            const double v = s.closure_(p);
            if (!(v > 0.0) || std::isnan(v)) {
                throw std::invalid_argument("PsiSpec::closure: psi must be positive on (a, b); failed at p = " + detail::fmt(p));
            }
        }
        return s;
    }

    Variant variant() const { return variant_; }
    double lower() const { return a_; }
    double upper() const { return b_; }
    bool is_degenerate() const { return variant_ == Variant::degenerate; }
    Exponent degenerate_exponent() const { return degenerate_; }
    const ZetaParams& zeta_params() const {
        if (!zeta_) throw std::logic_error("PsiSpec: not a zeta weight");
        return *zeta_;
    }
    double constant_level() const { return level_; }
    const std::vector<std::pair<double, double>>& table_points() const { return table_; }

    // log psi(p) on the open moment support.
    double log_psi(double p) const {
        switch (variant_) {
            case Variant::zeta:
                return -zeta_log_eval(*zeta_, p);
            case Variant::degenerate:
                return Exponent(p) == degenerate_ ? 0.0 : kInf;
            case Variant::constant:
                require_inside(p);
                return std::log(level_);
            case Variant::table: {
                if (!(p >= a_ && p <= b_)) require_inside(p);
                auto it = std::upper_bound(table_.begin(), table_.end(), p,
                                           [](double x, const auto& pt) { return x < pt.first; });
                if (it == table_.end()) return std::log(table_.back().second);
                const auto& [p1, v1] = *it;
                const auto& [p0, v0] = *std::prev(it);
                const double w = (p - p0) / (p1 - p0);
                return (1.0 - w) * std::log(v0) + w * std::log(v1);
            }
            case Variant::closure:
                require_inside(p);
                return std::log(closure_(p));
        }
        return kInf;
    }

    double operator()(double p) const { return std::exp(log_psi(p)); }

    // Exponents at which a norm in G(psi) samples the moment function.
    std::vector<Exponent> exponent_grid() const {
        if (is_degenerate()) return {degenerate_};
        const auto pts = default_exponent_grid(a_, b_);
        return {pts.begin(), pts.end()};
    }

    std::string describe() const {
        using detail::fmt;
        switch (variant_) {
            case Variant::zeta:
                return "zeta(" + fmt(a_) + "," + fmt(b_) + "," + fmt(zeta_->alpha()) + "," + fmt(zeta_->beta()) + ")";
            case Variant::degenerate:
                return "L_" + degenerate_.to_string();
            case Variant::constant:
                return "constant(" + fmt(a_) + "," + fmt(b_) + "," + fmt(level_) + ")";
            case Variant::table:
                return "table(" + fmt(a_) + "," + fmt(b_) + ")";
            case Variant::closure:
                return label_;
        }
        return {};
    }

private:
    PsiSpec(Variant v, double a, double b) : variant_(v), a_(a), b_(b) {}

    static void check_interval(double a, double b) {
        if (!(a >= 1.0) || !std::isfinite(a) || !(b > a)) {
            throw std::invalid_argument("PsiSpec: need 1 <= a < b <= inf, got (" + detail::fmt(a) + ", " + detail::fmt(b) + ")");
        }
    }

    void require_inside(double p) const {
        if (!(p > a_ && p < b_)) {
            throw std::invalid_argument("PsiSpec: p = " + detail::fmt(p) + " outside (" + detail::fmt(a_) + ", " +
                                        detail::fmt(b_) + ")");
        }
    }

    Variant variant_;
    double a_, b_;
    std::optional<ZetaParams> zeta_;
    Exponent degenerate_{1.0};
    double level_ = 1.0;
    std::vector<std::pair<double, double>> table_;
    std::function<double(double)> closure_;
    std::string label_;
};

// msupp(x) << msupp(y): max(a1, b1) <= min(a2, b2).
inline bool msupp_precedes(const PsiSpec& x, const PsiSpec& y) { return x.upper() <= y.lower(); }

namespace detail {

struct Supremum {
    double argument;
    double log_value;
};

// Maximum of a log-objective sampled on `pts`, then polished by Brent's method between
// the neighbours of the best sample. The refined value only replaces the sample when larger.
template <typename LogFn>
Supremum sampled_supremum(const std::vector<double>& pts, LogFn&& log_objective) {
    std::size_t best = 0;
    double best_val = -kInf;
    std::vector<double> vals(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
        vals[k] = log_objective(pts[k]);
        if (vals[k] > best_val) {
            best_val = vals[k];
            best = k;
        }
    }
    Supremum out{pts[best], best_val};
    if (pts.size() < 3 || !std::isfinite(best_val)) return out;
    const double lo = pts[best == 0 ? 0 : best - 1];
    const double hi = pts[std::min(best + 1, pts.size() - 1)];
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::brent_find_minima([&](double p) { return -log_objective(p); }, lo, hi,
                                                         std::numeric_limits<double>::digits, iters);
    if (-r.second > out.log_value) out = {r.first, -r.second};
    return out;
}

inline void require_dense_profile(const MomentProfile& h, const PsiSpec& psi) {
    std::size_t inside = 0;
    for (auto p : h.p_grid) inside += (!p.is_infinite() && p.value() > psi.lower() && p.value() < psi.upper()) ? 1 : 0;
    if (inside < 64) {
        throw std::invalid_argument("gls_norm: moment profile has " + std::to_string(inside) + " samples inside " +
                                    psi.describe() + "'s moment support; need >= 64");
    }
}

}  // namespace detail

/**
 * Grand Lebesgue norm from a sampled moment profile: sup over sampled p in (a, b)
 * of h(p)/psi(p). For the degenerate weight L_s the profile must contain s exactly.
 * An infinite moment gives +inf (returned, not thrown).
 */
inline double gls_norm(const MomentProfile& h, const PsiSpec& psi) {
    if (h.p_grid.size() != h.values.size()) throw std::invalid_argument("gls_norm: malformed moment profile");
    if (psi.is_degenerate()) {
        for (std::size_t k = 0; k < h.size(); ++k) {
            if (h.p_grid[k] == psi.degenerate_exponent()) return h.values[k];
        }
        throw std::invalid_argument("gls_norm: moment profile lacks exponent " + psi.degenerate_exponent().to_string());
    }
    detail::require_dense_profile(h, psi);
    double best = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        const auto p = h.p_grid[k];
        if (p.is_infinite() || !(p.value() > psi.lower() && p.value() < psi.upper())) continue;
        if (h.values[k] == kInf) return kInf;
        if (h.values[k] == 0.0) continue;
        best = std::max(best, std::exp(std::log(h.values[k]) - psi.log_psi(p.value())));
    }
    return best;
}

// GLS norm of a function known through its moment map p -> |f|_p, with sup refinement.
template <typename MomentFn>
double gls_norm_of(MomentFn&& moment, const PsiSpec& psi) {
    if (psi.is_degenerate()) return moment(psi.degenerate_exponent());
    const auto pts = default_exponent_grid(psi.lower(), psi.upper());
    const double probe = moment(Exponent(pts.front()));
    if (probe == 0.0) return 0.0;
    if (probe == kInf) return kInf;
    bool infinite = false;
    const auto sup = detail::sampled_supremum(pts, [&](double p) {
        const double m = moment(Exponent(p));
        if (m == kInf) infinite = true;
        return std::log(m) - psi.log_psi(p);
    });
    return infinite ? kInf : std::exp(sup.log_value);
}

inline double gls_norm(const GridFunction& f, const PsiSpec& psi) {
    const detail::ModulusTable table(f);
    return gls_norm_of([&](Exponent p) { return table.norm(p); }, psi);
}

// ||g_sigma||_{G(psi)} from the exact Gaussian moments.
inline double gaussian_gls_norm(Complex sigma2, int dim, const PsiSpec& psi) {
    return gls_norm_of([&](Exponent p) { return gaussian_lp_exact(sigma2, dim, p); }, psi);
}

enum class FundamentalMethod { numeric_sup, asymptotic_small_bounded, asymptotic_small_unbounded, asymptotic_large };

inline std::string to_string(FundamentalMethod m) {
    switch (m) {
        case FundamentalMethod::numeric_sup: return "numeric-sup";
        case FundamentalMethod::asymptotic_small_bounded: return "asymptotic-small-bounded";
        case FundamentalMethod::asymptotic_small_unbounded: return "asymptotic-small-unbounded";
        case FundamentalMethod::asymptotic_large: return "asymptotic-large";
    }
    return {};
}

struct FundamentalValue {
    double delta;
    double value;
    FundamentalMethod method;
};

// phi(G(psi), delta) = sup_p delta^{1/p} / psi(p): the norm of an indicator of measure delta.
inline FundamentalValue fundamental_gls(const PsiSpec& psi, double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("fundamental_gls: delta must be positive and finite");
    if (psi.is_degenerate()) {
        return {delta, std::pow(delta, psi.degenerate_exponent().reciprocal()), FundamentalMethod::numeric_sup};
    }
    const double log_delta = std::log(delta);
    const auto pts = default_exponent_grid(psi.lower(), psi.upper());
    const auto sup = detail::sampled_supremum(pts, [&](double p) { return log_delta / p - psi.log_psi(p); });
    return {delta, std::exp(sup.log_value), FundamentalMethod::numeric_sup};
}

enum class Regime { small, large };

/**
 * Closed-form asymptotics of phi(G(a,b;alpha,beta), delta), implemented as printed:
 *  - small delta, b < inf, alpha, beta >= 0:  (beta b^2/e)^beta delta^{1/b} |log delta|^{-beta}
 *    (prefactor 1 when beta = 0);
 *  - small delta, b = inf, beta < 0:          |beta|^{|beta|} |log delta|^{-|beta|};
 *  - large delta, b = inf, beta < 0:          (a^2 alpha/e)^alpha delta^{1/a} (log delta)^{-a}.
 * These are "~" statements; compare against fundamental_gls by ratio trends only.
 */
inline FundamentalValue fundamental_asymptotic(const ZetaParams& z, double delta, Regime regime) {
    const double e = std::numbers::e;
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("fundamental_asymptotic: delta must be positive and finite");
    const double log_delta = std::log(delta);
    if (regime == Regime::small) {
        if (!(delta < 1.0 / (e * e))) throw std::invalid_argument("fundamental_asymptotic: small regime needs delta < e^-2");
        if (!z.unbounded()) {
            const double beta = z.beta();
            const double pre = beta == 0.0 ? 1.0 : std::pow(beta * z.b() * z.b() / e, beta);
            return {delta, pre * std::pow(delta, 1.0 / z.b()) * std::pow(std::abs(log_delta), -beta),
                    FundamentalMethod::asymptotic_small_bounded};
        }
        const double m = std::abs(z.beta());
        return {delta, std::pow(m, m) * std::pow(std::abs(log_delta), -m), FundamentalMethod::asymptotic_small_unbounded};
    }
    if (!(delta > e * e)) throw std::invalid_argument("fundamental_asymptotic: large regime needs delta > e^2");
    if (!z.unbounded()) throw std::invalid_argument("fundamental_asymptotic: large regime needs b = inf and beta < 0");
    const double a = z.a();
    const double alpha = z.alpha();
    const double pre = alpha == 0.0 ? 1.0 : std::pow(a * a * alpha / e, alpha);
    return {delta, pre * std::pow(delta, 1.0 / a) * std::pow(log_delta, -a), FundamentalMethod::asymptotic_large};
}

}  // namespace strichartz
