#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "strichartz/functionals.hpp"
#include "strichartz/io.hpp"
#include "strichartz/propagators.hpp"
#include "strichartz/spaces.hpp"
#include "strichartz/witness.hpp"

namespace strichartz::experiment {

using io::ConfigError;
using io::json;
using io::Node;
using io::num;

struct Options {
    bool verbose = false;
    std::ostream* log = &std::cerr;
};

struct RunResult {
    std::string kind;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
    json summary;
};

// ---------------------------------------------------------------------------
// Config blocks
// ---------------------------------------------------------------------------

inline Grid read_grid(const Node& n) {
    const int dim = n.at("dim").integer();
    const double half_extent = n.at("half_extent").number();
    const int points = n.at("points").integer();
    if (points < 0) n.at("points").fail("expected a positive integer");
    return io::at_node(n, [&] { return make_grid(dim, half_extent, static_cast<std::size_t>(points)); });
}

/**
 * {"values": [t0, t1, ...]} or {"start": a, "stop": b, "count": n, "spacing": "geometric" | "linear"}.
 */
inline std::vector<double> read_times(const Node& n) {
    if (n.has("values")) {
        const auto v = n.at("values");
        std::vector<double> t;
        for (std::size_t i = 0; i < v.size(); ++i) t.push_back(v.at(i).number());
        if (t.empty()) v.fail("expected at least one time");
        for (std::size_t i = 1; i < t.size(); ++i) {
            if (!(t[i] > t[i - 1])) v.at(i).fail("times must increase strictly");
        }
        return t;
    }
    const double start = n.at("start").number();
    const double stop = n.at("stop").number();
    const int count = n.at("count").integer();
    if (count < 2) n.at("count").fail("expected at least 2 points");
    const std::string spacing = n.text_or("spacing", "geometric");
    if (spacing == "geometric") {
        return io::at_node(n, [&] { return geometric_times(start, stop, static_cast<std::size_t>(count)); });
    }
    if (spacing == "linear") {
        return io::at_node(n, [&] { return linear_times(start, stop, static_cast<std::size_t>(count)); });
    }
    n.at("spacing").fail("expected 'geometric' or 'linear'");
}

inline std::vector<Exponent> read_exponents(const Node& n) {
    std::vector<Exponent> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(n.at(i).exponent());
    if (out.empty()) n.fail("expected at least one exponent");
    return out;
}

inline PropagatorKind read_propagator(const Node& n) {
    const std::string kind = n.raw().is_string() ? n.text() : n.at("kind").text();
    if (kind == "heat") return PropagatorKind::heat();
    if (kind == "schrodinger") return PropagatorKind::schrodinger();
    if (kind == "fractional") {
        const double alpha = n.at("alpha").number();
        return io::at_node(n.at("alpha"), [&] { return PropagatorKind::fractional(alpha); });
    }
    (n.raw().is_string() ? n : n.at("kind")).fail("unknown propagator '" + kind + "' (heat, schrodinger, fractional)");
}

inline SrNormalization read_normalization(const Node& cfg) {
    const std::string s = cfg.text_or("sr_normalization", "definition");
    if (s == "definition") return SrNormalization::definition;
    if (s == "proof") return SrNormalization::proof;
    cfg.at("sr_normalization").fail("expected 'definition' or 'proof'");
}

// A sampled initial datum plus what the wrap-around check needs to know about it.
struct Datum {
    GridFunction f;
    std::string description;
    std::optional<Complex> gaussian_sigma2;  // set for a single unit-weight Gaussian
    // One (variance, support offset) pair per component; variance 0 marks a sharp box.
    std::vector<std::pair<Complex, double>> components;
};

/**
 * {"type": "gaussian", "sigma2": 1 | [re, im]}
 * {"type": "indicator", "half_width_nodes": m}
 * {"type": "mixture", "terms": [{"weight": w | [re, im], ...datum}, ...]}
 */
inline Datum read_datum(const Node& n, const Grid& grid) {
    const std::string type = n.at("type").text();
    if (type == "gaussian") {
        const Complex s2 = n.has("sigma2") ? n.at("sigma2").complex() : Complex(1.0);
        auto f = io::at_node(n, [&] { return gaussian_sample(grid, GaussianSpec{s2, grid.dim()}); });
        std::ostringstream d;
        d << "gaussian(sigma2=" << num(s2.real()) << (s2.imag() != 0.0 ? "+" + num(s2.imag()) + "i" : "") << ")";
        return {std::move(f), d.str(), s2, {{s2, 0.0}}};
    }
    if (type == "indicator") {
        const int m = n.at("half_width_nodes").integer();
        if (m < 1) n.at("half_width_nodes").fail("expected a positive integer");
        auto f = io::at_node(n, [&] { return node_aligned_indicator(grid, static_cast<std::size_t>(m)); });
        return {std::move(f), "indicator(half_width_nodes=" + std::to_string(m) + ")", std::nullopt,
                {{Complex(0.0), m * grid.spacing()}}};
    }
    if (type == "mixture") {
        const auto terms = n.at("terms");
        if (terms.size() == 0) terms.fail("expected at least one term");
        auto f = GridFunction::zero(grid);
        std::string desc = "mixture(";
        std::vector<std::pair<Complex, double>> comps;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const auto term = terms.at(i);
            const Complex w = term.has("weight") ? term.at("weight").complex() : Complex(1.0);
            const auto part = read_datum(term, grid);
            f = f + w * part.f;
            desc += (i ? "," : "") + part.description;
            comps.insert(comps.end(), part.components.begin(), part.components.end());
        }
        return {std::move(f), desc + ")", std::nullopt, comps};
    }
    n.at("type").fail("unknown datum type '" + type + "' (gaussian, indicator, mixture)");
}

// Largest wrap-around-safe time for every component of the datum; -1 if none.
inline double datum_safe_time(const Grid& grid, const PropagatorKind& kind, const Datum& datum) {
    double safe = kInf;
    for (const auto& [s2, offset] : datum.components) safe = std::min(safe, max_safe_time(grid, kind, s2, offset));
    return safe;
}

inline void check_window(const Node& times_node, const std::vector<double>& times, double safe,
                         const std::string& what) {
    if (safe < 0.0) {
        times_node.fail("no time is wrap-around safe for " + what + " on this grid");
    }
    if (times.back() > safe) {
        times_node.fail("t = " + num(times.back()) + " exceeds the wrap-around-safe bound " + num(safe) + " for " +
                        what + " on this grid");
    }
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

namespace detail {

inline void note(const Options& opt, const std::string& msg) {
    if (opt.verbose) *opt.log << "[run] " << msg << "\n";
}

inline void warn(RunResult& r, const Options& opt, const std::string& msg) {
    r.warnings.push_back(msg);
    *opt.log << "warning: " << msg << "\n";
}

inline void emit(RunResult& r, const std::filesystem::path& dir, const std::string& name, const std::string& text) {
    io::write_text((dir / name).string(), text);
    r.files.push_back(name);
}

inline std::optional<RateFit> try_fit(const std::vector<double>& t, const std::vector<double>& y, bool with_log) {
    if (t.size() < 4) return std::nullopt;
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (!(y[k] > 0.0) || !std::isfinite(y[k]) || (with_log && !(t[k] > 1.0))) return std::nullopt;
    }
    return fit_rate(t, y, with_log);
}

inline bool gaussian_kind(const PropagatorKind& k) {
    return k.family() != PropagatorKind::Family::fractional || k.alpha() == 2.0;
}

}  // namespace detail

inline void run_norms(const Node& cfg, const std::filesystem::path& dir, RunResult& r, const Options& opt) {
    const Grid grid = read_grid(cfg.at("grid"));
    const Datum datum = read_datum(cfg.at("datum"), grid);
    const auto ps = read_exponents(cfg.at("exponents"));
    std::string csv = "quantity,value,provenance\n";
    json values = json::object();
    for (auto p : ps) {
        const double v = lp_norm(datum.f, p);
        csv += "L_" + io::exponent_text(p) + "," + num(v) + ",grid\n";
        if (datum.gaussian_sigma2) {
            csv += "L_" + io::exponent_text(p) + "," + num(gaussian_lp_exact(*datum.gaussian_sigma2, grid.dim(), p)) +
                   ",closed-form\n";
        }
    }
    if (cfg.has("spaces")) {
        const auto spaces = cfg.at("spaces");
        for (std::size_t i = 0; i < spaces.size(); ++i) {
            const auto psi = io::psi_from_json(spaces.at(i));
            detail::note(opt, "GLS norm in " + psi.describe());
            csv += "G(" + psi.describe() + ")," + num(gls_norm(datum.f, psi)) + ",grid\n";
            if (datum.gaussian_sigma2) {
                csv += "G(" + psi.describe() + ")," + num(gaussian_gls_norm(*datum.gaussian_sigma2, grid.dim(), psi)) +
                       ",closed-form\n";
            }
        }
    }
    detail::emit(r, dir, "norms.csv", csv);
    r.summary["datum"] = datum.description;
}

inline void run_fundamental(const Node& cfg, const std::filesystem::path& dir, RunResult& r, const Options&) {
    const auto psi = io::psi_from_json(cfg.at("psi"));
    const auto deltas_node = cfg.at("deltas");
    std::vector<double> deltas = deltas_node.raw().is_array() ? std::vector<double>{} : read_times(deltas_node);
    if (deltas_node.raw().is_array()) {
        for (std::size_t i = 0; i < deltas_node.size(); ++i) deltas.push_back(deltas_node.at(i).positive());
    }
    std::optional<Regime> regime;
    if (cfg.has("asymptotic")) {
        const std::string s = cfg.at("asymptotic").text();
        if (s == "small") regime = Regime::small;
        else if (s == "large") regime = Regime::large;
        else cfg.at("asymptotic").fail("expected 'small' or 'large'");
        if (psi.variant() != PsiSpec::Variant::zeta) cfg.at("psi").fail("asymptotic forms need a zeta weight");
    }
    std::string csv = "delta,value,method\n";
    json ratios = json::array();
    for (double d : deltas) {
        const auto v = io::at_node(deltas_node, [&] { return fundamental_gls(psi, d); });
        csv += num(d) + "," + num(v.value) + "," + to_string(v.method) + "\n";
        if (regime) {
            const auto a = io::at_node(cfg.at("asymptotic"), [&] { return fundamental_asymptotic(psi.zeta_params(), d, *regime); });
            csv += num(d) + "," + num(a.value) + "," + to_string(a.method) + "\n";
            ratios.push_back({{"delta", d}, {"numeric_over_asymptotic", v.value / a.value}});
        }
    }
    detail::emit(r, dir, "fundamental.csv", csv);
    r.summary["psi"] = io::psi_to_json(psi);
    if (regime) {
        r.summary["ratios"] = ratios;
        double drift = 0.0;
        for (std::size_t k = 1; k < ratios.size(); ++k) {
            const double a = ratios[k - 1]["numeric_over_asymptotic"], b = ratios[k]["numeric_over_asymptotic"];
            drift = std::max(drift, std::abs(b / a - 1.0));
        }
        r.summary["max_consecutive_ratio_change"] = drift;
        r.summary["threshold"] = 0.1;
        r.summary["pass"] = drift < 0.1;
    }
}

inline void run_propagate(const Node& cfg, const std::filesystem::path& dir, RunResult& r, const Options& opt) {
    const Grid grid = read_grid(cfg.at("grid"));
    const Datum datum = read_datum(cfg.at("datum"), grid);
    const auto kind = read_propagator(cfg.at("propagator"));
    const bool laplacian = cfg.has("laplacian") && cfg.at("laplacian").boolean();
    if (laplacian && kind.family() != PropagatorKind::Family::fractional) {
        cfg.at("laplacian").fail("the Laplacian-composed propagator needs a fractional kind");
    }
    const auto times = read_times(cfg.at("times"));
    check_window(cfg.at("times"), times, datum_safe_time(grid, kind, datum), kind.describe() + " and " + datum.description);
    const auto ps = read_exponents(cfg.at("exponents"));

    const bool closed = datum.gaussian_sigma2 && detail::gaussian_kind(kind) && !laplacian;
    std::string csv = "t,exponent,value,provenance\n";
    std::map<std::size_t, std::vector<double>> series;
    std::optional<GridFunction> last;
    for (double t : times) {
        detail::note(opt, "t = " + num(t));
        auto u = io::at_node(cfg.at("times"), [&] {
            return laplacian ? laplacian_propagate(datum.f, kind.alpha(), t) : propagate(datum.f, kind, t);
        });
        const strichartz::detail::ModulusTable table(u);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const double v = table.norm(ps[i]);
            series[i].push_back(v);
            csv += num(t) + "," + io::exponent_text(ps[i]) + "," + num(v) + ",grid\n";
            if (closed) {
                const auto s2 = propagate_gaussian_exact({*datum.gaussian_sigma2, grid.dim()}, kind, t).sigma2;
                csv += num(t) + "," + io::exponent_text(ps[i]) + "," + num(gaussian_lp_exact(s2, grid.dim(), ps[i])) +
                       ",closed-form\n";
            }
        }
        last = std::move(u);
    }
    detail::emit(r, dir, "propagate.csv", csv);
    if (cfg.has("save_field") && cfg.at("save_field").boolean()) detail::emit(r, dir, "field.csv", io::grid_function_csv(*last));

    json fits = json::array();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (const auto fit = detail::try_fit(times, series[i], false)) {
            fits.push_back({{"exponent", io::exponent_text(ps[i])}, {"fit", io::fit_json(*fit)}});
        }
    }
    r.summary["datum"] = datum.description;
    r.summary["propagator"] = kind.describe();
    r.summary["laplacian"] = laplacian;
    r.summary["fits"] = fits;
}

inline void run_functional_sweep(const Node& cfg, const std::filesystem::path& dir, RunResult& r, const Options& opt) {
    const std::string functional = cfg.at("functional").text();
    if (functional != "SP" && functional != "SR") cfg.at("functional").fail("expected 'SP' or 'SR'");
    const bool sp = functional == "SP";
    const Grid grid = read_grid(cfg.at("grid"));
    const Datum datum = read_datum(cfg.at("datum"), grid);
    const auto x = io::psi_from_json(cfg.at("x"));
    const auto y = io::psi_from_json(cfg.at("y"));
    const auto kind = sp ? (cfg.has("propagator") ? read_propagator(cfg.at("propagator")) : PropagatorKind::heat())
                         : PropagatorKind::schrodinger();
    if (sp && kind.family() == PropagatorKind::Family::schrodinger) {
        cfg.at("propagator").fail("the parabolic functional needs a heat or fractional propagator");
    }
    const auto times = read_times(cfg.at("times"));
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 2.0)) cfg.at("times").fail("functional sweeps require t > 2");
    }
    check_window(cfg.at("times"), times, datum_safe_time(grid, kind, datum), kind.describe() + " and " + datum.description);

    static const json empty = json::object();
    const Node consts = cfg.has("constants") ? cfg.at("constants") : Node(empty, "/constants");
    const double k1 = consts.number_or("K1", 1.0), k2 = consts.number_or("K2", 1.0), k = consts.number_or("K", 1.0);
    const auto norm = read_normalization(cfg);

    for (const auto& w : sp ? parabolic_pair_warnings(x, y) : schrodinger_pair_warnings(x, y)) detail::warn(r, opt, w);

    CurveLabel label{functional, x.describe(), y.describe(), datum.description, {}};
    if (sp) label.constants = {{"K1", k1}, {"K2", k2}};
    else label.constants = {{"K", k}};
    FunctionalCurve curve(label);
    for (double t : times) {
        detail::note(opt, functional + " at t = " + num(t));
        const double v = io::at_node(consts, [&] {
            return sp ? w_sp(datum.f, x, y, t, k1, k2, kind) : v_sr(datum.f, x, y, t, k, norm);
        });
        curve.append(t, v);
    }
    detail::emit(r, dir, "curve.csv", io::curve_csv(curve));

    r.summary["functional"] = functional;
    r.summary["x"] = io::psi_to_json(x);
    r.summary["y"] = io::psi_to_json(y);
    r.summary["datum"] = datum.description;
    r.summary["propagator"] = kind.describe();
    if (!sp) r.summary["sr_normalization"] = to_string(norm);
    json cs = json::object();
    for (const auto& [name, value] : label.constants) cs[name] = value;
    r.summary["constants"] = cs;
    r.summary["min"] = io::json_number(curve.min_value());
    r.summary["max"] = io::json_number(curve.max_value());
    r.summary["ratio"] = io::json_number(curve.max_value() / curve.min_value());
    if (const auto fit = detail::try_fit(curve.included_times(), curve.included_values(), false)) {
        r.summary["fit"] = io::fit_json(*fit);
    }
    r.summary["provenance"] = {{"value", "grid"}, {"fit", "fit"}};
}

inline void run_witness_sp(const Node& cfg, const std::filesystem::path& dir, RunResult& r, const Options&) {
    const Grid grid = read_grid(cfg.at("grid"));
    const auto nu = io::psi_from_json(cfg.at("nu"));
    const auto kind = cfg.has("propagator") ? read_propagator(cfg.at("propagator")) : PropagatorKind::heat();
    const auto times = read_times(cfg.at("times"));
    check_window(cfg.at("times"), times, max_safe_time(grid, kind, 1.0), kind.describe() + " of g_1");
    const auto report = io::at_node(cfg, [&] { return sp_witness(nu, times, grid, kind); });
    detail::emit(r, dir, "witness.csv", io::witness_csv(report));
    r.summary = io::witness_summary(report);
    r.summary["nu"] = io::psi_to_json(nu);
    r.summary["propagator"] = kind.describe();
    r.summary["thresholds"] = {{"ratio_below", 3.0}, {"gap_below", 1e-6}};
    r.summary["pass"] = report.liminf_positive() && report.ratio < 3.0 && report.max_rel_gap < 1e-6;
}

inline void run_witness_sr(const Node& cfg, const std::filesystem::path& dir, RunResult& r, const Options&) {
    const Grid grid = read_grid(cfg.at("grid"));
    const auto times = read_times(cfg.at("times"));
    const auto norm = read_normalization(cfg);
    check_window(cfg.at("times"), times, max_safe_time(grid, PropagatorKind::schrodinger(), 1.0), "schrodinger of g_1");
    const auto report = io::at_node(cfg, [&] { return sr_witness(times, grid, norm); });
    detail::emit(r, dir, "witness.csv", io::witness_csv(report));
    r.summary = io::witness_summary(report);
    r.summary["sr_normalization"] = to_string(norm);
    r.summary["thresholds"] = {{"ratio_below", 3.0}, {"gap_below", 1e-6}};
    r.summary["pass"] = report.liminf_positive() && report.ratio < 3.0 && report.max_rel_gap < 1e-6;
}

inline void run_moment_law(const Node& cfg, const std::filesystem::path& dir, RunResult& r, const Options&) {
    const Grid grid = read_grid(cfg.at("grid"));
    const auto rs = read_exponents(cfg.at("exponents"));
    const auto times = read_times(cfg.at("times"));
    check_window(cfg.at("times"), times, max_safe_time(grid, PropagatorKind::schrodinger(), 1.0), "schrodinger of g_1");
    const double tol = cfg.number_or("tolerance", 0.02);
    const auto rows = io::at_node(cfg, [&] { return gaussian_moment_law_check(grid, rs, times); });
    std::string csv = "r,fitted_slope,closed_form_slope,predicted_slope,abs_error,rel_error\n";
    json out = json::array();
    bool pass = true;
    for (const auto& row : rows) {
        csv += io::exponent_text(row.r) + "," + num(row.fitted_slope) + "," + num(row.closed_form_slope) + "," +
               num(row.predicted_slope) + "," + num(row.abs_error) + "," + num(row.rel_error) + "\n";
        const bool ok = row.rel_error < tol;
        pass = pass && ok;
        out.push_back({{"r", io::exponent_text(row.r)}, {"fitted_slope", row.fitted_slope},
                       {"predicted_slope", row.predicted_slope}, {"rel_error", row.rel_error}, {"pass", ok}});
    }
    detail::emit(r, dir, "moment_law.csv", csv);
    r.summary["rows"] = out;
    r.summary["tolerance"] = tol;
    r.summary["pass"] = pass;
    r.summary["provenance"] = {{"fitted_slope", "fit"}, {"closed_form_slope", "closed-form"}};
}

inline void run_mixed_norm(const Node& cfg, const std::filesystem::path& dir, RunResult& r, const Options& opt) {
    const Grid grid = read_grid(cfg.at("grid"));
    const Datum datum = read_datum(cfg.at("datum"), grid);
    const auto kind = read_propagator(cfg.at("propagator"));
    const auto y = io::psi_from_json(cfg.at("y"));
    const auto theta = io::psi_from_json(cfg.at("theta"));
    const auto times = read_times(cfg.at("times"));
    if (!(times.front() > 0.0)) cfg.at("times").fail("mixed-norm times must be positive");
    check_window(cfg.at("times"), times, datum_safe_time(grid, kind, datum), kind.describe() + " and " + datum.description);
    TimeCurve curve;
    std::string csv = "t,value,provenance\n";
    for (double t : times) {
        detail::note(opt, "||u(t)||_Y at t = " + num(t));
        const double v = gls_norm(propagate(datum.f, kind, t), y);
        curve.t.push_back(t);
        curve.value.push_back(v);
        csv += num(t) + "," + num(v) + ",grid\n";
    }
    const double value = io::at_node(cfg.at("times"), [&] { return mixed_norm(curve, theta); });
    detail::emit(r, dir, "mixed_norm.csv", csv);
    r.summary["datum"] = datum.description;
    r.summary["propagator"] = kind.describe();
    r.summary["y"] = io::psi_to_json(y);
    r.summary["theta"] = io::psi_to_json(theta);
    r.summary["horizon"] = times.back();
    r.summary["mixed_norm"] = io::json_number(value);
    r.summary["finite"] = std::isfinite(value);
}

/**
 * Measured decay of one quantity against its predicted rate.
 *   heat-lp, schrodinger-lp, fractional-decay, fractional-laplacian-decay: |P_t g_1|_r on the grid;
 *   gls-parabolic, gls-schrodinger: ||P_t g_1||_Y / ||g_1||_X for the zeta pair in "params",
 *     through the grid ("channel": "grid") or the exact Gaussian moments ("closed-form").
 */
inline void run_rate_report(const Node& cfg, const std::filesystem::path& dir, RunResult& r, const Options& opt) {
    const auto src_node = cfg.at("source");
    const RateSource src = io::at_node(src_node, [&] { return rate_source_from_string(src_node.text()); });
    const auto params = cfg.at("params");
    const auto times = read_times(cfg.at("times"));
    const bool with_log = cfg.has("with_log") && cfg.at("with_log").boolean();
    const double tol = cfg.number_or("tolerance", 0.05);
    const bool gls = src == RateSource::gls_parabolic || src == RateSource::gls_schrodinger;
    const std::string channel = cfg.text_or("channel", "grid");
    if (channel != "grid" && channel != "closed-form") cfg.at("channel").fail("expected 'grid' or 'closed-form'");

    PredictedRate predicted{};
    std::vector<double> values;
    const int dim = params.has("dim") ? params.at("dim").integer() : 1;
    if (gls) {
        GlsPairParams g;
        g.dim = dim;
        g.a1 = params.at("a1").number();
        g.b1 = params.at("b1").number();
        g.a2 = params.at("a2").number();
        g.b2 = params.at("b2").number();
        g.alpha1 = params.at("alpha1").number();
        g.beta1 = params.at("beta1").number();
        g.alpha2 = params.at("alpha2").number();
        g.beta2 = params.at("beta2").number();
        predicted = io::at_node(params, [&] { return predicted_rate(src, g); });
        const auto x = io::at_node(params, [&] { return PsiSpec::zeta(g.a1, g.b1, g.alpha1, g.beta1); });
        const auto y = io::at_node(params, [&] { return PsiSpec::zeta(g.a2, g.b2, g.alpha2, g.beta2); });
        const auto kind = src == RateSource::gls_parabolic ? PropagatorKind::heat() : PropagatorKind::schrodinger();
        if (channel == "closed-form") {
            const double nx = gaussian_gls_norm(1.0, dim, x);
            for (double t : times) {
                detail::note(opt, "closed-form ratio at t = " + num(t));
                const auto s2 = propagate_gaussian_exact({1.0, dim}, kind, t).sigma2;
                values.push_back(gaussian_gls_norm(s2, dim, y) / nx);
            }
        } else {
            const Grid grid = read_grid(cfg.at("grid"));
            if (grid.dim() != dim) cfg.at("grid").at("dim").fail("grid dimension differs from params/dim");
            check_window(cfg.at("times"), times, max_safe_time(grid, kind, 1.0), kind.describe() + " of g_1");
            const auto f = io::at_node(cfg.at("grid"), [&] { return gaussian_sample(grid, {1.0, dim}); });
            const double nx = gls_norm(f, x);
            for (double t : times) {
                detail::note(opt, "grid ratio at t = " + num(t));
                values.push_back(gls_norm(propagate(f, kind, t), y) / nx);
            }
        }
    } else {
        LebesgueParams l;
        l.dim = dim;
        l.p = params.has("p") ? params.at("p").exponent() : Exponent(1.0);
        l.r = params.at("r").exponent();
        l.alpha = params.number_or("alpha", 2.0);
        predicted = io::at_node(params, [&] { return predicted_rate(src, l); });
        const Grid grid = read_grid(cfg.at("grid"));
        if (grid.dim() != dim) cfg.at("grid").at("dim").fail("grid dimension differs from params/dim");
        const auto kind = src == RateSource::heat_lp          ? PropagatorKind::heat()
                          : src == RateSource::schrodinger_lp ? PropagatorKind::schrodinger()
                                                              : io::at_node(params, [&] { return PropagatorKind::fractional(l.alpha); });
        check_window(cfg.at("times"), times, max_safe_time(grid, kind, 1.0), kind.describe() + " of g_1");
        const auto f = io::at_node(cfg.at("grid"), [&] { return gaussian_sample(grid, {1.0, dim}); });
        for (double t : times) {
            detail::note(opt, "grid norm at t = " + num(t));
            const auto u = src == RateSource::fractional_laplacian_decay ? laplacian_propagate(f, l.alpha, t)
                                                                         : propagate(f, kind, t);
            values.push_back(lp_norm(u, l.r));
        }
    }

    const auto fit = io::at_node(cfg.at("times"), [&] { return fit_rate(times, values, with_log); });
    std::string csv = "t,value,provenance\n";
    const std::string prov = gls && channel == "closed-form" ? "closed-form" : "grid";
    for (std::size_t k = 0; k < times.size(); ++k) csv += num(times[k]) + "," + num(values[k]) + "," + prov + "\n";
    detail::emit(r, dir, "rate.csv", csv);

    const double ds = fit.slope - predicted.power;
    const double rel = predicted.power == 0.0 ? std::abs(ds) : std::abs(ds / predicted.power);
    const bool log_ok = !with_log || std::abs(fit.log_exponent - predicted.log_power) <= cfg.number_or("log_tolerance", 0.3);
    r.summary["source"] = to_string(src);
    r.summary["channel"] = gls ? channel : "grid";
    r.summary["fit"] = io::fit_json(fit);
    r.summary["predicted"] = {{"power", predicted.power}, {"log_power", predicted.log_power}};
    r.summary["slope_error"] = rel;
    r.summary["slope_error_is_relative"] = predicted.power != 0.0;
    r.summary["tolerance"] = tol;
    r.summary["pass"] = rel < tol && log_ok;
    r.summary["provenance"] = {{"value", prov}, {"fit", "fit"}};
}

inline const std::map<std::string, std::function<void(const Node&, const std::filesystem::path&, RunResult&, const Options&)>>&
runners() {
    static const std::map<std::string, std::function<void(const Node&, const std::filesystem::path&, RunResult&, const Options&)>> table{
        {"norms", run_norms},
        {"fundamental", run_fundamental},
        {"propagate", run_propagate},
        {"functional-sweep", run_functional_sweep},
        {"witness-sp", run_witness_sp},
        {"witness-sr", run_witness_sr},
        {"moment-law", run_moment_law},
        {"mixed-norm", run_mixed_norm},
        {"rate-report", run_rate_report},
    };
    return table;
}

/**
 * Runs one experiment config. `out_dir` overrides the config's "output" field;
 * without either, artifacts go next to the config in a directory named after it.
 * Throws ConfigError (and std::invalid_argument) for config problems and
 * std::domain_error for numerical-domain failures such as f not in X.
 */
inline RunResult run(const json& config, const std::filesystem::path& out_dir, const Options& opt = {}) {
    const Node cfg(config, "");
    if (!config.is_object()) cfg.fail("expected a JSON object");
    const std::string kind = cfg.at("kind").text();
    const auto it = runners().find(kind);
    if (it == runners().end()) cfg.at("kind").fail("unknown experiment kind '" + kind + "'");

    std::filesystem::create_directories(out_dir);
    RunResult r;
    r.kind = kind;
    r.summary = json::object();
    it->second(cfg, out_dir, r, opt);
    r.summary["kind"] = kind;
    r.summary["warnings"] = r.warnings;
    detail::emit(r, out_dir, "summary.json", r.summary.dump(2) + "\n");
    return r;
}

inline RunResult run_file(const std::filesystem::path& config_path, std::optional<std::filesystem::path> out_dir,
                          const Options& opt = {}) {
    json config;
    try {
        config = json::parse(io::read_text(config_path.string()));
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("not valid JSON: ") + e.what());
    } catch (const std::runtime_error& e) {
        throw ConfigError("", e.what());
    }
    std::filesystem::path dir;
    if (out_dir) {
        dir = *out_dir;
    } else if (config.is_object() && config.contains("output")) {
        dir = Node(config, "").at("output").text();
    } else {
        dir = config_path.parent_path() / ("out_" + config_path.stem().string());
    }
    return run(config, dir, opt);
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fixed(double x, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << (x == 0.0 ? 0.0 : x);
    return s.str();
}

inline double as_double(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string() && j.get<std::string>() == "inf") return kInf;
    return std::nan("");
}

inline std::string verdict(const json& s) {
    if (!s.contains("pass")) return "";
    return s["pass"].get<bool>() ? "PASS" : "FAIL";
}

inline std::string report_one(const std::filesystem::path& dir, const json& s) {
    std::ostringstream out;
    const std::string kind = s.value("kind", "unknown");
    out << "== " << dir.filename().string() << " (" << kind << ")\n";
    if (kind == "witness-sp" || kind == "witness-sr") {
        out << "min=" << fixed(as_double(s["min"])) << ", max=" << fixed(as_double(s["max"]))
            << ", ratio=" << fixed(as_double(s["ratio"])) << ", " << verdict(s) << "\n";
        out << "max grid/closed-form gap=" << fixed(as_double(s["max_rel_gap"]), 3)
            << ", fitted slope=" << fixed(as_double(s["fitted_slope"])) << "\n";
    } else if (kind == "functional-sweep") {
        out << s["functional"].get<std::string>() << ": min=" << fixed(as_double(s["min"]))
            << ", max=" << fixed(as_double(s["max"])) << ", ratio=" << fixed(as_double(s["ratio"])) << "\n";
        if (s.contains("fit")) out << "fitted s=" << fixed(s["fit"]["slope"].get<double>()) << "\n";
    } else if (kind == "rate-report") {
        const double fs = s["fit"]["slope"], ps = s["predicted"]["power"];
        const double err = s["slope_error"];
        out << "fitted s=" << fixed(fs) << ", predicted s=" << fixed(ps) << ", Δ="
            << (s["slope_error_is_relative"].get<bool>() ? fixed(100.0 * err, 4) + "%" : fixed(err, 4) + " (absolute)");
        if (s["fit"]["with_log"].get<bool>()) {
            out << "; fitted γ=" << fixed(s["fit"]["log_exponent"].get<double>())
                << ", predicted γ=" << fixed(s["predicted"]["log_power"].get<double>());
        }
        out << ", " << verdict(s) << "\n";
    } else if (kind == "moment-law") {
        for (const auto& row : s["rows"]) {
            out << "r=" << row["r"].get<std::string>() << ": fitted s=" << fixed(row["fitted_slope"].get<double>())
                << ", predicted s=" << fixed(row["predicted_slope"].get<double>())
                << ", Δ=" << fixed(100.0 * row["rel_error"].get<double>(), 4) << "%, "
                << (row["pass"].get<bool>() ? "PASS" : "FAIL") << "\n";
        }
    } else if (kind == "fundamental") {
        if (s.contains("max_consecutive_ratio_change")) {
            out << "numeric/asymptotic ratio drift=" << fixed(100.0 * s["max_consecutive_ratio_change"].get<double>(), 4)
                << "%, " << verdict(s) << "\n";
        } else {
            out << "fundamental function tabulated\n";
        }
    } else if (kind == "mixed-norm") {
        out << "mixed norm over (0, " << fixed(s["horizon"].get<double>()) << ") = " << fixed(as_double(s["mixed_norm"]))
            << "\n";
    } else if (kind == "propagate") {
        for (const auto& f : s["fits"]) {
            out << "r=" << f["exponent"].get<std::string>() << ": fitted s=" << fixed(f["fit"]["slope"].get<double>()) << "\n";
        }
    } else {
        out << "norms tabulated\n";
    }
    for (const auto& w : s.value("warnings", json::array())) out << "warning: " << w.get<std::string>() << "\n";
    return out.str();
}

}  // namespace detail

// Human-readable summary of one run directory, or of every run directory inside `dir`.
inline std::string report(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ConfigError("", "'" + dir.string() + "' is not a directory");
    std::vector<fs::path> runs;
    if (fs::exists(dir / "summary.json")) {
        runs.push_back(dir);
    } else {
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_directory() && fs::exists(e.path() / "summary.json")) runs.push_back(e.path());
        }
        std::sort(runs.begin(), runs.end());
    }
    if (runs.empty()) throw ConfigError("", "no run artifacts (summary.json) under '" + dir.string() + "'");
    std::string out;
    for (const auto& r : runs) {
        json s;
        try {
            s = json::parse(io::read_text((r / "summary.json").string()));
        } catch (const json::exception& e) {
            throw ConfigError("", "unreadable summary in '" + r.string() + "': " + e.what());
        }
        out += detail::report_one(r, s);
    }
    return out;
}

}  // namespace strichartz::experiment
