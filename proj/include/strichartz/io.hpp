#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "strichartz/functionals.hpp"
#include "strichartz/grid_field.hpp"
#include "strichartz/spaces.hpp"
#include "strichartz/witness.hpp"

namespace strichartz::io {

using nlohmann::json;

// A config problem, carrying the JSON path of the offending field.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::invalid_argument("config field '" + path + "': " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// Fixed 17-significant-digit decimal, so a CSV round-trips every double exactly.
inline std::string num(double x) {
    if (x == kInf) return "inf";
    if (x == -kInf) return "-inf";
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string exponent_text(Exponent p) { return p.is_infinite() ? "inf" : num(p.value()); }

// JSON numbers cannot hold infinity; store it as the string "inf".
inline json json_number(double x) {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

inline std::string grid_function_csv(const GridFunction& f) {
    std::string out = "index,real,imag\n";
    for (std::size_t k = 0; k < f.values().size(); ++k) {
        out += std::to_string(k) + "," + num(f[k].real()) + "," + num(f[k].imag()) + "\n";
    }
    return out;
}

inline GridFunction grid_function_from_csv(const Grid& grid, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "index,real,imag") throw std::invalid_argument("grid function CSV: bad header");
    std::vector<Complex> v(grid.size());
    std::vector<bool> seen(grid.size(), false);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
            throw std::invalid_argument("grid function CSV: malformed row '" + line + "'");
        }
        const std::size_t k = std::stoul(a);
        if (k >= v.size() || seen[k]) throw std::invalid_argument("grid function CSV: bad or repeated index " + a);
        v[k] = Complex(std::stod(b), std::stod(c));
        seen[k] = true;
    }
    for (bool s : seen) {
        if (!s) throw std::invalid_argument("grid function CSV: missing nodes");
    }
    return GridFunction(grid, std::move(v));
}

inline std::string curve_csv(const FunctionalCurve& c) {
    std::string out = "t,value,excluded_flag,reason\n";
    for (const auto& s : c.samples()) {
        out += num(s.t) + "," + num(s.value) + "," + (s.excluded ? "1" : "0") + "," + s.reason + "\n";
    }
    return out;
}

inline std::string witness_csv(const WitnessReport& r) {
    std::string out = "t,grid_value,closed_form_value,rel_gap\n";
    for (const auto& row : r.rows) {
        out += num(row.t) + "," + num(row.grid_value) + "," + num(row.closed_form_value) + "," + num(row.rel_gap) + "\n";
    }
    return out;
}

inline json fit_json(const RateFit& f) {
    return {{"slope", f.slope},         {"log_exponent", f.log_exponent}, {"intercept", f.intercept},
            {"residual", f.residual},   {"t_min", f.t_min},               {"t_max", f.t_max},
            {"with_log", f.with_log}};
}

inline json witness_summary(const WitnessReport& r) {
    return {{"functional", r.functional},
            {"min", json_number(r.min_value)},
            {"max", json_number(r.max_value)},
            {"ratio", json_number(r.ratio)},
            {"max_rel_gap", json_number(r.max_rel_gap)},
            {"tail_min_grid", json_number(r.tail_min_grid)},
            {"tail_min_closed_form", json_number(r.tail_min_closed_form)},
            {"liminf_positive", r.liminf_positive()},
            {"fitted_slope", r.fit.slope},
            {"fit", fit_json(r.fit)},
            {"provenance", {{"grid_value", "grid"}, {"closed_form_value", "closed-form"}, {"fitted_slope", "fit"}}}};
}

// ---------------------------------------------------------------------------
// Config readers with field paths
// ---------------------------------------------------------------------------

// A view of one JSON node that knows where it sits in the document.
class Node {
public:
    Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const json& raw() const { return *j_; }
    const std::string& path() const { return path_; }
    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

    Node at(const std::string& key) const {
        if (!j_->is_object()) fail("expected an object");
        if (!j_->contains(key)) throw ConfigError(child(key), "missing required field");
        return Node((*j_)[key], child(key));
    }
    Node at(std::size_t i) const {
        if (!j_->is_array() || i >= j_->size()) fail("expected an array with index " + std::to_string(i));
        return Node((*j_)[i], path_ + "/" + std::to_string(i));
    }
    std::size_t size() const {
        if (!j_->is_array()) fail("expected an array");
        return j_->size();
    }

    double number() const {
        if (j_->is_number()) return j_->get<double>();
        if (j_->is_string()) {
            const auto s = j_->get<std::string>();
            if (s == "inf" || s == "infinity") return kInf;
        }
        fail("expected a number");
    }
    double positive() const {
        const double x = number();
        if (!(x > 0.0) || !std::isfinite(x)) fail("expected a positive finite number");
        return x;
    }
    int integer() const {
        if (!j_->is_number_integer()) fail("expected an integer");
        return j_->get<int>();
    }
    bool boolean() const {
        if (!j_->is_boolean()) fail("expected true or false");
        return j_->get<bool>();
    }
    std::string text() const {
        if (!j_->is_string()) fail("expected a string");
        return j_->get<std::string>();
    }
    Complex complex() const {
        if (j_->is_array()) {
            if (j_->size() != 2) fail("expected [re, im]");
            return {at(0).number(), at(1).number()};
        }
        return number();
    }
    Exponent exponent() const {
        const double x = number();
        try {
            const Exponent p(x);
            require_valid_exponent(p, "exponent");
            return p;
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }

    double number_or(const std::string& key, double fallback) const { return has(key) ? at(key).number() : fallback; }
    std::string text_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? at(key).text() : fallback;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_, what); }

private:
    std::string child(const std::string& key) const { return path_ + "/" + key; }

    const json* j_;
    std::string path_;
};

// Runs `fn`, re-raising library precondition failures as errors at this node.
template <typename Fn>
auto at_node(const Node& n, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        n.fail(e.what());
    }
}

/**
 * PsiSpec blocks:
 *   {"variant": "zeta", "a": 1, "b": "inf", "alpha": 1, "beta": -1}
 *   {"variant": "degenerate", "s": 2}                 (s may be "inf")
 *   {"variant": "constant", "a": 2, "b": 4, "level": 1}
 *   {"variant": "table", "points": [[p, psi], ...]}  or  {"variant": "table", "points": {"p": psi, ...}}
 */
inline PsiSpec psi_from_json(const Node& n) {
    const std::string variant = n.at("variant").text();
    if (variant == "zeta") {
        const double a = n.at("a").number(), b = n.at("b").number();
        const double alpha = n.at("alpha").number(), beta = n.at("beta").number();
        return at_node(n, [&] { return PsiSpec::zeta(a, b, alpha, beta); });
    }
    if (variant == "degenerate") {
        const auto s = n.at("s").exponent();
        return at_node(n, [&] { return PsiSpec::degenerate(s); });
    }
    if (variant == "constant") {
        const double a = n.at("a").number(), b = n.at("b").number(), level = n.at("level").number();
        return at_node(n, [&] { return PsiSpec::constant(a, b, level); });
    }
    if (variant == "table") {
        const auto pts_node = n.at("points");
        std::vector<std::pair<double, double>> pts;
        if (pts_node.raw().is_object()) {
            for (const auto& [key, value] : pts_node.raw().items()) {
                double p = 0.0;
                try {
                    p = std::stod(key);
                } catch (const std::exception&) {
                    throw ConfigError(pts_node.path() + "/" + key, "table key is not a number");
                }
                pts.emplace_back(p, Node(value, pts_node.path() + "/" + key).number());
            }
            std::sort(pts.begin(), pts.end());
        } else {
            for (std::size_t i = 0; i < pts_node.size(); ++i) {
                const auto row = pts_node.at(i);
                pts.emplace_back(row.at(0).number(), row.at(1).number());
            }
        }
        return at_node(pts_node, [&] { return PsiSpec::table(pts); });
    }
    n.at("variant").fail("unknown variant '" + variant + "' (zeta, degenerate, constant, table)");
}

inline json psi_to_json(const PsiSpec& psi) {
    if (psi.is_degenerate()) {
        const auto s = psi.degenerate_exponent();
        return {{"variant", "degenerate"}, {"s", s.is_infinite() ? json("inf") : json(s.value())}};
    }
    if (psi.variant() == PsiSpec::Variant::zeta) {
        const auto& z = psi.zeta_params();
        return {{"variant", "zeta"}, {"a", z.a()}, {"b", json_number(z.b())}, {"alpha", z.alpha()}, {"beta", z.beta()}};
    }
    if (psi.variant() == PsiSpec::Variant::constant) {
        return {{"variant", "constant"}, {"a", psi.lower()}, {"b", json_number(psi.upper())}, {"level", psi.constant_level()}};
    }
    if (psi.variant() == PsiSpec::Variant::table) {
        json pts = json::array();
        for (const auto& [p, v] : psi.table_points()) pts.push_back({p, v});
        return {{"variant", "table"}, {"points", pts}};
    }
    return {{"variant", "closure"}, {"description", psi.describe()}};
}

}  // namespace strichartz::io
