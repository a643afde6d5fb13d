#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "strichartz/fft.hpp"

namespace strichartz {

using Complex = std::complex<double>;

/**
 * An integrability exponent p in [1, inf].
 *
 * Infinity is a distinguished state rather than a large float, so that
 * 1/p, comparisons and formatting behave exactly.
 */
class Exponent {
public:
    constexpr Exponent(double p) : value_(p), infinite_(p == std::numeric_limits<double>::infinity()) {}

    static constexpr Exponent infinity() { return Exponent(std::numeric_limits<double>::infinity()); }

    constexpr bool is_infinite() const { return infinite_; }

    // Finite value; +inf when infinite.
    constexpr double value() const { return value_; }

    constexpr double reciprocal() const { return infinite_ ? 0.0 : 1.0 / value_; }

    // Hoelder conjugate p' = p/(p-1); 1 <-> inf.
    constexpr Exponent conjugate() const {
        if (infinite_) return Exponent(1.0);
        if (value_ == 1.0) return infinity();
        return Exponent(value_ / (value_ - 1.0));
    }

    friend constexpr bool operator==(Exponent a, Exponent b) {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
    }
    friend constexpr bool operator<(Exponent a, Exponent b) {
        if (a.infinite_) return false;
        if (b.infinite_) return true;
        return a.value_ < b.value_;
    }

    std::string to_string() const {
        if (infinite_) return "inf";
        std::ostringstream os;
        os.precision(17);
        os << value_;
        return os.str();
    }

private:
    double value_;
    bool infinite_;
};

inline void require_valid_exponent(Exponent p, const char* where) {
    if (!p.is_infinite() && !(p.value() >= 1.0)) {
        throw std::invalid_argument(std::string(where) + ": exponent must be >= 1 or inf, got " +
                                    p.to_string());
    }
}

// Isotropic uniform grid covering [-L, L)^d with periodic identification.
class Grid {
public:
    static Grid make(int dim, double half_extent, std::size_t points_per_axis) {
        if (dim < 1 || dim > 3) {
            throw std::invalid_argument("make_grid: dimension must be 1, 2 or 3");
        }
        if (!(half_extent > 0.0) || !std::isfinite(half_extent)) {
            throw std::invalid_argument("make_grid: half extent L must be positive and finite");
        }
        if (points_per_axis < 8 || (points_per_axis & (points_per_axis - 1)) != 0) {
            throw std::invalid_argument("make_grid: points per axis must be a power of two >= 8, got " +
                                        std::to_string(points_per_axis));
        }
        return Grid(dim, half_extent, points_per_axis);
    }

    int dim() const { return dim_; }
    double half_extent() const { return half_extent_; }
    std::size_t points_per_axis() const { return n_; }
    double spacing() const { return spacing_; }
    std::size_t size() const { return size_; }
    double cell_volume() const { return cell_volume_; }

    // x_k = -L + k h, written as (k - N/2) h so mirrored nodes are exact negatives.
    double coordinate(std::size_t k) const {
        return (static_cast<double>(k) - static_cast<double>(n_ / 2)) * spacing_;
    }

    std::array<std::size_t, 3> unravel(std::size_t flat) const {
        std::array<std::size_t, 3> idx{0, 0, 0};
        for (int axis = dim_ - 1; axis >= 0; --axis) {
            idx[static_cast<std::size_t>(axis)] = flat % n_;
            flat /= n_;
        }
        return idx;
    }

    std::size_t ravel(const std::array<std::size_t, 3>& idx) const {
        std::size_t flat = 0;
        for (int axis = 0; axis < dim_; ++axis) flat = flat * n_ + idx[static_cast<std::size_t>(axis)];
        return flat;
    }

    double radius_squared(std::size_t flat) const {
        const auto idx = unravel(flat);
        double r2 = 0.0;
        for (int axis = 0; axis < dim_; ++axis) {
            const double x = coordinate(idx[static_cast<std::size_t>(axis)]);
            r2 += x * x;
        }
        return r2;
    }

    // |xi|^2 for DFT bin `flat`, with xi_k = pi k / L, k in [-N/2, N/2).
    double frequency_squared(std::size_t flat) const {
        const auto idx = unravel(flat);
        const double unit = std::numbers::pi / half_extent_;
        double k2 = 0.0;
        for (int axis = 0; axis < dim_; ++axis) {
            const double xi = unit * static_cast<double>(fft::signed_index(idx[static_cast<std::size_t>(axis)], n_));
            k2 += xi * xi;
        }
        return k2;
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.dim_ == b.dim_ && a.half_extent_ == b.half_extent_ && a.n_ == b.n_;
    }

private:
    Grid(int dim, double half_extent, std::size_t n)
        : dim_(dim), half_extent_(half_extent), n_(n), spacing_(2.0 * half_extent / static_cast<double>(n)) {
        size_ = 1;
        cell_volume_ = 1.0;
        for (int k = 0; k < dim_; ++k) {
            size_ *= n_;
            cell_volume_ *= spacing_;
        }
    }

    int dim_;
    double half_extent_;
    std::size_t n_;
    double spacing_;
    std::size_t size_ = 0;
    double cell_volume_ = 0.0;
};

inline Grid make_grid(int dim, double half_extent, std::size_t points_per_axis) {
    return Grid::make(dim, half_extent, points_per_axis);
}

// Complex samples of f on a Grid. Immutable; all entries finite.
class GridFunction {
public:
    GridFunction(Grid grid, std::vector<Complex> values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw std::invalid_argument("GridFunction: expected " + std::to_string(grid_.size()) +
                                        " samples, got " + std::to_string(values_.size()));
        }
        for (const auto& v : values_) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                throw std::invalid_argument("GridFunction: non-finite sample");
            }
        }
    }

    static GridFunction zero(const Grid& grid) { return GridFunction(grid, std::vector<Complex>(grid.size())); }

    template <typename Fn>
    static GridFunction from_coordinates(const Grid& grid, Fn&& fn) {
        std::vector<Complex> v(grid.size());
        for (std::size_t j = 0; j < v.size(); ++j) {
            const auto idx = grid.unravel(j);
            std::array<double, 3> x{0.0, 0.0, 0.0};
            for (int axis = 0; axis < grid.dim(); ++axis) {
                x[static_cast<std::size_t>(axis)] = grid.coordinate(idx[static_cast<std::size_t>(axis)]);
            }
            v[j] = fn(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim())));
        }
        return GridFunction(grid, std::move(v));
    }

    const Grid& grid() const { return grid_; }
    std::span<const Complex> values() const { return values_; }
    const Complex& operator[](std::size_t k) const { return values_[k]; }

    bool is_zero() const {
        return std::all_of(values_.begin(), values_.end(), [](const Complex& v) { return v == Complex{}; });
    }

    friend GridFunction operator+(const GridFunction& a, const GridFunction& b) {
        require_same_grid(a, b);
        std::vector<Complex> v(a.values_.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.values_[k] + b.values_[k];
        return GridFunction(a.grid_, std::move(v));
    }
    friend GridFunction operator-(const GridFunction& a, const GridFunction& b) {
        require_same_grid(a, b);
        std::vector<Complex> v(a.values_.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.values_[k] - b.values_[k];
        return GridFunction(a.grid_, std::move(v));
    }
    friend GridFunction operator*(Complex c, const GridFunction& a) {
        std::vector<Complex> v(a.values_.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = c * a.values_[k];
        return GridFunction(a.grid_, std::move(v));
    }

private:
    static void require_same_grid(const GridFunction& a, const GridFunction& b) {
        if (!(a.grid_ == b.grid_)) throw std::invalid_argument("GridFunction: operands live on different grids");
    }

    Grid grid_;
    std::vector<Complex> values_;
};

// Indicator of the node-aligned box [-w, w)^d, w = m h (m nodes either side of the origin).
// Its measure is (2 m h)^d.
inline GridFunction node_aligned_indicator(const Grid& grid, std::size_t half_width_nodes) {
    const std::size_t n = grid.points_per_axis();
    if (half_width_nodes == 0 || half_width_nodes > n / 2) {
        throw std::invalid_argument("node_aligned_indicator: half width must be in [1, N/2] nodes");
    }
    const std::size_t lo = n / 2 - half_width_nodes;
    const std::size_t hi = n / 2 + half_width_nodes;
    std::vector<Complex> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        const auto idx = grid.unravel(j);
        bool inside = true;
        for (int axis = 0; axis < grid.dim(); ++axis) {
            const auto i = idx[static_cast<std::size_t>(axis)];
            inside = inside && i >= lo && i < hi;
        }
        v[j] = inside ? 1.0 : 0.0;
    }
    return GridFunction(grid, std::move(v));
}

// g_sigma(x) = (2 pi s)^{-d/2} exp(-|x|^2 / (2 s)), s = sigma^2 complex with Re s > 0.
struct GaussianSpec {
    Complex sigma2{1.0, 0.0};
    int dim = 1;

    void validate() const {
        if (!(sigma2.real() > 0.0) || !std::isfinite(sigma2.imag())) {
            throw std::invalid_argument("GaussianSpec: Re(sigma^2) must be positive");
        }
        if (dim < 1 || dim > 3) throw std::invalid_argument("GaussianSpec: dimension must be 1, 2 or 3");
    }

    // |g_sigma(x)| is a real Gaussian of this variance.
    double modulus_variance() const { return std::norm(sigma2) / sigma2.real(); }
};

namespace detail {

inline constexpr double kTailMassTolerance = 1e-10;

// Radius multiple z with d * erfc(z / sqrt 2) = tol: the half-width (in units of
// the standard deviation) a box needs to hold all but `tol` of a Gaussian's mass.
inline double tail_radius_multiple(int dim, double tol = kTailMassTolerance) {
    return std::numbers::sqrt2 * boost::math::erfc_inv(tol / static_cast<double>(dim));
}

// Fraction of the modulus mass of a (real-variance `var`) Gaussian lying outside [-R, R]^d.
inline double truncated_mass_fraction(double var, double radius, int dim) {
    const double e = std::erfc(radius / std::sqrt(2.0 * var));
    return -std::expm1(static_cast<double>(dim) * std::log1p(-e));
}

}  // namespace detail

inline GridFunction gaussian_sample(const Grid& grid, const GaussianSpec& spec) {
    spec.validate();
    if (spec.dim != grid.dim()) throw std::invalid_argument("gaussian_sample: dimension mismatch");
    const double L = grid.half_extent();
    if (L < 6.0 * std::sqrt(spec.sigma2.real())) {
        throw std::invalid_argument("gaussian_sample: grid half extent below 6 sqrt(Re sigma^2)");
    }
    const double lost = detail::truncated_mass_fraction(spec.modulus_variance(), L, grid.dim());
    if (lost > detail::kTailMassTolerance) {
        std::ostringstream os;
        os.precision(6);
        os << "gaussian_sample: truncated mass " << lost << " exceeds " << detail::kTailMassTolerance
           << "; need L >= " << detail::tail_radius_multiple(grid.dim()) * std::sqrt(spec.modulus_variance());
        throw std::invalid_argument(os.str());
    }
    const Complex s = spec.sigma2;
    const Complex norm = std::pow(2.0 * std::numbers::pi * s, -0.5 * grid.dim());
    const Complex inv_two_s = 1.0 / (2.0 * s);
    std::vector<Complex> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = norm * std::exp(-grid.radius_squared(j) * inv_two_s);
    return GridFunction(grid, std::move(v));
}

// Exact L_q norm of the (possibly complex-variance) Gaussian:
// |g|_q = |2 pi s|^{-d/2} (2 pi |s|^2 / (q Re s))^{d/(2q)}.
inline double gaussian_lp_exact(Complex sigma2, int dim, Exponent q) {
    if (!(sigma2.real() > 0.0)) throw std::invalid_argument("gaussian_lp_exact: Re(sigma^2) must be positive");
    require_valid_exponent(q, "gaussian_lp_exact");
    const double d = static_cast<double>(dim);
    const double two_pi = 2.0 * std::numbers::pi;
    const double log_peak = -0.5 * d * std::log(two_pi * std::abs(sigma2));
    if (q.is_infinite()) return std::exp(log_peak);
    const double qv = q.value();
    const double log_integral = 0.5 * d * std::log(two_pi * std::norm(sigma2) / (qv * sigma2.real()));
    return std::exp(log_peak + log_integral / qv);
}

namespace detail {

// log(|f_k| / peak) for the nonzero samples; lets many exponents reuse one pass of logs.
struct ModulusTable {
    double peak = 0.0;
    double cell_volume = 1.0;
    std::vector<double> log_scaled;

    explicit ModulusTable(const GridFunction& f) : cell_volume(f.grid().cell_volume()) {
        for (const auto& v : f.values()) peak = std::max(peak, std::abs(v));
        if (peak == 0.0) return;
        log_scaled.reserve(f.values().size());
        for (const auto& v : f.values()) {
            const double a = std::abs(v);
            if (a > 0.0) log_scaled.push_back(std::log(a / peak));
        }
    }

    double norm(Exponent p) const {
        if (peak == 0.0) return 0.0;
        if (p.is_infinite()) return peak;
        const double pv = p.value();
        double acc = 0.0;
        for (double l : log_scaled) acc += std::exp(pv * l);
        return peak * std::pow(acc * cell_volume, 1.0 / pv);
    }
};

}  // namespace detail

// Rectangle-rule L_p norm: (sum |f_k|^p h^d)^{1/p}, or max |f_k| for p = inf.
// Shares the moment table with moment_profile so both give bit-identical values.
inline double lp_norm(const GridFunction& f, Exponent p) {
    require_valid_exponent(p, "lp_norm");
    return detail::ModulusTable(f).norm(p);
}

// h(p) = |f|_p sampled over an exponent grid.
struct MomentProfile {
    std::vector<Exponent> p_grid;
    std::vector<double> values;
    std::string provenance;

    std::size_t size() const { return p_grid.size(); }
};

inline void require_increasing_exponents(std::span<const Exponent> p_grid, const char* where) {
    if (p_grid.empty()) throw std::invalid_argument(std::string(where) + ": empty exponent grid");
    for (std::size_t k = 0; k < p_grid.size(); ++k) {
        require_valid_exponent(p_grid[k], where);
        if (k > 0 && !(p_grid[k - 1] < p_grid[k])) {
            throw std::invalid_argument(std::string(where) + ": exponent grid must be strictly increasing");
        }
    }
}

inline MomentProfile moment_profile(const GridFunction& f, std::span<const Exponent> p_grid,
                                    std::string provenance = "grid") {
    require_increasing_exponents(p_grid, "moment_profile");
    const detail::ModulusTable table(f);
    MomentProfile out;
    out.p_grid.assign(p_grid.begin(), p_grid.end());
    out.values.reserve(p_grid.size());
    for (const auto p : p_grid) out.values.push_back(table.norm(p));
    out.provenance = std::move(provenance);
    return out;
}

// Closed-form moment profile of g_sigma.
inline MomentProfile gaussian_moment_profile(Complex sigma2, int dim, std::span<const Exponent> p_grid) {
    require_increasing_exponents(p_grid, "gaussian_moment_profile");
    MomentProfile out;
    out.p_grid.assign(p_grid.begin(), p_grid.end());
    for (const auto p : p_grid) out.values.push_back(gaussian_lp_exact(sigma2, dim, p));
    out.provenance = "closed-form";
    return out;
}

// Periodic convolution (f * g)(x_k) = sum_j f(x_j) g(x_k - x_j) h^d on the grid's torus.
inline GridFunction periodic_convolution(const GridFunction& f, const GridFunction& g) {
    if (!(f.grid() == g.grid())) throw std::invalid_argument("periodic_convolution: grids differ");
    const Grid& grid = f.grid();
    const std::size_t n = grid.points_per_axis();
    std::vector<Complex> a(f.values().begin(), f.values().end());
    std::vector<Complex> b(g.values().begin(), g.values().end());
    fft::transform(a, grid.dim(), n, fft::Direction::forward);
    fft::transform(b, grid.dim(), n, fft::Direction::forward);
    const double scale = grid.cell_volume() / static_cast<double>(grid.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] *= b[k] * scale;
    fft::transform(a, grid.dim(), n, fft::Direction::backward);
    // Circular index m pairs with node k = m - N/2 per axis, because node 0 sits at -L.
    std::vector<Complex> out(grid.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        auto idx = grid.unravel(j);
        for (int axis = 0; axis < grid.dim(); ++axis) {
            auto& i = idx[static_cast<std::size_t>(axis)];
            i = (i + n / 2) % n;
        }
        out[j] = a[grid.ravel(idx)];
    }
    return GridFunction(grid, std::move(out));
}

}  // namespace strichartz
