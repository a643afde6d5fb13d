#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "strichartz/fft.hpp"
#include "strichartz/grid_field.hpp"

namespace strichartz {

// Which evolution a spectral propagator applies. Multipliers, for |xi|^2 = k2:
//   heat:          exp(-t k2 / 2)          (du/dt = Laplacian u / 2)
//   schrodinger:   exp(-i t k2 / 2)        (-i dv/dt = Laplacian v / 2)
//   fractional(a): exp(-t |xi|^a)          (du/dt + (-Laplacian)^{a/2} u = 0)
// so fractional(2) at time t equals heat at time 2t.
class PropagatorKind {
public:
    enum class Family { heat, schrodinger, fractional };

    static PropagatorKind heat() { return PropagatorKind(Family::heat, 2.0); }
    static PropagatorKind schrodinger() { return PropagatorKind(Family::schrodinger, 2.0); }
    static PropagatorKind fractional(double alpha) {
        if (!(alpha > 0.0 && alpha <= 2.0)) {
            throw std::invalid_argument("PropagatorKind::fractional: alpha must lie in (0, 2], got " + std::to_string(alpha));
        }
        return PropagatorKind(Family::fractional, alpha);
    }

    Family family() const { return family_; }
    double alpha() const { return alpha_; }

    // Exponent e in the dispersive scale t^{d e} (1/2 for heat and Schroedinger, 1/alpha otherwise).
    double time_scale_exponent() const { return family_ == Family::fractional ? 1.0 / alpha_ : 0.5; }

    Complex multiplier(double k2, double t) const {
        switch (family_) {
            case Family::heat:
                return std::exp(-0.5 * t * k2);
            case Family::schrodinger:
                return std::polar(1.0, -0.5 * t * k2);
            case Family::fractional:
                // k2 = 0 gives exp(0) = 1 for every alpha.
                return std::exp(-t * std::pow(k2, 0.5 * alpha_));
        }
        return 1.0;
    }

    std::string describe() const {
        switch (family_) {
            case Family::heat: return "heat";
            case Family::schrodinger: return "schrodinger";
            case Family::fractional: return "fractional(" + std::to_string(alpha_) + ")";
        }
        return {};
    }

private:
    PropagatorKind(Family f, double alpha) : family_(f), alpha_(alpha) {}

    Family family_;
    double alpha_;
};

namespace detail {

template <typename MultiplierFn>
GridFunction apply_multiplier(const GridFunction& f, MultiplierFn&& m) {
    const Grid& grid = f.grid();
    std::vector<Complex> v(f.values().begin(), f.values().end());
    fft::transform(v, grid.dim(), grid.points_per_axis(), fft::Direction::forward);
    const double inv_n = 1.0 / static_cast<double>(grid.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] *= m(grid.frequency_squared(k)) * inv_n;
    fft::transform(v, grid.dim(), grid.points_per_axis(), fft::Direction::backward);
    return GridFunction(grid, std::move(v));
}

}  // namespace detail

// Forward transform, pointwise multiplier, inverse transform. Negative times are only
// legal for the Schroedinger group; t = 0 returns f unchanged.
inline GridFunction propagate(const GridFunction& f, const PropagatorKind& kind, double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("propagate: time must be finite");
    if (t < 0.0 && kind.family() != PropagatorKind::Family::schrodinger) {
        throw std::invalid_argument("propagate: negative time is only defined for the Schroedinger group");
    }
    if (t == 0.0) return f;
    return detail::apply_multiplier(f, [&](double k2) { return kind.multiplier(k2, t); });
}

// Laplacian S_alpha(t) f: multiplier -|xi|^2 exp(-t |xi|^alpha), t > 0.
inline GridFunction laplacian_propagate(const GridFunction& f, double alpha, double t) {
    const auto kind = PropagatorKind::fractional(alpha);
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("laplacian_propagate: t must be positive");
    return detail::apply_multiplier(f, [&](double k2) { return -k2 * kind.multiplier(k2, t); });
}

struct EvolvedGaussian {
    Complex initial_sigma2;
    double time;
    Complex sigma2;
    int dim;
};

// Exact Gaussian channel: heat adds t to the variance, Schroedinger adds i t,
// fractional(2) adds 2t.
inline EvolvedGaussian propagate_gaussian_exact(const GaussianSpec& spec, const PropagatorKind& kind, double t) {
    spec.validate();
    Complex shift;
    switch (kind.family()) {
        case PropagatorKind::Family::heat:
            if (t < 0.0) throw std::invalid_argument("propagate_gaussian_exact: heat needs t >= 0");
            shift = t;
            break;
        case PropagatorKind::Family::schrodinger:
            shift = Complex(0.0, t);
            break;
        case PropagatorKind::Family::fractional:
            if (kind.alpha() != 2.0) {
                throw std::invalid_argument("propagate_gaussian_exact: no Gaussian closed form for fractional alpha < 2");
            }
            if (t < 0.0) throw std::invalid_argument("propagate_gaussian_exact: fractional needs t >= 0");
            shift = 2.0 * t;
            break;
    }
    return {spec.sigma2, t, spec.sigma2 + shift, spec.dim};
}

// Relative periodisation error tolerated for heavy-tailed (alpha < 2) kernels.
inline constexpr double kHeavyTailTolerance = 1e-3;

/**
 * Largest time for which periodic propagation of a datum stays a faithful stand-in
 * for the whole-space problem on `grid`.
 *
 * The datum is modelled as a Gaussian of complex variance `sigma2` (Re >= 0; 0 for a
 * sharp box) whose support is offset by `offset` from the origin. Gaussian kernels
 * (heat, Schroedinger, fractional(2)) must keep all but 1e-10 of the evolved modulus
 * mass inside [-(L - offset), L - offset]^d. Heavy-tailed kernels (alpha < 2) decay
 * like |x|^{-(d+alpha)}; their periodic images perturb the solution by roughly
 * (t^{1/alpha}/L)^{d+alpha}, which is held below kHeavyTailTolerance.
 *
 * Returns a negative value when no time is safe.
 */
inline double max_safe_time(const Grid& grid, const PropagatorKind& kind, Complex sigma2 = 1.0, double offset = 0.0) {
    const double radius = grid.half_extent() - offset;
    if (!(radius > 0.0)) return -1.0;
    const int d = grid.dim();
    if (kind.family() == PropagatorKind::Family::fractional && kind.alpha() < 2.0) {
        const double a = kind.alpha();
        return std::pow(radius, a) * std::pow(kHeavyTailTolerance, a / (d + a));
    }
    const double z = detail::tail_radius_multiple(d);
    const double max_var = (radius / z) * (radius / z);
    const double re = sigma2.real();
    const double im = sigma2.imag();
    switch (kind.family()) {
        case PropagatorKind::Family::schrodinger: {
            // modulus variance (re^2 + (im + t)^2) / re
            if (!(re > 0.0)) return -1.0;
            const double room = max_var * re - re * re;
            if (room < 0.0) return -1.0;
            return std::sqrt(room) - std::abs(im);
        }
        case PropagatorKind::Family::heat:
        case PropagatorKind::Family::fractional: {
            // With u = re + s the modulus variance is u + im^2/u; u + im^2/u <= max_var
            // holds on [u_min, u_max] and the datum itself must already fit.
            const double scale = kind.family() == PropagatorKind::Family::heat ? 1.0 : 2.0;
            const double disc = max_var * max_var - 4.0 * im * im;
            if (disc < 0.0) return -1.0;
            const double u_min = 0.5 * (max_var - std::sqrt(disc));
            const double u_max = 0.5 * (max_var + std::sqrt(disc));
            if (re < u_min || re > u_max) return -1.0;
            return (u_max - re) / scale;
        }
    }
    return -1.0;
}

}  // namespace strichartz
