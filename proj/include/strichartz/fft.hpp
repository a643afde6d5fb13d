#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace strichartz::fft {

enum class Direction { forward, backward };

namespace detail {

struct FftwFree {
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};

struct PlanDestroy {
    void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};

}  // namespace detail

// Unnormalized in-place DFT over an isotropic d-dimensional array with
// `n` points per axis, row-major (last axis fastest).
//
// The data is staged through an fftw_malloc'd buffer so that every call sees
// the same alignment, which keeps FFTW's codelet choice (and therefore the
// rounding) identical between runs.
inline void transform(std::span<std::complex<double>> data, int dim, std::size_t n,
                      Direction dir) {
    if (dim < 1 || dim > 3) {
        throw std::invalid_argument("fft::transform: dimension must be 1, 2 or 3");
    }
    std::size_t total = 1;
    for (int k = 0; k < dim; ++k) total *= n;
    if (data.size() != total) {
        throw std::invalid_argument("fft::transform: data size does not match n^dim");
    }

    std::unique_ptr<fftw_complex, detail::FftwFree> buffer(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total)));
    if (!buffer) throw std::bad_alloc();

    int dims[3] = {static_cast<int>(n), static_cast<int>(n), static_cast<int>(n)};
    const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
    std::unique_ptr<fftw_plan_s, detail::PlanDestroy> plan(
        fftw_plan_dft(dim, dims, buffer.get(), buffer.get(), sign, FFTW_ESTIMATE));
    if (!plan) throw std::runtime_error("fft::transform: FFTW planning failed");

    // std::complex<double> is layout-compatible with double[2].
    auto* raw = reinterpret_cast<std::complex<double>*>(buffer.get());
    std::copy(data.begin(), data.end(), raw);
    fftw_execute(plan.get());
    std::copy(raw, raw + total, data.begin());
}

// Signed integer frequency index of DFT bin m for an axis of length n:
// m for m < n/2, m - n otherwise.
constexpr long signed_index(std::size_t m, std::size_t n) {
    return m < n / 2 ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(n);
}

}  // namespace strichartz::fft
