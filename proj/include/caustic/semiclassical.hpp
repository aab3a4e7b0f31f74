#ifndef CAUSTIC_SEMICLASSICAL_HPP
#define CAUSTIC_SEMICLASSICAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracked_real.hpp"

namespace caustic {

struct SemiclassicalLevel {
    int d = 1;
    int N = 0;
    double hbar = 1.0;
    double E = 0.5;
};

inline SemiclassicalLevel level_new(int d, int N) {
    if (d < 1) throw std::invalid_argument("level_new: dimension must be >= 1");
    if (N < 0) throw std::invalid_argument("level_new: degree must be >= 0");
    return {d, N, 1.0 / (2.0 * N + d), 0.5};
}

// Same eigenspace viewed at energy E: hbar = E/(N + d/2).
inline SemiclassicalLevel level_at_energy(int d, int N, double E) {
    if (!(E > 0)) throw std::invalid_argument("level_at_energy: energy must be positive");
    SemiclassicalLevel lv = level_new(d, N);
    lv.E = E;
    lv.hbar = E / (N + 0.5 * d);
    return lv;
}

namespace detail {
__extension__ typedef unsigned __int128 u128;
} // namespace detail

// binomial(N+d-1, d-1)
inline std::uint64_t eigenspace_dim(const SemiclassicalLevel& lv) {
    detail::u128 r = 1;
    const std::uint64_t n = static_cast<std::uint64_t>(lv.N);
    for (std::uint64_t i = 1; i < static_cast<std::uint64_t>(lv.d); ++i) {
        r = r * (n + i);
        if (r > std::numeric_limits<std::uint64_t>::max())
            throw std::overflow_error("eigenspace_dim: binomial exceeds 64-bit range");
        r /= i;
    }
    return static_cast<std::uint64_t>(r);
}

// Calls f(beta) for every multi-index with |beta| = N, in lexicographic order.
inline void for_each_multi_index(int d, int N, const std::function<void(const std::vector<int>&)>& f) {
    std::vector<int> beta(d, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == d - 1) {
            beta[i] = left;
            f(beta);
            return;
        }
        for (int k = left; k >= 0; --k) {
            beta[i] = k;
            rec(i + 1, left - k);
        }
    };
    if (d >= 1 && N >= 0) rec(0, N);
}

namespace detail {

inline long double scaled_coordinate(const SemiclassicalLevel& lv, double x) {
    return static_cast<long double>(x) / std::sqrt(static_cast<long double>(lv.hbar));
}

// psi_0..psi_M of the unscaled orthonormal Hermite functions at xi.
// The recurrence runs on doubles with a shared binary scale that is
// shifted whenever the magnitude drifts far from 1.
inline std::vector<TrackedReal> hermite_psi(long double xi, int M) {
    std::vector<TrackedReal> out(static_cast<std::size_t>(M) + 1);
    const TrackedReal p0 = TrackedReal::exp_of(static_cast<double>(-0.5L * xi * xi)) * 0.75112554446494248286; // pi^{-1/4}
    std::int64_t scale = p0.exponent();
    // extended precision keeps the phase drift of the oscillatory regime below 1e-10 at N ~ 4000
    using ext = long double;
    ext a = 0.0L, b = p0.mantissa();
    const ext X = xi;
    out[0] = p0;
    constexpr ext big = 0x1p200L, small = 0x1p-200L;
    for (int k = 0; k < M; ++k) {
        const ext c = std::sqrt(ext(2) / (k + 1)) * X * b - std::sqrt(ext(k) / (k + 1)) * a;
        a = b;
        b = c;
        const ext mag = std::max(std::fabs(a), std::fabs(b));
        if (mag > big || (mag < small && mag > 0)) {
            const int t = std::ilogb(mag);
            a = std::ldexp(a, -t);
            b = std::ldexp(b, -t);
            scale += t;
        }
        out[k + 1] = TrackedReal::from_parts(static_cast<double>(b), scale);
    }
    return out;
}

} // namespace detail

// phi_{k,hbar}(x) = hbar^{-1/4} psi_k(x/sqrt(hbar)), k = 0..N
inline std::vector<TrackedReal> hermite_all(const SemiclassicalLevel& lv, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("hermite_all: non-finite coordinate");
    auto psi = detail::hermite_psi(detail::scaled_coordinate(lv, x), lv.N);
    const double f = std::pow(lv.hbar, -0.25);
    for (auto& p : psi) p *= f;
    return psi;
}

struct HermiteJet {
    std::vector<TrackedReal> value; // phi_k
    std::vector<TrackedReal> deriv; // d/dx phi_k
};

inline HermiteJet hermite_jet(const SemiclassicalLevel& lv, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("hermite_jet: non-finite coordinate");
    const int N = lv.N;
    auto psi = detail::hermite_psi(detail::scaled_coordinate(lv, x), N + 1);
    const double fv = std::pow(lv.hbar, -0.25), fd = std::pow(lv.hbar, -0.75);
    HermiteJet j;
    j.value.resize(N + 1);
    j.deriv.resize(N + 1);
    for (int k = 0; k <= N; ++k) {
        j.value[k] = psi[k] * fv;
        TrackedReal dk = psi[k + 1] * (-std::sqrt(0.5 * (k + 1)));
        if (k > 0) dk += psi[k - 1] * std::sqrt(0.5 * k);
        j.deriv[k] = dk * fd;
    }
    return j;
}

inline std::vector<TrackedReal> hermite_deriv_all(const SemiclassicalLevel& lv, double x) {
    return hermite_jet(lv, x).deriv;
}

// General-energy replacement x' = x/sqrt(2E), hbar' = hbar/(2E).
// Kernels pick up (2E)^{-d/2}, Kac-Rice matrices (2E)^{-1}, densities (2E)^{-1/2}.
struct EnergyRescaling {
    std::vector<double> point;
    double hbar_factor = 1.0;
    double kernel_factor = 1.0;
    double omega_factor = 1.0;
    double density_factor = 1.0;
};

inline EnergyRescaling rescale_to_unit(const std::vector<double>& x, double E) {
    if (!(E > 0)) throw std::invalid_argument("rescale_to_unit: energy must be positive");
    EnergyRescaling r;
    const double s = std::sqrt(2.0 * E);
    r.point.reserve(x.size());
    for (double xi : x) r.point.push_back(xi / s);
    r.hbar_factor = 1.0 / (2.0 * E);
    r.kernel_factor = std::pow(2.0 * E, -0.5 * static_cast<double>(x.size()));
    r.omega_factor = 1.0 / (2.0 * E);
    r.density_factor = 1.0 / s;
    return r;
}

} // namespace caustic

#endif
