#ifndef CAUSTIC_MONTECARLO_HPP
#define CAUSTIC_MONTECARLO_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "densities.hpp"
#include "parallel.hpp"
#include "projector.hpp"
#include "quadrature.hpp"
#include "semiclassical.hpp"

namespace caustic {

// Philox4x64-10 block function (Salmon et al. counter-based generator)
inline std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr, std::array<std::uint64_t, 2> key) {
    constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL, M1 = 0xCA5A826395121157ULL;
    constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL, W1 = 0xBB67AE8584CAA73BULL;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += W0;
            key[1] += W1;
        }
        const detail::u128 p0 = static_cast<detail::u128>(M0) * ctr[0];
        const detail::u128 p1 = static_cast<detail::u128>(M1) * ctr[2];
        const auto hi0 = static_cast<std::uint64_t>(p0 >> 64), lo0 = static_cast<std::uint64_t>(p0);
        const auto hi1 = static_cast<std::uint64_t>(p1 >> 64), lo1 = static_cast<std::uint64_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

// standard normal keyed by (seed, rank); Box-Muller on the first two words of the block
inline double philox_normal(std::uint64_t seed, std::uint64_t rank) {
    const auto w = philox4x64({rank, 0, 0, 0}, {seed, 0x636175737469630aULL});
    const double u1 = static_cast<double>((w[0] >> 11) + 1) * 0x1p-53; // (0, 1]
    const double u2 = static_cast<double>(w[1] >> 11) * 0x1p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * detail::kPi * u2);
}

// coefficients are stored by rank in for_each_multi_index order; for d = 2 rank r is beta = (N - r, r)
struct RandomEigenfunction {
    SemiclassicalLevel level;
    std::vector<double> coeffs;
    std::uint64_t seed = 0;
};

inline std::uint64_t& field_dim_budget() {
    static std::uint64_t budget = 20'000'000;
    return budget;
}

inline RandomEigenfunction sample_field(const SemiclassicalLevel& lv, std::uint64_t seed) {
    const std::uint64_t n = eigenspace_dim(lv);
    if (n > field_dim_budget()) throw ResourceError("sample_field: eigenspace dimension exceeds the budget");
    RandomEigenfunction f;
    f.level = lv;
    f.seed = seed;
    f.coeffs.resize(n);
    for (std::uint64_t r = 0; r < n; ++r) f.coeffs[r] = philox_normal(seed, r);
    return f;
}

inline TrackedReal evaluate_tracked(const RandomEigenfunction& f, const Point& x) {
    const auto& lv = f.level;
    detail::check_point(lv, x, "evaluate");
    std::vector<std::vector<TrackedReal>> h(lv.d);
    for (int i = 0; i < lv.d; ++i) h[i] = hermite_all(lv, x[i]);
    if (lv.d == 2) {
        TrackedReal s;
        for (int r = 0; r <= lv.N; ++r) s += h[0][lv.N - r] * h[1][r] * f.coeffs[r];
        return s;
    }
    TrackedReal s;
    std::size_t rank = 0;
    for_each_multi_index(lv.d, lv.N, [&](const std::vector<int>& b) {
        TrackedReal p(f.coeffs[rank++]);
        for (int i = 0; i < lv.d; ++i) p *= h[i][b[i]];
        s += p;
    });
    return s;
}

inline double evaluate(const RandomEigenfunction& f, const Point& x) { return evaluate_tracked(f, x).to_double(); }

struct NodalEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
    double resolution = 0.0;
    bool resolution_warning = false; // two-resolution discrepancy above 2%
};

// rows phi_k(x_i) for k = 0..N as doubles, times 2^{-shift_i}; shifts are only used when a row would underflow
struct HermiteTable {
    Eigen::MatrixXd values;
    std::vector<std::int64_t> shift;
};

inline HermiteTable hermite_table(const SemiclassicalLevel& lv, const std::vector<double>& xs) {
    HermiteTable t;
    const auto n = static_cast<Eigen::Index>(xs.size());
    t.values.resize(n, lv.N + 1);
    t.shift.assign(xs.size(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto h = hermite_all(lv, xs[i]);
        std::int64_t emax = std::numeric_limits<std::int64_t>::min();
        for (const auto& v : h)
            if (!v.is_zero()) emax = std::max(emax, v.exponent());
        if (emax != std::numeric_limits<std::int64_t>::min() && emax < -900) t.shift[i] = emax;
        for (int k = 0; k <= lv.N; ++k) t.values(i, k) = h[k].to_double_shifted(t.shift[i]);
    }
    return t;
}

namespace detail {

inline void require_plane(const SemiclassicalLevel& lv, const char* who) {
    if (lv.d != 2) throw std::invalid_argument(std::string(who) + ": d = 2 only");
}

inline std::vector<double> linspace_cells(double a, double b, int cells) {
    std::vector<double> x(cells + 1);
    for (int i = 0; i <= cells; ++i) x[i] = a + (b - a) * i / cells;
    return x;
}

inline Eigen::MatrixXd coeff_matrix(const SemiclassicalLevel& lv, const std::vector<std::uint64_t>& seeds) {
    const auto n = static_cast<Eigen::Index>(eigenspace_dim(lv));
    Eigen::MatrixXd A(n, static_cast<Eigen::Index>(seeds.size()));
    for (Eigen::Index s = 0; s < A.cols(); ++s)
        for (Eigen::Index r = 0; r < n; ++r) A(r, s) = philox_normal(seeds[s], r);
    return A;
}

inline std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
    if (count < 1) throw std::invalid_argument("ensemble: need at least one seed");
    std::vector<std::uint64_t> s(count);
    std::iota(s.begin(), s.end(), first);
    return s;
}

} // namespace detail

// seed-independent tables for Phi on the product grid xs x ys (d = 2):
// Phi(x_i, y_j) = sum_r a_r phi_{N-r}(x_i) phi_r(y_j) = (X diag(a) Y^T)_{ij}
struct GridTables {
    Eigen::MatrixXd X, Y;
    bool shifted = false; // values carry a positive per-row factor, signs are exact

    GridTables(const SemiclassicalLevel& lv, const std::vector<double>& xs, const std::vector<double>& ys) {
        detail::require_plane(lv, "GridTables");
        const auto tx = hermite_table(lv, xs), ty = hermite_table(lv, ys);
        X = tx.values.rowwise().reverse();
        Y = ty.values;
        for (auto s : tx.shift) shifted |= s != 0;
        for (auto s : ty.shift) shifted |= s != 0;
    }
    Eigen::MatrixXd values(const std::vector<double>& a) const {
        const Eigen::Map<const Eigen::VectorXd> av(a.data(), static_cast<Eigen::Index>(a.size()));
        Eigen::MatrixXd V = (X * av.asDiagonal()) * Y.transpose();
        return V;
    }
};

// total length of the zero set of the piecewise-linear marching-squares contour of a bilinear interpolant;
// v(i, j) sits at (x0 + i hx, y0 + j hy)
inline double marching_squares_length(const Eigen::MatrixXd& v, double hx, double hy, int stride = 1) {
    const Eigen::Index nx = (v.rows() - 1) / stride, ny = (v.cols() - 1) / stride;
    auto pos = [](double a) { return a >= 0.0; };
    double total = 0;
    for (Eigen::Index i = 0; i < nx; ++i)
        for (Eigen::Index j = 0; j < ny; ++j) {
            const double f00 = v(i * stride, j * stride), f10 = v((i + 1) * stride, j * stride);
            const double f01 = v(i * stride, (j + 1) * stride), f11 = v((i + 1) * stride, (j + 1) * stride);
            const int mask = pos(f00) | pos(f10) << 1 | pos(f11) << 2 | pos(f01) << 3;
            if (mask == 0 || mask == 15) continue;
            // crossings on the four edges in unit-cell coordinates: bottom, right, top, left
            double px[4], py[4];
            bool has[4] = {pos(f00) != pos(f10), pos(f10) != pos(f11), pos(f01) != pos(f11), pos(f00) != pos(f01)};
            if (has[0]) px[0] = f00 / (f00 - f10), py[0] = 0;
            if (has[1]) px[1] = 1, py[1] = f10 / (f10 - f11);
            if (has[2]) px[2] = f01 / (f01 - f11), py[2] = 1;
            if (has[3]) px[3] = 0, py[3] = f00 / (f00 - f01);
            auto seg = [&](int a, int b) { return std::hypot((px[a] - px[b]) * hx, (py[a] - py[b]) * hy); };
            if (has[0] && has[1] && has[2] && has[3]) {
                // saddle: the bilinear centre value decides the pairing
                const double c = 0.25 * (f00 + f10 + f01 + f11);
                if (pos(c) == pos(f00))
                    total += seg(0, 1) + seg(2, 3);
                else
                    total += seg(0, 3) + seg(1, 2);
            } else {
                int e[2], k = 0;
                for (int t = 0; t < 4; ++t)
                    if (has[t]) e[k++] = t;
                total += seg(e[0], e[1]);
            }
        }
    return total;
}

struct Box {
    double x0, x1, y0, y1;
    double area() const { return (x1 - x0) * (y1 - y0); }
};

namespace detail {

struct BoxGrid {
    std::vector<double> xs, ys;
    double hx, hy; // fine spacing, half the requested step
};

inline BoxGrid box_grid(const Box& b, double step) {
    if (!(b.x1 > b.x0 && b.y1 > b.y0)) throw std::invalid_argument("nodal_length: empty box");
    if (!(step > 0)) throw std::invalid_argument("nodal_length: grid_step must be positive");
    const int cx = static_cast<int>(std::ceil((b.x1 - b.x0) / step)), cy = static_cast<int>(std::ceil((b.y1 - b.y0) / step));
    BoxGrid g;
    g.xs = linspace_cells(b.x0, b.x1, 2 * cx);
    g.ys = linspace_cells(b.y0, b.y1, 2 * cy);
    g.hx = (b.x1 - b.x0) / (2 * cx);
    g.hy = (b.y1 - b.y0) / (2 * cy);
    return g;
}

// Richardson for the second-order chord error: L = L_f + (L_f - L_c) / 3
inline NodalEstimate richardson(const Eigen::MatrixXd& v, const BoxGrid& g) {
    const double coarse = marching_squares_length(v, 2 * g.hx, 2 * g.hy, 2);
    const double fine = marching_squares_length(v, g.hx, g.hy, 1);
    NodalEstimate e;
    e.value = fine + (fine - coarse) / 3;
    e.std_error = std::fabs(fine - coarse) / 3;
    e.n_samples = 1;
    e.resolution = 2 * std::max(g.hx, g.hy);
    e.resolution_warning = fine > 0 && std::fabs(fine - coarse) > 0.02 * fine;
    return e;
}

inline bool box_meets_allowed(const Box& b) {
    const double cx = std::clamp(0.0, b.x0, b.x1), cy = std::clamp(0.0, b.y0, b.y1);
    return cx * cx + cy * cy < 1.0;
}

} // namespace detail

inline NodalEstimate nodal_length(const std::function<double(double, double)>& f, const Box& box, double grid_step) {
    const auto g = detail::box_grid(box, grid_step);
    Eigen::MatrixXd v(g.xs.size(), g.ys.size());
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = f(g.xs[i], g.ys[j]);
    return detail::richardson(v, g);
}

inline NodalEstimate nodal_length(const RandomEigenfunction& field, const Box& box, double grid_step) {
    detail::require_plane(field.level, "nodal_length");
    if (detail::box_meets_allowed(box) && grid_step > field.level.hbar / 8 * (1 + 1e-12))
        throw std::invalid_argument("nodal_length: grid_step must be <= hbar/8 in the allowed region");
    const auto g = detail::box_grid(box, grid_step);
    return detail::richardson(GridTables(field.level, g.xs, g.ys).values(field.coeffs), g);
}

struct EnsembleSpec {
    SemiclassicalLevel level;
    std::uint64_t first_seed = 1;
    int seeds = 100;
    unsigned threads = 0;
};

namespace detail {

// folds a per-seed sample into an estimate; the mean resolution error enters in quadrature
inline NodalEstimate ensemble_estimate(const std::vector<double>& vals, const std::vector<double>& res_err, double resolution) {
    const auto m = mean_and_se(vals);
    NodalEstimate e;
    e.value = m.mean;
    const double r = res_err.empty() ? 0.0 : pairwise_sum(res_err) / static_cast<double>(res_err.size());
    e.std_error = std::hypot(m.std_error, r);
    e.n_samples = vals.size();
    e.resolution = resolution;
    return e;
}

} // namespace detail

// nodal length per unit area in the box, averaged over the ensemble
inline NodalEstimate nodal_length_density_ensemble(const EnsembleSpec& spec, const Box& box, double grid_step,
                                                   std::vector<NodalEstimate>* per_seed = nullptr) {
    const auto& lv = spec.level;
    detail::require_plane(lv, "nodal_length_density_ensemble");
    if (detail::box_meets_allowed(box) && grid_step > lv.hbar / 8 * (1 + 1e-12))
        throw std::invalid_argument("nodal_length: grid_step must be <= hbar/8 in the allowed region");
    const auto g = detail::box_grid(box, grid_step);
    const GridTables tab(lv, g.xs, g.ys);
    const auto seeds = detail::seed_range(spec.first_seed, spec.seeds);
    const auto est = parallel_map(
        seeds, [&](std::uint64_t s) { return detail::richardson(tab.values(sample_field(lv, s).coeffs), g); }, spec.threads);
    std::vector<double> v, r;
    bool warn = false;
    for (const auto& e : est) {
        if (per_seed) {
            per_seed->push_back(e);
            per_seed->back().value /= box.area();
            per_seed->back().std_error /= box.area();
        }
        v.push_back(e.value / box.area());
        r.push_back(e.std_error / box.area());
        warn |= e.resolution_warning;
    }
    auto out = detail::ensemble_estimate(v, r, est.front().resolution);
    out.resolution_warning = warn;
    return out;
}

namespace detail {

struct CircleCount {
    int fine = 0, coarse = 0;
};

// sign changes of Phi on the unit circle at theta_m = rotation + m * 2pi / M (M even) for every column of A;
// the coarse count uses even m only. Tables are built chunk by chunk and shared by all columns.
inline std::vector<CircleCount> circle_counts(const SemiclassicalLevel& lv, int M, double rotation, const Eigen::MatrixXd& A) {
    const Eigen::Index S = A.cols();
    std::vector<CircleCount> out(S);
    Eigen::RowVectorXd first, prev, prev_even;
    const int chunk = 2048;
    auto flip = [](double a, double b) { return (a >= 0) != (b >= 0); };
    for (int m0 = 0; m0 < M; m0 += chunk) {
        const int n = std::min(chunk, M - m0);
        std::vector<double> cs(n), sn(n);
        for (int i = 0; i < n; ++i) {
            const double t = rotation + 2.0 * kPi * (m0 + i) / M;
            cs[i] = std::cos(t);
            sn[i] = std::sin(t);
        }
        const auto tc = hermite_table(lv, cs), ts = hermite_table(lv, sn);
        const Eigen::MatrixXd P = tc.values.rowwise().reverse().cwiseProduct(ts.values);
        const Eigen::MatrixXd V = P * A;
        for (int i = 0; i < n; ++i) {
            const int m = m0 + i;
            if (m == 0) {
                first = prev = prev_even = V.row(0);
                continue;
            }
            for (Eigen::Index c = 0; c < S; ++c) {
                out[c].fine += flip(V(i, c), prev[c]);
                if (m % 2 == 0) out[c].coarse += flip(V(i, c), prev_even[c]);
            }
            prev = V.row(i);
            if (m % 2 == 0) prev_even = V.row(i);
        }
    }
    for (Eigen::Index c = 0; c < S; ++c) {
        out[c].fine += flip(prev[c], first[c]);
        out[c].coarse += flip(prev_even[c], first[c]);
    }
    return out;
}

inline int circle_points(const SemiclassicalLevel& lv, double angular_step) {
    if (!(angular_step > 0)) throw std::invalid_argument("caustic_crossings: angular_step must be positive");
    if (angular_step > std::pow(lv.hbar, 2.0 / 3) / 16 * (1 + 1e-12))
        throw std::invalid_argument("caustic_crossings: angular_step must be <= hbar^(2/3)/16");
    return 2 * static_cast<int>(std::ceil(2.0 * kPi / angular_step));
}

} // namespace detail

// number of sign changes of theta -> Phi(cos theta, sin theta); the value uses step/2, the error is the
// difference to the count at the requested step
inline NodalEstimate caustic_crossings(const RandomEigenfunction& field, double angular_step, double rotation = 0.0) {
    detail::require_plane(field.level, "caustic_crossings");
    const int M = detail::circle_points(field.level, angular_step);
    const Eigen::Map<const Eigen::VectorXd> a(field.coeffs.data(), static_cast<Eigen::Index>(field.coeffs.size()));
    const auto c = detail::circle_counts(field.level, M, rotation, a).front();
    NodalEstimate e;
    e.value = c.fine;
    e.std_error = std::abs(c.fine - c.coarse);
    e.n_samples = 1;
    e.resolution = 4.0 * detail::kPi / M;
    e.resolution_warning = c.fine != c.coarse;
    return e;
}

inline NodalEstimate caustic_crossings_ensemble(const EnsembleSpec& spec, double angular_step, double rotation = 0.0,
                                                std::vector<NodalEstimate>* per_seed = nullptr) {
    const auto& lv = spec.level;
    detail::require_plane(lv, "caustic_crossings_ensemble");
    const int M = detail::circle_points(lv, angular_step);
    const auto seeds = detail::seed_range(spec.first_seed, spec.seeds);
    std::vector<double> v, r;
    bool warn = false;
    for (const auto& c : detail::circle_counts(lv, M, rotation, detail::coeff_matrix(lv, seeds))) {
        v.push_back(c.fine);
        r.push_back(std::abs(c.fine - c.coarse));
        if (per_seed) per_seed->push_back({v.back(), r.back(), 1, 4.0 * detail::kPi / M, c.fine != c.coarse});
        warn |= c.fine != c.coarse;
    }
    auto e = detail::ensemble_estimate(v, r, 4.0 * detail::kPi / M);
    e.resolution_warning = warn;
    return e;
}

// zeros per unit length of Phi restricted to radial segments [r - w/2, r + w/2] on evenly spaced rays
struct RadialProfileOptions {
    int rays = 64;
    double width = 0.02;
    double step = 0.0; // 0 means hbar / 8
};

inline std::vector<NodalEstimate> radial_zero_profile(const EnsembleSpec& spec, const std::vector<double>& radii,
                                                      const RadialProfileOptions& opt = {}) {
    const auto& lv = spec.level;
    detail::require_plane(lv, "radial_zero_profile");
    if (opt.rays < 1 || !(opt.width > 0)) throw std::invalid_argument("radial_zero_profile: bad ray layout");
    const double step = opt.step > 0 ? opt.step : lv.hbar / 8;
    const int cells = 2 * static_cast<int>(std::ceil(opt.width / step));
    const double h = opt.width / cells;
    const auto seeds = detail::seed_range(spec.first_seed, spec.seeds);
    const Eigen::MatrixXd A = detail::coeff_matrix(lv, seeds);
    std::vector<NodalEstimate> out;
    for (double r : radii) {
        if (!(r - 0.5 * opt.width >= 0)) throw std::invalid_argument("radial_zero_profile: segment crosses the origin");
        const int per = cells + 1;
        std::vector<double> xs, ys;
        for (int j = 0; j < opt.rays; ++j) {
            const double t = 2.0 * detail::kPi * j / opt.rays;
            for (int i = 0; i < per; ++i) {
                const double rho = r - 0.5 * opt.width + i * h;
                xs.push_back(rho * std::cos(t));
                ys.push_back(rho * std::sin(t));
            }
        }
        const auto tx = hermite_table(lv, xs), ty = hermite_table(lv, ys);
        const Eigen::MatrixXd P = tx.values.rowwise().reverse().cwiseProduct(ty.values);
        const Eigen::MatrixXd V = P * A;
        std::vector<double> v, res;
        for (Eigen::Index c = 0; c < V.cols(); ++c) {
            int fine = 0, coarse = 0;
            for (int j = 0; j < opt.rays; ++j) {
                const double* p = V.col(c).data() + static_cast<std::ptrdiff_t>(j) * per;
                for (int i = 0; i < cells; ++i) fine += (p[i] >= 0) != (p[i + 1] >= 0);
                for (int i = 0; i < cells; i += 2) coarse += (p[i] >= 0) != (p[i + 2] >= 0);
            }
            const double len = opt.rays * opt.width;
            v.push_back(fine / len);
            res.push_back(std::abs(fine - coarse) / len);
        }
        auto e = detail::ensemble_estimate(v, res, 2 * h);
        e.resolution_warning = e.value > 0 && pairwise_sum(res) / res.size() > 0.02 * e.value;
        out.push_back(e);
    }
    return out;
}

// Kac-Rice value for radial_zero_profile: (1/pi) sqrt(Omega_rr) of the exact level, averaged over the segment.
// The exact Omega oscillates on the wavelength scale, so the pointwise value is not the right comparison.
inline double radial_zero_density_predicted(const SemiclassicalLevel& lv, double r, double width, int samples = 201) {
    detail::require_plane(lv, "radial_zero_density_predicted");
    std::vector<double> v(samples);
    for (int i = 0; i < samples; ++i) {
        const double rho = r - 0.5 * width + width * i / (samples - 1);
        const Eigen::MatrixXd om = omega_exact(lv, {rho, 0.0}).value();
        v[i] = std::sqrt(std::max(0.0, om(0, 0))) / detail::kPi;
    }
    return pairwise_sum(v) / samples;
}

// Kac-Rice nodal length per unit area averaged over the box; panels x panels cells of 8x8 Gauss points
// resolve the wavelength-scale oscillation of the exact density
inline double box_density_predicted(const SemiclassicalLevel& lv, const Box& b, int panels = 16) {
    detail::require_plane(lv, "box_density_predicted");
    const auto& g = gauss_legendre(8);
    const double hx = (b.x1 - b.x0) / panels, hy = (b.y1 - b.y0) / panels;
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(panels) * panels * 64);
    for (int a = 0; a < panels; ++a)
        for (int c = 0; c < panels; ++c)
            for (std::size_t i = 0; i < g.x.size(); ++i)
                for (std::size_t j = 0; j < g.x.size(); ++j) {
                    const double x = b.x0 + (a + 0.5 + 0.5 * g.x[i]) * hx, y = b.y0 + (c + 0.5 + 0.5 * g.x[j]) * hy;
                    v.push_back(0.25 * g.w[i] * g.w[j] * kac_rice_density(omega_exact(lv, {x, y}), 2).to_double());
                }
    return pairwise_sum(v) / (panels * panels);
}

// sign components of Phi on a square grid, 4-connected; a component is forbidden-only when none of its
// grid points satisfies |x| <= 1
struct DomainCensus {
    int components = 0;
    int meeting_forbidden = 0;
    int forbidden_only = 0;
};

inline DomainCensus nodal_domain_census(const RandomEigenfunction& field, double half_width, double step) {
    detail::require_plane(field.level, "nodal_domain_census");
    if (!(half_width > 0 && step > 0)) throw std::invalid_argument("nodal_domain_census: bad grid");
    const int cells = static_cast<int>(std::ceil(2 * half_width / step));
    const auto xs = detail::linspace_cells(-half_width, half_width, cells);
    const Eigen::MatrixXd V = GridTables(field.level, xs, xs).values(field.coeffs);
    const int n = cells + 1;
    std::vector<int> label(static_cast<std::size_t>(n) * n, -1);
    std::vector<int> stack;
    DomainCensus c;
    for (int i0 = 0; i0 < n; ++i0)
        for (int j0 = 0; j0 < n; ++j0) {
            if (label[i0 * n + j0] >= 0) continue;
            const bool sgn = V(i0, j0) >= 0;
            bool allowed = false, forbidden = false;
            stack.assign(1, i0 * n + j0);
            label[i0 * n + j0] = c.components;
            while (!stack.empty()) {
                const int id = stack.back();
                stack.pop_back();
                const int i = id / n, j = id % n;
                (xs[i] * xs[i] + xs[j] * xs[j] <= 1.0 ? allowed : forbidden) = true;
                const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
                for (const auto& q : nb) {
                    if (q[0] < 0 || q[0] >= n || q[1] < 0 || q[1] >= n) continue;
                    const int k = q[0] * n + q[1];
                    if (label[k] < 0 && (V(q[0], q[1]) >= 0) == sgn) {
                        label[k] = c.components;
                        stack.push_back(k);
                    }
                }
            }
            ++c.components;
            c.meeting_forbidden += forbidden;
            c.forbidden_only += forbidden && !allowed;
        }
    return c;
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

// one-sample Kolmogorov-Smirnov against N(0,1), asymptotic p-value with the Stephens small-sample correction
inline KsResult ks_test_normal(std::vector<double> x) {
    if (x.empty()) throw std::invalid_argument("ks_test_normal: empty sample");
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double D = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = 0.5 * std::erfc(-x[i] / std::sqrt(2.0));
        D = std::max({D, (i + 1) / n - F, F - i / n});
    }
    const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * D;
    double p = 0;
    if (lam < 0.2) {
        p = 1.0;
    } else {
        for (int k = 1; k <= 100; ++k) {
            const double t = 2.0 * std::exp(-2.0 * k * k * lam * lam);
            p += (k % 2 ? t : -t);
            if (t < 1e-17) break;
        }
    }
    return {D, std::clamp(p, 0.0, 1.0)};
}

} // namespace caustic

#endif
