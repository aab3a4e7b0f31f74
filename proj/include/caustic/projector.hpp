#ifndef CAUSTIC_PROJECTOR_HPP
#define CAUSTIC_PROJECTOR_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "parallel.hpp"
#include "quadrature.hpp"
#include "semiclassical.hpp"
#include "tracked_real.hpp"

namespace caustic {

using Point = std::vector<double>;

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// work budget for the separable beta-sum, d*N^{d-1}
inline double& projector_budget() {
    static double budget = 5e9;
    return budget;
}

namespace detail {

inline void check_budget(const SemiclassicalLevel& lv) {
    const double work = lv.d * std::pow(static_cast<double>(lv.N) + 1.0, lv.d - 1);
    if (work > projector_budget())
        throw ResourceError("projector: d*N^(d-1) = " + std::to_string(work) + " exceeds the configured budget");
}

inline void check_point(const SemiclassicalLevel& lv, const Point& x, const char* who) {
    if (static_cast<int>(x.size()) != lv.d) throw std::invalid_argument(std::string(who) + ": point has wrong dimension");
    for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite coordinate");
}

// sum over |beta| = N of prod_i a_i[beta_i]; coordinates folded left to right
inline TrackedReal convolve_at(const std::vector<const std::vector<TrackedReal>*>& a, int N) {
    const std::size_t d = a.size();
    if (d == 1) return (*a[0])[N];
    std::vector<TrackedReal> acc(a[0]->begin(), a[0]->begin() + N + 1);
    for (std::size_t j = 1; j + 1 < d; ++j) {
        std::vector<TrackedReal> next(N + 1);
        for (int n = 0; n <= N; ++n) {
            TrackedReal s;
            for (int m = 0; m <= n; ++m) s += acc[m] * (*a[j])[n - m];
            next[n] = s;
        }
        acc.swap(next);
    }
    TrackedReal s;
    const auto& last = *a[d - 1];
    for (int m = 0; m <= N; ++m) s += acc[m] * last[N - m];
    return s;
}

} // namespace detail

// Pi(x,y) = sum_{|beta|=N} phi_beta(x) phi_beta(y)
inline TrackedReal pi_exact(const SemiclassicalLevel& lv, const Point& x, const Point& y) {
    detail::check_point(lv, x, "pi_exact");
    detail::check_point(lv, y, "pi_exact");
    detail::check_budget(lv);
    std::vector<std::vector<TrackedReal>> P(lv.d);
    std::vector<const std::vector<TrackedReal>*> ptr(lv.d);
    for (int i = 0; i < lv.d; ++i) {
        const auto hx = hermite_all(lv, x[i]);
        const auto hy = (y[i] == x[i]) ? hx : hermite_all(lv, y[i]);
        P[i].resize(lv.N + 1);
        for (int k = 0; k <= lv.N; ++k) P[i][k] = hx[k] * hy[k];
        ptr[i] = &P[i];
    }
    return detail::convolve_at(ptr, lv.N);
}

struct CovarianceJet {
    Point point;
    TrackedReal pi;                             // Pi(x,x)
    std::vector<TrackedReal> grad;              // d/dx_i Pi(x,y) at y=x
    std::vector<std::vector<TrackedReal>> hess; // d/dx_i d/dy_j Pi(x,y) at y=x

    std::int64_t common_exponent() const { return pi.exponent(); }

    // entries divided by 2^{common_exponent()}
    double pi_scaled() const { return pi.to_double_shifted(common_exponent()); }
    Eigen::VectorXd grad_scaled() const {
        Eigen::VectorXd g(grad.size());
        for (std::size_t i = 0; i < grad.size(); ++i) g[i] = grad[i].to_double_shifted(common_exponent());
        return g;
    }
    Eigen::MatrixXd hess_scaled() const {
        const auto d = static_cast<Eigen::Index>(hess.size());
        Eigen::MatrixXd h(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) h(i, j) = hess[i][j].to_double_shifted(common_exponent());
        return h;
    }
    // covariance of (Phi(x), grad Phi(x)), scaled like the entries above
    Eigen::MatrixXd one_jet_covariance_scaled() const {
        const auto d = static_cast<Eigen::Index>(grad.size());
        Eigen::MatrixXd S(d + 1, d + 1);
        S(0, 0) = pi_scaled();
        const Eigen::VectorXd g = grad_scaled();
        S.block(1, 0, d, 1) = g;
        S.block(0, 1, 1, d) = g.transpose();
        S.block(1, 1, d, d) = hess_scaled();
        return S;
    }
};

inline CovarianceJet covariance_jet(const SemiclassicalLevel& lv, const Point& x) {
    detail::check_point(lv, x, "covariance_jet");
    detail::check_budget(lv);
    const int d = lv.d, N = lv.N;
    std::vector<std::vector<TrackedReal>> P(d), D(d), H(d);
    for (int i = 0; i < d; ++i) {
        const HermiteJet j = hermite_jet(lv, x[i]);
        P[i].resize(N + 1);
        D[i].resize(N + 1);
        H[i].resize(N + 1);
        for (int k = 0; k <= N; ++k) {
            P[i][k] = j.value[k] * j.value[k];
            D[i][k] = j.deriv[k] * j.value[k];
            H[i][k] = j.deriv[k] * j.deriv[k];
        }
    }
    CovarianceJet jet;
    jet.point = x;
    std::vector<const std::vector<TrackedReal>*> ptr(d);
    for (int i = 0; i < d; ++i) ptr[i] = &P[i];
    jet.pi = detail::convolve_at(ptr, N);
    jet.grad.resize(d);
    jet.hess.assign(d, std::vector<TrackedReal>(d));
    for (int i = 0; i < d; ++i) {
        auto p = ptr;
        p[i] = &D[i];
        jet.grad[i] = detail::convolve_at(p, N);
        p[i] = &H[i];
        jet.hess[i][i] = detail::convolve_at(p, N);
        for (int j = i + 1; j < d; ++j) {
            auto q = ptr;
            q[i] = &D[i];
            q[j] = &D[j];
            jet.hess[i][j] = jet.hess[j][i] = detail::convolve_at(q, N);
        }
    }
    return jet;
}

struct MehlerResult {
    double value = 0.0;
    double alias_bound = 0.0;
    bool alias_warning = false; // alias bound above 1e-8 of |value|
    bool certified = true;      // |x|,|y| <= 1.3
    double cancellation = 1.0;  // largest trapezoid term over |value|
};

inline int mehler_default_nodes(int N) { return std::max(4 * (N + 1), 512); }

// Trapezoid rule for the z^N coefficient of the Mehler generating function on |z| = radius.
inline MehlerResult pi_mehler_detailed(const SemiclassicalLevel& lv, const Point& x, const Point& y, int num_nodes,
                                       double radius) {
    detail::check_point(lv, x, "pi_mehler");
    detail::check_point(lv, y, "pi_mehler");
    if (!(radius > 0 && radius < 1)) throw std::invalid_argument("pi_mehler: radius must lie in (0,1)");
    if (num_nodes < 4 * (lv.N + 1)) throw std::invalid_argument("pi_mehler: need at least 4(N+1) nodes");
    using cd = std::complex<double>;
    const double h = lv.hbar;
    double xx = 0, yy = 0, xy = 0;
    for (int i = 0; i < lv.d; ++i) {
        xx += x[i] * x[i];
        yy += y[i] * y[i];
        xy += x[i] * y[i];
    }
    auto gen = [&](cd z) {
        const cd w = 1.0 - z * z;
        const cd Q = (1.0 + z * z) / w * (0.5 * (xx + yy)) - 2.0 * z * xy / w;
        return std::pow(detail::kPi * h * w, -0.5 * lv.d) * std::exp(-Q / h);
    };
    const int K = num_nodes;
    std::vector<double> terms(K);
    for (int j = 0; j < K; ++j) {
        const double th = 2.0 * detail::kPi * j / K;
        const cd z = std::polar(radius, th);
        const cd v = gen(z) * std::polar(std::pow(radius, -lv.N), -lv.N * th);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::overflow_error("pi_mehler: integrand overflow (points too deep in the forbidden region)");
        terms[j] = v.real();
    }
    MehlerResult r;
    r.value = pairwise_sum(terms) / K;
    double tmax = 0.0;
    for (double t : terms) tmax = std::max(tmax, std::fabs(t));
    r.cancellation = r.value != 0.0 ? tmax / std::fabs(r.value) : std::numeric_limits<double>::infinity();
    // Cauchy bound on the aliased coefficients, best over a few larger circles
    r.alias_bound = std::numeric_limits<double>::infinity();
    for (double f : {0.5, 0.9, 0.99}) {
        const double rho = radius + f * (1.0 - radius);
        double gmax = 0.0;
        for (int j = 0; j < K; ++j) gmax = std::max(gmax, std::abs(gen(std::polar(rho, 2.0 * detail::kPi * j / K))));
        const double q = std::pow(radius / rho, K);
        r.alias_bound = std::min(r.alias_bound, gmax * std::pow(rho, -lv.N) * q / (1.0 - q));
    }
    r.alias_warning = r.alias_bound > 1e-8 * std::fabs(r.value);
    r.certified = std::sqrt(xx) <= 1.3 && std::sqrt(yy) <= 1.3;
    return r;
}

inline double pi_mehler(const SemiclassicalLevel& lv, const Point& x, const Point& y, int num_nodes = -1,
                        double radius = 0.9) {
    if (num_nodes < 0) num_nodes = mehler_default_nodes(lv.N);
    return pi_mehler_detailed(lv, x, y, num_nodes, radius).value;
}

struct PointPair {
    Point x, y;
};

inline std::vector<TrackedReal> pi_exact_batch(const SemiclassicalLevel& lv, const std::vector<PointPair>& pairs,
                                               unsigned threads = 0) {
    return parallel_map(pairs, [&](const PointPair& p) { return pi_exact(lv, p.x, p.y); }, threads);
}

} // namespace caustic

#endif
