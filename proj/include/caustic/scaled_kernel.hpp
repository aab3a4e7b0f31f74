#ifndef CAUSTIC_SCALED_KERNEL_HPP
#define CAUSTIC_SCALED_KERNEL_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "airy.hpp"
#include "parallel.hpp"
#include "projector.hpp"
#include "quadrature.hpp"

namespace caustic {

// point x0 on the unit caustic sphere plus an orthonormal frame; row 0 is the normal x0
struct CausticFrame {
    Eigen::VectorXd x0;
    Eigen::MatrixXd basis;

    int dim() const { return static_cast<int>(x0.size()); }
    double normal(const Point& u) const {
        double s = 0;
        for (int i = 0; i < dim(); ++i) s += x0[i] * u[i];
        return s;
    }
    Point tangential(const Point& u) const {
        const double u1 = normal(u);
        Point t(u);
        for (int i = 0; i < dim(); ++i) t[i] -= u1 * x0[i];
        return t;
    }
    Point at(const Point& u, double scale) const {
        Point x(dim());
        for (int i = 0; i < dim(); ++i) x[i] = x0[i] + scale * u[i];
        return x;
    }
};

inline CausticFrame make_frame(const Point& x0) {
    const int d = static_cast<int>(x0.size());
    if (d < 1) throw std::invalid_argument("make_frame: empty point");
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x0.data(), d);
    if (std::fabs(v.norm() - 1.0) > 1e-12) throw std::invalid_argument("make_frame: |x0| must be 1");
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(d, d);
    M.col(0) = v;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    Eigen::MatrixXd Q = qr.householderQ();
    if (Q.col(0).dot(v) < 0) Q.col(0) *= -1.0;
    CausticFrame f;
    f.x0 = v;
    f.basis = Q.transpose();
    f.basis.row(0) = v.transpose();
    return f;
}

inline CausticFrame default_frame(int d) {
    Point e(d, 0.0);
    e[0] = 1.0;
    return make_frame(e);
}

namespace detail {

inline void check_pi0_args(const CausticFrame& f, const Point& u, const Point& v) {
    if (f.dim() < 2) throw std::invalid_argument("pi0: need d >= 2");
    if (static_cast<int>(u.size()) != f.dim() || static_cast<int>(v.size()) != f.dim())
        throw std::invalid_argument("pi0: point has wrong dimension");
    for (double t : u)
        if (!std::isfinite(t)) throw std::invalid_argument("pi0: non-finite coordinate");
    for (double t : v)
        if (!std::isfinite(t)) throw std::invalid_argument("pi0: non-finite coordinate");
}

// |p| beyond which Ai(2^{1/3}(m + p^2/2)) < 1e-14
inline double pi0_cutoff(double m) { return std::sqrt(2.0 * std::max(0.0, 13.0 / std::cbrt(2.0) - m)); }

inline double airy_profile(double m, double p) { return ai(std::cbrt(2.0) * (m + 0.5 * p * p)); }

} // namespace detail

struct Pi0Result {
    double value = 0.0;
    double imag_residue = 0.0; // zero by construction for the radial reductions
};

// p-integral form; the angular part of the Fourier integral is done in closed form
inline Pi0Result pi0_airy_detailed(const CausticFrame& f, const Point& u, const Point& v) {
    detail::check_pi0_args(f, u, v);
    const int d = f.dim();
    if (d > 4) throw ResourceError("pi0_airy: p-quadrature is capped at d <= 4, use pi0_contour");
    const double u1 = f.normal(u), v1 = f.normal(v);
    const Point tu = f.tangential(u), tv = f.tangential(v);
    double t = 0;
    for (int i = 0; i < d; ++i) t += (tu[i] - tv[i]) * (tu[i] - tv[i]);
    t = std::sqrt(t);
    const double P = detail::pi0_cutoff(std::min(u1, v1));
    const double m = std::max(0.0, -std::min(u1, v1));
    const int panels = static_cast<int>(std::ceil(P * (4.0 + t + 2.0 * m)));
    auto prof = [&](double p) { return detail::airy_profile(u1, p) * detail::airy_profile(v1, p); };
    double radial = 0;
    switch (d) {
    case 2:
        radial = 2.0 * integrate_panels([&](double p) { return std::cos(t * p) * prof(p); }, 0.0, P, panels, 20);
        break;
    case 3:
        radial = 2.0 * detail::kPi *
                 integrate_panels([&](double p) { return std::cyl_bessel_j(0.0, t * p) * prof(p) * p; }, 0.0, P, panels, 20);
        break;
    default: {
        auto sinc = [](double z) { return std::fabs(z) < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z; };
        radial = 4.0 * detail::kPi *
                 integrate_panels([&](double p) { return sinc(t * p) * prof(p) * p * p; }, 0.0, P, panels, 20);
    }
    }
    Pi0Result r;
    r.value = std::pow(2.0, 2.0 / 3) * std::pow(2 * detail::kPi, 1 - d) * radial;
    return r;
}

inline double pi0_airy(const CausticFrame& f, const Point& u, const Point& v) { return pi0_airy_detailed(f, u, v).value; }

// contour form with T = 2 tau, which turns the cubic T^3/24 into tau^3/3
inline double pi0_contour(const CausticFrame& f, const Point& u, const Point& v) {
    detail::check_pi0_args(f, u, v);
    const int d = f.dim();
    double q = 0;
    for (int i = 0; i < d; ++i) q += (u[i] - v[i]) * (u[i] - v[i]);
    q *= 0.25;
    const double s = f.normal(u) + f.normal(v);
    const double tmin = s >= -1.0 ? std::max(1.0, std::sqrt(std::max(s, 0.0))) : 1.0 / std::sqrt(-s);
    const double cap = 1.0 / (1.0 + q / (tmin * tmin));
    const double kappa = 0.5 * d;
    const double I = airy_contour(
        [q, kappa](std::complex<double> tau) { return std::pow(tau, -kappa) * std::exp(-q / tau); }, s, cap);
    return std::pow(2 * detail::kPi, -kappa) * std::pow(2.0, 1.0 - kappa) * I;
}

inline double pi0(const CausticFrame& f, const Point& u, const Point& v) {
    return f.dim() <= 3 ? pi0_airy(f, u, v) : pi0_contour(f, u, v);
}

// diagonal reduction 2^{1-d} pi^{-d/2} Ai_{-d/2}(2 u1)
inline double pi0_diagonal(int d, double u1) {
    return std::pow(2.0, 1 - d) * std::pow(detail::kPi, -0.5 * d) * ai_k(-0.5 * d, 2 * u1);
}

struct Pi0Pair {
    Point u, v;
};

inline std::vector<double> pi0_batch(const CausticFrame& f, const std::vector<Pi0Pair>& pairs, unsigned threads = 0) {
    return parallel_map(pairs, [&](const Pi0Pair& p) { return pi0(f, p.u, p.v); }, threads);
}

inline Eigen::MatrixXd pi0_gram(const CausticFrame& f, const std::vector<Point>& pts) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd G(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) G(i, j) = G(j, i) = pi0(f, pts[i], pts[j]);
    return G;
}

struct CompositionResult {
    double composed = 0.0; // int pi0(u,w) pi0(w,v) dw over the window
    double direct = 0.0;   // pi0(u,v)
    double rel_error = 0.0;
};

// d = 2 only: the window is w1 in [-W, 8], w2 in [-W2, W2] in frame coordinates.
// The tangential Fourier sum factorises, so each kernel table is two matrix products.
inline CompositionResult pi0_compose(const CausticFrame& f, const Point& u, const Point& v, double W, double W2) {
    detail::check_pi0_args(f, u, v);
    if (f.dim() != 2) throw std::invalid_argument("pi0_compose: d = 2 only");
    if (!(W > 0 && W2 > 0)) throw std::invalid_argument("pi0_compose: window must be positive");
    const double C = 2.0 * std::pow(2.0, 2.0 / 3) / (2 * detail::kPi);
    const Eigen::Vector2d t = f.basis.row(1).transpose();
    auto coords = [&](const Point& a) { return std::pair<double, double>(f.normal(a), a[0] * t[0] + a[1] * t[1]); };

    auto nodes = [](double a, double b, double width, unsigned order, std::vector<double>& x, std::vector<double>& w) {
        const GaussRule& g = gauss_legendre(order);
        const int n = static_cast<int>(std::ceil((b - a) / width));
        const double h = (b - a) / n;
        for (int p = 0; p < n; ++p)
            for (std::size_t i = 0; i < g.x.size(); ++i) {
                x.push_back(a + (p + 0.5) * h + 0.5 * h * g.x[i]);
                w.push_back(0.5 * h * g.w[i]);
            }
    };
    std::vector<double> pw, pw_w, x1, x1_w, x2, x2_w;
    const double P = detail::pi0_cutoff(-W - 1.0);
    nodes(0.0, P, 0.1, 10, pw, pw_w);
    nodes(-W, 8.0, 0.5, 10, x1, x1_w);
    nodes(-W2, W2, 0.25, 10, x2, x2_w);
    const auto np = static_cast<Eigen::Index>(pw.size()), n1 = static_cast<Eigen::Index>(x1.size()),
               n2 = static_cast<Eigen::Index>(x2.size());

    Eigen::MatrixXd A(n1, np), Cw(n2, np), Sw(n2, np);
    for (Eigen::Index i = 0; i < n1; ++i)
        for (Eigen::Index k = 0; k < np; ++k) A(i, k) = detail::airy_profile(x1[i], pw[k]);
    for (Eigen::Index j = 0; j < n2; ++j)
        for (Eigen::Index k = 0; k < np; ++k) {
            Cw(j, k) = std::cos(x2[j] * pw[k]);
            Sw(j, k) = std::sin(x2[j] * pw[k]);
        }
    auto table = [&](const Point& a) {
        const auto [a1, a2] = coords(a);
        Eigen::VectorXd c(np), s(np);
        for (Eigen::Index k = 0; k < np; ++k) {
            const double base = C * pw_w[k] * detail::airy_profile(a1, pw[k]);
            c[k] = base * std::cos(a2 * pw[k]);
            s[k] = base * std::sin(a2 * pw[k]);
        }
        Eigen::MatrixXd T = (A * c.asDiagonal()) * Cw.transpose() + (A * s.asDiagonal()) * Sw.transpose();
        return T;
    };
    const Eigen::MatrixXd Tu = table(u), Tv = table(v);
    const Eigen::VectorXd w1 = Eigen::Map<const Eigen::VectorXd>(x1_w.data(), n1);
    const Eigen::VectorXd w2 = Eigen::Map<const Eigen::VectorXd>(x2_w.data(), n2);
    CompositionResult r;
    r.composed = w1.transpose() * Tu.cwiseProduct(Tv) * w2;
    r.direct = pi0_airy(f, u, v);
    r.rel_error = std::fabs(r.composed - r.direct) / std::fabs(r.direct);
    return r;
}

} // namespace caustic

#endif
