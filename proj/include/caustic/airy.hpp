#ifndef CAUSTIC_AIRY_HPP
#define CAUSTIC_AIRY_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "quadrature.hpp"

namespace caustic {

namespace detail {

// double-double arithmetic, enough for the Maclaurin series of Ai
struct dd {
    double hi = 0.0, lo = 0.0;
};

inline dd two_sum(double a, double b) {
    const double s = a + b;
    const double v = s - a;
    return {s, (a - (s - v)) + (b - v)};
}

inline dd dd_add(dd a, dd b) {
    dd s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return two_sum(s.hi, s.lo);
}

inline dd dd_mul(dd a, dd b) {
    const double p = a.hi * b.hi;
    const double e = std::fma(a.hi, b.hi, -p) + (a.hi * b.lo + a.lo * b.hi);
    return two_sum(p, e);
}

inline dd dd_div(dd a, double b) {
    const double q = a.hi / b;
    const double r = std::fma(-q, b, a.hi) + a.lo;
    return two_sum(q, r / b);
}

inline dd dd_neg(dd a) { return {-a.hi, -a.lo}; }

inline double ai_maclaurin(double z) {
    const dd c1{0.3550280538878172, 2.05233632436212e-17};   // Ai(0)
    const dd c2{0.2588194037928068, -2.522243111610832e-17}; // -Ai'(0)
    const dd zz{z, 0.0};
    const dd z3 = dd_mul(dd_mul(zz, zz), zz);
    dd f{1.0, 0.0}, g = zz;
    dd fs = f, gs = g;
    for (int k = 1; k < 200; ++k) {
        f = dd_div(dd_div(dd_mul(f, z3), 3.0 * k - 1.0), 3.0 * k);
        g = dd_div(dd_div(dd_mul(g, z3), 3.0 * k), 3.0 * k + 1.0);
        fs = dd_add(fs, f);
        gs = dd_add(gs, g);
        if (std::fabs(f.hi) + std::fabs(g.hi) < 1e-34 * (std::fabs(fs.hi) + std::fabs(gs.hi))) break;
    }
    const dd r = dd_add(dd_mul(c1, fs), dd_neg(dd_mul(c2, gs)));
    return r.hi + r.lo;
}

// u_k coefficients of the Airy asymptotic series, truncated at the smallest term
inline double ai_asymptotic(double s) {
    const double x = std::fabs(s);
    const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    double u = 1.0;
    if (s > 0) {
        double sum = 1.0, term = 1.0, prev = 1e300;
        for (int k = 1; k < 60; ++k) {
            u *= (6.0 * k - 5) * (6.0 * k - 3) * (6.0 * k - 1) / ((2.0 * k - 1) * 216.0 * k);
            term = (k % 2 ? -u : u) / std::pow(zeta, k);
            if (std::fabs(term) >= prev) break;
            sum += term;
            prev = std::fabs(term);
        }
        return std::exp(-zeta) / (2.0 * kSqrtPi * std::pow(x, 0.25)) * sum;
    }
    double P = 1.0, Q = 0.0, prev = 1e300;
    for (int k = 1; k < 120; ++k) {
        u *= (6.0 * k - 5) * (6.0 * k - 3) * (6.0 * k - 1) / ((2.0 * k - 1) * 216.0 * k);
        const double t = u / std::pow(zeta, k);
        if (t >= prev) break;
        prev = t;
        // k even -> P with sign (-1)^{k/2}; k odd -> Q with sign (-1)^{(k-1)/2}
        if (k % 2 == 0) P += ((k / 2) % 2 ? -t : t);
        else Q += (((k - 1) / 2) % 2 ? -t : t);
    }
    const double ph = zeta - kPi / 4;
    return (std::cos(ph) * P + std::sin(ph) * Q) / (kSqrtPi * std::pow(x, 0.25));
}

} // namespace detail

// Airy function Ai; series in double-double for |s| <= 8, asymptotic beyond.
inline double ai(double s) {
    if (std::isnan(s)) return s;
    if (std::fabs(s) <= 8.0) return detail::ai_maclaurin(s);
    if (s > 250.0) return 0.0;
    return detail::ai_asymptotic(s);
}

// (1/pi) Im of the integral of g(T) exp(T^3/3 - sT) along the upper half of the
// Airy contour; equals the full contour integral / (2 pi i) when g(conj T) = conj g(T).
// g must be holomorphic for Re T > 0.
// max_width caps the panel width for weights g that oscillate on their own
template <class G>
double airy_contour(G&& g, double s, double max_width = 1.0) {
    using cd = std::complex<double>;
    const double tail = 1e-17;
    auto phase = [s](cd T) { return T * T * T / 3.0 - s * T; };

    if (s >= -1.0) {
        const double t0 = std::max(1.0, std::sqrt(std::max(s, 0.0)));
        const double ref = t0 * t0 * t0 / 3.0 - s * t0;
        const cd dir = std::polar(1.0, detail::kPi / 3.0);
        const GaussRule& gr = gauss_legendre(30);
        const double width = std::min({1.0, 2.0 / std::sqrt(t0), max_width});
        cd sum = 0.0;
        double peak = 0.0;
        for (int p = 0; p < 4000; ++p) {
            const double a = p * width;
            cd part = 0.0;
            for (std::size_t i = 0; i < gr.x.size(); ++i) {
                const double r = a + 0.5 * width * (gr.x[i] + 1.0);
                const cd T = t0 + r * dir;
                const cd h = g(T) * std::exp(phase(T) - ref);
                peak = std::max(peak, std::abs(h));
                part += gr.w[i] * h;
            }
            sum += 0.5 * width * part * dir;
            const cd Te = t0 + (a + width) * dir;
            const double end = std::abs(g(Te) * std::exp(phase(Te) - ref));
            if (end < tail * peak && p >= 1) break;
        }
        return std::exp(ref) * sum.imag() / detail::kPi;
    }

    // s < -1: climb the line Re T = c up to the saddle near i sqrt|s|, then leave
    // along its steepest-descent direction.
    const double a = std::sqrt(-s);
    const double c = 1.0 / a;
    const double ref = c * c * c / 3.0 - c * a * a + c * (-s); // Re phase at the saddle end
    const GaussRule& gr = gauss_legendre(24);
    cd sum = 0.0;
    double peak = 0.0;
    {
        const double hw = std::min({0.5, 2.0 / (std::fabs(s) + 1.0), c, max_width});
        const int n = static_cast<int>(std::ceil(a / hw));
        const double w = a / n;
        const cd I(0.0, 1.0);
        for (int p = 0; p < n; ++p) {
            cd part = 0.0;
            for (std::size_t i = 0; i < gr.x.size(); ++i) {
                const double y = p * w + 0.5 * w * (gr.x[i] + 1.0);
                const cd T(c, y);
                const cd h = g(T) * std::exp(phase(T) - ref);
                peak = std::max(peak, std::abs(h));
                part += gr.w[i] * h;
            }
            sum += 0.5 * w * part * I;
        }
    }
    {
        const cd T0(c, a);
        const cd dir = std::polar(1.0, detail::kPi / 4.0);
        const double w = std::min({1.0, 1.0 / std::sqrt(a), max_width});
        for (int p = 0; p < 4000; ++p) {
            cd part = 0.0;
            for (std::size_t i = 0; i < gr.x.size(); ++i) {
                const double r = p * w + 0.5 * w * (gr.x[i] + 1.0);
                const cd T = T0 + r * dir;
                const cd h = g(T) * std::exp(phase(T) - ref);
                peak = std::max(peak, std::abs(h));
                part += gr.w[i] * h;
            }
            sum += 0.5 * w * part * dir;
            const cd Te = T0 + (p + 1) * w * dir;
            if (std::abs(g(Te) * std::exp(phase(Te) - ref)) < tail * peak && p >= 1) break;
        }
    }
    return std::exp(ref) * sum.imag() / detail::kPi;
}

enum class AiryMethod { contour, gamma_integral, asymptotic, automatic };

inline const char* method_name(AiryMethod m) {
    switch (m) {
    case AiryMethod::contour: return "contour";
    case AiryMethod::gamma_integral: return "gamma_integral";
    case AiryMethod::asymptotic: return "asymptotic";
    default: return "auto";
    }
}

inline double ai_k_contour(double k, double s) {
    if (k == 0.0) return airy_contour([](std::complex<double>) { return std::complex<double>(1.0); }, s);
    return airy_contour([k](std::complex<double> T) { return std::pow(T, k); }, s);
}

// (1/Gamma(kappa)) int_0^inf Ai(s+rho) rho^{kappa-1} drho for k = -kappa < 0
inline double ai_k_gamma(double k, double s) {
    if (!(k < 0)) throw std::invalid_argument("ai_k: gamma_integral method needs a negative weight");
    const double kappa = -k;
    const double R = std::max(0.0, -s) + 45.0;
    // pieces of length ~1 in rho keep the oscillatory part well resolved
    const int pieces = static_cast<int>(std::ceil(R));
    double total = 0.0;
    if (kappa < 1.0) {
        // rho = tau^{1/kappa} removes the endpoint singularity
        for (int p = 0; p < pieces; ++p) {
            const double ta = std::pow(R * p / pieces, kappa), tb = std::pow(R * (p + 1) / pieces, kappa);
            total += integrate_adaptive(
                [&](double t) { return ai(s + std::pow(t, 1.0 / kappa)) / kappa; }, ta, tb);
        }
    } else {
        for (int p = 0; p < pieces; ++p) {
            const double ra = R * p / pieces, rb = R * (p + 1) / pieces;
            total += integrate_adaptive(
                [&](double r) { return ai(s + r) * std::pow(r, kappa - 1.0); }, ra, rb);
        }
    }
    return total / std::tgamma(kappa);
}

// Asymptotic expansions for |s| >= 8 with weight argument w (value approximates Ai_w(s)).
// For s > 0 the bracket carries `order` correction terms in s^{-3/2};
// order 1 is the classical single correction.
inline double ai_k_asymptotic(double w, double s, int order = 2) {
    if (std::fabs(s) < 8.0) throw std::domain_error("ai_k_asymptotic: |s| below the crossover 8");
    const double kappa = -w;
    if (s > 0) {
        const double lam = s * std::sqrt(s);
        auto dfact = [](int n) {
            double r = 1.0;
            for (; n > 1; n -= 2) r *= n;
            return r;
        };
        double series = 0.0;
        for (int n = 0; n <= order; ++n) {
            double cn = 0.0;
            for (int a = 0; a <= 2 * n; ++a) {
                const int b = 2 * n - a;
                double ba = 1.0; // binomial(-kappa, a)
                for (int i = 0; i < a; ++i) ba *= (-kappa - i) / (i + 1);
                const double sign = ((b + n) % 2) ? -1.0 : 1.0;
                cn += sign * ba * dfact(a + 3 * b - 1) /
                      (std::pow(3.0, b) * std::pow(2.0, 0.5 * (a + 3 * b)) * std::tgamma(b + 1.0));
            }
            series += cn / std::pow(lam, n);
        }
        return std::exp(-2.0 / 3.0 * lam) / (2.0 * detail::kSqrtPi) * std::pow(s, -(2 * kappa + 1) / 4) * series;
    }
    const double x = -s;
    double poly = 0.0, prev = 1e300;
    for (int j = 0; j < 60; ++j) {
        const double arg = kappa - 3.0 * j;
        if (arg <= 0 && std::fabs(arg - std::round(arg)) < 1e-12) continue; // pole of Gamma: term vanishes
        const double t = std::pow(x, arg - 1.0) / (std::pow(3.0, j) * std::tgamma(arg));
        if (std::fabs(t) > prev) break;
        prev = std::fabs(t);
        poly += t;
    }
    const double osc = std::sin(2.0 * x * std::sqrt(x) / 3.0 - (2 * kappa - 1) * detail::kPi / 4) /
                       (detail::kSqrtPi * std::pow(x, (2 * kappa + 1) / 4));
    return poly + osc;
}

// Weighted Airy function Ai_k(s). With check = true and k < 0 the contour and
// gamma-integral values must agree to 1e-8 or a runtime_error is thrown.
inline double ai_k(double k, double s, AiryMethod m = AiryMethod::automatic, bool check = false) {
    if (!std::isfinite(s) || !std::isfinite(k)) throw std::invalid_argument("ai_k: non-finite input");
    double v = 0.0;
    switch (m) {
    case AiryMethod::gamma_integral: v = ai_k_gamma(k, s); break;
    case AiryMethod::asymptotic: v = ai_k_asymptotic(k, s); break;
    default: v = ai_k_contour(k, s); break;
    }
    if (check && k < 0) {
        const double other = (m == AiryMethod::gamma_integral) ? ai_k_contour(k, s) : ai_k_gamma(k, s);
        const double scale = std::max({std::fabs(v), std::fabs(other), 1e-300});
        if (std::fabs(v - other) > 1e-8 * scale && std::fabs(v - other) > 1e-13)
            throw std::runtime_error("ai_k: contour and gamma-integral values disagree at k=" + std::to_string(k) +
                                     " s=" + std::to_string(s));
    }
    return v;
}

} // namespace caustic

#endif
