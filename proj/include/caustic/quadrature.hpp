#ifndef CAUSTIC_QUADRATURE_HPP
#define CAUSTIC_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

namespace caustic {

namespace detail {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrtPi = 1.7724538509055160273;
} // namespace detail

// n-point Gauss-Legendre rule on [-1,1], nodes ascending.
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

inline const GaussRule& gauss_legendre(unsigned n) {
    static std::mutex mu;
    static std::map<unsigned, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
    // boost returns the non-negative zeros only
    const std::vector<double> pos = boost::math::legendre_p_zeros<double>(static_cast<int>(n));
    GaussRule r;
    auto weight = [n](double t) {
        const double p = boost::math::legendre_p_prime(static_cast<int>(n), t);
        return 2.0 / ((1.0 - t * t) * p * p);
    };
    for (auto it2 = pos.rbegin(); it2 != pos.rend(); ++it2) {
        if (*it2 == 0.0) continue;
        r.x.push_back(-*it2);
        r.w.push_back(weight(*it2));
    }
    if (n % 2 == 1) {
        r.x.push_back(0.0);
        r.w.push_back(weight(0.0));
    }
    for (double t : pos) {
        if (t == 0.0) continue;
        r.x.push_back(t);
        r.w.push_back(weight(t));
    }
    return cache.emplace(n, std::move(r)).first->second;
}

// Composite Gauss-Legendre on [a,b] split into `panels` equal pieces.
template <class F>
auto integrate_panels(F&& f, double a, double b, int panels, unsigned order = 20) {
    const GaussRule& g = gauss_legendre(order);
    const double h = (b - a) / panels;
    decltype(f(a)) sum{};
    for (int p = 0; p < panels; ++p) {
        const double c = a + (p + 0.5) * h;
        decltype(f(a)) part{};
        for (std::size_t i = 0; i < g.x.size(); ++i) part += g.w[i] * f(c + 0.5 * h * g.x[i]);
        sum += 0.5 * h * part;
    }
    return sum;
}

// Adaptive Gauss-Kronrod (61 points) on [a,b].
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-12, double* err = nullptr,
                          unsigned max_depth = 15) {
    double e = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, max_depth, tol, &e);
    if (err) *err = e;
    return v;
}

// Pairwise summation; result does not depend on how the input was produced.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double t : v) s += t;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

inline MeanEstimate mean_and_se(std::span<const double> v) {
    MeanEstimate m;
    m.n = v.size();
    if (v.empty()) return m;
    m.mean = pairwise_sum(v) / static_cast<double>(v.size());
    if (v.size() > 1) {
        std::vector<double> sq(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m.mean) * (v[i] - m.mean);
        const double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
        m.std_error = std::sqrt(var / static_cast<double>(v.size()));
    }
    return m;
}

// least-squares slope of y against x
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace caustic

#endif
