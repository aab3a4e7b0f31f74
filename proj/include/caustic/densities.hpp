#ifndef CAUSTIC_DENSITIES_HPP
#define CAUSTIC_DENSITIES_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/ellint_2.hpp>

#include "airy.hpp"
#include "projector.hpp"
#include "quadrature.hpp"
#include "scaled_kernel.hpp"
#include "semiclassical.hpp"
#include "tracked_real.hpp"

namespace caustic {

// Omega = omega * 2^{scale_exponent}
struct KacRiceMatrix {
    Eigen::MatrixXd omega;
    std::int64_t scale_exponent = 0;

    Eigen::MatrixXd value() const { return omega * std::ldexp(1.0, static_cast<int>(scale_exponent)); }
};

struct KacRiceDensity {
    TrackedReal value;
    double std_error = 0.0;   // nonzero only for the Monte Carlo sphere average, same scale as value
    double clipped = 0.0;     // most negative eigenvalue clipped to zero
    std::uint64_t samples = 0;
};

// mean of |xi| for xi standard normal in R^d
inline double chi_mean(int d) { return std::sqrt(2.0) * std::tgamma(0.5 * (d + 1)) / std::tgamma(0.5 * d); }

namespace detail {

// average of sqrt(sum lambda_i w_i^2) over the unit sphere; eigenvalues ascending
inline double sphere_mean_norm(const Eigen::VectorXd& lam, std::uint64_t seed, double* se, std::uint64_t* count) {
    const auto d = lam.size();
    if (lam.maxCoeff() <= 0) return 0.0;
    if (d == 1) return std::sqrt(lam[0]);
    if (d == 2) {
        // (1/2pi) int sqrt(a cos^2 + b sin^2) = (2/pi) sqrt(b) E(1 - a/b), a <= b
        const double k = std::sqrt(std::max(0.0, 1.0 - lam[0] / lam[1]));
        return 2.0 / detail::kPi * std::sqrt(lam[1]) * boost::math::ellint_2(k);
    }
    if (d == 3) {
        // Gauss in cos(theta) times trapezoid in phi; the largest eigenvalue sits on the polar axis
        const GaussRule& g = gauss_legendre(64);
        const int nphi = 128;
        double total = 0;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            const double t = g.x[i], st2 = 1 - t * t;
            double ring = 0;
            for (int j = 0; j < nphi; ++j) {
                const double ph = 2 * detail::kPi * j / nphi;
                const double c = std::cos(ph), s = std::sin(ph);
                ring += std::sqrt(lam[0] * st2 * c * c + lam[1] * st2 * s * s + lam[2] * t * t);
            }
            total += g.w[i] * ring / nphi;
        }
        return 0.5 * total;
    }
    const std::uint64_t n = 1000000;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> vals(n);
    Eigen::VectorXd w(d);
    for (std::uint64_t i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) w[j] = nd(rng);
        w.normalize();
        vals[i] = std::sqrt(lam.dot(w.cwiseAbs2()));
    }
    const MeanEstimate m = mean_and_se(vals);
    if (se) *se = m.std_error;
    if (count) *count = n;
    return m.mean;
}

} // namespace detail

// (2 pi)^{-1/2} E|Omega^{1/2} xi|
inline KacRiceDensity kac_rice_density_detailed(const KacRiceMatrix& m, int d, std::uint64_t seed = 0x5eed) {
    if (m.omega.rows() != d || m.omega.cols() != d) throw std::invalid_argument("kac_rice_density: matrix must be d x d");
    const double nrm = m.omega.norm();
    if (!std::isfinite(nrm)) throw std::invalid_argument("kac_rice_density: non-finite matrix");
    KacRiceDensity out;
    if (nrm == 0) return out;
    if ((m.omega - m.omega.transpose()).norm() > 1e-10 * nrm)
        throw std::invalid_argument("kac_rice_density: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m.omega + m.omega.transpose()), Eigen::EigenvaluesOnly);
    Eigen::VectorXd lam = es.eigenvalues();
    const double top = lam.maxCoeff();
    if (lam.minCoeff() < -1e-8 * std::max(top, 0.0) || top <= 0)
        throw std::invalid_argument("kac_rice_density: matrix is indefinite beyond tolerance");
    if (lam.minCoeff() < 0) out.clipped = lam.minCoeff();
    lam = lam.cwiseMax(0.0);
    double se = 0;
    const double pref = chi_mean(d) / std::sqrt(2 * detail::kPi);
    const double core = pref * detail::sphere_mean_norm(lam, seed, &se, &out.samples);
    // the scale 2^e enters as 2^{e/2}
    const std::int64_t e = m.scale_exponent;
    const std::int64_t half = (e >= 0 ? e : e - 1) / 2;
    double odd = (e - 2 * half) == 1 ? std::sqrt(2.0) : 1.0;
    out.value = (TrackedReal(core) * odd).ldexp(half);
    out.std_error = pref * se * odd * std::exp2(static_cast<double>(std::max<std::int64_t>(-1000, std::min<std::int64_t>(1000, half))));
    return out;
}

inline TrackedReal kac_rice_density(const KacRiceMatrix& m, int d) { return kac_rice_density_detailed(m, d).value; }

// Omega = d_x d_y log Pi on the diagonal; the common 2^e of the jet cancels
inline KacRiceMatrix omega_exact(const SemiclassicalLevel& lv, const Point& x) {
    double r2 = 0;
    for (double t : x) r2 += t * t;
    if (r2 == 0) throw std::invalid_argument("omega_exact: x = 0 is excluded");
    const CovarianceJet jet = covariance_jet(lv, x);
    const double p = jet.pi_scaled();
    const Eigen::VectorXd g = jet.grad_scaled();
    const Eigen::MatrixXd H = jet.hess_scaled();
    KacRiceMatrix m;
    m.omega = (p * H - g * g.transpose()) / (p * p);
    m.omega = 0.5 * (m.omega + m.omega.transpose());
    return m;
}

// dimensionless Omega(u) of the caustic tube; the physical matrix is hbar^{-4/3} Omega(u)
inline KacRiceMatrix omega_caustic_scaled(const CausticFrame& f, const Point& u) {
    const int d = f.dim();
    if (d < 2) throw std::invalid_argument("omega_caustic_scaled: need d >= 2");
    if (static_cast<int>(u.size()) != d) throw std::invalid_argument("omega_caustic_scaled: wrong dimension");
    const double s = 2 * f.normal(u), h = 0.5 * d;
    const double a0 = ai_k(-h, s), a1 = ai_k(1 - h, s), a2 = ai_k(2 - h, s), am = ai_k(-1 - h, s);
    if (!(a0 > 0)) throw std::logic_error("omega_caustic_scaled: Ai_{-d/2}(s) is not positive");
    KacRiceMatrix m;
    m.omega = (a2 / a0 - a1 * a1 / (a0 * a0)) * (f.x0 * f.x0.transpose()) +
              0.5 * am / a0 * Eigen::MatrixXd::Identity(d, d);
    return m;
}

// bulk constants
inline double c_allowed(int d) { return std::tgamma(0.5 * (d + 1)) / (std::sqrt(d * detail::kPi) * std::tgamma(0.5 * d)); }
inline double c_forbidden(int d) { return std::tgamma(0.5 * (d + 1)) / (std::sqrt(detail::kPi) * std::tgamma(0.5 * d)); }

enum class Region { allowed_bulk, allowed_annulus, caustic_tube, forbidden_annulus, forbidden_bulk };

inline const char* region_name(Region r) {
    switch (r) {
    case Region::allowed_bulk: return "allowed-bulk";
    case Region::allowed_annulus: return "allowed-annulus";
    case Region::caustic_tube: return "caustic-tube";
    case Region::forbidden_annulus: return "forbidden-annulus";
    case Region::forbidden_bulk: return "forbidden-bulk";
    }
    return "?";
}

inline Region parse_region(const std::string& s) {
    for (Region r : {Region::allowed_bulk, Region::allowed_annulus, Region::caustic_tube, Region::forbidden_annulus,
                     Region::forbidden_bulk})
        if (s == region_name(r)) return r;
    throw std::invalid_argument("unknown regime '" + s + "'");
}

// physical point x = x0 + hbar^alpha u
struct RegimeQuery {
    CausticFrame frame;
    Point u;
    double alpha = 0.0;
    Region region = Region::allowed_bulk;
};

struct RegimeDensity {
    TrackedReal unscaled;       // density at x per unit volume
    TrackedReal rescaled;       // hbar^alpha * unscaled
    double s = 0.0;             // annulus/tube coordinate
    double hbar_exponent = 0.0; // predicted exponent of hbar in the unscaled density
    Point x;
};

inline double regime_exponent(Region r, double alpha) {
    switch (r) {
    case Region::allowed_bulk: return -1.0;
    case Region::allowed_annulus: return -1.0 + 0.5 * alpha;
    case Region::caustic_tube: return -2.0 / 3;
    case Region::forbidden_annulus: return -0.5 - 0.25 * alpha;
    case Region::forbidden_bulk: return -0.5;
    }
    return 0.0;
}

// Omega of the annulus asymptotics, already rescaled by hbar^{2 alpha} when rescale is set
inline KacRiceMatrix omega_annulus(Region r, int d, const Eigen::VectorXd& xhat, double hbar, double alpha, double s,
                                   bool rescale) {
    KacRiceMatrix m;
    const double extra = rescale ? std::pow(hbar, 2 * alpha) : 1.0;
    if (r == Region::allowed_annulus) {
        m.omega = Eigen::MatrixXd::Identity(d, d) * (s / d * std::pow(hbar, -2 + alpha) * extra);
    } else if (r == Region::forbidden_annulus) {
        m.omega = (Eigen::MatrixXd::Identity(d, d) - xhat * xhat.transpose()) *
                  (std::pow(hbar, -1 - 0.5 * alpha) * extra / (2 * std::sqrt(s)));
    } else {
        throw std::invalid_argument("omega_annulus: not an annulus regime");
    }
    return m;
}

inline RegimeDensity density_regime(const RegimeQuery& q, const SemiclassicalLevel& lv) {
    const int d = lv.d;
    if (q.frame.dim() != d || static_cast<int>(q.u.size()) != d)
        throw std::invalid_argument("density_regime: dimension mismatch");
    if (d < 2) throw std::invalid_argument("density_regime: need d >= 2");
    const double tol = 1e-12;
    const bool bulk = q.region == Region::allowed_bulk || q.region == Region::forbidden_bulk;
    const bool tube = q.region == Region::caustic_tube;
    if (bulk && std::fabs(q.alpha) > tol) throw std::invalid_argument("density_regime: bulk needs alpha = 0");
    if (tube && std::fabs(q.alpha - 2.0 / 3) > tol) throw std::invalid_argument("density_regime: tube needs alpha = 2/3");
    if (!bulk && !tube && !(q.alpha > 0 && q.alpha < 2.0 / 3))
        throw std::invalid_argument("density_regime: annulus needs 0 < alpha < 2/3");
    const double h = lv.hbar;
    RegimeDensity out;
    out.x = q.frame.at(q.u, std::pow(h, q.alpha));
    double r2 = 0;
    for (double t : out.x) r2 += t * t;
    const double r = std::sqrt(r2);
    const double u1 = q.frame.normal(q.u);
    out.hbar_exponent = regime_exponent(q.region, q.alpha);
    switch (q.region) {
    case Region::allowed_bulk:
        if (!(r < 1) || r == 0) throw std::invalid_argument("density_regime: point is not in the allowed bulk");
        out.s = 1 - r2;
        out.unscaled = TrackedReal(c_allowed(d) * std::sqrt(1 - r2) / h);
        out.rescaled = out.unscaled;
        break;
    case Region::forbidden_bulk:
        if (!(r > 1)) throw std::invalid_argument("density_regime: point is not in the forbidden bulk");
        out.s = r2 - 1;
        out.unscaled = TrackedReal(c_forbidden(d) * std::sqrt(0.5) / (std::sqrt(r) * std::pow(r2 - 1, 0.25)) / std::sqrt(h));
        out.rescaled = out.unscaled;
        break;
    case Region::allowed_annulus:
    case Region::forbidden_annulus: {
        const bool allowed = q.region == Region::allowed_annulus;
        if (allowed ? !(u1 < 0) : !(u1 > 0))
            throw std::invalid_argument("density_regime: sign of <u,x0> does not match the regime");
        out.s = (allowed ? 1 - r2 : r2 - 1) / std::pow(h, q.alpha);
        if (!(out.s > 0)) throw std::invalid_argument("density_regime: annulus needs s > 0");
        out.unscaled = kac_rice_density(omega_annulus(q.region, d, q.frame.x0, h, q.alpha, out.s, false), d);
        out.rescaled = kac_rice_density(omega_annulus(q.region, d, q.frame.x0, h, q.alpha, out.s, true), d);
        break;
    }
    case Region::caustic_tube: {
        out.s = 2 * u1;
        const TrackedReal F = kac_rice_density(omega_caustic_scaled(q.frame, q.u), d);
        out.rescaled = F;
        out.unscaled = F * std::pow(h, -2.0 / 3);
        break;
    }
    }
    return out;
}

// expected (d-2)-volume density of the nodal set on the caustic, per unit (d-1)-volume, times hbar^{2/3}
inline double caustic_intersection_density(int d) {
    if (d < 2) throw std::invalid_argument("caustic_intersection_density: need d >= 2");
    const double h = 0.5 * d;
    return std::tgamma(h) / (std::sqrt(2 * detail::kPi) * std::tgamma(0.5 * (d - 1))) *
           std::sqrt(ai_k(-1 - h, 0) / ai_k(-h, 0));
}

// d = 2: expected number of caustic crossings times hbar^{2/3}
inline double caustic_crossing_constant() { return 2 * detail::kPi * caustic_intersection_density(2); }

struct TubeMass {
    double exact = 0.0;
    double asymptotic = 0.0;
};

// int_0^inf Ai(s + rho) rho^{d/2 - 1} d rho with rho = tau^2
inline double tube_inner_integral(int d, double s) {
    const double top = std::sqrt(std::max(0.0, -s) + 45.0);
    double total = 0;
    const int pieces = static_cast<int>(std::ceil(top * 4));
    for (int p = 0; p < pieces; ++p) {
        const double a = top * p / pieces, b = top * (p + 1) / pieces;
        total += integrate_adaptive([&](double t) { return 2 * ai(s + t * t) * std::pow(t, d - 1); }, a, b, 1e-13);
    }
    return total;
}

inline TubeMass tube_mass(const SemiclassicalLevel& lv, double kappa) {
    if (!(kappa > 0)) throw std::invalid_argument("tube_mass: kappa must be positive");
    const int d = lv.d;
    const double h = lv.hbar, delta = kappa * std::pow(h, 2.0 / 3);
    const double sphere = 2 * std::pow(detail::kPi, 0.5 * d) / std::tgamma(0.5 * d);
    Point x(d, 0.0);
    const int panels = 40 + static_cast<int>(std::ceil(40 * kappa));
    double radial = integrate_panels(
        [&](double r) {
            x[0] = r;
            return pi_exact(lv, x, x).to_double() * std::pow(r, d - 1);
        },
        std::max(0.0, 1 - delta), 1 + delta, panels, 20);
    TubeMass out;
    out.exact = sphere * radial / static_cast<double>(eigenspace_dim(lv));
    double err = 0;
    const double inner = integrate_adaptive([&](double s) { return ai_k(-0.5 * d, s); }, -2 * kappa, 2 * kappa, 1e-11, &err);
    if (!std::isfinite(inner)) throw std::runtime_error("tube_mass: quadrature failure");
    const double Cd = std::tgamma(d) / std::pow(std::tgamma(0.5 * d), 2);
    out.asymptotic = Cd * std::pow(h, d / 3.0) * std::tgamma(0.5 * d) * inner;
    return out;
}

// points used by the exponent sweep; annuli sit exactly on |x|^2 = 1 -/+ hbar^alpha s
inline Point regime_point(Region r, const CausticFrame& f, double hbar, double alpha, double param) {
    double rad = 1;
    switch (r) {
    case Region::allowed_bulk:
    case Region::forbidden_bulk: rad = param; break;
    case Region::allowed_annulus: rad = std::sqrt(1 - std::pow(hbar, alpha) * param); break;
    case Region::forbidden_annulus: rad = std::sqrt(1 + std::pow(hbar, alpha) * param); break;
    case Region::caustic_tube: rad = 1 + std::pow(hbar, 2.0 / 3) * param; break;
    }
    Point x(f.dim());
    for (int i = 0; i < f.dim(); ++i) x[i] = rad * f.x0[i];
    return x;
}

struct SweepRow {
    int N = 0;
    double hbar = 0;
    double exact = 0;     // Kac-Rice density from the exact jet
    double predicted = 0; // leading-order regime formula
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double slope = 0;    // fitted d log(exact) / d log(hbar)
    double expected = 0; // regime exponent
};

// Annuli are averaged over the band s in [param, band_hi] (uniform in s, which is the area
// measure for d = 2); pointwise values carry a slowly decaying normal-direction oscillation.
inline SweepResult regime_sweep(Region r, int d, const std::vector<int>& Ns, double alpha, double param,
                                double band_hi = 0.0) {
    const CausticFrame f = default_frame(d);
    const bool band = (r == Region::allowed_annulus || r == Region::forbidden_annulus) && band_hi > param;
    SweepResult out;
    out.expected = regime_exponent(r, alpha);
    std::vector<double> lx, ly;
    for (int N : Ns) {
        const auto lv = level_new(d, N);
        auto both = [&](double prm) {
            const Point x = regime_point(r, f, lv.hbar, alpha, prm);
            RegimeQuery q{f, Point(d, 0.0), alpha, r};
            const double a = std::pow(lv.hbar, alpha);
            for (int i = 0; i < d; ++i) q.u[i] = (x[i] - f.x0[i]) / a;
            return std::pair<double, double>(kac_rice_density(omega_exact(lv, x), d).to_double(),
                                             density_regime(q, lv).unscaled.to_double());
        };
        SweepRow row;
        row.N = N;
        row.hbar = lv.hbar;
        if (band) {
            const GaussRule& g = gauss_legendre(20);
            const int panels = 8;
            const double w = (band_hi - param) / panels;
            for (int p = 0; p < panels; ++p)
                for (std::size_t i = 0; i < g.x.size(); ++i) {
                    const auto [e, pr] = both(param + (p + 0.5 * (g.x[i] + 1)) * w);
                    row.exact += 0.5 * g.w[i] * e / panels;
                    row.predicted += 0.5 * g.w[i] * pr / panels;
                }
        } else {
            std::tie(row.exact, row.predicted) = both(param);
        }
        lx.push_back(std::log(lv.hbar));
        ly.push_back(std::log(row.exact));
        out.rows.push_back(row);
    }
    out.slope = fit_slope(lx, ly);
    return out;
}

} // namespace caustic

#endif
