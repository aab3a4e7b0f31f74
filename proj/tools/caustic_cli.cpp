// Command-line front end: every subcommand writes one CSV table (stdout or --output) and, with --output or
// --manifest, a JSON manifest. Exit status 0 on success, 2 when a requested --check fails, 1 on usage errors.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <caustic/caustic.hpp>

using namespace caustic;
using nlohmann::json;

namespace {

#ifndef CAUSTIC_VERSION
#define CAUSTIC_VERSION "dev"
#endif

struct Result {
    csv::Table table;
    bool checked = false;
    bool passed = true;
    std::string check_message;
    json summary = json::object();
};

struct Globals {
    std::string output, manifest, config;
    std::uint64_t seed = 1;
    int threads = 0;
    bool check = false;
    double tol = std::nan("");
};

double tol_or(const Globals& g, double fallback) { return std::isnan(g.tol) ? fallback : g.tol; }

void fail_check(Result& r, const std::string& msg) {
    r.passed = false;
    if (!r.check_message.empty()) r.check_message += "; ";
    r.check_message += msg;
}

Point parse_point(const std::string& s, int d, const char* what) {
    if (s.empty()) return Point(d, 0.0);
    const auto v = config::parse_range(s);
    if (static_cast<int>(v.size()) != d)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(d) + " coordinates");
    return v;
}

CausticFrame frame_from(const std::string& s, int d) {
    if (s.empty()) return default_frame(d);
    Point p = parse_point(s, d, "--x0");
    double n = 0;
    for (double t : p) n += t * t;
    n = std::sqrt(n);
    if (!(n > 0)) throw std::invalid_argument("--x0 must be nonzero");
    for (auto& t : p) t /= n;
    return make_frame(p);
}

std::vector<std::string> coord_names(const std::string& base, int d) {
    std::vector<std::string> v;
    for (int i = 1; i <= d; ++i) v.push_back(base + std::to_string(i));
    return v;
}

void append(std::vector<std::string>& row, const Point& p) {
    for (double t : p) row.push_back(csv::number(t));
}

// ---------------------------------------------------------------- projector

struct ProjectorOpts {
    int d = 2, N = 40;
    double E = 0.5;
    std::string x = "0.5,0", y, x1_range, method = "exact";
};

Result run_projector(const ProjectorOpts& o, const Globals& g) {
    const auto lv = level_at_energy(o.d, o.N, o.E);
    if (o.method != "exact" && o.method != "mehler" && o.method != "both")
        throw std::invalid_argument("--method must be exact, mehler or both");
    const bool ex = o.method != "mehler", me = o.method != "exact";
    std::vector<std::pair<Point, Point>> pairs;
    const Point x = parse_point(o.x, o.d, "--x");
    const std::optional<Point> y = o.y.empty() ? std::nullopt : std::optional<Point>(parse_point(o.y, o.d, "--y"));
    if (o.x1_range.empty()) {
        pairs.emplace_back(x, y.value_or(x));
    } else {
        for (double t : config::parse_range(o.x1_range)) {
            Point a = x;
            a[0] = t;
            pairs.emplace_back(a, y.value_or(a));
        }
    }
    Result r;
    auto& T = r.table;
    T.comments = {"caustic_cli projector d=" + std::to_string(o.d) + " N=" + std::to_string(o.N) + " E=" + csv::number(o.E),
                  "pi_exact: Pi(x,y) = sum over |beta|=N of phi_beta(x) phi_beta(y), hbar = 2E/(2N+d)",
                  "log_abs_pi_exact: natural log of |Pi(x,y)|, finite where the double value underflows",
                  "pi_mehler: contour projection of the Mehler kernel onto the level"};
    T.header = coord_names("x", o.d);
    for (auto& h : coord_names("y", o.d)) T.header.push_back(h);
    T.header.push_back("hbar");
    if (ex) T.header.insert(T.header.end(), {"pi_exact", "log_abs_pi_exact"});
    if (me) T.header.insert(T.header.end(), {"pi_mehler", "alias_bound"});
    if (ex && me) T.header.push_back("rel_diff");
    const double tol = tol_or(g, 1e-8);
    double worst = 0;
    for (const auto& [a, b] : pairs) {
        std::vector<std::string> row;
        append(row, a);
        append(row, b);
        row.push_back(csv::number(lv.hbar));
        TrackedReal pe;
        if (ex) {
            pe = pi_exact(lv, a, b);
            row.push_back(csv::number(pe.to_double()));
            row.push_back(csv::number(pe.log_abs()));
        }
        if (me) {
            const auto m = pi_mehler_detailed(lv, a, b, mehler_default_nodes(lv.N), 0.9);
            row.push_back(csv::number(m.value));
            row.push_back(csv::number(m.alias_bound));
            if (ex) {
                const double rel = std::fabs(m.value - pe.to_double()) / std::max(std::fabs(pe.to_double()), 1e-300);
                row.push_back(csv::number(rel));
                worst = std::max(worst, rel);
            }
        }
        T.add(std::move(row));
    }
    if (g.check) {
        if (!(ex && me)) throw std::invalid_argument("projector --check needs --method both");
        r.checked = true;
        if (worst > tol) fail_check(r, "exact and Mehler differ by " + csv::number(worst) + " > " + csv::number(tol));
    }
    if (ex && me) r.summary["max_rel_diff"] = worst;
    return r;
}

// ---------------------------------------------------------------- airy

struct AiryOpts {
    std::string k = "0", s, method = "auto";
};

AiryMethod airy_method(const std::string& m) {
    if (m == "auto") return AiryMethod::automatic;
    if (m == "contour") return AiryMethod::contour;
    if (m == "gamma") return AiryMethod::gamma_integral;
    if (m == "asymptotic") return AiryMethod::asymptotic;
    throw std::invalid_argument("--method must be auto, contour, gamma or asymptotic");
}

Result run_airy(const AiryOpts& o, const Globals& g) {
    if (o.s.empty()) throw std::invalid_argument("airy needs --s");
    const AiryMethod m = airy_method(o.method);
    Result r;
    auto& T = r.table;
    T.comments = {"caustic_cli airy method=" + o.method,
                  "ai_k: weighted Airy function (1/2pi i) int over the Airy contour of T^k exp(T^3/3 - sT) dT",
                  "reference: independent method (gamma integral for k<0, Maclaurin/asymptotic Ai for k=0), empty otherwise"};
    T.header = {"k", "s", "ai_k"};
    if (g.check) T.header.push_back("reference");
    const double tol = tol_or(g, 1e-8);
    for (double k : config::parse_range(o.k))
        for (double s : config::parse_range(o.s)) {
            const double v = ai_k(k, s, m);
            std::vector<std::string> row{csv::number(k), csv::number(s), csv::number(v)};
            if (g.check) {
                r.checked = true;
                std::optional<double> ref;
                if (k < 0) ref = m == AiryMethod::gamma_integral ? ai_k_contour(k, s) : ai_k_gamma(k, s);
                if (k == 0) ref = ai(s);
                row.push_back(ref ? csv::number(*ref) : "");
                if (ref) {
                    const double scale = std::max({std::fabs(v), std::fabs(*ref), 1e-12});
                    if (std::fabs(v - *ref) > tol * scale)
                        fail_check(r, "k=" + csv::number(k) + " s=" + csv::number(s) + " disagrees with the reference");
                }
            }
            T.add(std::move(row));
        }
    return r;
}

// ---------------------------------------------------------------- pi0

struct Pi0Opts {
    int d = 2;
    std::string u, v, u1_range, x0, method = "auto";
};

Result run_pi0(const Pi0Opts& o, const Globals& g) {
    const CausticFrame f = frame_from(o.x0, o.d);
    const Point u = parse_point(o.u, o.d, "--u");
    const std::optional<Point> v = o.v.empty() ? std::nullopt : std::optional<Point>(parse_point(o.v, o.d, "--v"));
    std::vector<Pi0Pair> pairs;
    if (o.u1_range.empty()) {
        pairs.push_back({u, v.value_or(u)});
    } else {
        for (double t : config::parse_range(o.u1_range)) {
            Point a = u;
            for (int i = 0; i < o.d; ++i) a[i] += (t - f.normal(u)) * f.x0[i];
            pairs.push_back({a, v.value_or(a)});
        }
    }
    auto eval = [&](const std::string& m, const Pi0Pair& p) {
        if (m == "airy") return pi0_airy(f, p.u, p.v);
        if (m == "contour") return pi0_contour(f, p.u, p.v);
        if (m == "auto") return pi0(f, p.u, p.v);
        throw std::invalid_argument("--method must be auto, airy or contour");
    };
    Result r;
    auto& T = r.table;
    T.comments = {"caustic_cli pi0 d=" + std::to_string(o.d) + " method=" + o.method,
                  "u, v: scaled coordinates, x = x0 + hbar^(2/3) u",
                  "pi0: 2^(2/3) (2pi)^(1-d) int exp(i<u'-v',p>) Ai(2^(1/3)(u1+|p|^2/2)) Ai(2^(1/3)(v1+|p|^2/2)) dp"};
    T.header = coord_names("u", o.d);
    for (auto& h : coord_names("v", o.d)) T.header.push_back(h);
    T.header.push_back("pi0");
    if (g.check) T.header.insert(T.header.end(), {"pi0_contour", "abs_diff"});
    const double tol = tol_or(g, 1e-6);
    const auto vals = parallel_map(pairs, [&](const Pi0Pair& p) { return eval(o.method, p); }, g.threads);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        std::vector<std::string> row;
        append(row, pairs[i].u);
        append(row, pairs[i].v);
        row.push_back(csv::number(vals[i]));
        if (g.check) {
            r.checked = true;
            const double a = pi0_airy(f, pairs[i].u, pairs[i].v), c = pi0_contour(f, pairs[i].u, pairs[i].v);
            row.push_back(csv::number(c));
            row.push_back(csv::number(std::fabs(a - c)));
            if (std::fabs(a - c) > tol) fail_check(r, "p-integral and contour forms differ at row " + std::to_string(i));
        }
        T.add(std::move(row));
    }
    return r;
}

// ---------------------------------------------------------------- density

struct DensityOpts {
    std::string regime = "caustic-tube", u1_range = "0", u, x0;
    int d = 2, N = 400;
    double alpha = std::nan("");
    bool with_exact = false;
};

Result run_density(const DensityOpts& o, const Globals& g) {
    const auto lv = level_new(o.d, o.N);
    const CausticFrame f = frame_from(o.x0, o.d);
    const Region reg = parse_region(o.regime);
    double alpha = o.alpha;
    if (std::isnan(alpha))
        alpha = reg == Region::caustic_tube ? 2.0 / 3
                : (reg == Region::allowed_annulus || reg == Region::forbidden_annulus) ? 0.5
                                                                                         : 0.0;
    const Point base = parse_point(o.u, o.d, "--u");
    Result r;
    auto& T = r.table;
    T.comments = {"caustic_cli density regime=" + o.regime + " d=" + std::to_string(o.d) + " N=" + std::to_string(o.N) +
                      " alpha=" + csv::number(alpha),
                  "x = x0 + hbar^alpha u; s is the regime variable (2 u1 in the tube, ||x|^2-1|/hbar^alpha in annuli)",
                  "unscaled: leading-order nodal density (2pi)^(-1/2) E|Omega^(1/2) xi| at x",
                  "rescaled: unscaled times hbar^(-hbar_exponent); in the tube this is F(u) built from Omega(u)",
                  "exact: Kac-Rice density of the exact level at x (with --with-exact)"};
    T.header = {"u1"};
    for (auto& h : coord_names("x", o.d)) T.header.push_back(h);
    T.header.insert(T.header.end(), {"s", "hbar_exponent", "unscaled", "rescaled"});
    if (o.with_exact) T.header.insert(T.header.end(), {"exact", "exact_over_unscaled"});
    const double tol = tol_or(g, 0.1);
    if (g.check && !o.with_exact) throw std::invalid_argument("density --check needs --with-exact");
    for (double t : config::parse_range(o.u1_range)) {
        Point u = base;
        for (int i = 0; i < o.d; ++i) u[i] += (t - f.normal(base)) * f.x0[i];
        const auto dr = density_regime({f, u, alpha, reg}, lv);
        std::vector<std::string> row{csv::number(t)};
        append(row, dr.x);
        row.insert(row.end(), {csv::number(dr.s), csv::number(dr.hbar_exponent), csv::number(dr.unscaled.to_double()),
                               csv::number(dr.rescaled.to_double())});
        if (o.with_exact) {
            const double ex = kac_rice_density(omega_exact(lv, dr.x), o.d).to_double();
            const double ratio = ex / dr.unscaled.to_double();
            row.push_back(csv::number(ex));
            row.push_back(csv::number(ratio));
            if (g.check) {
                r.checked = true;
                if (std::fabs(ratio - 1) > tol) fail_check(r, "u1=" + csv::number(t) + " ratio " + csv::number(ratio));
            }
        }
        T.add(std::move(row));
    }
    return r;
}

// ---------------------------------------------------------------- scaling-sweep

struct SweepOpts {
    int d = 2;
    std::string N = "100,200,400,800,1600", point = "caustic", u = "", v = "";
    double s = 0.0, alpha = std::nan(""), param = std::nan(""), band_hi = std::nan("");
};

Result run_sweep(const SweepOpts& o, const Globals& g) {
    const auto Ns = config::parse_int_range(o.N);
    if (Ns.size() < 2) throw std::invalid_argument("scaling-sweep needs at least two values of N");
    Result r;
    auto& T = r.table;
    std::vector<double> lh, le;
    const CausticFrame f = default_frame(o.d);
    if (o.point == "caustic" || o.point == "off-diagonal" || o.point == "omega") {
        T.header = {"N", "hbar", "log_hbar", "exact_scaled", "limit", "rel_error", "log_error"};
        T.comments = {"caustic_cli scaling-sweep point=" + o.point + " d=" + std::to_string(o.d)};
        std::vector<double> errs, hbars;
        for (int N : Ns) {
            const auto lv = level_new(o.d, N);
            const double h23 = std::pow(lv.hbar, 2.0 / 3);
            double ex = 0, lim = 0, err = 0;
            if (o.point == "caustic") {
                T.comments.resize(1);
                T.comments.push_back("exact_scaled: hbar^((2d-1)/3) Pi(x,x) at x = (1 + hbar^(2/3) s/2) x0, s=" + csv::number(o.s));
                T.comments.push_back("limit: 2^(1-d) pi^(-d/2) Ai_{-d/2}(s)");
                Point u(o.d, 0.0);
                u[0] = 0.5 * o.s;
                const Point x = f.at(u, h23);
                ex = pi_exact(lv, x, x).to_double() * std::pow(lv.hbar, (2.0 * o.d - 1) / 3);
                lim = pi0_diagonal(o.d, 0.5 * o.s);
                err = std::fabs(ex / lim - 1);
            } else if (o.point == "off-diagonal") {
                const Point u = parse_point(o.u, o.d, "--u"), v = o.v.empty() ? u : parse_point(o.v, o.d, "--v");
                T.comments.resize(1);
                T.comments.push_back("exact_scaled: hbar^((2d-1)/3) Pi(x0 + hbar^(2/3) u, x0 + hbar^(2/3) v)");
                T.comments.push_back("limit: the scaled kernel pi0(u, v)");
                ex = pi_exact(lv, f.at(u, h23), f.at(v, h23)).to_double() * std::pow(lv.hbar, (2.0 * o.d - 1) / 3);
                lim = pi0(f, u, v);
                err = std::fabs(ex / lim - 1);
            } else {
                const Point u = parse_point(o.u, o.d, "--u");
                T.comments.resize(1);
                T.comments.push_back("exact_scaled: largest entry of hbar^(4/3) Omega_exact(x0 + hbar^(2/3) u)");
                T.comments.push_back("limit: largest entry of Omega(u); rel_error is the worst entrywise error");
                const Eigen::MatrixXd A = omega_exact(lv, f.at(u, h23)).value() * std::pow(lv.hbar, 4.0 / 3);
                const Eigen::MatrixXd B = omega_caustic_scaled(f, u).value();
                ex = A.cwiseAbs().maxCoeff();
                lim = B.cwiseAbs().maxCoeff();
                for (Eigen::Index i = 0; i < B.rows(); ++i)
                    for (Eigen::Index j = 0; j < B.cols(); ++j) {
                        const double ref = std::fabs(B(i, j)) > 1e-12 * lim ? std::fabs(B(i, j)) : lim;
                        err = std::max(err, std::fabs(A(i, j) - B(i, j)) / ref);
                    }
            }
            errs.push_back(err);
            hbars.push_back(lv.hbar);
            lh.push_back(std::log(lv.hbar));
            le.push_back(std::log(err));
            T.add({csv::number(N), csv::number(lv.hbar), csv::number(std::log(lv.hbar)), csv::number(ex), csv::number(lim),
                   csv::number(err), csv::number(std::log(err))});
        }
        const double slope = fit_slope(lh, le);
        T.comments.push_back("fitted slope of log_error against log_hbar: " + csv::number(slope));
        r.summary["slope"] = slope;
        if (g.check) {
            r.checked = true;
            const double tol = tol_or(g, o.point == "caustic" ? 0.08 : 0.1);
            if (errs.back() > tol) fail_check(r, "error at the largest N is " + csv::number(errs.back()));
            if (o.point == "caustic" && errs.back() > 2.5 * errs.front() * std::cbrt(hbars.back() / hbars.front()))
                fail_check(r, "error does not decay like hbar^(1/3)");
        }
        return r;
    }
    const Region reg = parse_region(o.point);
    const bool annulus = reg == Region::allowed_annulus || reg == Region::forbidden_annulus;
    double alpha = o.alpha, param = o.param, band = o.band_hi;
    if (std::isnan(alpha)) alpha = reg == Region::caustic_tube ? 2.0 / 3 : annulus ? 0.5 : 0.0;
    if (std::isnan(param))
        param = reg == Region::allowed_bulk ? 0.5 : reg == Region::forbidden_bulk ? 1.3 : annulus ? 0.5 : 0.0;
    if (std::isnan(band)) band = annulus ? 2.0 : 0.0;
    const auto sw = regime_sweep(reg, o.d, Ns, alpha, param, band);
    T.comments = {"caustic_cli scaling-sweep point=" + o.point + " d=" + std::to_string(o.d) + " alpha=" + csv::number(alpha) +
                      " param=" + csv::number(param) + (band > param && annulus ? " band_hi=" + csv::number(band) : ""),
                  "exact: Kac-Rice density of the exact level (averaged over the s band for annuli)",
                  "predicted: leading-order regime density at the same points",
                  "fitted slope of log(exact) against log(hbar): " + csv::number(sw.slope) +
                      ", regime exponent: " + csv::number(sw.expected)};
    T.header = {"N", "hbar", "log_hbar", "exact", "predicted", "ratio", "log_exact"};
    for (const auto& row : sw.rows)
        T.add({csv::number(row.N), csv::number(row.hbar), csv::number(std::log(row.hbar)), csv::number(row.exact),
               csv::number(row.predicted), csv::number(row.exact / row.predicted), csv::number(std::log(row.exact))});
    r.summary["slope"] = sw.slope;
    r.summary["expected"] = sw.expected;
    if (g.check) {
        r.checked = true;
        const double tol = tol_or(g, 0.06);
        if (std::fabs(sw.slope - sw.expected) > tol)
            fail_check(r, "slope " + csv::number(sw.slope) + " vs " + csv::number(sw.expected));
    }
    return r;
}

// ---------------------------------------------------------------- montecarlo

struct MonteCarloOpts {
    std::string statistic = "nodal-length", box = "0.4,0.6,-0.1,0.1", radii = "0.3,0.6,0.9,1,1.1,1.4";
    int d = 2, N = 200, seeds = 100, rays = 64;
    double step = 0.0, width = 0.02, rotation = 0.0;
};

Result run_montecarlo(const MonteCarloOpts& o, const Globals& g) {
    if (o.d != 2) throw std::invalid_argument("montecarlo supports d = 2 only");
    const auto lv = level_new(2, o.N);
    const EnsembleSpec spec{lv, g.seed, o.seeds, static_cast<unsigned>(std::max(0, g.threads))};
    Result r;
    auto& T = r.table;
    T.comments = {"caustic_cli montecarlo statistic=" + o.statistic + " N=" + std::to_string(o.N) +
                      " seeds=" + std::to_string(o.seeds) + " first_seed=" + std::to_string(g.seed),
                  "rows per seed, then one ensemble row; kac_rice is the Gaussian-field prediction for the ensemble row"};
    T.header = {"seed", "N", "statistic", "value", "std_error", "resolution", "parameter", "kac_rice"};
    auto row = [&](const std::string& seed, const std::string& stat, const NodalEstimate& e, const std::string& param,
                   const std::string& kr) {
        T.add({seed, csv::number(o.N), stat, csv::number(e.value), csv::number(e.std_error), csv::number(e.resolution), param, kr});
    };
    const double tol = tol_or(g, 3.0);
    if (o.statistic == "nodal-length") {
        const auto b = config::parse_range(o.box);
        if (b.size() != 4) throw std::invalid_argument("--box expects x0,x1,y0,y1");
        const Box box{b[0], b[1], b[2], b[3]};
        const double step = o.step > 0 ? o.step : lv.hbar / 8;
        T.comments.push_back("value: nodal length per unit area of the box (marching squares, Richardson in the step)");
        std::vector<NodalEstimate> per;
        const auto e = nodal_length_density_ensemble(spec, box, step, &per);
        for (std::size_t i = 0; i < per.size(); ++i) row(std::to_string(g.seed + i), o.statistic, per[i], "", "");
        const double kr = box_density_predicted(lv, box);
        row("ensemble", o.statistic, e, o.box, csv::number(kr));
        r.summary = {{"mean", e.value}, {"std_error", e.std_error}, {"kac_rice", kr}};
        if (g.check) {
            r.checked = true;
            if (std::fabs(e.value - kr) > tol * e.std_error) fail_check(r, "ensemble mean is outside the error band");
        }
    } else if (o.statistic == "crossings") {
        const double h23 = std::pow(lv.hbar, 2.0 / 3);
        const double step = o.step > 0 ? o.step : h23 / 16;
        T.comments.push_back("value: sign changes of Phi on the unit circle; kac_rice is C0 hbar^(-2/3)");
        std::vector<NodalEstimate> per;
        const auto e = caustic_crossings_ensemble(spec, step, o.rotation, &per);
        for (std::size_t i = 0; i < per.size(); ++i) row(std::to_string(g.seed + i), o.statistic, per[i], "", "");
        const double kr = caustic_crossing_constant() / h23;
        row("ensemble", o.statistic, e, csv::number(o.rotation), csv::number(kr));
        r.summary = {{"mean", e.value}, {"std_error", e.std_error}, {"scaled_mean", e.value * h23}, {"C0", kr * h23}};
        if (g.check) {
            r.checked = true;
            if (std::fabs(e.value / kr - 1) > tol_or(g, 0.15)) fail_check(r, "scaled count is not within tolerance of C0");
        }
    } else if (o.statistic == "radial-profile") {
        const auto radii = config::parse_range(o.radii);
        T.comments.push_back("value: zeros per unit length on radial segments of width " + csv::number(o.width) +
                             "; parameter is the radius");
        const auto prof = radial_zero_profile(spec, radii, {o.rays, o.width, o.step});
        json rows = json::array();
        for (std::size_t i = 0; i < radii.size(); ++i) {
            const double kr = radial_zero_density_predicted(lv, radii[i], o.width);
            row("ensemble", o.statistic, prof[i], csv::number(radii[i]), csv::number(kr));
            rows.push_back({{"radius", radii[i]}, {"mean", prof[i].value}, {"std_error", prof[i].std_error}, {"kac_rice", kr}});
            if (g.check) {
                r.checked = true;
                if (std::fabs(prof[i].value - kr) > tol * prof[i].std_error)
                    fail_check(r, "radius " + csv::number(radii[i]) + " is outside the error band");
            }
        }
        r.summary["profile"] = rows;
    } else if (o.statistic == "domains") {
        const double step = o.step > 0 ? o.step : lv.hbar / 3;
        T.comments.push_back("value: sign components meeting |x|>1 but not |x|<=1 on a [-1.5,1.5]^2 grid; parameter: components");
        int total = 0;
        for (int i = 0; i < o.seeds; ++i) {
            const auto c = nodal_domain_census(sample_field(lv, g.seed + i), 1.5, step);
            NodalEstimate e;
            e.value = c.forbidden_only;
            e.n_samples = 1;
            e.resolution = step;
            total += c.forbidden_only;
            row(std::to_string(g.seed + i), o.statistic, e, std::to_string(c.components), "0");
        }
        r.summary["forbidden_only_total"] = total;
        if (g.check) {
            r.checked = true;
            if (total != 0) fail_check(r, "found components confined to the forbidden region");
        }
    } else {
        throw std::invalid_argument("--statistic must be nodal-length, crossings, radial-profile or domains");
    }
    return r;
}

// ---------------------------------------------------------------- tube-mass

struct TubeOpts {
    int d = 2;
    std::string N = "100,400,1600";
    double kappa = 1.0;
};

Result run_tube(const TubeOpts& o, const Globals& g) {
    Result r;
    auto& T = r.table;
    T.comments = {"caustic_cli tube-mass d=" + std::to_string(o.d) + " kappa=" + csv::number(o.kappa),
                  "exact: int over ||x|-1| < kappa hbar^(2/3) of Pi(x,x) dx divided by the eigenspace dimension",
                  "asymptotic: leading-order tube mass from the Airy diagonal profile"};
    T.header = {"N", "hbar", "kappa", "exact", "asymptotic", "ratio"};
    double last = 1;
    for (int N : config::parse_int_range(o.N)) {
        const auto lv = level_new(o.d, N);
        const auto t = tube_mass(lv, o.kappa);
        last = t.exact / t.asymptotic;
        T.add({csv::number(N), csv::number(lv.hbar), csv::number(o.kappa), csv::number(t.exact), csv::number(t.asymptotic),
               csv::number(last)});
    }
    r.summary["last_ratio"] = last;
    if (g.check) {
        r.checked = true;
        if (std::fabs(last - 1) > tol_or(g, 0.1)) fail_check(r, "ratio at the largest N is " + csv::number(last));
    }
    return r;
}

// ---------------------------------------------------------------- driver

std::string iso_time() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

// config-file keys become --key=value arguments placed right after the subcommand; command-line flags follow
// and win because every option keeps its last value
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file " + path);
    std::string command;
    std::vector<std::string> from_file;
    for (const auto& [k, v] : config::read_key_values(in)) {
        if (k == "command")
            command = v;
        else
            from_file.push_back("--" + k + "=" + v);
    }
    static const std::vector<std::string> commands{"projector", "airy", "pi0", "density", "scaling-sweep", "montecarlo", "tube-mass"};
    std::vector<std::string> cli;
    for (std::size_t i = 1; i < rest.size(); ++i) {
        if (std::find(commands.begin(), commands.end(), rest[i]) != commands.end()) {
            if (!command.empty() && command != rest[i]) throw std::invalid_argument("config command does not match the subcommand");
            command = rest[i];
        } else {
            cli.push_back(rest[i]);
        }
    }
    if (command.empty()) throw std::invalid_argument("config file has no command and none was given");
    // global options are accepted after the subcommand as well
    std::vector<std::string> out{rest.front(), command};
    out.insert(out.end(), from_file.begin(), from_file.end());
    out.insert(out.end(), cli.begin(), cli.end());
    return out;
}

json option_values(const CLI::App* app) {
    json j = json::object();
    for (const CLI::Option* opt : app->get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty() || names.front() == "help" || names.front() == "config") continue;
        const std::string key = names.front();
        if (opt->count() > 0) {
            std::string v;
            for (const auto& s : opt->results()) v += (v.empty() ? "" : ",") + s;
            j[key] = v;
        } else {
            j[key] = opt->get_default_str();
        }
    }
    return j;
}

} // namespace

int main(int argc, char** argv) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> args(argv, argv + argc);
    try {
        args = expand_config(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"Harmonic-oscillator projection kernels, Airy scaling limits and nodal statistics"};
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--output,-o", g.output, "CSV output path (default: stdout)");
    app.add_option("--manifest", g.manifest, "JSON manifest path (default: <output>.manifest.json)");
    app.add_option("--config", g.config, "key=value config file; 'command' selects the subcommand");
    app.add_option("--seed", g.seed, "first seed for Monte Carlo ensembles");
    app.add_option("--threads", g.threads, "worker threads (default: CAUSTIC_THREADS or hardware)");
    app.add_flag("--check", g.check, "validate against the reference and exit 2 when outside tolerance");
    app.add_option("--tol", g.tol, "tolerance for --check (command-specific default)");

    ProjectorOpts po;
    auto* sp = app.add_subcommand("projector", "exact projection kernel Pi(x,y), optionally against the Mehler contour");
    sp->add_option("--d", po.d, "dimension");
    sp->add_option("--N", po.N, "level");
    sp->add_option("--E", po.E, "energy");
    sp->add_option("--x", po.x, "point x as comma-separated coordinates");
    sp->add_option("--y", po.y, "point y (default: x)");
    sp->add_option("--x1-range", po.x1_range, "sweep the first coordinate of x (start:stop:step or list)");
    sp->add_option("--method", po.method, "exact, mehler or both");

    AiryOpts ao;
    auto* sa = app.add_subcommand("airy", "weighted Airy functions Ai_k(s)");
    sa->add_option("--k", ao.k, "weights (range or list)");
    sa->add_option("--s", ao.s, "arguments (range or list)");
    sa->add_option("--method", ao.method, "auto, contour, gamma or asymptotic");

    Pi0Opts qo;
    auto* sq = app.add_subcommand("pi0", "scaled caustic kernel");
    sq->add_option("--d", qo.d, "dimension");
    sq->add_option("--u", qo.u, "scaled point u");
    sq->add_option("--v", qo.v, "scaled point v (default: u)");
    sq->add_option("--u1-range", qo.u1_range, "sweep the normal component of u");
    sq->add_option("--x0", qo.x0, "caustic point (normalised), default e1");
    sq->add_option("--method", qo.method, "auto, airy or contour");

    DensityOpts dopt;
    auto* sd = app.add_subcommand("density", "nodal densities in a regime");
    sd->add_option("--regime", dopt.regime, "allowed-bulk, allowed-annulus, caustic-tube, forbidden-annulus, forbidden-bulk");
    sd->add_option("--d", dopt.d, "dimension");
    sd->add_option("--N", dopt.N, "level");
    sd->add_option("--alpha", dopt.alpha, "scale exponent (regime default)");
    sd->add_option("--u1-range", dopt.u1_range, "normal component of u");
    sd->add_option("--u", dopt.u, "base scaled point (tangential part kept)");
    sd->add_option("--x0", dopt.x0, "caustic point, default e1");
    sd->add_flag("--with-exact", dopt.with_exact, "add the exact Kac-Rice density");

    SweepOpts so;
    auto* ss = app.add_subcommand("scaling-sweep", "log-log sweeps in N with fitted slopes");
    ss->add_option("--d", so.d, "dimension");
    ss->add_option("--N", so.N, "levels");
    ss->add_option("--point", so.point, "caustic, off-diagonal, omega, or a regime name");
    ss->add_option("--s", so.s, "diagonal scaled variable for --point caustic");
    ss->add_option("--u", so.u, "scaled point for off-diagonal and omega");
    ss->add_option("--v", so.v, "second scaled point for off-diagonal");
    ss->add_option("--alpha", so.alpha, "annulus exponent");
    ss->add_option("--param", so.param, "radius (bulk), s (annulus) or u1 (tube)");
    ss->add_option("--band-hi", so.band_hi, "upper end of the s band for annuli (default 2)");

    MonteCarloOpts mo;
    auto* sm = app.add_subcommand("montecarlo", "Gaussian random eigenfunction ensembles (d = 2)");
    sm->add_option("--statistic", mo.statistic, "nodal-length, crossings, radial-profile or domains");
    sm->add_option("--d", mo.d, "dimension");
    sm->add_option("--N", mo.N, "level");
    sm->add_option("--seeds", mo.seeds, "ensemble size");
    sm->add_option("--box", mo.box, "x0,x1,y0,y1 for nodal-length");
    sm->add_option("--step", mo.step, "grid or angular step (default from the resolution rules)");
    sm->add_option("--radii", mo.radii, "radii for radial-profile");
    sm->add_option("--rays", mo.rays, "rays for radial-profile");
    sm->add_option("--width", mo.width, "segment width for radial-profile");
    sm->add_option("--rotation", mo.rotation, "rotation of the circle grid for crossings");

    TubeOpts to;
    auto* st = app.add_subcommand("tube-mass", "L2 mass of the hbar^(2/3) tube");
    st->add_option("--d", to.d, "dimension");
    st->add_option("--N", to.N, "levels");
    st->add_option("--kappa", to.kappa, "tube half-width in units of hbar^(2/3)");

    try {
        std::vector<const char*> cargv;
        for (const auto& a : args) cargv.push_back(a.c_str());
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    if (g.threads > 0) setenv("CAUSTIC_THREADS", std::to_string(g.threads).c_str(), 1);

    Result res;
    CLI::App* used = nullptr;
    try {
        if (sp->parsed()) used = sp, res = run_projector(po, g);
        if (sa->parsed()) used = sa, res = run_airy(ao, g);
        if (sq->parsed()) used = sq, res = run_pi0(qo, g);
        if (sd->parsed()) used = sd, res = run_density(dopt, g);
        if (ss->parsed()) used = ss, res = run_sweep(so, g);
        if (sm->parsed()) used = sm, res = run_montecarlo(mo, g);
        if (st->parsed()) used = st, res = run_tube(to, g);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (g.output.empty()) {
        csv::write(std::cout, res.table);
    } else {
        std::ofstream out(g.output, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << g.output << "\n";
            return 1;
        }
        csv::write(out, res.table);
    }
    const std::string mpath = !g.manifest.empty() ? g.manifest : g.output.empty() ? "" : g.output + ".manifest.json";
    if (!mpath.empty()) {
        json m;
        m["command"] = used->get_name();
        m["parameters"] = option_values(used);
        m["global"] = option_values(&app);
        m["seed"] = g.seed;
        m["version"] = CAUSTIC_VERSION;
        m["threads"] = thread_count();
        m["output"] = g.output;
        m["rows"] = res.table.rows.size();
        m["summary"] = res.summary;
        if (res.checked) m["check"] = {{"passed", res.passed}, {"message", res.check_message}};
        m["timestamp"] = iso_time();
        m["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ofstream mo_(mpath);
        if (!mo_) {
            std::cerr << "error: cannot write " << mpath << "\n";
            return 1;
        }
        mo_ << m.dump(2) << "\n";
    }
    if (res.checked && !res.passed) {
        std::cerr << "check failed: " << res.check_message << "\n";
        return 2;
    }
    return 0;
}
