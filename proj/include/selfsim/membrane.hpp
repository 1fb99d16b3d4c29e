#pragma once

// Gaussian membranes on bounded domains: soft-boundary membranes built from
// the harmonic measure (mu_t = delta_t - omega_t) and hard-boundary
// random-balls membranes (control measure thinned to balls inside the
// domain), with tangent-field scaling and the Y_beta complement.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "selfsim/errors.hpp"
#include "selfsim/kernel.hpp"
#include "selfsim/measure.hpp"
#include "selfsim/quadrature.hpp"
#include "selfsim/rng.hpp"

namespace selfsim {

// ------------------------------------------------------------------
// domains

struct DomainSpec {
    enum class Kind { Interval, Ball, Box };
    Kind kind = Kind::Interval;
    int dimension = 1;
    double T = 1.0;      // Interval (0,T)
    Point center;        // Ball
    double radius = 1.0;
    Point lo, hi;        // Box

    static DomainSpec interval(double T) {
        if (!(T > 0.0)) throw ParameterOutOfRange("interval horizon must be positive");
        DomainSpec d;
        d.kind = Kind::Interval;
        d.dimension = 1;
        d.T = T;
        return d;
    }
    static DomainSpec ball(Point c, double r) {
        if (!(r > 0.0)) throw ParameterOutOfRange("ball radius must be positive");
        DomainSpec d;
        d.kind = Kind::Ball;
        d.dimension = static_cast<int>(c.size());
        d.center = std::move(c);
        d.radius = r;
        return d;
    }
    static DomainSpec box(Point lo_, Point hi_) {
        DomainSpec d;
        d.kind = Kind::Box;
        d.dimension = static_cast<int>(lo_.size());
        for (std::size_t k = 0; k < lo_.size(); ++k)
            if (!(lo_[k] < hi_[k])) throw ParameterOutOfRange("degenerate box");
        d.lo = std::move(lo_);
        d.hi = std::move(hi_);
        return d;
    }

    // distance to the boundary; 0 on the boundary and outside.  For these
    // convex domains it coincides with the largest u with B(x,u) inside D.
    double boundary_distance(std::span<const double> x) const {
        switch (kind) {
            case Kind::Interval: return std::max(0.0, std::min(x[0], T - x[0]));
            case Kind::Ball: return std::max(0.0, radius - distance(x, center));
            case Kind::Box: {
                double m = quad::kInf;
                for (int k = 0; k < dimension; ++k)
                    m = std::min({m, x[k] - lo[k], hi[k] - x[k]});
                return std::max(0.0, m);
            }
        }
        return 0.0;
    }
    double inradius_at(std::span<const double> x) const { return boundary_distance(x); }

    double sup_inradius() const {
        switch (kind) {
            case Kind::Interval: return T / 2.0;
            case Kind::Ball: return radius;
            case Kind::Box: {
                double m = quad::kInf;
                for (int k = 0; k < dimension; ++k) m = std::min(m, (hi[k] - lo[k]) / 2.0);
                return m;
            }
        }
        return 0.0;
    }

    double diameter() const {
        switch (kind) {
            case Kind::Interval: return T;
            case Kind::Ball: return 2.0 * radius;
            case Kind::Box: {
                double s = 0.0;
                for (int k = 0; k < dimension; ++k) s += (hi[k] - lo[k]) * (hi[k] - lo[k]);
                return std::sqrt(s);
            }
        }
        return 0.0;
    }

    bool interior(std::span<const double> x) const { return boundary_distance(x) > 0.0; }

    bool contains(std::span<const double> x) const {
        switch (kind) {
            case Kind::Interval: return x[0] >= 0.0 && x[0] <= T;
            case Kind::Ball: return distance(x, center) <= radius;
            case Kind::Box:
                for (int k = 0; k < dimension; ++k)
                    if (x[k] < lo[k] || x[k] > hi[k]) return false;
                return true;
        }
        return false;
    }

    Point nearest_boundary(std::span<const double> x) const {
        switch (kind) {
            case Kind::Interval: return {x[0] <= T - x[0] ? 0.0 : T};
            case Kind::Ball: {
                Point p(x.begin(), x.end());
                const double r = distance(x, center);
                if (r == 0.0) {
                    p = center;
                    p[0] += radius;
                    return p;
                }
                for (int k = 0; k < dimension; ++k)
                    p[k] = center[k] + (p[k] - center[k]) * radius / r;
                return p;
            }
            case Kind::Box: {
                Point p(x.begin(), x.end());
                int kbest = 0;
                double best = quad::kInf;
                double side = 0.0;
                for (int k = 0; k < dimension; ++k) {
                    if (x[k] - lo[k] < best) {
                        best = x[k] - lo[k];
                        kbest = k;
                        side = lo[k];
                    }
                    if (hi[k] - x[k] < best) {
                        best = hi[k] - x[k];
                        kbest = k;
                        side = hi[k];
                    }
                }
                p[kbest] = side;
                return p;
            }
        }
        return {};
    }

    std::pair<Point, Point> bounding_box() const {
        switch (kind) {
            case Kind::Interval: return {{0.0}, {T}};
            case Kind::Ball: {
                Point a = center, b = center;
                for (int k = 0; k < dimension; ++k) {
                    a[k] -= radius;
                    b[k] += radius;
                }
                return {a, b};
            }
            case Kind::Box: return {lo, hi};
        }
        return {};
    }
};

// ------------------------------------------------------------------
// harmonic measure

struct HarmonicMeasureRep {
    enum class Kind { TwoAtoms, PoissonQuadrature, Empirical };
    Kind kind = Kind::TwoAtoms;
    std::vector<Atom> nodes;  // weights normalized to total mass 1

    double total_weight() const {
        double s = 0.0;
        for (const auto& a : nodes) s += a.weight;
        return s;
    }
    // int y_k omega(dy)
    Point mean() const {
        if (nodes.empty()) return {};
        Point m(nodes.front().location.size(), 0.0);
        for (const auto& a : nodes)
            for (std::size_t k = 0; k < m.size(); ++k) m[k] += a.weight * a.location[k];
        return m;
    }
    SignedMeasure as_measure(double sign = 1.0) const {
        SignedMeasure m;
        m.dimension = nodes.empty() ? 1 : static_cast<int>(nodes.front().location.size());
        for (const auto& a : nodes) m.add_atom(a.location, sign * a.weight);
        return m;
    }
};

namespace detail {

inline HarmonicMeasureRep poisson_ball_quadrature(const DomainSpec& D,
                                                  std::span<const double> t, int n_nodes) {
    // Poisson kernel of the ball in normalized coordinates:
    //   P(t', y) = (1 - |t'|^2) / (c_d |t' - y|^d),  |y| = 1
    const int d = D.dimension;
    HarmonicMeasureRep rep;
    rep.kind = HarmonicMeasureRep::Kind::PoissonQuadrature;
    Point tn(d);
    for (int k = 0; k < d; ++k) tn[k] = (t[k] - D.center[k]) / D.radius;
    const double t2 = [&] {
        double s = 0.0;
        for (double v : tn) s += v * v;
        return s;
    }();
    if (d == 2) {
        const double two_pi = 2.0 * std::acos(-1.0);
        for (int i = 0; i < n_nodes; ++i) {
            const double th = two_pi * (i + 0.5) / n_nodes;
            const Point y{std::cos(th), std::sin(th)};
            const double dy2 = (tn[0] - y[0]) * (tn[0] - y[0]) + (tn[1] - y[1]) * (tn[1] - y[1]);
            const double w = (1.0 - t2) / dy2;  // common factors normalized away
            rep.nodes.push_back({{D.center[0] + D.radius * y[0], D.center[1] + D.radius * y[1]}, w});
        }
    } else if (d == 3) {
        // product rule: Gauss-Legendre in cos(polar) x uniform azimuth
        const int n_mu = std::max(8, n_nodes / 32);
        const int n_phi = 2 * n_mu;
        const auto gl = quad::gauss_legendre_on(n_mu, -1.0, 1.0);
        const double two_pi = 2.0 * std::acos(-1.0);
        for (int i = 0; i < n_mu; ++i) {
            const double mu = gl.nodes[i];
            const double smu = std::sqrt(std::max(0.0, 1.0 - mu * mu));
            for (int j = 0; j < n_phi; ++j) {
                const double ph = two_pi * (j + 0.5) / n_phi;
                const Point y{smu * std::cos(ph), smu * std::sin(ph), mu};
                double dy2 = 0.0;
                for (int k = 0; k < 3; ++k) dy2 += (tn[k] - y[k]) * (tn[k] - y[k]);
                const double w = gl.weights[i] * (1.0 - t2) / std::pow(std::sqrt(dy2), 3);
                Point loc(3);
                for (int k = 0; k < 3; ++k) loc[k] = D.center[k] + D.radius * y[k];
                rep.nodes.push_back({std::move(loc), w});
            }
        }
    } else {
        throw DimensionUnsupported("closed-form harmonic measure on balls for d in {2,3}");
    }
    double s = rep.total_weight();
    for (auto& a : rep.nodes) a.weight /= s;
    return rep;
}

}  // namespace detail

// Exit distribution on the boundary of D of Brownian motion started at t.
// Closed form: two atoms on an interval, Poisson-kernel quadrature on a ball.
inline HarmonicMeasureRep harmonic_measure(const DomainSpec& D, const Point& t,
                                           int ball_nodes = 256) {
    if (!D.interior(t)) throw BoundaryPoint("harmonic measure needs an interior point");
    switch (D.kind) {
        case DomainSpec::Kind::Interval: {
            HarmonicMeasureRep rep;
            rep.kind = HarmonicMeasureRep::Kind::TwoAtoms;
            const double w1 = t[0] / D.T;
            rep.nodes.push_back({{0.0}, 1.0 - w1});
            rep.nodes.push_back({{D.T}, w1});
            return rep;
        }
        case DomainSpec::Kind::Ball: return detail::poisson_ball_quadrature(D, t, ball_nodes);
        case DomainSpec::Kind::Box:
            throw MethodUnsupported("closed-form harmonic measure only for Interval and Ball");
    }
    throw MethodUnsupported("unreachable");
}

// Walk-on-spheres estimate of the harmonic measure: maximal-sphere jumps
// until within eps_shell of the boundary, then projection to the nearest
// boundary point.  Samples are drawn on independent seeded substreams.
inline HarmonicMeasureRep harmonic_measure_wos(const DomainSpec& D, const Point& t,
                                               long n_samples, double eps_shell,
                                               std::uint64_t seed = 1) {
    if (!D.interior(t)) throw BoundaryPoint("harmonic measure needs an interior point");
    if (!(eps_shell > 0.0)) throw ParameterOutOfRange("eps_shell must be positive");
    const int d = D.dimension;
    HarmonicMeasureRep rep;
    rep.kind = HarmonicMeasureRep::Kind::Empirical;
    rep.nodes.reserve(n_samples);
    const double w = 1.0 / static_cast<double>(n_samples);
    for (long i = 0; i < n_samples; ++i) {
        rng::Stream rs(seed, static_cast<std::uint64_t>(i));
        Point x = t;
        for (int step = 0; step < 100000; ++step) {
            const double r = D.boundary_distance(x);
            if (r <= eps_shell) break;
            if (d == 1) {
                x[0] += (rs.next_uniform() < 0.5 ? -r : r);
            } else {
                // uniform direction via normalized Gaussians
                Point g(d);
                double n2 = 0.0;
                for (int k = 0; k < d; ++k) {
                    g[k] = rs.next_normal();
                    n2 += g[k] * g[k];
                }
                const double inv = r / std::sqrt(n2);
                for (int k = 0; k < d; ++k) x[k] += g[k] * inv;
            }
        }
        rep.nodes.push_back({D.nearest_boundary(x), w});
    }
    return rep;
}

// ------------------------------------------------------------------
// soft membranes

struct SoftMembraneOptions {
    int ball_nodes = 256;     // sphere quadrature size for harmonic measures
    double rel_tol = 1e-6;    // quadrature tolerance for the H=1/2 form
};

namespace detail {

// H = 1/2 boundary-pair kernel: the z-integral built from h(z) = |z|^-delta,
// delta = (d-1)/2; only the four-term combination is integrable.
inline double soft_halfh_pair(const DomainSpec& D, std::span<const double> s,
                              std::span<const double> t, const Point& y, const Point& yp,
                              double rel_tol) {
    const int d = D.dimension;
    const double delta = (d - 1) / 2.0;
    Point a(d), b(d), c(d);
    for (int k = 0; k < d; ++k) {
        a[k] = s[k] - t[k];
        b[k] = s[k] - yp[k];
        c[k] = y[k] - t[k];
    }
    Point e(d);
    for (int k = 0; k < d; ++k) e[k] = y[k] - yp[k];
    if (d != 2) throw DimensionUnsupported("H=1/2 soft membrane implemented for d=2");
    auto h = [delta](double r) { return std::pow(r, -delta); };
    auto g = [&](double r, double th) {
        const double zx = r * std::cos(th), zy = r * std::sin(th);
        auto at = [&](const Point& p) { return std::hypot(zx + p[0], zy + p[1]); };
        return h(r) * (h(at(a)) - h(at(b)) - h(at(c)) + h(at(e)));
    };
    // polar around the origin; radial breakpoints where the shifted
    // singularities sit
    std::vector<quad::SingularPoint> rad_pts{{0.0, 0.0}};
    for (const Point* p : {&a, &b, &c, &e}) rad_pts.push_back({std::hypot((*p)[0], (*p)[1]), 0.5});
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 1e-12;
    opt.max_intervals = 256;
    const double two_pi = 2.0 * std::acos(-1.0);
    auto radial = [&](double th) {
        auto fr = [&](double r) { return g(r, th) * r; };
        // the four-term bracket is a second difference of h, so the combined
        // integrand decays like r^{-2 delta - 1} after the Jacobian
        return quad::integrate_semi_infinite(fr, 0.0, rad_pts, 2.0 * delta + 1.0, opt);
    };
    std::vector<quad::SingularPoint> ang_pts;
    for (const Point* p : {&a, &b, &c, &e}) {
        if ((*p)[0] != 0.0 || (*p)[1] != 0.0) {
            double th = std::atan2(-(*p)[1], -(*p)[0]);
            if (th < 0.0) th += two_pi;
            ang_pts.push_back({th, 0.0});
        }
    }
    quad::Options outer = opt;
    outer.rel_tol = std::max(rel_tol, 1e-6);
    return quad::integrate_with_singularities(radial, 0.0, two_pi, ang_pts, outer);
}

}  // namespace detail

// Covariance of the soft membrane X_t = X(delta_t - omega_t).  For
// 0 < H < 1/2 this is the (sign-flipped) power-law functional of the paired
// measures; H = 1/2 uses the boundary double integral of the four-term
// Riesz-type kernel (d >= 2 only).
inline double soft_membrane_covariance(const DomainSpec& D, double hurst, const Point& s,
                                       const Point& t, const SoftMembraneOptions& opt = {}) {
    if (!(hurst > 0.0 && hurst <= 0.5))
        throw ParameterOutOfRange("soft membranes implemented for 0 < H <= 1/2");
    if (!D.interior(s) || !D.interior(t))
        throw BoundaryPoint("soft membrane covariance needs interior points");
    const HarmonicMeasureRep ws = harmonic_measure(D, s, opt.ball_nodes);
    const HarmonicMeasureRep wt = harmonic_measure(D, t, opt.ball_nodes);
    if (hurst < 0.5) {
        SignedMeasure ms = sum(SignedMeasure::delta(s), ws.as_measure(-1.0));
        SignedMeasure mt = sum(SignedMeasure::delta(t), wt.as_measure(-1.0));
        KernelSpec k = KernelSpec::power_law(2.0 * hurst, D.dimension);
        // positive-variance orientation: the raw functional of an M_1 pair is
        // negative semi-definite
        return -covariance_functional(k, ms, mt);
    }
    if (D.dimension == 1)
        throw DimensionUnsupported("H=1/2 soft membrane degenerates for d=1 (delta=0)");
    double acc = 0.0;
    const bool same = (s == t);  // F is symmetric in (y,y'), halve the work
    for (std::size_t i = 0; i < ws.nodes.size(); ++i) {
        const auto& ny = ws.nodes[i];
        for (std::size_t j = same ? i : 0; j < wt.nodes.size(); ++j) {
            const auto& nyp = wt.nodes[j];
            const double f =
                detail::soft_halfh_pair(D, s, t, ny.location, nyp.location, opt.rel_tol);
            acc += (same && j > i ? 2.0 : 1.0) * ny.weight * nyp.weight * f;
        }
    }
    return acc;
}

// ------------------------------------------------------------------
// hard membranes

// f_beta(x) = 2^beta x^{1-beta} / (beta(1-beta)) for beta != 0, -x ln x for
// beta = 0: the building block of the d=1 closed form.
inline double hard_membrane_fbeta(double x, double beta) {
    if (x <= 0.0) return 0.0;
    if (beta == 0.0) return -x * std::log(x);
    return std::pow(2.0, beta) * std::pow(x, 1.0 - beta) / (beta * (1.0 - beta));
}

namespace detail {

inline double thinned_u_integral(double u0, double u1, double beta) {
    // int_{u0}^{u1} u^{-beta-1} du for 0 < u0 < u1
    if (!(u1 > u0)) return 0.0;
    if (beta == 0.0) return std::log(u1 / u0);
    if (u0 == 0.0) {
        if (beta > 0.0) return quad::kInf;
        return -std::pow(u1, -beta) / beta;
    }
    return (std::pow(u0, -beta) - std::pow(u1, -beta)) / beta;
}

}  // namespace detail

// E W_beta(s) W_beta(t) = int 1(s,t in B(x,u) subset D) u^{-beta-1} dx du.
// d=1 interval: exact closed form; general d: the u-integral is analytic per
// x (admissible interval [max|x-s|,|x-t|, inradius(x)]), leaving a d-dim
// cubature.
inline double hard_membrane_covariance(const DomainSpec& D, double beta, const Point& s,
                                       const Point& t, bool force_numeric = false,
                                       double rel_tol = 1e-7) {
    if (!(beta < D.dimension)) throw ParameterOutOfRange("hard membrane requires beta < d");
    if (!D.contains(s) || !D.contains(t))
        throw ParameterOutOfRange("evaluation points must lie in the closed domain");
    if (D.kind == DomainSpec::Kind::Interval && !force_numeric) {
        const double a = std::min(s[0], t[0]), b = std::max(s[0], t[0]);
        return hard_membrane_fbeta(b, beta) + hard_membrane_fbeta(D.T - a, beta) -
               hard_membrane_fbeta(b - a, beta) - hard_membrane_fbeta(D.T, beta);
    }
    const int d = D.dimension;
    auto g = [&](std::span<const double> x) {
        const double u0 = std::max(distance(x, s), distance(x, t));
        const double u1 = D.inradius_at(x);
        return detail::thinned_u_integral(u0, u1, beta);
    };
    auto [lo, hi] = D.bounding_box();
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 1e-13;
    if (d == 1) {
        auto f = [&](double x) {
            const double xs[1] = {x};
            return g(std::span<const double>(xs, 1));
        };
        const double sing = beta > 0.0 ? beta : (beta == 0.0 ? 0.25 : 0.0);
        std::vector<quad::SingularPoint> pts{{s[0], sing},
                                             {t[0], sing},
                                             {0.5 * (s[0] + t[0]), 0.0},
                                             {0.5 * (std::min(s[0], t[0]) + D.T), 0.0},
                                             {D.T / 2.0, 0.0}};
        return quad::integrate_with_singularities(f, lo[0], hi[0], pts, opt);
    }
    if (d == 2) {
        auto f = [&](double x, double y) {
            const double xs[2] = {x, y};
            return g(std::span<const double>(xs, 2));
        };
        auto inner_pts = [&](double) {
            std::vector<quad::SingularPoint> pts{{s[1], std::max(0.0, beta)},
                                                 {t[1], std::max(0.0, beta)},
                                                 {0.5 * (s[1] + t[1]), 0.0}};
            return pts;
        };
        std::vector<quad::SingularPoint> outer{{s[0], 0.0}, {t[0], 0.0}};
        quad::Options o = opt;
        o.rel_tol = std::max(rel_tol, 1e-6);
        return quad::integrate_box_2d(f, lo[0], hi[0], lo[1], hi[1], inner_pts, outer, o);
    }
    if (d == 3) {
        quad::Options o;
        o.rel_tol = 1e-5;
        o.max_intervals = 512;
        auto fz = [&](double x, double y) {
            return quad::integrate(
                [&](double z) {
                    const double xs[3] = {x, y, z};
                    return g(std::span<const double>(xs, 3));
                },
                lo[2], hi[2], o);
        };
        return quad::integrate_box_2d(fz, lo[0], hi[0], lo[1], hi[1], quad::no_points, {}, o);
    }
    throw DimensionUnsupported("hard membrane cubature implemented for d <= 3");
}

// ------------------------------------------------------------------
// tangent fields

struct TangentScaling {
    double tau;
    double hurst;
};

// tau(eps) and the local self-similarity index H by parameter regime:
//   d-1 < beta < d : tau = eps^{(beta-d)/2},    H = (d-beta)/2
//   beta = d-1     : tau = (-eps ln eps)^{-1/2}, H = 1/2
//   beta < d-1     : tau = eps^{-1/2},           H = 1/2
inline TangentScaling tangent_scaling(double beta, int d, double eps) {
    if (!(beta < d)) throw ParameterOutOfRange("tangent scaling requires beta < d");
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterOutOfRange("eps in (0,1)");
    if (beta > d - 1) return {std::pow(eps, (beta - d) / 2.0), (d - beta) / 2.0};
    if (beta == d - 1) return {1.0 / std::sqrt(-eps * std::log(eps)), 0.5};
    return {std::pow(eps, -0.5), 0.5};
}

struct TangentCheckRow {
    double eps;
    double increment_variance;   // Var(W(z+eps s) - W(z))
    double rescaled_variance;    // tau(eps)^2 * increment variance
};

struct TangentCheckResult {
    double h_hat = 0.0;          // slope/2 of log Var vs log eps
    double constant = 0.0;       // fitted c in c(|s|^{2H}+|t|^{2H}-|s-t|^{2H})
    double shape_max_rel_err = 0.0;
    std::vector<TangentCheckRow> rows;
};

// Exact-covariance check of local asymptotic self-similarity at z: rescaled
// increment variances against the predicted tangent fBm.
inline TangentCheckResult tangent_field_check(const DomainSpec& D, double beta, const Point& z,
                                              const Point& s, const Point& t,
                                              const std::vector<double>& eps_seq) {
    if (!D.interior(z)) throw ScaleOutOfDomain("tangent point must be interior");
    const double reach = std::max(norm(s), norm(t));
    const double dist = D.boundary_distance(z);
    for (double e : eps_seq)
        if (!(e > 0.0) || e * reach * 2.0 >= dist)
            throw ScaleOutOfDomain("eps sequence leaves the domain around z");
    const int d = D.dimension;
    auto shifted = [&](const Point& dir, double e) {
        Point p = z;
        for (int k = 0; k < d; ++k) p[k] += e * dir[k];
        return p;
    };
    auto cov = [&](const Point& a, const Point& b) {
        return hard_membrane_covariance(D, beta, a, b);
    };
    TangentCheckResult res;
    const double czz = cov(z, z);
    for (double e : eps_seq) {
        const Point zs = shifted(s, e);
        const double v = cov(zs, zs) - 2.0 * cov(zs, z) + czz;
        const auto sc = tangent_scaling(beta, d, e);
        res.rows.push_back({e, v, sc.tau * sc.tau * v});
    }
    // log-log regression for the local exponent
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const int n = static_cast<int>(res.rows.size());
    for (const auto& r : res.rows) {
        const double x = std::log(r.eps), y = std::log(r.increment_variance);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    res.h_hat = 0.5 * slope;
    // limiting constant and fBm shape at the smallest eps
    const double emin = eps_seq.back();
    const auto sc = tangent_scaling(beta, d, emin);
    const double hh = sc.hurst;
    auto pw = [hh](double r) { return r == 0.0 ? 0.0 : std::pow(r, 2.0 * hh); };
    const double vs = res.rows.back().rescaled_variance;
    res.constant = vs / (2.0 * pw(norm(s)));
    const Point zs = shifted(s, emin), zt = shifted(t, emin);
    const double cross = sc.tau * sc.tau *
                         (cov(zs, zt) - cov(zs, z) - cov(zt, z) + czz);
    const double predicted = res.constant * (pw(norm(s)) + pw(norm(t)) - pw(distance(s, t)));
    res.shape_max_rel_err =
        std::abs(cross - predicted) / std::max(std::abs(predicted), 1e-300);
    return res;
}

// ------------------------------------------------------------------
// the Y_beta complement

// E Y_beta(s) Y_beta(t) = 2^beta/(beta(1-beta)) C_beta(s^t, T) with
// C_beta(a,T) = a^{1-beta} + T^{1-beta} - (T-a)^{1-beta}; adding the hard
// membrane covariance recovers 2^beta/(beta(1-beta)) C_beta(s,t).
inline double ybeta_covariance(double beta, double T, double s, double t) {
    if (!(beta > 0.0 && beta < 1.0)) throw ParameterOutOfRange("Y_beta needs 0 < beta < 1");
    if (s < 0.0 || t < 0.0 || s > T || t > T)
        throw ParameterOutOfRange("Y_beta evaluation inside [0,T]");
    const double a = std::min(s, t);
    const double e = 1.0 - beta;
    const double cb = std::pow(a, e) + std::pow(T, e) - std::pow(T - a, e);
    return std::pow(2.0, beta) / (beta * (1.0 - beta)) * cb;
}

}  // namespace selfsim
