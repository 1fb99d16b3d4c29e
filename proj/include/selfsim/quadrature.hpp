#pragma once

// Adaptive quadrature used throughout the library: a globally adaptive
// Gauss-Kronrod 7/15 scheme on bounded intervals, plus wrappers that split at
// breakpoints, tame algebraic endpoint singularities by power substitution,
// and map tails of the real line to [0,1].
//
// Acceptance thresholds are *relative* (with a roundoff floor proportional to
// the accumulated |f|), so refinement decisions commute with rescaling of the
// problem; the dilation-covariance tests rely on this.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "selfsim/errors.hpp"

namespace selfsim::quad {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;  // additional absolute floor; 0 disables
    int max_intervals = 4096;
    bool throw_on_failure = true;
};

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule,
// standard QUADPACK constants.
inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
    double a, b;
    double value;
    double error;
    double resabs;  // integral of |f|, for the roundoff floor
};

template <class F>
Piece gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * xgk[i]);
        fv[14 - i] = f(c + h * xgk[i]);
    }
    fv[7] = f(c);
    double resk = wgk[7] * fv[7];
    double resg = wg[3] * fv[7];
    double resabs = wgk[7] * std::abs(fv[7]);
    for (int i = 0; i < 7; ++i) {
        resk += wgk[i] * (fv[i] + fv[14 - i]);
        resabs += wgk[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
        if (i % 2 == 1) resg += wg[i / 2] * (fv[i] + fv[14 - i]);
    }
    const double mean = 0.5 * resk;
    double resasc = wgk[7] * std::abs(fv[7] - mean);
    for (int i = 0; i < 7; ++i)
        resasc += wgk[i] * (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));
    resasc *= std::abs(h);
    resabs *= std::abs(h);
    double err = std::abs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    return {a, b, resk * h, err, resabs};
}

}  // namespace detail

// Globally adaptive integration on [a,b]: always bisect the piece with the
// largest error estimate until
//   sum(err) <= max(rel_tol*|I|, abs_tol, 100*eps*sum|f|).
template <class F>
double integrate(F&& f, double a, double b, const Options& opt = {}) {
    if (a == b) return 0.0;
    if (!(a < b)) return -integrate(f, b, a, opt);
    std::vector<detail::Piece> pieces;
    pieces.push_back(detail::gk15(f, a, b));
    double total = pieces[0].value;
    double err = pieces[0].error;
    double resabs = pieces[0].resabs;
    constexpr double eps100 = 100.0 * std::numeric_limits<double>::epsilon();
    auto target = [&] {
        return std::max({opt.rel_tol * std::abs(total), opt.abs_tol, eps100 * resabs});
    };
    while (static_cast<int>(pieces.size()) < opt.max_intervals) {
        if (err <= target()) break;
        std::size_t worst = 0;
        for (std::size_t i = 1; i < pieces.size(); ++i)
            if (pieces[i].error > pieces[worst].error) worst = i;
        detail::Piece p = pieces[worst];
        const double mid = 0.5 * (p.a + p.b);
        if (mid <= p.a || mid >= p.b) break;  // interval exhausted in fp
        detail::Piece l = detail::gk15(f, p.a, mid);
        detail::Piece r = detail::gk15(f, mid, p.b);
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        resabs += l.resabs + r.resabs - p.resabs;
        pieces[worst] = l;
        pieces.push_back(r);
    }
    if (err > target() && opt.throw_on_failure && err > 100.0 * std::max(target(), 1e-300))
        throw QuadratureFailure("adaptive quadrature did not converge: error " +
                                std::to_string(err) + " on [" + std::to_string(a) + "," +
                                std::to_string(b) + "]");
    return total;
}

// A point where the integrand is singular or merely non-smooth.  `strength`
// is the algebraic blow-up exponent gamma in |f| ~ |x-p|^{-gamma} (gamma < 1
// required); strength <= 0 marks a kink: the range is split there but no
// substitution is applied.
struct SingularPoint {
    double location;
    double strength = 0.0;
};

namespace detail {

inline int power_for_strength(double gamma) {
    if (gamma >= 1.0)
        throw ParameterOutOfRange("non-integrable singularity: exponent >= 1");
    const double need = 2.5 / (1.0 - std::max(gamma, 0.0));
    return std::clamp(static_cast<int>(std::ceil(need)), 3, 12);
}

// Integrate f on [a,b] with an algebraic singularity at endpoint `sing`
// (either a or b); substitutes x = sing +/- s^p.
template <class F>
double integrate_singular_endpoint(F&& f, double a, double b, double sing, double gamma,
                                   const Options& opt) {
    const int p = power_for_strength(gamma);
    const double smax = std::pow(b - a, 1.0 / p);
    // nodes whose image rounds onto the singular endpoint contribute nothing
    // after the substitution (the integrand vanishes there in exact
    // arithmetic); the skipped mass is below the ulp of the endpoint
    if (sing == a) {
        auto g = [&](double s) {
            const double sp = std::pow(s, p - 1);
            const double x = a + sp * s;
            if (x == a) return 0.0;
            return f(x) * p * sp;
        };
        return integrate(g, 0.0, smax, opt);
    }
    auto g = [&](double s) {
        const double sp = std::pow(s, p - 1);
        const double x = b - sp * s;
        if (x == b) return 0.0;
        return f(x) * p * sp;
    };
    return integrate(g, 0.0, smax, opt);
}

}  // namespace detail

// Integrate on [a,b] splitting at the given points.  Points with positive
// strength get the endpoint substitution on both adjacent pieces.
template <class F>
double integrate_with_singularities(F&& f, double a, double b, std::vector<SingularPoint> sing,
                                    const Options& opt = {}) {
    if (a == b) return 0.0;
    if (!(a < b)) return -integrate_with_singularities(f, b, a, std::move(sing), opt);
    const double width = b - a;
    std::sort(sing.begin(), sing.end(), [](const SingularPoint& u, const SingularPoint& v) {
        return u.location < v.location;
    });
    std::vector<double> xs{a, b};
    std::vector<double> st{0.0, 0.0};
    for (const auto& s : sing) {
        if (s.location < a - 1e-14 * width || s.location > b + 1e-14 * width) continue;
        if (std::abs(s.location - a) <= 1e-13 * width) {
            st.front() = std::max(st.front(), s.strength);
            continue;
        }
        if (std::abs(s.location - b) <= 1e-13 * width) {
            st.back() = std::max(st.back(), s.strength);
            continue;
        }
        // insert before the final endpoint, merging near-duplicates
        const double prev = xs[xs.size() - 2];
        if (xs.size() > 2 && std::abs(s.location - prev) <= 1e-13 * width) {
            st[st.size() - 2] = std::max(st[st.size() - 2], s.strength);
            continue;
        }
        xs.insert(xs.end() - 1, s.location);
        st.insert(st.end() - 1, s.strength);
    }
    Options local = opt;
    local.max_intervals =
        std::max<int>(256, opt.max_intervals / static_cast<int>(xs.size() - 1));
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double lo = xs[i], hi = xs[i + 1];
        const bool sl = st[i] > 0.0, sr = st[i + 1] > 0.0;
        if (sl && sr) {
            const double mid = 0.5 * (lo + hi);
            total += detail::integrate_singular_endpoint(f, lo, mid, lo, st[i], local);
            total += detail::integrate_singular_endpoint(f, mid, hi, hi, st[i + 1], local);
        } else if (sl) {
            total += detail::integrate_singular_endpoint(f, lo, hi, lo, st[i], local);
        } else if (sr) {
            total += detail::integrate_singular_endpoint(f, lo, hi, hi, st[i + 1], local);
        } else {
            total += integrate(f, lo, hi, local);
        }
    }
    return total;
}

// Integrate over the whole real line.  `core_points` are singularities and
// breakpoints; `decay` is an exponent eta with |f(x)| <= C|x|^{-eta} for
// large |x| (eta > 1 required for convergence).
template <class F>
double integrate_real_line(F&& f, std::vector<SingularPoint> core_points, double decay,
                           const Options& opt = {}) {
    if (!(decay > 1.0))
        throw ParameterOutOfRange("real-line integrand must decay faster than 1/|x|");
    double lo = -1.0, hi = 1.0;
    for (const auto& p : core_points) {
        lo = std::min(lo, p.location - 1.0);
        hi = std::max(hi, p.location + 1.0);
    }
    double total = integrate_with_singularities(f, lo, hi, core_points, opt);
    // tails: x = hi - 1 + 1/v (resp. mirrored), v in (0,1]; at v=0 the
    // transformed integrand behaves like v^{decay-2}
    const double gr = std::max(0.0, 2.0 - decay);
    auto right = [&](double v) {
        const double x = hi - 1.0 + 1.0 / v;
        return f(x) / (v * v);
    };
    total += detail::integrate_singular_endpoint(right, 0.0, 1.0, 0.0, gr, opt);
    auto left = [&](double v) {
        const double x = lo + 1.0 - 1.0 / v;
        return f(x) / (v * v);
    };
    total += detail::integrate_singular_endpoint(left, 0.0, 1.0, 0.0, gr, opt);
    return total;
}

// Semi-infinite [a, inf).
template <class F>
double integrate_semi_infinite(F&& f, double a, std::vector<SingularPoint> pts, double decay,
                               const Options& opt = {}) {
    if (!(decay > 1.0))
        throw ParameterOutOfRange("tail integrand must decay faster than 1/|x|");
    double hi = a + 1.0;
    for (const auto& p : pts) hi = std::max(hi, p.location + 1.0);
    double total = integrate_with_singularities(f, a, hi, pts, opt);
    const double gr = std::max(0.0, 2.0 - decay);
    auto right = [&](double v) {
        const double x = hi - 1.0 + 1.0 / v;
        return f(x) / (v * v);
    };
    total += detail::integrate_singular_endpoint(right, 0.0, 1.0, 0.0, gr, opt);
    return total;
}

// Iterated 2D integration over a box; inner-axis singular points may depend
// on the outer coordinate.
template <class F, class InnerPts>
double integrate_box_2d(F&& f, double ax, double bx, double ay, double by, InnerPts&& inner_pts,
                        std::vector<SingularPoint> outer_pts, const Options& opt = {}) {
    Options inner = opt;
    inner.rel_tol = std::max(opt.rel_tol * 0.1, 1e-13);
    inner.max_intervals = std::max(256, opt.max_intervals / 8);
    auto outer = [&](double x) {
        return integrate_with_singularities([&](double y) { return f(x, y); }, ay, by,
                                            inner_pts(x), inner);
    };
    return integrate_with_singularities(outer, ax, bx, std::move(outer_pts), opt);
}

inline std::vector<SingularPoint> no_points(double) { return {}; }

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussLegendre gauss_legendre(int n) {
    GaussLegendre r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return r;
}

inline GaussLegendre gauss_legendre_on(int n, double a, double b) {
    GaussLegendre g = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        g.nodes[i] = mid + half * g.nodes[i];
        g.weights[i] *= half;
    }
    return g;
}

}  // namespace selfsim::quad
