#pragma once

// Signed measures with finite total variation on R^d: finitely many atoms
// plus density components carrying explicit support, singularity and decay
// metadata.  Integrability decisions are made from the metadata, never by
// probing, so they are deterministic and testable.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "selfsim/errors.hpp"
#include "selfsim/quadrature.hpp"

namespace selfsim {

using Point = std::vector<double>;

inline Point point1(double x) { return Point{x}; }
inline Point point2(double x, double y) { return Point{x, y}; }

inline double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct Atom {
    Point location;
    double weight;
};

// Support descriptor for a density component.
struct Region {
    enum class Kind { Box, Ball, All };
    Kind kind = Kind::All;
    int dim = 1;
    Point lo, hi;    // Box
    Point center;    // Ball
    double radius = 0.0;

    static Region box(Point lo_, Point hi_) {
        Region r;
        r.kind = Kind::Box;
        r.dim = static_cast<int>(lo_.size());
        r.lo = std::move(lo_);
        r.hi = std::move(hi_);
        return r;
    }
    static Region interval(double a, double b) { return box({a}, {b}); }
    static Region ball(Point c, double rad) {
        Region r;
        r.kind = Kind::Ball;
        r.dim = static_cast<int>(c.size());
        r.center = std::move(c);
        r.radius = rad;
        return r;
    }
    static Region all(int d) {
        Region r;
        r.kind = Kind::All;
        r.dim = d;
        return r;
    }

    bool bounded() const { return kind != Kind::All; }

    // bounding interval along one axis (throws for All)
    std::pair<double, double> axis_bounds(int k) const {
        switch (kind) {
            case Kind::Box: return {lo[k], hi[k]};
            case Kind::Ball: return {center[k] - radius, center[k] + radius};
            default: throw MethodUnsupported("axis_bounds on unbounded region");
        }
    }

    bool contains(std::span<const double> x) const {
        switch (kind) {
            case Kind::Box:
                for (int k = 0; k < dim; ++k)
                    if (x[k] < lo[k] || x[k] > hi[k]) return false;
                return true;
            case Kind::Ball: return distance(x, center) <= radius;
            default: return true;
        }
    }

    double max_distance_to(std::span<const double> x) const {
        switch (kind) {
            case Kind::Box: {
                double s = 0.0;
                for (int k = 0; k < dim; ++k) {
                    const double d = std::max(std::abs(x[k] - lo[k]), std::abs(x[k] - hi[k]));
                    s += d * d;
                }
                return std::sqrt(s);
            }
            case Kind::Ball: return distance(x, center) + radius;
            default: throw MethodUnsupported("max_distance_to on unbounded region");
        }
    }
};

struct Singularity {
    Point location;
    double exponent;  // |rho(x)| <= C |x-location|^{-exponent} near location
};

// Identifies a built-in density for serialization; transforms drop the tag.
struct BuiltinSpec {
    std::string name;
    std::vector<double> params;
};

struct DensityComponent {
    std::function<double(std::span<const double>)> evaluate;
    Region support;
    std::vector<Singularity> singularities;
    double decay_exponent = quad::kInf;  // |rho(x)| <= C|x|^{-decay} at infinity
    // Set when the component alone is not absolutely integrable at infinity
    // but becomes integrable when paired under a decaying kernel; consumers
    // must check this flag before integrating the component bare.
    bool requires_kernel_pairing = false;
    std::optional<double> abs_integral;  // cached/analytic value of int |rho|
    std::optional<BuiltinSpec> builtin;

    double operator()(std::span<const double> x) const { return evaluate(x); }
};

inline DensityComponent density_1d(std::function<double(double)> f, Region support,
                                   std::vector<Singularity> sing = {},
                                   double decay = quad::kInf) {
    DensityComponent c;
    c.evaluate = [f = std::move(f)](std::span<const double> x) { return f(x[0]); };
    c.support = std::move(support);
    c.singularities = std::move(sing);
    c.decay_exponent = decay;
    return c;
}

inline DensityComponent lebesgue_on(double a, double b, double weight = 1.0) {
    DensityComponent c = density_1d([weight](double) { return weight; }, Region::interval(a, b));
    c.abs_integral = std::abs(weight) * (b - a);
    c.builtin = BuiltinSpec{"lebesgue", {a, b, weight}};
    return c;
}

struct SignedMeasure {
    int dimension = 1;
    std::vector<Atom> atoms;
    std::vector<DensityComponent> densities;

    static SignedMeasure delta(Point x, double w = 1.0) {
        SignedMeasure m;
        m.dimension = static_cast<int>(x.size());
        m.atoms.push_back({std::move(x), w});
        return m;
    }
    static SignedMeasure delta1(double x, double w = 1.0) { return delta({x}, w); }
    static SignedMeasure zero(int d = 1) {
        SignedMeasure m;
        m.dimension = d;
        return m;
    }

    bool pure_density() const { return atoms.empty(); }

    SignedMeasure& add_atom(Point x, double w) {
        atoms.push_back({std::move(x), w});
        return *this;
    }
    SignedMeasure& add_density(DensityComponent c) {
        densities.push_back(std::move(c));
        return *this;
    }

    void validate() const {
        for (const auto& a : atoms) {
            if (static_cast<int>(a.location.size()) != dimension)
                throw ParameterOutOfRange("atom dimension mismatch");
            for (double v : a.location)
                if (!std::isfinite(v)) throw ParameterOutOfRange("non-finite atom location");
            if (!std::isfinite(a.weight)) throw ParameterOutOfRange("non-finite atom weight");
        }
        for (const auto& c : densities) {
            if (c.support.dim != dimension)
                throw ParameterOutOfRange("density dimension mismatch");
            for (const auto& s : c.singularities)
                if (s.exponent >= dimension)
                    throw ParameterOutOfRange("density singularity not locally integrable");
            if (!c.support.bounded() && !(c.decay_exponent > dimension) &&
                !c.requires_kernel_pairing)
                throw ParameterOutOfRange(
                    "unbounded density lacks integrable decay and pairing flag");
        }
    }
};

// ------------------------------------------------------------------
// integrals of a single density component against a smooth-ish factor

namespace detail {

// 1D integral of x -> phi(x)*rho(x) over the support of `c` (dimension 1).
// `extra` lists additional singular points of phi; `phi_decay` bounds phi at
// infinity (phi ~ |x|^{+phi_growth}; pass negative for decaying phi).
template <class Phi>
double integrate_density_1d(const DensityComponent& c, Phi&& phi,
                            std::vector<quad::SingularPoint> extra, double phi_growth,
                            const quad::Options& opt) {
    auto f = [&](double x) {
        const double xs[1] = {x};
        return phi(x) * c.evaluate(std::span<const double>(xs, 1));
    };
    std::vector<quad::SingularPoint> pts = std::move(extra);
    for (const auto& s : c.singularities) pts.push_back({s.location[0], s.exponent});
    if (c.support.bounded()) {
        auto [a, b] = c.support.axis_bounds(0);
        return quad::integrate_with_singularities(f, a, b, std::move(pts), opt);
    }
    const double eta = c.decay_exponent - phi_growth;
    if (!(eta > 1.0)) throw NonIntegrableMoment("density tail not integrable against factor");
    return quad::integrate_real_line(f, std::move(pts), eta, opt);
}

// Iterated integral of phi*rho over a bounded support in dimension 2 or 3.
template <class Phi>
double integrate_density_nd(const DensityComponent& c, Phi&& phi,
                            const std::vector<Point>& phi_points, const quad::Options& opt) {
    const int d = c.support.dim;
    if (!c.support.bounded())
        throw MethodUnsupported("unbounded multi-d density integration not supported");
    std::vector<Point> marks = phi_points;
    for (const auto& s : c.singularities) marks.push_back(s.location);

    if (d == 2) {
        auto [ax, bx] = c.support.axis_bounds(0);
        auto [ay, by] = c.support.axis_bounds(1);
        auto f = [&](double x, double y) {
            const double xs[2] = {x, y};
            std::span<const double> sp(xs, 2);
            if (!c.support.contains(sp)) return 0.0;
            return phi(sp) * c.evaluate(sp);
        };
        auto inner_pts = [&](double x) {
            std::vector<quad::SingularPoint> pts;
            for (const auto& p : marks) pts.push_back({p[1], 0.9});
            (void)x;
            return pts;
        };
        std::vector<quad::SingularPoint> outer;
        for (const auto& p : marks) outer.push_back({p[0], 0.0});
        quad::Options o = opt;
        o.rel_tol = std::max(opt.rel_tol, 1e-8);
        return quad::integrate_box_2d(f, ax, bx, ay, by, inner_pts, outer, o);
    }
    if (d == 3) {
        auto [ax, bx] = c.support.axis_bounds(0);
        auto [ay, by] = c.support.axis_bounds(1);
        auto [az, bz] = c.support.axis_bounds(2);
        quad::Options o = opt;
        o.rel_tol = std::max(opt.rel_tol, 1e-6);
        o.max_intervals = 512;
        auto fz = [&](double x, double y) {
            return quad::integrate(
                [&](double z) {
                    const double xs[3] = {x, y, z};
                    std::span<const double> sp(xs, 3);
                    if (!c.support.contains(sp)) return 0.0;
                    return phi(sp) * c.evaluate(sp);
                },
                az, bz, o);
        };
        return quad::integrate_box_2d(fz, ax, bx, ay, by, quad::no_points, {}, o);
    }
    throw DimensionUnsupported("density integration implemented for d <= 3");
}

}  // namespace detail

// ------------------------------------------------------------------
// moments

using MultiIndex = std::vector<int>;

inline int order(const MultiIndex& j) {
    int s = 0;
    for (int v : j) s += v;
    return s;
}

// moment(mu, j) = int x^j mu(dx); atoms exact, densities by adaptive
// quadrature to relative tolerance 1e-9.
inline double moment(const SignedMeasure& mu, const MultiIndex& j) {
    if (static_cast<int>(j.size()) != mu.dimension)
        throw ParameterOutOfRange("multi-index dimension mismatch");
    const int p = order(j);
    if (p > 4) throw ParameterOutOfRange("moment order capped at |j| <= 4");
    double total = 0.0;
    for (const auto& a : mu.atoms) {
        double m = a.weight;
        for (int k = 0; k < mu.dimension; ++k)
            for (int q = 0; q < j[k]; ++q) m *= a.location[k];
        total += m;
    }
    quad::Options opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 1e-14;
    for (const auto& c : mu.densities) {
        if (!c.support.bounded() && !(c.decay_exponent > mu.dimension + p))
            throw NonIntegrableMoment("decay exponent too small for requested moment");
        if (mu.dimension == 1) {
            total += detail::integrate_density_1d(
                c, [&](double x) { return j[0] == 0 ? 1.0 : std::pow(x, j[0]); }, {},
                static_cast<double>(p), opt);
        } else {
            total += detail::integrate_density_nd(
                c,
                [&](std::span<const double> x) {
                    double m = 1.0;
                    for (int k = 0; k < mu.dimension; ++k)
                        for (int q = 0; q < j[k]; ++q) m *= x[k];
                    return m;
                },
                {}, opt);
        }
    }
    return total;
}

inline double total_mass(const SignedMeasure& mu) {
    return moment(mu, MultiIndex(mu.dimension, 0));
}

// total variation |mu|(R^d); densities integrated in absolute value
inline double total_variation(const SignedMeasure& mu) {
    double tv = 0.0;
    for (const auto& a : mu.atoms) tv += std::abs(a.weight);
    quad::Options opt;
    opt.rel_tol = 1e-8;
    opt.abs_tol = 1e-14;
    for (const auto& c : mu.densities) {
        if (c.abs_integral) {
            tv += *c.abs_integral;
            continue;
        }
        if (!c.support.bounded() && !(c.decay_exponent > mu.dimension))
            throw NonIntegrableMoment("density is not absolutely integrable");
        DensityComponent abs_c = c;
        auto base = c.evaluate;
        abs_c.evaluate = [base](std::span<const double> x) { return std::abs(base(x)); };
        if (mu.dimension == 1)
            tv += detail::integrate_density_1d(abs_c, [](double) { return 1.0; }, {}, 0.0, opt);
        else
            tv += detail::integrate_density_nd(abs_c, [](std::span<const double>) { return 1.0; },
                                               {}, opt);
    }
    return tv;
}

// ------------------------------------------------------------------
// membership in M_r

struct MembershipReport {
    bool member = true;
    std::vector<std::string> failures;
};

// mu in M_r iff int |x|^{r-1} |mu|(dx) < infty and all moments of order < r
// vanish (absolute tolerance 1e-8 on each moment).
inline MembershipReport check_membership(const SignedMeasure& mu, int r) {
    if (r < 0 || r > 4) throw ParameterOutOfRange("membership order r in [0,4]");
    MembershipReport rep;
    constexpr double tol = 1e-8;
    for (const auto& c : mu.densities) {
        const bool radial_ok =
            c.support.bounded() || c.decay_exponent > mu.dimension + std::max(0, r - 1);
        if (!radial_ok) {
            rep.member = false;
            rep.failures.push_back("radial moment |x|^{r-1} not integrable (decay " +
                                   std::to_string(c.decay_exponent) + ")");
        }
        if (!c.support.bounded() && c.requires_kernel_pairing) {
            rep.member = false;
            rep.failures.push_back("component requires kernel pairing; bare |mu| may diverge");
        }
    }
    // enumerate all multi-indices with |j| < r
    std::vector<MultiIndex> idx;
    MultiIndex cur(mu.dimension, 0);
    std::function<void(int, int)> rec = [&](int k, int rem) {
        if (k == mu.dimension) {
            idx.push_back(cur);
            return;
        }
        for (int v = 0; v <= rem; ++v) {
            cur[k] = v;
            rec(k + 1, rem - v);
        }
        cur[k] = 0;
    };
    if (r > 0) rec(0, r - 1);
    for (const auto& j : idx) {
        double m;
        try {
            m = moment(mu, j);
        } catch (const NonIntegrableMoment&) {
            rep.member = false;
            rep.failures.push_back("moment not integrable at order " + std::to_string(order(j)));
            continue;
        }
        if (std::abs(m) > tol) {
            std::ostringstream os;
            os << "moment (";
            for (std::size_t k = 0; k < j.size(); ++k) os << (k ? "," : "") << j[k];
            os << ") = " << m << " exceeds tolerance";
            rep.member = false;
            rep.failures.push_back(os.str());
        }
    }
    return rep;
}

// ------------------------------------------------------------------
// dilation / translation

// mu_c(B) = mu(B/c): atoms move to c*x, densities become c^{-d} rho(x/c).
inline SignedMeasure dilate(const SignedMeasure& mu, double c) {
    if (!(c > 0.0)) throw ParameterOutOfRange("dilation factor must be positive");
    SignedMeasure out;
    out.dimension = mu.dimension;
    for (const auto& a : mu.atoms) {
        Point p = a.location;
        for (double& v : p) v *= c;
        out.atoms.push_back({std::move(p), a.weight});
    }
    const int d = mu.dimension;
    const double jac = std::pow(c, -d);
    for (const auto& comp : mu.densities) {
        DensityComponent nc;
        auto base = comp.evaluate;
        nc.evaluate = [base, c, jac, d](std::span<const double> x) {
            double buf[3];
            for (int k = 0; k < d; ++k) buf[k] = x[k] / c;
            return jac * base(std::span<const double>(buf, d));
        };
        nc.support = comp.support;
        switch (nc.support.kind) {
            case Region::Kind::Box:
                for (double& v : nc.support.lo) v *= c;
                for (double& v : nc.support.hi) v *= c;
                break;
            case Region::Kind::Ball:
                for (double& v : nc.support.center) v *= c;
                nc.support.radius *= c;
                break;
            case Region::Kind::All: break;
        }
        for (const auto& s : comp.singularities) {
            Point p = s.location;
            for (double& v : p) v *= c;
            nc.singularities.push_back({std::move(p), s.exponent});
        }
        nc.decay_exponent = comp.decay_exponent;
        nc.requires_kernel_pairing = comp.requires_kernel_pairing;
        if (comp.abs_integral) nc.abs_integral = comp.abs_integral;  // TV preserved
        out.densities.push_back(std::move(nc));
    }
    return out;
}

inline SignedMeasure translate(const SignedMeasure& mu, const Point& s) {
    if (static_cast<int>(s.size()) != mu.dimension)
        throw ParameterOutOfRange("translation dimension mismatch");
    SignedMeasure out;
    out.dimension = mu.dimension;
    const int d = mu.dimension;
    for (const auto& a : mu.atoms) {
        Point p = a.location;
        for (int k = 0; k < d; ++k) p[k] += s[k];
        out.atoms.push_back({std::move(p), a.weight});
    }
    for (const auto& comp : mu.densities) {
        DensityComponent nc;
        auto base = comp.evaluate;
        Point sh = s;
        nc.evaluate = [base, sh, d](std::span<const double> x) {
            double buf[3];
            for (int k = 0; k < d; ++k) buf[k] = x[k] - sh[k];
            return base(std::span<const double>(buf, d));
        };
        nc.support = comp.support;
        switch (nc.support.kind) {
            case Region::Kind::Box:
                for (int k = 0; k < d; ++k) {
                    nc.support.lo[k] += s[k];
                    nc.support.hi[k] += s[k];
                }
                break;
            case Region::Kind::Ball:
                for (int k = 0; k < d; ++k) nc.support.center[k] += s[k];
                break;
            case Region::Kind::All: break;
        }
        for (const auto& sg : comp.singularities) {
            Point p = sg.location;
            for (int k = 0; k < d; ++k) p[k] += s[k];
            nc.singularities.push_back({std::move(p), sg.exponent});
        }
        nc.decay_exponent = comp.decay_exponent;
        nc.requires_kernel_pairing = comp.requires_kernel_pairing;
        nc.abs_integral = comp.abs_integral;
        out.densities.push_back(std::move(nc));
    }
    return out;
}

// linear combination helpers
inline SignedMeasure scaled(const SignedMeasure& mu, double factor) {
    SignedMeasure out = mu;
    for (auto& a : out.atoms) a.weight *= factor;
    for (auto& c : out.densities) {
        auto base = c.evaluate;
        c.evaluate = [base, factor](std::span<const double> x) { return factor * base(x); };
        if (c.abs_integral) c.abs_integral = *c.abs_integral * std::abs(factor);
        c.builtin.reset();
    }
    return out;
}

inline SignedMeasure sum(const SignedMeasure& a, const SignedMeasure& b) {
    if (a.dimension != b.dimension) throw ParameterOutOfRange("measure dimension mismatch");
    SignedMeasure out = a;
    // merge atoms at identical locations so cancellations stay exact
    for (const auto& atom : b.atoms) {
        bool merged = false;
        for (auto& ex : out.atoms) {
            if (ex.location == atom.location) {
                ex.weight += atom.weight;
                merged = true;
                break;
            }
        }
        if (!merged) out.atoms.push_back(atom);
    }
    for (const auto& c : b.densities) out.densities.push_back(c);
    std::erase_if(out.atoms, [](const Atom& at) { return at.weight == 0.0; });
    return out;
}

// ------------------------------------------------------------------
// pairwise Riesz-type energy

namespace detail {

// shared machinery: double integral of k(|y-y'|) mu(dy) mu'(dy') for a radial
// factor k with known behaviour k(r) ~ r^{zero_exponent} as r->0 and
// k(r) ~ r^{infinity_exponent} as r->infinity.
struct RadialKernel {
    std::function<double(double)> k;
    double zero_exponent;      // e.g. 2H; negative means singular at 0
    double infinity_exponent;  // growth/decay exponent at infinity
    bool log_singularity = false;
};

inline double kernel_sing_strength(const RadialKernel& k) {
    if (k.log_singularity) return 0.25;  // force substitution near log blow-up
    return std::max(0.0, -k.zero_exponent);
}

// atom at y against a 1D density component.  Integrated radially around y so
// the kernel argument r = |x - y| enters exactly; this keeps the singular
// factor accurate down to the ulp of the geometry.
inline double atom_vs_density_1d(const Point& y, const RadialKernel& ker,
                                 const DensityComponent& c, const quad::Options& opt) {
    const double y0 = y[0];
    double total = 0.0;
    for (int side : {+1, -1}) {
        double rlo = 0.0, rhi = quad::kInf;
        if (c.support.bounded()) {
            auto [a, b] = c.support.axis_bounds(0);
            if (side > 0) {
                rlo = std::max(0.0, a - y0);
                rhi = b - y0;
            } else {
                rlo = std::max(0.0, y0 - b);
                rhi = y0 - a;
            }
            if (!(rhi > rlo)) continue;
        }
        auto fr = [&](double r) {
            const double xs[1] = {y0 + side * r};
            return ker.k(r) * c.evaluate(std::span<const double>(xs, 1));
        };
        std::vector<quad::SingularPoint> pts{{0.0, kernel_sing_strength(ker)}};
        for (const auto& s : c.singularities) {
            const double rs = side * (s.location[0] - y0);
            if (rs >= 0.0) pts.push_back({rs, s.exponent});
        }
        if (std::isfinite(rhi)) {
            total += quad::integrate_with_singularities(fr, rlo, rhi, std::move(pts), opt);
        } else {
            const double eta = c.decay_exponent - ker.infinity_exponent;
            if (!(eta > 1.0))
                throw NonIntegrableMoment("density tail not integrable against kernel");
            total += quad::integrate_semi_infinite(fr, rlo, std::move(pts), eta, opt);
        }
    }
    return total;
}

// atom at y against a bounded multi-d density: polar rule around y
inline double atom_vs_density_nd(const Point& y, const RadialKernel& ker,
                                 const DensityComponent& c, const quad::Options& opt,
                                 int n_angle = 64) {
    const int d = c.support.dim;
    if (d != 2) throw DimensionUnsupported("kernel-density pairing implemented for d in {1,2}");
    if (!c.support.bounded())
        throw MethodUnsupported("unbounded multi-d density under kernel not supported");
    const double rmax = c.support.max_distance_to(y);
    const double two_pi = 2.0 * std::acos(-1.0);
    const bool ball = c.support.kind == Region::Kind::Ball;
    const auto arc_rule = quad::gauss_legendre(16);
    auto ring_mean = [&](double r) {
        if (ball) {
            // the ring intersects the support disk in one arc whose endpoints
            // are known in closed form; integrating rho over that arc keeps
            // the radial integrand smooth
            const double dc = distance(y, c.support.center);
            const double R = c.support.radius;
            double half = 0.0;
            if (dc + r <= R) {
                half = std::acos(-1.0);  // ring fully inside
            } else if (std::abs(dc - r) >= R || r == 0.0) {
                return 0.0;  // ring fully outside
            } else {
                const double cosv = (dc * dc + r * r - R * R) / (2.0 * dc * r);
                half = std::acos(std::clamp(cosv, -1.0, 1.0));
            }
            const double base = dc > 0.0
                                    ? std::atan2(c.support.center[1] - y[1],
                                                 c.support.center[0] - y[0])
                                    : 0.0;
            double s = 0.0;
            for (int i = 0; i < 16; ++i) {
                const double th = base + half * arc_rule.nodes[i];
                const double xs[2] = {y[0] + r * std::cos(th), y[1] + r * std::sin(th)};
                s += arc_rule.weights[i] * c.evaluate(std::span<const double>(xs, 2));
            }
            return s * half / two_pi;
        }
        double s = 0.0;
        for (int i = 0; i < n_angle; ++i) {
            const double th = two_pi * (i + 0.5) / n_angle;
            const double xs[2] = {y[0] + r * std::cos(th), y[1] + r * std::sin(th)};
            std::span<const double> sp(xs, 2);
            if (c.support.contains(sp)) s += c.evaluate(sp);
        }
        return s / n_angle;
    };
    // radial singularities where the ring passes density singular points,
    // kinks where it crosses the support boundary
    std::vector<quad::SingularPoint> pts{{0.0, std::max(0.0, kernel_sing_strength(ker) - (d - 1))}};
    for (const auto& s : c.singularities) pts.push_back({distance(y, s.location), 0.5});
    if (c.support.kind == Region::Kind::Ball) {
        const double dc = distance(y, c.support.center);
        pts.push_back({std::abs(dc - c.support.radius), 0.0});
        pts.push_back({dc + c.support.radius, 0.0});
    } else {
        for (int k = 0; k < d; ++k) {
            auto [a, b] = c.support.axis_bounds(k);
            pts.push_back({std::abs(y[k] - a), 0.0});
            pts.push_back({std::abs(y[k] - b), 0.0});
        }
    }
    auto f = [&](double r) { return ker.k(r) * std::pow(r, d - 1) * two_pi * ring_mean(r); };
    quad::Options o = opt;
    o.rel_tol = std::max(opt.rel_tol, 1e-6);
    o.max_intervals = std::min(opt.max_intervals, 512);
    return quad::integrate_with_singularities(f, 0.0, rmax, pts, o);
}

inline double atom_vs_density(const Point& y, const RadialKernel& ker, const DensityComponent& c,
                              const quad::Options& opt) {
    if (c.support.dim == 1) return atom_vs_density_1d(y, ker, c, opt);
    return atom_vs_density_nd(y, ker, c, opt);
}

// 1D density against 1D density (nested adaptive; inner singular at the
// moving outer point)
inline double density_vs_density_1d(const DensityComponent& ca, const RadialKernel& ker,
                                    const DensityComponent& cb, const quad::Options& opt) {
    quad::Options inner = opt;
    inner.rel_tol = std::max(opt.rel_tol * 0.1, 1e-12);
    inner.max_intervals = std::max(512, opt.max_intervals / 4);
    auto g = [&](double yv) {
        Point y{yv};
        return atom_vs_density_1d(y, ker, cb, inner);
    };
    std::vector<quad::SingularPoint> pts;
    for (const auto& s : ca.singularities) pts.push_back({s.location[0], s.exponent});
    // kinks where the outer point crosses the inner support edges
    if (cb.support.bounded()) {
        auto [a, b] = cb.support.axis_bounds(0);
        pts.push_back({a, 0.0});
        pts.push_back({b, 0.0});
    }
    auto f = [&](double y) {
        const double ys[1] = {y};
        return ca.evaluate(std::span<const double>(ys, 1)) * g(y);
    };
    if (ca.support.bounded()) {
        auto [a, b] = ca.support.axis_bounds(0);
        return quad::integrate_with_singularities(f, a, b, std::move(pts), opt);
    }
    const double eta = ca.decay_exponent - std::max(0.0, ker.infinity_exponent);
    if (!(eta > 1.0)) throw EnergyDivergent("outer density tail not integrable under kernel");
    return quad::integrate_real_line(f, std::move(pts), eta, opt);
}

inline double density_vs_density(const DensityComponent& ca, const RadialKernel& ker,
                                 const DensityComponent& cb, const quad::Options& opt) {
    if (ca.support.dim == 1) return density_vs_density_1d(ca, ker, cb, opt);
    if (ca.support.dim != 2)
        throw DimensionUnsupported("density-density pairing implemented for d in {1,2}");
    if (!ca.support.bounded())
        throw MethodUnsupported("unbounded multi-d density under kernel not supported");
    // outer integral of rho(y) * g(y) with g the convolved field (smooth):
    // fixed tensor rules in support-adapted coordinates keep the boundary on
    // a coordinate line, the adaptive work stays in the inner convolution
    quad::Options inner = opt;
    inner.rel_tol = std::max(opt.rel_tol, 1e-5);
    inner.max_intervals = 96;
    auto g = [&](double x0, double x1) {
        const double xs[2] = {x0, x1};
        std::span<const double> sp(xs, 2);
        if (!ca.support.contains(sp)) return 0.0;
        return ca.evaluate(sp) * atom_vs_density_nd({x0, x1}, ker, cb, inner, 48);
    };
    double total = 0.0;
    if (ca.support.kind == Region::Kind::Ball) {
        const int n_r = 32, n_th = 48;
        const auto gl = quad::gauss_legendre_on(n_r, 0.0, ca.support.radius);
        const double two_pi = 2.0 * std::acos(-1.0);
        const auto& c0 = ca.support.center;
        for (int i = 0; i < n_r; ++i) {
            const double r = gl.nodes[i];
            double ring = 0.0;
            for (int j = 0; j < n_th; ++j) {
                const double th = two_pi * (j + 0.5) / n_th;
                ring += g(c0[0] + r * std::cos(th), c0[1] + r * std::sin(th));
            }
            total += gl.weights[i] * r * (two_pi / n_th) * ring;
        }
    } else {
        const int n = 32;
        auto [ax, bx] = ca.support.axis_bounds(0);
        auto [ay, by] = ca.support.axis_bounds(1);
        const auto glx = quad::gauss_legendre_on(n, ax, bx);
        const auto gly = quad::gauss_legendre_on(n, ay, by);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                total += glx.weights[i] * gly.weights[j] * g(glx.nodes[i], gly.nodes[j]);
    }
    return total;
}

// full double integral; `signed_weights` false takes |weights| and |rho|
inline double kernel_double_integral(const SignedMeasure& mu, const SignedMeasure& nu,
                                     const RadialKernel& ker, bool signed_weights,
                                     const quad::Options& opt) {
    auto wgt = [&](double w) { return signed_weights ? w : std::abs(w); };
    auto abs_comp = [&](const DensityComponent& c) {
        if (signed_weights) return c;
        DensityComponent a = c;
        auto base = c.evaluate;
        a.evaluate = [base](std::span<const double> x) { return std::abs(base(x)); };
        return a;
    };
    double total = 0.0;
    for (const auto& a : mu.atoms)
        for (const auto& b : nu.atoms) {
            const double r = distance(a.location, b.location);
            if (r == 0.0 && ker.zero_exponent > 0.0 && !ker.log_singularity) continue;  // k(0)=0
            total += wgt(a.weight) * wgt(b.weight) * ker.k(r);
        }
    for (const auto& a : mu.atoms)
        for (const auto& c : nu.densities)
            total += wgt(a.weight) * atom_vs_density(a.location, ker, abs_comp(c), opt);
    for (const auto& b : nu.atoms)
        for (const auto& c : mu.densities)
            total += wgt(b.weight) * atom_vs_density(b.location, ker, abs_comp(c), opt);
    for (const auto& ca : mu.densities)
        for (const auto& cb : nu.densities)
            total += density_vs_density(abs_comp(ca), ker, abs_comp(cb), opt);
    return total;
}

}  // namespace detail

// pair_energy(mu, mu', alpha) = int int |y-y'|^{d-alpha} |mu|(dy)|mu'|(dy'),
// the admissibility probe for the class M^beta; set signed_weights to get
// the signed version.
inline double pair_energy(const SignedMeasure& mu, const SignedMeasure& nu, double alpha,
                          bool signed_weights = false) {
    if (mu.dimension != nu.dimension) throw ParameterOutOfRange("dimension mismatch");
    const int d = mu.dimension;
    const double e = d - alpha;  // kernel exponent
    if (e <= -d) throw EnergyDivergent("kernel exponent at or below -d");
    if (e < 0.0) {
        for (const auto& a : mu.atoms)
            for (const auto& b : nu.atoms)
                if (a.location == b.location && a.weight != 0.0 && b.weight != 0.0)
                    throw EnergyDivergent("coincident atoms under singular kernel");
        for (const auto& c : nu.densities)
            for (const auto& s : c.singularities)
                if (!(s.exponent - e < d))
                    throw EnergyDivergent("density singularity too strong under kernel");
        for (const auto& c : mu.densities)
            for (const auto& s : c.singularities)
                if (!(s.exponent - e < d))
                    throw EnergyDivergent("density singularity too strong under kernel");
    }
    for (const auto& c : mu.densities)
        if (!c.support.bounded() && !(c.decay_exponent - e > d))
            throw EnergyDivergent("tail decay too weak under kernel");
    for (const auto& c : nu.densities)
        if (!c.support.bounded() && !(c.decay_exponent - e > d))
            throw EnergyDivergent("tail decay too weak under kernel");

    detail::RadialKernel ker;
    ker.k = [e](double r) { return r == 0.0 && e == 0.0 ? 1.0 : std::pow(r, e); };
    ker.zero_exponent = e;
    ker.infinity_exponent = e;
    quad::Options opt;
    opt.rel_tol = 1e-7;
    opt.abs_tol = 1e-14;
    return detail::kernel_double_integral(mu, nu, ker, signed_weights, opt);
}

// ------------------------------------------------------------------
// Riesz potential

// C_{m,d} = Gamma((d-m)/2) / (pi^{d/2} 2^m Gamma(m/2))
inline double riesz_constant(double m, int d) {
    return std::tgamma((d - m) / 2.0) /
           (std::pow(std::acos(-1.0), d / 2.0) * std::pow(2.0, m) * std::tgamma(m / 2.0));
}

namespace detail {

struct RieszContext {
    SignedMeasure mu;  // snapshot
    double m;
    int d;
    double constant;
};

// evaluate (-Delta)^{-m/2} mu at x by quadrature over the density parts
inline double riesz_density_value(const RieszContext& ctx, std::span<const double> x) {
    const int d = ctx.d;
    if (d == 1 && ctx.m == 1.0) {
        // (-Delta)^{-1/2} mu (x) = mu([x, infinity))
        double v = 0.0;
        for (const auto& a : ctx.mu.atoms)
            if (a.location[0] >= x[0]) v += a.weight;
        quad::Options opt;
        opt.rel_tol = 1e-11;
        opt.abs_tol = 1e-15;
        for (const auto& c : ctx.mu.densities) {
            std::vector<quad::SingularPoint> pts;
            for (const auto& s : c.singularities) pts.push_back({s.location[0], s.exponent});
            if (c.support.bounded()) {
                auto [a, b] = c.support.axis_bounds(0);
                if (x[0] < b) {
                    auto f = [&](double y) {
                        const double ys[1] = {y};
                        return c.evaluate(std::span<const double>(ys, 1));
                    };
                    v += quad::integrate_with_singularities(f, std::max(x[0], a), b, pts, opt);
                }
            } else {
                auto f = [&](double y) {
                    const double ys[1] = {y};
                    return c.evaluate(std::span<const double>(ys, 1));
                };
                v += quad::integrate_semi_infinite(f, x[0], pts, c.decay_exponent, opt);
            }
        }
        return v;
    }
    // F(x) = C_{m,d} int |x-y|^{m-d} mu(dy)
    const double expo = ctx.m - d;  // negative
    double v = 0.0;
    for (const auto& a : ctx.mu.atoms) {
        const double r = distance(x, a.location);
        v += a.weight * std::pow(r, expo);
    }
    quad::Options opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 1e-14;
    RadialKernel ker;
    ker.k = [expo](double r) { return std::pow(r, expo); };
    ker.zero_exponent = expo;
    ker.infinity_exponent = expo;
    Point xp(x.begin(), x.end());
    for (const auto& c : ctx.mu.densities) v += atom_vs_density(xp, ker, c, opt);
    return ctx.constant * v;
}

}  // namespace detail

// Riesz potential of order m: returns the measure with the single density
// x -> C_{m,d} int |x-y|^{-(d-m)} mu(dy); for d=1, m=1 the density is
// x -> mu([x, infinity)).
inline SignedMeasure riesz_transform(const SignedMeasure& mu, double m) {
    const int d = mu.dimension;
    const bool onedim_special = (d == 1 && m == 1.0);
    if (!onedim_special && !(m > 0.0 && m < d))
        throw ParameterOutOfRange("riesz order requires 0 < m < d (or d=1, m=1)");
    // finiteness: int_{|y|>1} |mu|(dy)/|y|^{d-m} < infty
    for (const auto& c : mu.densities) {
        if (!c.support.bounded() && !(c.decay_exponent + (d - m) > d))
            throw RieszDivergence("measure tail too heavy for Riesz potential");
    }
    double mass = 0.0;
    bool mass_known = true;
    try {
        mass = total_mass(mu);
    } catch (const Error&) {
        mass_known = false;
    }
    if (onedim_special) {
        // the cumulative mu([x,inf)) has finite total variation only for
        // measures with vanishing total mass
        if (!mass_known || std::abs(mass) > 1e-10)
            throw RieszDivergence("d=1, m=1 Riesz transform needs total mass zero");
    }

    auto ctx = std::make_shared<detail::RieszContext>();
    ctx->mu = mu;
    ctx->m = m;
    ctx->d = d;
    ctx->constant = onedim_special ? 1.0 : riesz_constant(m, d);

    SignedMeasure out;
    out.dimension = d;
    DensityComponent comp;
    comp.evaluate = [ctx](std::span<const double> x) {
        return detail::riesz_density_value(*ctx, x);
    };
    if (onedim_special) {
        double lo = quad::kInf, hi = -quad::kInf;
        for (const auto& a : mu.atoms) {
            lo = std::min(lo, a.location[0]);
            hi = std::max(hi, a.location[0]);
        }
        for (const auto& c : mu.densities) {
            if (!c.support.bounded()) {
                lo = -quad::kInf;
                hi = quad::kInf;
                break;
            }
            auto [a, b] = c.support.axis_bounds(0);
            lo = std::min(lo, a);
            hi = std::max(hi, b);
        }
        if (std::isfinite(lo) && std::isfinite(hi)) {
            comp.support = Region::interval(lo, hi);
        } else {
            comp.support = Region::all(1);
            comp.decay_exponent = 2.0;  // placeholder; cumulative of mass-zero tail
        }
        // the cumulative is piecewise smooth with jumps at the atoms
        for (const auto& a : mu.atoms) comp.singularities.push_back({a.location, 0.0});
    } else {
        comp.support = Region::all(d);
        for (const auto& a : mu.atoms) comp.singularities.push_back({a.location, d - m});
        for (const auto& c : mu.densities)
            for (const auto& s : c.singularities)
                if (s.exponent > m) comp.singularities.push_back({s.location, s.exponent - m});
        const bool mass_zero = mass_known && std::abs(mass) <= 1e-12;
        comp.decay_exponent = (d - m) + (mass_zero ? 1.0 : 0.0);
        comp.requires_kernel_pairing = !(comp.decay_exponent > d);
    }
    out.densities.push_back(std::move(comp));
    return out;
}

// density value of a measure at a point (atoms excluded)
inline double density_value(const SignedMeasure& mu, std::span<const double> x) {
    double v = 0.0;
    for (const auto& c : mu.densities)
        if (c.support.contains(x)) v += c.evaluate(x);
    return v;
}

inline double density_value1(const SignedMeasure& mu, double x) {
    const double xs[1] = {x};
    return density_value(mu, std::span<const double>(xs, 1));
}

}  // namespace selfsim
