#pragma once

// Covariance functionals C(mu, mu') = int int k(y-y') mu(dy) mu'(dy') for the
// kernel families of the model: power law |y-y'|^{2H}, the planar log kernel,
// and product (cylinder) kernels; also the ball-intersection volume V(u) and
// the shot-noise kernel K_h.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "selfsim/errors.hpp"
#include "selfsim/measure.hpp"
#include "selfsim/quadrature.hpp"

namespace selfsim {

inline double unit_ball_volume(int d) {
    return std::pow(std::acos(-1.0), d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

// V(u): volume of the intersection of two unit balls in R^d whose centers
// are distance u apart; V(u) = 2 v_{d-1} int_{u/2}^1 (1-s^2)^{(d-1)/2} ds.
inline double ball_intersection_volume(double u, int d) {
    if (u < 0.0) throw ParameterOutOfRange("center distance must be nonnegative");
    if (u >= 2.0) return 0.0;
    switch (d) {
        case 1: return 2.0 - u;
        case 2: {
            const double h = u / 2.0;
            return 2.0 * (std::acos(-1.0) / 2.0 - std::asin(h) - h * std::sqrt(1.0 - h * h));
        }
        case 3: {
            const double pi = std::acos(-1.0);
            return 2.0 * pi * (2.0 / 3.0 - u / 2.0 + u * u * u / 24.0);
        }
        default: {
            quad::Options opt;
            opt.rel_tol = 1e-12;
            const double vdm1 = unit_ball_volume(d - 1);
            return 2.0 * vdm1 *
                   quad::integrate(
                       [d](double s) { return std::pow(1.0 - s * s, (d - 1) / 2.0); }, u / 2.0,
                       1.0, opt);
        }
    }
}

// ------------------------------------------------------------------
// KernelSpec

struct KernelSpec {
    enum class Variant { PowerLaw, Log, Product };

    struct Block {
        int dim;
        double exponent;  // d_i - beta_i
    };

    Variant variant = Variant::PowerLaw;
    int dimension = 1;
    double two_h = 1.0;  // PowerLaw exponent 2H
    std::vector<Block> blocks;
    double normalization = 1.0;

    static KernelSpec power_law(double two_h, int d) {
        KernelSpec k;
        k.variant = Variant::PowerLaw;
        k.two_h = two_h;
        k.dimension = d;
        k.validate();
        return k;
    }
    static KernelSpec log2d() {
        KernelSpec k;
        k.variant = Variant::Log;
        k.dimension = 2;
        return k;
    }
    static KernelSpec product(std::vector<Block> blocks) {
        KernelSpec k;
        k.variant = Variant::Product;
        k.blocks = std::move(blocks);
        k.dimension = 0;
        for (const auto& b : k.blocks) k.dimension += b.dim;
        k.validate();
        return k;
    }

    double hurst() const { return two_h / 2.0; }

    void validate() const {
        switch (variant) {
            case Variant::PowerLaw:
                if (!(two_h > -dimension && two_h < 2.0) || two_h == 0.0)
                    throw ParameterOutOfRange("power-law exponent 2H must lie in (-d,2)\\{0}");
                break;
            case Variant::Log:
                if (dimension != 2) throw ParameterOutOfRange("log kernel requires d=2");
                break;
            case Variant::Product:
                for (const auto& b : blocks) {
                    const bool neg = b.exponent > -b.dim && b.exponent < 0.0;
                    const bool pos = b.exponent > 0.0 && b.exponent < 1.0;
                    if (!neg && !pos)
                        throw ParameterOutOfRange(
                            "product block exponent must lie in (-d_i,0) or (0,1)");
                }
                break;
        }
    }
};

// ------------------------------------------------------------------
// covariance functional

namespace detail {

inline void require_m1(const SignedMeasure& mu, const char* which) {
    double m0;
    try {
        m0 = total_mass(mu);
    } catch (const Error& e) {
        throw PreconditionViolation(std::string("cannot verify zeroth moment of ") + which +
                                    ": " + e.what());
    }
    if (std::abs(m0) > 1e-8)
        throw PreconditionViolation(std::string(which) + " must have vanishing total mass, got " +
                                    std::to_string(m0));
}

inline void forbid_shared_atoms(const SignedMeasure& mu, const SignedMeasure& nu) {
    for (const auto& a : mu.atoms)
        for (const auto& b : nu.atoms)
            if (a.location == b.location && a.weight != 0.0 && b.weight != 0.0)
                throw PreconditionViolation("coincident atoms under singular kernel");
}

}  // namespace detail

// C(mu, mu') = normalization * int int k(y-y') mu(dy) mu'(dy').
// PowerLaw with 2H<0 requires finite Riesz energy (checked from metadata, in
// particular no shared atoms); 0<2H<2 and Log require both measures in M_1.
inline double covariance_functional(const KernelSpec& k, const SignedMeasure& mu,
                                    const SignedMeasure& nu, double rel_tol = 1e-7) {
    k.validate();
    if (k.variant == KernelSpec::Variant::Product)
        throw PreconditionViolation(
            "product kernels accept only product-form measures; use product_covariance");
    if (mu.dimension != k.dimension || nu.dimension != k.dimension)
        throw PreconditionViolation("measure dimension does not match kernel");
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 1e-14;

    detail::RadialKernel ker;
    if (k.variant == KernelSpec::Variant::PowerLaw) {
        const double e = k.two_h;
        if (e < 0.0) {
            detail::forbid_shared_atoms(mu, nu);
            // defer to the energy predicate for densities/decay
            const double alpha = k.dimension - e;
            try {
                for (const auto& c : mu.densities)
                    for (const auto& s : c.singularities)
                        if (!(s.exponent - e < k.dimension))
                            throw EnergyDivergent("density singularity too strong");
                for (const auto& c : nu.densities)
                    for (const auto& s : c.singularities)
                        if (!(s.exponent - e < k.dimension))
                            throw EnergyDivergent("density singularity too strong");
                (void)alpha;
            } catch (const EnergyDivergent& err) {
                throw PreconditionViolation(err.what());
            }
        } else {
            detail::require_m1(mu, "mu");
            detail::require_m1(nu, "mu'");
        }
        ker.k = [e](double r) { return r == 0.0 ? 0.0 : std::pow(r, e); };
        ker.zero_exponent = e;
        ker.infinity_exponent = e;
    } else {  // Log
        detail::require_m1(mu, "mu");
        detail::require_m1(nu, "mu'");
        detail::forbid_shared_atoms(mu, nu);
        for (const auto& c : mu.densities)
            if (!c.support.bounded())
                throw PreconditionViolation("log kernel requires bounded supports");
        for (const auto& c : nu.densities)
            if (!c.support.bounded())
                throw PreconditionViolation("log kernel requires bounded supports");
        ker.k = [](double r) { return -std::log(r); };
        ker.zero_exponent = 0.0;
        ker.infinity_exponent = 0.1;  // slow growth; bounded supports enforced above
        ker.log_singularity = true;
    }
    return k.normalization * detail::kernel_double_integral(mu, nu, ker, true, opt);
}

// fBm extraction check: evaluates the power-law functional on the pair
// (delta_s - delta_0, delta_t - delta_0) and returns the combination
// |s|^{2H} + |t|^{2H} - |s-t|^{2H} (twice the standard fBm covariance); the
// functional itself must equal the negative of this by the atom algebra.
inline double fbm_from_powerlaw(const KernelSpec& k, const Point& s, const Point& t) {
    if (k.variant != KernelSpec::Variant::PowerLaw || !(k.two_h > 0.0 && k.two_h < 2.0))
        throw ParameterOutOfRange("fbm extraction needs a power-law kernel with 0<2H<2");
    const double two_h = k.two_h;
    auto pw = [two_h](double r) { return r == 0.0 ? 0.0 : std::pow(r, two_h); };
    const Point origin(k.dimension, 0.0);
    const double combo = pw(norm(s)) + pw(norm(t)) - pw(distance(s, t));
    SignedMeasure ms = sum(SignedMeasure::delta(s), SignedMeasure::delta(origin, -1.0));
    SignedMeasure mt = sum(SignedMeasure::delta(t), SignedMeasure::delta(origin, -1.0));
    const double functional = covariance_functional(k, ms, mt);
    if (std::abs(functional + combo) > 1e-10 * std::max(1.0, std::abs(combo)))
        throw Error("fbm extraction identity violated");
    return combo;
}

// ------------------------------------------------------------------
// product (cylinder) kernels

struct ProductMeasure {
    std::vector<SignedMeasure> factors;  // one per kernel block
};

// Covariance of the cylinder model on product-form measures: the functional
// factorizes into per-block power-law functionals.
inline double product_covariance(const KernelSpec& k, const ProductMeasure& mu,
                                 const ProductMeasure& nu, double rel_tol = 1e-9) {
    if (k.variant != KernelSpec::Variant::Product)
        throw ParameterOutOfRange("product_covariance requires a product kernel");
    k.validate();
    if (mu.factors.size() != k.blocks.size() || nu.factors.size() != k.blocks.size())
        throw PreconditionViolation("product measure must supply one factor per block");
    double prod = k.normalization;
    for (std::size_t i = 0; i < k.blocks.size(); ++i) {
        KernelSpec blk = KernelSpec::power_law(k.blocks[i].exponent, k.blocks[i].dim);
        prod *= covariance_functional(blk, mu.factors[i], nu.factors[i], rel_tol);
        if (prod == 0.0) return 0.0;
    }
    return prod;
}

// ------------------------------------------------------------------
// pulse functions and the shot-noise kernel

struct PulseFunction {
    enum class Variant { BallIndicator, RadialGaussian, Singular, OneSided, UserRadial };

    Variant variant = Variant::BallIndicator;
    int dimension = 1;
    double scale = 1.0;       // RadialGaussian
    double beta = 0.0;        // Singular / OneSided exponent parameter
    std::function<double(double)> profile;  // UserRadial, r >= 0
    double profile_radius = quad::kInf;

    static PulseFunction ball_indicator(int d) {
        PulseFunction h;
        h.variant = Variant::BallIndicator;
        h.dimension = d;
        return h;
    }
    static PulseFunction radial_gaussian(double scale, int d) {
        PulseFunction h;
        h.variant = Variant::RadialGaussian;
        h.dimension = d;
        h.scale = scale;
        return h;
    }
    static PulseFunction singular(double beta, int d) {
        PulseFunction h;
        h.variant = Variant::Singular;
        h.dimension = d;
        h.beta = beta;
        return h;
    }
    static PulseFunction one_sided(double beta) {
        PulseFunction h;
        h.variant = Variant::OneSided;
        h.dimension = 1;
        h.beta = beta;
        return h;
    }
    static PulseFunction user_radial(std::function<double(double)> profile, double radius,
                                     int d) {
        PulseFunction h;
        h.variant = Variant::UserRadial;
        h.dimension = d;
        h.profile = std::move(profile);
        h.profile_radius = radius;
        return h;
    }

    bool square_integrable() const {
        switch (variant) {
            case Variant::BallIndicator:
            case Variant::RadialGaussian: return true;
            case Variant::UserRadial: return std::isfinite(profile_radius);
            default: return false;  // Singular / OneSided live only inside the
                                    // singular-shot constructions
        }
    }

    bool rotationally_symmetric() const { return variant != Variant::OneSided; }

    double radial(double r) const {
        switch (variant) {
            case Variant::BallIndicator: return r <= 1.0 ? 1.0 : 0.0;
            case Variant::RadialGaussian: return std::exp(-r * r / (2.0 * scale * scale));
            case Variant::Singular: return std::pow(r, -beta / 2.0);
            case Variant::OneSided: throw MethodUnsupported("one-sided pulse is not radial");
            case Variant::UserRadial: return r <= profile_radius ? profile(r) : 0.0;
        }
        return 0.0;
    }

    double evaluate(std::span<const double> x) const {
        if (variant == Variant::OneSided) {
            const double v = x[0];
            return v > 0.0 ? std::pow(v, -beta / 2.0) : 0.0;
        }
        return radial(norm(x));
    }

    // radius beyond which the pulse is negligible (used for windows/cutoffs)
    double support_radius() const {
        switch (variant) {
            case Variant::BallIndicator: return 1.0;
            case Variant::RadialGaussian: return 8.5 * scale;
            case Variant::UserRadial: return profile_radius;
            default: return quad::kInf;
        }
    }

    double l2_norm_sq() const { return autocorrelation(0.0); }

    // V_h(r) = int h(x) h(x + y) dx for |y| = r
    double autocorrelation(double r) const {
        switch (variant) {
            case Variant::BallIndicator: return ball_intersection_volume(r, dimension);
            case Variant::RadialGaussian: {
                const double s = scale;
                return std::pow(std::sqrt(std::acos(-1.0)) * s, dimension) *
                       std::exp(-r * r / (4.0 * s * s));
            }
            case Variant::UserRadial: {
                quad::Options opt;
                opt.rel_tol = 1e-9;
                opt.abs_tol = 1e-14;
                const double R = profile_radius;
                if (r >= 2.0 * R) return 0.0;
                if (dimension == 1) {
                    return quad::integrate(
                        [&](double x) {
                            const double a = std::abs(x) <= R ? profile(std::abs(x)) : 0.0;
                            const double b =
                                std::abs(x + r) <= R ? profile(std::abs(x + r)) : 0.0;
                            return a * b;
                        },
                        -R, R, opt);
                }
                if (dimension == 2) {
                    auto f = [&](double x, double y) {
                        const double r1 = std::hypot(x, y);
                        const double r2 = std::hypot(x + r, y);
                        const double a = r1 <= R ? profile(r1) : 0.0;
                        const double b = r2 <= R ? profile(r2) : 0.0;
                        return a * b;
                    };
                    quad::Options o;
                    o.rel_tol = 1e-7;
                    return quad::integrate_box_2d(f, -R, R, -R, R, quad::no_points, {}, o);
                }
                throw DimensionUnsupported("user pulse autocorrelation for d in {1,2}");
            }
            default:
                throw NonAdmissible("autocorrelation requires a square-integrable pulse");
        }
    }
};

// Shot-noise kernel K_h(e) of the random-balls field, with C_h = 1 so that
//   Cov(X_h(mu), X_h(mu')) = int int K_h((y-y')/|y-y'|) |y-y'|^{d-beta} mu mu'
// holds exactly.  After w = 1/u,
//   d < beta < 2d:    K_h = int_0^inf w^{beta-d-1} V_h(w) dw
//   d-1 < beta < d:   K_h = int_0^inf w^{beta-d-1} (V_h(w) - V_h(0)) dw.
inline double kernel_Kh(const PulseFunction& h, double beta, int d,
                        const Point& direction = {}) {
    if (h.dimension != d) throw ParameterOutOfRange("pulse dimension mismatch");
    if (!h.square_integrable())
        throw NonAdmissible("kernel_Kh requires a square-integrable pulse");
    const bool first_range = (beta > d && beta < 2.0 * d);
    const bool second_range = (beta > d - 1 && beta < d);
    if (!first_range && !second_range)
        throw ParameterOutOfRange("beta must lie in (d-1,d) or (d,2d)");
    if (!direction.empty() && static_cast<int>(direction.size()) != d)
        throw ParameterOutOfRange("direction dimension mismatch");

    const double v0 = h.autocorrelation(0.0);
    const double wmax = 2.0 * std::min(h.support_radius(), 1e6) + 1.0;
    // H_beta probe: the autocorrelation tail must vanish fast enough for the
    // first-range integral to converge
    if (first_range) {
        const double probe = h.autocorrelation(wmax) * std::pow(wmax, beta - d);
        if (!(std::abs(probe) <= 1e-6 * std::max(v0, 1e-300)))
            throw DivergentKernel("pulse autocorrelation tail too heavy for beta");
    }
    quad::Options opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 1e-14;
    if (first_range) {
        auto f = [&](double w) { return std::pow(w, beta - d - 1.0) * h.autocorrelation(w); };
        std::vector<quad::SingularPoint> pts{{0.0, std::max(0.0, d + 1.0 - beta)}};
        if (std::isfinite(h.support_radius())) pts.push_back({2.0 * h.support_radius(), 0.0});
        return quad::integrate_with_singularities(f, 0.0, wmax, pts, opt);
    }
    auto f = [&](double w) {
        return std::pow(w, beta - d - 1.0) * (h.autocorrelation(w) - v0);
    };
    std::vector<quad::SingularPoint> pts{{0.0, std::max(0.0, d - beta)}};
    if (std::isfinite(h.support_radius())) pts.push_back({2.0 * h.support_radius(), 0.0});
    double value = quad::integrate_with_singularities(f, 0.0, wmax, pts, opt);
    // beyond wmax the autocorrelation vanishes; the -V_h(0) part has an
    // analytic tail
    value -= v0 * std::pow(wmax, beta - d) / (d - beta);
    return value;
}

}  // namespace selfsim
