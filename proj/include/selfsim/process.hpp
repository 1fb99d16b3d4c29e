#pragma once

// Families t -> mu_t of indexing measures realizing the extracted processes:
// fractional Brownian motion in its four representations, Gaussian bridges
// (generalized, zero-area, fractional), and Volterra processes; plus the
// white-noise inner product that gives the exact covariance of M_d-driven
// representations.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "selfsim/errors.hpp"
#include "selfsim/kernel.hpp"
#include "selfsim/measure.hpp"
#include "selfsim/quadrature.hpp"

namespace selfsim {

// ------------------------------------------------------------------
// white-noise inner product

// Covariance of X = M_1((-Delta)^{-1/2} mu) representations: for pure-density
// measures F_s, F_t the exact covariance is int F_s(x) F_t(x) dx.
inline double whitenoise_inner(const SignedMeasure& mu_s, const SignedMeasure& mu_t,
                               double rel_tol = 1e-9) {
    if (!mu_s.pure_density() || !mu_t.pure_density())
        throw NotSquareIntegrable("whitenoise_inner needs pure-density measures");
    if (mu_s.dimension != 1 || mu_t.dimension != 1)
        throw DimensionUnsupported("whitenoise_inner implemented for d=1");
    double decay_s = quad::kInf, decay_t = quad::kInf;
    bool bounded = true;
    std::vector<quad::SingularPoint> pts;
    double lo = quad::kInf, hi = -quad::kInf;
    auto absorb = [&](const SignedMeasure& m, double& decay) {
        for (const auto& c : m.densities) {
            for (const auto& s : c.singularities) {
                if (s.exponent >= 0.5)
                    throw NotSquareIntegrable("density singularity exponent >= d/2");
                // the product can concentrate both exponents at a shared point
                pts.push_back({s.location[0], s.exponent > 0.0 ? 2.0 * s.exponent : 0.0});
            }
            if (c.support.bounded()) {
                auto [a, b] = c.support.axis_bounds(0);
                pts.push_back({a, 0.0});
                pts.push_back({b, 0.0});
                lo = std::min(lo, a);
                hi = std::max(hi, b);
            } else {
                bounded = false;
                decay = std::min(decay, c.decay_exponent);
            }
        }
    };
    absorb(mu_s, decay_s);
    absorb(mu_t, decay_t);
    auto f = [&](double x) { return density_value1(mu_s, x) * density_value1(mu_t, x); };
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 1e-15;
    if (bounded) {
        if (!(lo < hi)) return 0.0;
        return quad::integrate_with_singularities(f, lo, hi, std::move(pts), opt);
    }
    const double decay = decay_s + decay_t;
    if (!(decay > 1.0)) throw NotSquareIntegrable("product of densities not integrable at infinity");
    return quad::integrate_real_line(f, std::move(pts), decay, opt);
}

// ------------------------------------------------------------------
// Volterra kernels

struct VolterraKernel {
    std::function<double(double, double)> K;        // K(t,x), zero outside 0<x<=t
    std::function<double(double, double)> dK_dx;    // on 0<x<t
    std::function<double(double)> right_limit_at_0; // K(t,0+)
    std::function<double(double)> diagonal;         // K(t,t)
};

// mu_t = K(t,t) delta_t - K(t,0+) delta_0 - dK/dx(t,x) 1_{(0,t]}(x) dx
inline SignedMeasure volterra_to_measure(const VolterraKernel& k, double t) {
    if (!(t > 0.0)) throw ParameterOutOfRange("volterra measure needs t > 0");
    SignedMeasure mu;
    mu.dimension = 1;
    mu.add_atom({t}, k.diagonal(t));
    mu.add_atom({0.0}, -k.right_limit_at_0(t));
    auto d = k.dK_dx;
    DensityComponent c = density_1d([d, t](double x) { return -d(t, x); },
                                    Region::interval(0.0, t));
    mu.add_density(std::move(c));
    return mu;
}

// ------------------------------------------------------------------
// measure families

class MeasureFamily {
  public:
    virtual ~MeasureFamily() = default;
    virtual std::string name() const = 0;
    // indexing measure mu_t
    virtual SignedMeasure measure_at(double t) const = 0;
    // exact covariance of the extracted process (documented normalization)
    virtual double covariance(double s, double t) const = 0;
    // r such that every emitted mu_t lies in M_r; nullopt when the emitted
    // object is an L^2 integrand rather than a finite-variation measure
    virtual std::optional<int> membership_order() const { return 0; }
    virtual double hurst() const { return 0.5; }
    virtual double horizon() const { return quad::kInf; }
    // (-Delta)^{-1/2} mu_t for M_d-driven families; families override with
    // analytic densities where available
    virtual SignedMeasure riesz_density_at(double t) const {
        return riesz_transform(measure_at(t), 1.0);
    }
    virtual double variance(double t) const { return covariance(t, t); }
};

inline double process_covariance(const MeasureFamily& family, double s, double t) {
    return family.covariance(s, t);
}

namespace detail {

inline SignedMeasure increment_measure(double t, int d) {
    // delta_{t e1} - delta_0
    Point p(d, 0.0);
    p[0] = t;
    return sum(SignedMeasure::delta(std::move(p)), SignedMeasure::delta(Point(d, 0.0), -1.0));
}

inline DensityComponent step_density(std::vector<double> breaks, std::vector<double> values) {
    // piecewise-constant density on [breaks.front(), breaks.back()]
    DensityComponent c;
    const double lo = breaks.front(), hi = breaks.back();
    c.evaluate = [breaks = std::move(breaks), values = std::move(values)](
                     std::span<const double> x) {
        const double v = x[0];
        if (v < breaks.front() || v > breaks.back()) return 0.0;
        for (std::size_t i = 1; i < breaks.size(); ++i)
            if (v <= breaks[i]) return values[i - 1];
        return 0.0;
    };
    c.support = Region::interval(lo, hi);
    return c;
}

}  // namespace detail

// fBm via the random-balls (Takenaka) route: mu_t = delta_t - delta_0 under
// the power-law kernel.  Covariance is normalized to the standard fBm form
// (1/2)(|s|^{2H}+|t|^{2H}-|s-t|^{2H}); the raw kernel functional equals -2x
// that value.
class TakenakaFBM final : public MeasureFamily {
  public:
    TakenakaFBM(double hurst, int d = 1) : h_(hurst), d_(d) {
        if (!(hurst > 0.0 && hurst < 0.5))
            throw ParameterOutOfRange("Takenaka representation needs 0 < H < 1/2");
        kernel_ = KernelSpec::power_law(2.0 * hurst, d);
    }
    std::string name() const override { return "fbm-takenaka"; }
    SignedMeasure measure_at(double t) const override { return detail::increment_measure(t, d_); }
    double covariance(double s, double t) const override {
        return -0.5 * covariance_functional(kernel_, measure_at(s), measure_at(t));
    }
    std::optional<int> membership_order() const override { return 1; }
    double hurst() const override { return h_; }

  private:
    double h_;
    int d_;
    KernelSpec kernel_;
};

// fBm via the fractional bridge pinning measure under the same kernel route.
class FractionalBridge final : public MeasureFamily {
  public:
    explicit FractionalBridge(double hurst) : h_(hurst) {
        if (!(hurst > 0.0 && hurst < 1.0)) throw ParameterOutOfRange("fractional bridge needs 0<H<1");
        kernel_ = KernelSpec::power_law(2.0 * hurst, 1);
    }
    std::string name() const override { return "frac-bridge"; }
    double pinning_coefficient(double t) const {
        return 0.5 * (1.0 + std::pow(t, 2.0 * h_) - std::pow(1.0 - t, 2.0 * h_));
    }
    SignedMeasure measure_at(double t) const override {
        const double a = pinning_coefficient(t);
        SignedMeasure m = SignedMeasure::delta1(t);
        m = sum(m, SignedMeasure::delta1(0.0, -(1.0 - a)));
        m = sum(m, SignedMeasure::delta1(1.0, -a));
        return m;
    }
    double covariance(double s, double t) const override {
        return -0.5 * covariance_functional(kernel_, measure_at(s), measure_at(t));
    }
    std::optional<int> membership_order() const override { return 1; }
    double hurst() const override { return h_; }
    double horizon() const override { return 1.0; }

  private:
    double h_;
    KernelSpec kernel_;
};

// Brownian motion as M_1((-Delta)^{-1/2}(delta_t - delta_0)); the Riesz
// density is the indicator of [0,t].
class BrownianMotion final : public MeasureFamily {
  public:
    std::string name() const override { return "bm"; }
    SignedMeasure measure_at(double t) const override { return detail::increment_measure(t, 1); }
    SignedMeasure riesz_density_at(double t) const override {
        if (t < 0.0) throw ParameterOutOfRange("bm extraction for t >= 0");
        SignedMeasure m;
        m.dimension = 1;
        if (t != 0.0) m.add_density(detail::step_density({0.0, t}, {1.0}));
        return m;
    }
    double covariance(double s, double t) const override {
        if (s < 0.0 || t < 0.0) throw ParameterOutOfRange("bm extraction for t >= 0");
        return std::min(s, t);
    }
    std::optional<int> membership_order() const override { return 1; }

  private:
};

// Brownian bridge on [0,T]: mu_t = delta_t - (1-t/T) delta_0 - (t/T) delta_T,
// Riesz density (1-t/T) 1_[0,t] - (t/T) 1_(t,T].
class BrownianBridge final : public MeasureFamily {
  public:
    explicit BrownianBridge(double T = 1.0) : T_(T) {
        if (!(T > 0.0)) throw ParameterOutOfRange("bridge horizon must be positive");
    }
    std::string name() const override { return "bb"; }
    SignedMeasure measure_at(double t) const override {
        const double w = t / T_;
        SignedMeasure m = SignedMeasure::delta1(t);
        m = sum(m, SignedMeasure::delta1(0.0, -(1.0 - w)));
        m = sum(m, SignedMeasure::delta1(T_, -w));
        return m;
    }
    SignedMeasure riesz_density_at(double t) const override {
        SignedMeasure m;
        m.dimension = 1;
        const double w = t / T_;
        if (t == 0.0 || t == T_) return m;
        m.add_density(detail::step_density({0.0, t, T_}, {1.0 - w, -w}));
        return m;
    }
    double covariance(double s, double t) const override {
        return whitenoise_inner(riesz_density_at(s), riesz_density_at(t));
    }
    std::optional<int> membership_order() const override { return 2; }
    double horizon() const override { return T_; }

  private:
    double T_;
};

// Riesz-route fBm on the line: mu_t = (-Delta)^{-m/2}(delta_t - delta_0) with
// m = H + 1/2 in (1/2, 1]; driven by M_1, so the covariance is the white-noise
// inner product of the Riesz densities.  m = 1 recovers Brownian motion.
class RieszFBM final : public MeasureFamily {
  public:
    explicit RieszFBM(double hurst) : h_(hurst), m_(hurst + 0.5) {
        if (!(hurst > 0.0 && hurst <= 0.5))
            throw ParameterOutOfRange("Riesz-route fBm implemented for 0 < H <= 1/2 (d=1)");
    }
    std::string name() const override { return "fbm-riesz"; }
    SignedMeasure measure_at(double t) const override {
        return riesz_density_at(t);  // the family emits the Riesz-transformed measure
    }
    SignedMeasure riesz_density_at(double t) const override {
        if (t == 0.0) return SignedMeasure::zero(1);
        return riesz_transform(detail::increment_measure(t, 1), m_);
    }
    double covariance(double s, double t) const override {
        if (s == 0.0 || t == 0.0) return 0.0;
        return whitenoise_inner(riesz_density_at(s), riesz_density_at(t), 1e-8);
    }
    std::optional<int> membership_order() const override { return 0; }
    double hurst() const override { return h_; }

  private:
    double h_;
    double m_;
};

// Well-balanced representation: X_t = int (|t-x|^{H-1/2} - |x|^{H-1/2}) M(dx).
class WellBalancedFBM final : public MeasureFamily {
  public:
    explicit WellBalancedFBM(double hurst) : h_(hurst) {
        if (!(hurst > 0.0 && hurst < 1.0) || hurst == 0.5)
            throw ParameterOutOfRange("well-balanced fBm needs H in (0,1)\\{1/2}");
    }
    std::string name() const override { return "fbm-wb"; }
    SignedMeasure measure_at(double t) const override {
        SignedMeasure m;
        m.dimension = 1;
        if (t == 0.0) return m;
        const double a = h_ - 0.5;
        DensityComponent c;
        c.evaluate = [t, a](std::span<const double> x) {
            return std::pow(std::abs(t - x[0]), a) - std::pow(std::abs(x[0]), a);
        };
        c.support = Region::all(1);
        if (a < 0.0) {
            c.singularities.push_back({{0.0}, -a});
            c.singularities.push_back({{t}, -a});
        } else {
            c.singularities.push_back({{0.0}, 0.0});
            c.singularities.push_back({{t}, 0.0});
        }
        c.decay_exponent = 1.5 - h_;  // difference decays like |x|^{H-3/2}
        c.requires_kernel_pairing = !(c.decay_exponent > 1.0);
        m.add_density(std::move(c));
        return m;
    }
    SignedMeasure riesz_density_at(double t) const override { return measure_at(t); }
    double covariance(double s, double t) const override {
        if (s == 0.0 || t == 0.0) return 0.0;
        return whitenoise_inner(measure_at(s), measure_at(t), 1e-9);
    }
    std::optional<int> membership_order() const override {
        return h_ < 0.5 ? std::optional<int>(0) : std::nullopt;
    }
    double hurst() const override { return h_; }

  private:
    double h_;
};

// Mandelbrot-van Ness: X_t = int ((t-x)_+^{H-1/2} - (-x)_+^{H-1/2}) M(dx).
class MandelbrotVanNess final : public MeasureFamily {
  public:
    explicit MandelbrotVanNess(double hurst) : h_(hurst) {
        if (!(hurst > 0.0 && hurst < 1.0) || hurst == 0.5)
            throw ParameterOutOfRange("Mandelbrot-van Ness needs H in (0,1)\\{1/2}");
    }
    std::string name() const override { return "fbm-mvn"; }
    SignedMeasure measure_at(double t) const override {
        SignedMeasure m;
        m.dimension = 1;
        if (t == 0.0) return m;
        const double a = h_ - 0.5;
        DensityComponent c;
        c.evaluate = [t, a](std::span<const double> x) {
            const double u = t - x[0], v = -x[0];
            const double lhs = u > 0.0 ? std::pow(u, a) : 0.0;
            const double rhs = v > 0.0 ? std::pow(v, a) : 0.0;
            return lhs - rhs;
        };
        c.support = Region::all(1);
        const double strength = a < 0.0 ? -a : 0.0;
        c.singularities.push_back({{0.0}, strength});
        c.singularities.push_back({{t}, strength});
        c.decay_exponent = 1.5 - h_;
        c.requires_kernel_pairing = !(c.decay_exponent > 1.0);
        m.add_density(std::move(c));
        return m;
    }
    SignedMeasure riesz_density_at(double t) const override { return measure_at(t); }
    double covariance(double s, double t) const override {
        if (s == 0.0 || t == 0.0) return 0.0;
        return whitenoise_inner(measure_at(s), measure_at(t), 1e-9);
    }
    std::optional<int> membership_order() const override {
        return h_ < 0.5 ? std::optional<int>(0) : std::nullopt;
    }
    double hurst() const override { return h_; }

  private:
    double h_;
};

// Gaussian Volterra process X_t = int_0^t K(t,x) M_1(dx).
class VolterraFamily final : public MeasureFamily {
  public:
    VolterraFamily(VolterraKernel k, std::string label, double horizon = quad::kInf)
        : k_(std::move(k)), label_(std::move(label)), horizon_(horizon) {}
    std::string name() const override { return label_; }
    SignedMeasure measure_at(double t) const override { return volterra_to_measure(k_, t); }
    SignedMeasure riesz_density_at(double t) const override {
        // the Riesz density of the Volterra measure is K(t, .) on (0,t]
        SignedMeasure m;
        m.dimension = 1;
        auto K = k_.K;
        DensityComponent c = density_1d([K, t](double x) { return K(t, x); },
                                        Region::interval(0.0, t));
        m.add_density(std::move(c));
        return m;
    }
    double covariance(double s, double t) const override {
        if (s <= 0.0 || t <= 0.0) return 0.0;
        // int_0^{s ^ t} K(s,x) K(t,x) dx
        quad::Options opt;
        opt.rel_tol = 1e-10;
        opt.abs_tol = 1e-15;
        const double m = std::min(s, t);
        auto K = k_.K;
        return quad::integrate([K, s, t](double x) { return K(s, x) * K(t, x); }, 0.0, m, opt);
    }
    std::optional<int> membership_order() const override { return 1; }
    double horizon() const override { return horizon_; }
    const VolterraKernel& kernel() const { return k_; }

  private:
    VolterraKernel k_;
    std::string label_;
    double horizon_;
};

inline VolterraKernel ou_kernel(double alpha, double sigma) {
    if (!(alpha > 0.0) || !(sigma > 0.0))
        throw ParameterOutOfRange("OU parameters must be positive");
    VolterraKernel k;
    k.K = [alpha, sigma](double t, double x) {
        return (x > 0.0 && x <= t) ? sigma * std::exp(alpha * (x - t)) : 0.0;
    };
    k.dK_dx = [alpha, sigma](double t, double x) { return alpha * sigma * std::exp(alpha * (x - t)); };
    k.right_limit_at_0 = [alpha, sigma](double t) { return sigma * std::exp(-alpha * t); };
    k.diagonal = [sigma](double) { return sigma; };
    return k;
}

// K(t,x) = ((1-t)/(1-x))^alpha on (0,t]; alpha=0 is Brownian motion and
// alpha=1 the Brownian bridge.
inline VolterraKernel alpha_bridge_kernel(double alpha) {
    if (alpha < 0.0) throw ParameterOutOfRange("alpha-bridge needs alpha >= 0");
    VolterraKernel k;
    k.K = [alpha](double t, double x) {
        return (x > 0.0 && x <= t) ? std::pow((1.0 - t) / (1.0 - x), alpha) : 0.0;
    };
    k.dK_dx = [alpha](double t, double x) {
        return alpha * std::pow(1.0 - t, alpha) * std::pow(1.0 - x, -alpha - 1.0);
    };
    k.right_limit_at_0 = [alpha](double t) { return std::pow(1.0 - t, alpha); };
    k.diagonal = [](double) { return 1.0; };
    return k;
}

// ------------------------------------------------------------------
// generalized bridges

struct ConditioningMeasure {
    SignedMeasure a;  // signed measure on [0,T]
    double horizon = 1.0;
};

// X^{(a)}_t = X_t - f(t) a(X), realized on measures as
// mu_t^{(a)} = mu_t - f(t) int_0^T mu_s a(ds).  Atoms of `a` contribute
// exactly; the density part is discretized by a 64-node Gauss-Legendre
// superposition of measures.
class GeneralizedBridge final : public MeasureFamily {
  public:
    GeneralizedBridge(std::shared_ptr<const MeasureFamily> base, ConditioningMeasure a,
                      std::function<double(double)> f, std::string label = "gen-bridge")
        : base_(std::move(base)), a_(std::move(a)), f_(std::move(f)), label_(std::move(label)) {
        build_combination();
    }
    std::string name() const override { return label_; }
    SignedMeasure measure_at(double t) const override {
        return sum(base_->measure_at(t), scaled(combo_measure_, -f_(t)));
    }
    SignedMeasure riesz_density_at(double t) const override {
        return sum(base_->riesz_density_at(t), scaled(combo_riesz_, -f_(t)));
    }
    double covariance(double s, double t) const override {
        return whitenoise_inner(riesz_density_at(s), riesz_density_at(t));
    }
    std::optional<int> membership_order() const override { return base_->membership_order(); }
    double horizon() const override { return a_.horizon; }

  private:
    void build_combination() {
        combo_measure_ = SignedMeasure::zero(1);
        combo_riesz_ = SignedMeasure::zero(1);
        for (const auto& atom : a_.a.atoms) {
            combo_measure_ = sum(combo_measure_, scaled(base_->measure_at(atom.location[0]), atom.weight));
            combo_riesz_ = sum(combo_riesz_, scaled(base_->riesz_density_at(atom.location[0]), atom.weight));
        }
        if (!a_.a.densities.empty()) {
            const auto gl = quad::gauss_legendre_on(64, 0.0, a_.horizon);
            for (int i = 0; i < 64; ++i) {
                const double s = gl.nodes[i];
                const double w = gl.weights[i] * density_value1(a_.a, s);
                if (w == 0.0) continue;
                combo_measure_ = sum(combo_measure_, scaled(base_->measure_at(s), w));
                combo_riesz_ = sum(combo_riesz_, scaled(base_->riesz_density_at(s), w));
            }
        }
    }

    std::shared_ptr<const MeasureFamily> base_;
    ConditioningMeasure a_;
    std::function<double(double)> f_;
    std::string label_;
    SignedMeasure combo_measure_;
    SignedMeasure combo_riesz_;
};

inline SignedMeasure generalized_bridge_measure(const MeasureFamily& base,
                                                const ConditioningMeasure& a,
                                                const std::function<double(double)>& f,
                                                double t) {
    // one-shot form of the family above
    SignedMeasure combo = SignedMeasure::zero(1);
    for (const auto& atom : a.a.atoms)
        combo = sum(combo, scaled(base.measure_at(atom.location[0]), atom.weight));
    if (!a.a.densities.empty()) {
        const auto gl = quad::gauss_legendre_on(64, 0.0, a.horizon);
        for (int i = 0; i < 64; ++i) {
            const double w = gl.weights[i] * density_value1(a.a, gl.nodes[i]);
            if (w != 0.0) combo = sum(combo, scaled(base.measure_at(gl.nodes[i]), w));
        }
    }
    return sum(base.measure_at(t), scaled(combo, -f(t)));
}

// Zero-area Brownian bridge: the bridge conditioned on vanishing Lebesgue
// integral, a(dt) = dt, f(t) = 6t(1-t).  Ships with the exact measure
//   mu_t = delta_t - (1-4t+3t^2) delta_0 + (2t-3t^2) delta_1 + 6(t^2-t) Leb,
// which lies in M_3.
class ZeroAreaBridge final : public MeasureFamily {
  public:
    std::string name() const override { return "zero-area-bb"; }
    SignedMeasure measure_at(double t) const override {
        SignedMeasure m = SignedMeasure::delta1(t);
        m = sum(m, SignedMeasure::delta1(0.0, -(1.0 - 4.0 * t + 3.0 * t * t)));
        m = sum(m, SignedMeasure::delta1(1.0, 2.0 * t - 3.0 * t * t));
        if (t != 0.0 && t != 1.0) m.add_density(lebesgue_on(0.0, 1.0, 6.0 * (t * t - t)));
        return m;
    }
    SignedMeasure riesz_density_at(double t) const override {
        SignedMeasure m;
        m.dimension = 1;
        if (t == 0.0 || t == 1.0) return m;
        DensityComponent c;
        c.evaluate = [t](std::span<const double> xs) {
            const double x = xs[0];
            if (x < 0.0 || x > 1.0) return 0.0;
            double v = (x <= t ? 1.0 : 0.0);
            v += 2.0 * t - 3.0 * t * t;
            v += 6.0 * (t * t - t) * (1.0 - x);
            return v;
        };
        c.support = Region::interval(0.0, 1.0);
        c.singularities.push_back({{t}, 0.0});  // jump of the indicator part
        m.add_density(std::move(c));
        return m;
    }
    double covariance(double s, double t) const override {
        return whitenoise_inner(riesz_density_at(s), riesz_density_at(t));
    }
    std::optional<int> membership_order() const override { return 3; }
    double horizon() const override { return 1.0; }
};

// ------------------------------------------------------------------
// registry of named presets

inline std::shared_ptr<const MeasureFamily> make_family(
    const std::string& preset, const std::map<std::string, double>& params = {}) {
    auto get = [&](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (preset == "bm") return std::make_shared<BrownianMotion>();
    if (preset == "bb") return std::make_shared<BrownianBridge>(get("T", 1.0));
    if (preset == "zero-area-bb") return std::make_shared<ZeroAreaBridge>();
    if (preset == "fbm-takenaka")
        return std::make_shared<TakenakaFBM>(get("H", 0.25), static_cast<int>(get("d", 1)));
    if (preset == "fbm-wb") return std::make_shared<WellBalancedFBM>(get("H", 0.25));
    if (preset == "fbm-mvn") return std::make_shared<MandelbrotVanNess>(get("H", 0.25));
    if (preset == "fbm-riesz") return std::make_shared<RieszFBM>(get("H", 0.5));
    if (preset == "frac-bridge") return std::make_shared<FractionalBridge>(get("H", 0.25));
    if (preset == "ou")
        return std::make_shared<VolterraFamily>(ou_kernel(get("alpha", 1.0), get("sigma", 1.0)),
                                                "ou");
    if (preset == "alpha-bridge")
        return std::make_shared<VolterraFamily>(alpha_bridge_kernel(get("alpha", 1.0)),
                                                "alpha-bridge", 1.0);
    throw ParameterOutOfRange("unknown process preset: " + preset);
}

inline std::vector<std::string> family_presets() {
    return {"bm",      "bb",      "zero-area-bb", "fbm-takenaka", "fbm-wb",
            "fbm-mvn", "fbm-riesz", "frac-bridge",  "ou",           "alpha-bridge"};
}

// fbm_measure: the indexing measure of an fBm representation at time t.
inline SignedMeasure fbm_measure(const std::string& variant, double hurst, double t, int d = 1) {
    if (variant == "takenaka") return TakenakaFBM(hurst, d).measure_at(t);
    if (variant == "riesz") return RieszFBM(hurst).measure_at(t);
    if (variant == "well-balanced") return WellBalancedFBM(hurst).measure_at(t);
    if (variant == "mandelbrot-van-ness") return MandelbrotVanNess(hurst).measure_at(t);
    throw ParameterOutOfRange("unknown fbm variant: " + variant);
}

}  // namespace selfsim
