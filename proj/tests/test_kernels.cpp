#include <catch_amalgamated.hpp>

#include <cmath>

#include "selfsim/kernel.hpp"
#include "selfsim/rng.hpp"

using namespace selfsim;

namespace {

SignedMeasure increment(double t, double origin_weight = -1.0) {
    return sum(SignedMeasure::delta1(t), SignedMeasure::delta1(0.0, origin_weight));
}

}  // namespace

TEST_CASE("ball intersection volume") {
    CHECK(ball_intersection_volume(1.0, 1) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(ball_intersection_volume(0.0, 2) == Catch::Approx(std::acos(-1.0)).epsilon(1e-13));
    CHECK(ball_intersection_volume(2.5, 1) == 0.0);
    CHECK(ball_intersection_volume(2.5, 7) == 0.0);
    CHECK(ball_intersection_volume(2.0, 3) == Catch::Approx(0.0).margin(1e-14));
    // V(0) = v_d, nonincreasing and continuous on [0,2]
    for (int d = 1; d <= 4; ++d) {
        CHECK(ball_intersection_volume(0.0, d) == Catch::Approx(unit_ball_volume(d)).epsilon(1e-10));
        double prev = ball_intersection_volume(0.0, d);
        for (int i = 1; i <= 100; ++i) {
            const double u = 2.0 * i / 100.0;
            const double v = ball_intersection_volume(u, d);
            CHECK(v <= prev + 1e-12);
            CHECK(std::abs(v - ball_intersection_volume(u - 1e-9, d)) < 1e-6);
            prev = v;
        }
    }
}

TEST_CASE("kernel spec invariants") {
    CHECK_THROWS_AS(KernelSpec::power_law(0.0, 1), ParameterOutOfRange);
    CHECK_THROWS_AS(KernelSpec::power_law(2.0, 1), ParameterOutOfRange);
    CHECK_THROWS_AS(KernelSpec::power_law(-1.2, 1), ParameterOutOfRange);
    CHECK_NOTHROW(KernelSpec::power_law(-0.8, 1));
    CHECK_THROWS_AS(KernelSpec::product({{1, 1.5}}), ParameterOutOfRange);
    CHECK_NOTHROW(KernelSpec::product({{1, -0.5}, {1, 0.5}}));
}

TEST_CASE("covariance functional on atom pairs (free field)") {
    // 2H = 1, d = 1: functional = |s-t| - |s| - |t| = -2 min(s,t)
    KernelSpec k = KernelSpec::power_law(1.0, 1);
    const double v = covariance_functional(k, increment(1.0), increment(2.0));
    CHECK(v == Catch::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("covariance functional preconditions") {
    KernelSpec k = KernelSpec::power_law(1.0, 1);
    // nonzero total mass violates the M_1 requirement for 0 < 2H < 2
    CHECK_THROWS_AS(covariance_functional(k, SignedMeasure::delta1(1.0), increment(1.0)),
                    PreconditionViolation);
    // singular kernel rejects shared atoms
    KernelSpec ks = KernelSpec::power_law(-0.8, 1);
    CHECK_THROWS_AS(covariance_functional(ks, increment(1.0), increment(2.0)),
                    PreconditionViolation);
    // log kernel: shared atom at the origin diverges
    KernelSpec kl = KernelSpec::log2d();
    SignedMeasure a = sum(SignedMeasure::delta(Point{1.0, 0.0}),
                          SignedMeasure::delta(Point{0.0, 0.0}, -1.0));
    SignedMeasure b = sum(SignedMeasure::delta(Point{0.0, 1.0}),
                          SignedMeasure::delta(Point{0.0, 0.0}, -1.0));
    CHECK_THROWS_AS(covariance_functional(kl, a, b), PreconditionViolation);
    // distinct atoms are fine
    SignedMeasure c = sum(SignedMeasure::delta(Point{0.0, 1.0}),
                          SignedMeasure::delta(Point{0.5, 0.5}, -1.0));
    CHECK_NOTHROW(covariance_functional(kl, a, c));
}

TEST_CASE("singular kernel on the unit disk against a Monte Carlo oracle") {
    // 2H = -1, d = 2, uniform unit-mass density on the disk
    KernelSpec k = KernelSpec::power_law(-1.0, 2);
    const double pi = std::acos(-1.0);
    SignedMeasure disk;
    disk.dimension = 2;
    DensityComponent c;
    c.evaluate = [pi](std::span<const double>) { return 1.0 / pi; };
    c.support = Region::ball({0.0, 0.0}, 1.0);
    c.abs_integral = 1.0;
    disk.add_density(std::move(c));
    const double v = covariance_functional(k, disk, disk, 1e-6);
    CHECK(v > 0.0);
    CHECK(std::isfinite(v));

    // oracle: mean inverse distance of uniform disk pairs, 1e6 pairs
    const long n = 1000000;
    double s = 0.0, s2 = 0.0;
    for (long i = 0; i < n; ++i) {
        double p[4];
        for (int q = 0; q < 4; ++q) p[q] = rng::uniform(42, i, q);
        // rejection-free: sqrt radius trick
        const double r1 = std::sqrt(p[0]), a1 = 2.0 * pi * p[1];
        const double r2 = std::sqrt(p[2]), a2 = 2.0 * pi * p[3];
        const double dx = r1 * std::cos(a1) - r2 * std::cos(a2);
        const double dy = r1 * std::sin(a1) - r2 * std::sin(a2);
        const double inv = 1.0 / std::hypot(dx, dy);
        s += inv;
        s2 += inv * inv;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(v - mean) < 3.0 * se + 1e-5 * mean);
}

TEST_CASE("fbm extraction from the power-law kernel") {
    KernelSpec k = KernelSpec::power_law(1.0, 1);  // H = 1/2
    CHECK(fbm_from_powerlaw(k, {1.0}, {2.0}) == Catch::Approx(2.0).epsilon(1e-14));
    KernelSpec kq = KernelSpec::power_law(0.5, 1);  // H = 1/4
    CHECK(fbm_from_powerlaw(kq, {1.0}, {1.0}) == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(fbm_from_powerlaw(kq, {0.0}, {0.0}) == 0.0);
}

TEST_CASE("second-order self-similarity under dilation") {
    // atomic pair, H = 0.25
    KernelSpec k = KernelSpec::power_law(0.5, 1);
    SignedMeasure mu = increment(1.3);
    const double base = covariance_functional(k, mu, mu);
    for (double c : {0.5, 2.0, 10.0}) {
        SignedMeasure muc = dilate(mu, c);
        CHECK(covariance_functional(k, muc, muc) ==
              Catch::Approx(std::pow(c, 0.5) * base).epsilon(1e-12));
    }
    // density measure, H = -0.4
    KernelSpec ks = KernelSpec::power_law(-0.8, 1);
    SignedMeasure leb;
    leb.dimension = 1;
    leb.add_density(lebesgue_on(0.0, 1.0, 1.0));
    const double base2 = covariance_functional(ks, leb, leb);
    CHECK(base2 == Catch::Approx(2.0 * (5.0 - 1.0 / 1.2)).epsilon(1e-9));
    for (double c : {0.5, 2.0, 10.0}) {
        SignedMeasure lc = dilate(leb, c);
        CHECK(covariance_functional(ks, lc, lc) ==
              Catch::Approx(std::pow(c, -0.8) * base2).epsilon(1e-8));
    }
}

TEST_CASE("shot-noise kernel for the ball pulse") {
    // d=1, beta=1.5 (first range): K_h = int_0^inf u^{-1.5} V(1/u) du = (8/3) sqrt(2)
    PulseFunction ball = PulseFunction::ball_indicator(1);
    const double k1 = kernel_Kh(ball, 1.5, 1);
    CHECK(k1 == Catch::Approx(8.0 * std::sqrt(2.0) / 3.0).epsilon(1e-9));
    // independent oracle: quadrature in the original u variable
    quad::Options opt;
    opt.rel_tol = 1e-10;
    const double oracle = quad::integrate(
        [](double u) { return std::pow(u, -1.5) * ball_intersection_volume(1.0 / u, 1); }, 0.5,
        1e6, opt);
    CHECK(k1 == Catch::Approx(oracle).epsilon(1e-6));

    // d=1, beta=0.5 (second range, increment form): -4 sqrt(2)
    const double k2 = kernel_Kh(ball, 0.5, 1);
    CHECK(k2 == Catch::Approx(-4.0 * std::sqrt(2.0)).epsilon(1e-9));

    CHECK_THROWS_AS(kernel_Kh(PulseFunction::singular(1.5, 1), 1.5, 1), NonAdmissible);
    CHECK_THROWS_AS(kernel_Kh(ball, 1.0, 1), ParameterOutOfRange);
}

TEST_CASE("shot-noise kernel is isotropic for radial pulses") {
    PulseFunction g = PulseFunction::radial_gaussian(1.0, 2);
    const double pi = std::acos(-1.0);
    double ref = kernel_Kh(g, 3.0, 2, {1.0, 0.0});
    for (int i = 1; i < 8; ++i) {
        const double th = 2.0 * pi * i / 8.0;
        const double v = kernel_Kh(g, 3.0, 2, {std::cos(th), std::sin(th)});
        CHECK(std::abs(v - ref) <= 1e-6 * std::abs(ref));
    }
}

TEST_CASE("random-balls reduction scales like r^{d-beta}") {
    // int_0^inf u^d V(r/u) u^{-beta-1} du = const r^{d-beta} for d=1, beta=1.5
    quad::Options opt;
    opt.rel_tol = 1e-10;
    auto eval = [&](double r) {
        return quad::integrate(
            [r](double u) { return std::pow(u, -1.5) * ball_intersection_volume(r / u, 1); },
            r / 2.0, 1e7 * r, opt);
    };
    const double c1 = eval(1.0) / std::pow(1.0, -0.5);
    for (double r : {0.5, 2.0}) {
        const double c = eval(r) / std::pow(r, -0.5);
        CHECK(c == Catch::Approx(c1).epsilon(1e-6));
    }
}

TEST_CASE("product kernels on product measures") {
    KernelSpec k = KernelSpec::product({{1, -0.5}, {1, -0.5}});  // beta_i = 1.5
    SignedMeasure leb1;
    leb1.dimension = 1;
    leb1.add_density(lebesgue_on(0.0, 1.0, 1.0));
    ProductMeasure mu{{leb1, leb1}};
    const double v = product_covariance(k, mu, mu);
    CHECK(v == Catch::Approx((8.0 / 3.0) * (8.0 / 3.0)).epsilon(1e-8));

    // closed form per block: (t^{3-b}+s^{3-b}-|t-s|^{3-b})/((2-b)(3-b)), b=1.5
    auto block_closed = [](double s, double t) {
        const double e = 1.5;
        return (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e)) / (0.5 * 1.5);
    };
    SignedMeasure leb_half;
    leb_half.dimension = 1;
    leb_half.add_density(lebesgue_on(0.0, 0.5, 1.0));
    ProductMeasure nu{{leb_half, leb1}};
    const double v2 = product_covariance(k, mu, nu);
    CHECK(v2 == Catch::Approx(block_closed(0.5, 1.0) * block_closed(1.0, 1.0)).epsilon(1e-8));

    // an empty block factor vanishes
    SignedMeasure empty;
    empty.dimension = 1;
    ProductMeasure zero{{empty, leb1}};
    CHECK(product_covariance(k, mu, zero) == 0.0);

    // block separability is the construction itself
    KernelSpec b = KernelSpec::power_law(-0.5, 1);
    const double per_block = covariance_functional(b, leb1, leb1, 1e-9);
    CHECK(v == Catch::Approx(per_block * per_block).epsilon(1e-9));

    // general measures are rejected under product kernels
    CHECK_THROWS_AS(covariance_functional(k, leb1, leb1), PreconditionViolation);
}
