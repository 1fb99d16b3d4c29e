#include <catch_amalgamated.hpp>

#include <cmath>

#include "selfsim/membrane.hpp"

using namespace selfsim;

TEST_CASE("domain geometry") {
    DomainSpec I = DomainSpec::interval(1.0);
    CHECK(I.boundary_distance(Point{0.3}) == Catch::Approx(0.3));
    CHECK(I.sup_inradius() == Catch::Approx(0.5));
    CHECK_FALSE(I.interior(Point{0.0}));

    DomainSpec B = DomainSpec::ball({0.0, 0.0}, 1.0);
    CHECK(B.boundary_distance(Point{0.5, 0.0}) == Catch::Approx(0.5));
    CHECK(B.inradius_at(Point{0.5, 0.0}) == Catch::Approx(0.5));
    auto nb = B.nearest_boundary(Point{0.5, 0.0});
    CHECK(nb[0] == Catch::Approx(1.0));

    DomainSpec X = DomainSpec::box({0.0, 0.0}, {2.0, 1.0});
    CHECK(X.sup_inradius() == Catch::Approx(0.5));
    CHECK(X.boundary_distance(Point{1.0, 0.5}) == Catch::Approx(0.5));
}

TEST_CASE("harmonic measure on an interval") {
    DomainSpec I = DomainSpec::interval(1.0);
    auto w = harmonic_measure(I, {0.3});
    REQUIRE(w.nodes.size() == 2);
    CHECK(w.nodes[0].weight == Catch::Approx(0.7));
    CHECK(w.nodes[1].weight == Catch::Approx(0.3));
    CHECK(w.total_weight() == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(w.mean()[0] == Catch::Approx(0.3).epsilon(1e-14));  // u(t)=t is harmonic
    CHECK_THROWS_AS(harmonic_measure(I, {0.0}), BoundaryPoint);
}

TEST_CASE("harmonic measure on the disk") {
    DomainSpec B = DomainSpec::ball({0.0, 0.0}, 1.0);
    // at the center: uniform weights
    auto wc = harmonic_measure(B, {0.0, 0.0}, 64);
    for (const auto& n : wc.nodes) CHECK(n.weight == Catch::Approx(1.0 / 64.0).epsilon(1e-12));
    // off-center: mass 1, mean-value property
    auto w = harmonic_measure(B, {0.5, 0.0}, 256);
    CHECK(w.total_weight() == Catch::Approx(1.0).epsilon(1e-13));
    auto m = w.mean();
    CHECK(m[0] == Catch::Approx(0.5).margin(1e-9));
    CHECK(m[1] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("harmonic measure on a 3d ball keeps the mean-value property") {
    DomainSpec B = DomainSpec::ball({0.0, 0.0, 0.0}, 2.0);
    auto w = harmonic_measure(B, {0.4, -0.3, 0.5}, 1024);
    CHECK(w.total_weight() == Catch::Approx(1.0).epsilon(1e-13));
    auto m = w.mean();
    CHECK(m[0] == Catch::Approx(0.4).margin(1e-8));
    CHECK(m[1] == Catch::Approx(-0.3).margin(1e-8));
    CHECK(m[2] == Catch::Approx(0.5).margin(1e-8));
}

TEST_CASE("walk on spheres agrees with the Poisson kernel") {
    DomainSpec B = DomainSpec::ball({0.0, 0.0}, 1.0);
    const Point t{0.5, 0.0};
    auto emp = harmonic_measure_wos(B, t, 100000, 1e-6, 2024);
    CHECK(emp.total_weight() == Catch::Approx(1.0).epsilon(1e-12));
    // oracle: quadrature of y_1 against the Poisson kernel = first coordinate
    double mean1 = 0.0, var1 = 0.0;
    for (const auto& n : emp.nodes) mean1 += n.weight * n.location[0];
    for (const auto& n : emp.nodes)
        var1 += n.weight * (n.location[0] - mean1) * (n.location[0] - mean1);
    const double se = std::sqrt(var1 / static_cast<double>(emp.nodes.size()));
    CHECK(std::abs(mean1 - 0.5) < 3.0 * se);

    // interval exit probabilities: P(exit right) = t
    DomainSpec I = DomainSpec::interval(1.0);
    auto e1 = harmonic_measure_wos(I, {0.25}, 50000, 1e-9, 7);
    double right = 0.0;
    for (const auto& n : e1.nodes)
        if (n.location[0] > 0.5) right += n.weight;
    CHECK(right == Catch::Approx(0.25).margin(0.01));
}

TEST_CASE("soft membrane covariance in one dimension") {
    DomainSpec I = DomainSpec::interval(1.0);
    const double hurst = 0.25;
    // closed form from the 3-atom expansion:
    // Var = 2(1-t) t^{2H} + 2t(1-t)^{2H} - 2t(1-t)
    auto exact_var = [&](double t) {
        return 2.0 * (1.0 - t) * std::pow(t, 0.5) + 2.0 * t * std::pow(1.0 - t, 0.5) -
               2.0 * t * (1.0 - t);
    };
    for (double t : {0.2, 0.5, 0.8}) {
        const double v = soft_membrane_covariance(I, hurst, {t}, {t});
        CHECK(v == Catch::Approx(exact_var(t)).epsilon(1e-12));
        CHECK(v >= 0.0);
    }
    CHECK_THROWS_AS(soft_membrane_covariance(I, 0.25, {0.0}, {0.5}), BoundaryPoint);
    CHECK_THROWS_AS(soft_membrane_covariance(I, 0.8, {0.3}, {0.5}), ParameterOutOfRange);
    CHECK_THROWS_AS(soft_membrane_covariance(I, 0.5, {0.3}, {0.5}), DimensionUnsupported);
}

TEST_CASE("soft membrane variance vanishes toward the boundary (disk)") {
    DomainSpec B = DomainSpec::ball({0.0, 0.0}, 1.0);
    double prev = quad::kInf;
    for (int k = 1; k <= 5; ++k) {
        const double r = 1.0 - std::pow(2.0, -k);
        const double v = soft_membrane_covariance(B, 0.25, {r, 0.0}, {r, 0.0});
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("soft membrane H=1/2 form on the disk") {
    DomainSpec B = DomainSpec::ball({0.0, 0.0}, 1.0);
    SoftMembraneOptions opt;
    opt.ball_nodes = 24;
    opt.rel_tol = 1e-3;
    const double v_mid = soft_membrane_covariance(B, 0.5, {0.0, 0.0}, {0.0, 0.0}, opt);
    CHECK(v_mid > 0.0);
    const double v_edge = soft_membrane_covariance(B, 0.5, {0.9, 0.0}, {0.9, 0.0}, opt);
    CHECK(v_edge > 0.0);
    CHECK(v_edge < v_mid);
}

TEST_CASE("hard membrane closed form on the interval") {
    DomainSpec I = DomainSpec::interval(1.0);
    // beta = -1 is the classical bridge: Cov = (1/2) s^t (1 - s v t)
    CHECK(hard_membrane_covariance(I, -1.0, {0.25}, {0.5}) ==
          Catch::Approx(0.5 * 0.25 * 0.5).epsilon(1e-13));
    // boundary points carry no covering ball
    CHECK(hard_membrane_covariance(I, 0.5, {0.0}, {0.3}) == Catch::Approx(0.0).margin(1e-14));
    CHECK(hard_membrane_covariance(I, 0.5, {1.0}, {1.0}) == Catch::Approx(0.0).margin(1e-14));
    // beta = 0.5, s=t=1/2: 4 sqrt(2) (sqrt(2) - 1)
    CHECK(hard_membrane_covariance(I, 0.5, {0.5}, {0.5}) ==
          Catch::Approx(4.0 * std::sqrt(2.0) * (std::sqrt(2.0) - 1.0)).epsilon(1e-13));
    CHECK_THROWS_AS(hard_membrane_covariance(I, 1.5, {0.5}, {0.5}), ParameterOutOfRange);

    // independent oracle for the beta=0.5 variance: brute 2D quadrature of
    // int int 1(x-u < 1/2 < x+u, 0 < x-u, x+u < 1) u^{-1.5} du dx
    quad::Options qo;
    qo.rel_tol = 1e-9;
    const double brute = quad::integrate_with_singularities(
        [&](double x) {
            const double u0 = std::abs(x - 0.5);
            const double u1 = std::min(x, 1.0 - x);
            if (u1 <= u0) return 0.0;
            return quad::integrate([](double u) { return std::pow(u, -1.5); }, u0, u1, qo);
        },
        0.0, 1.0, {{0.5, 0.5}}, qo);
    CHECK(hard_membrane_covariance(I, 0.5, {0.5}, {0.5}) == Catch::Approx(brute).epsilon(1e-6));
}

TEST_CASE("hard membrane closed form vs the general cubature") {
    DomainSpec I = DomainSpec::interval(1.0);
    for (double beta : {-1.0, 0.0, 0.5}) {
        for (double s : {0.1, 0.3, 0.5, 0.7, 0.9})
            for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
                const double exact = hard_membrane_covariance(I, beta, {s}, {t});
                const double numeric = hard_membrane_covariance(I, beta, {s}, {t}, true, 1e-8);
                CHECK(numeric == Catch::Approx(exact).epsilon(1e-5).margin(1e-12));
            }
    }
}

TEST_CASE("hard membrane symmetry and independence at distance") {
    DomainSpec I = DomainSpec::interval(1.0);
    CHECK(hard_membrane_covariance(I, 0.5, {0.2}, {0.7}) ==
          Catch::Approx(hard_membrane_covariance(I, 0.5, {0.7}, {0.2})).epsilon(1e-14));
    // no admissible ball covers points further apart than the diameter of the
    // largest inscribed ball: in a long thin box that bites early
    DomainSpec slab = DomainSpec::box({0.0, 0.0}, {2.0, 1.0});
    CHECK(hard_membrane_covariance(slab, 0.5, {0.2, 0.5}, {1.8, 0.5}) == 0.0);
    CHECK(hard_membrane_covariance(slab, 0.5, {0.9, 0.5}, {1.1, 0.5}) > 0.0);

    DomainSpec B = DomainSpec::ball({0.0, 0.0}, 1.0);
    const double v = hard_membrane_covariance(B, 0.5, {0.3, 0.0}, {-0.2, 0.1});
    CHECK(v > 0.0);
    CHECK(hard_membrane_covariance(B, 0.5, {-0.2, 0.1}, {0.3, 0.0}) ==
          Catch::Approx(v).epsilon(1e-9));
}

TEST_CASE("tangent scaling regimes") {
    auto s1 = tangent_scaling(0.5, 1, 0.01);
    CHECK(s1.tau == Catch::Approx(std::pow(0.01, -0.25)).epsilon(1e-14));
    CHECK(s1.hurst == Catch::Approx(0.25));
    auto s2 = tangent_scaling(1.0, 2, std::exp(-1.0));
    CHECK(s2.tau == Catch::Approx(std::exp(0.5)).epsilon(1e-14));
    CHECK(s2.hurst == Catch::Approx(0.5));
    auto s3 = tangent_scaling(-1.0, 1, 0.3);
    CHECK(s3.tau == Catch::Approx(std::pow(0.3, -0.5)).epsilon(1e-14));
    CHECK(s3.hurst == Catch::Approx(0.5));
    CHECK_THROWS_AS(tangent_scaling(1.5, 1, 0.1), ParameterOutOfRange);
}

TEST_CASE("tangent field check recovers the local exponent") {
    DomainSpec I = DomainSpec::interval(1.0);
    std::vector<double> eps;
    for (int k = 6; k <= 12; ++k) eps.push_back(std::pow(2.0, -k));
    auto r1 = tangent_field_check(I, 0.5, {0.5}, {1.0}, {0.5}, eps);
    CHECK(std::abs(r1.h_hat - 0.25) <= 0.01);
    CHECK(r1.shape_max_rel_err < 0.02);
    auto r2 = tangent_field_check(I, -1.0, {0.5}, {1.0}, {0.5}, eps);
    CHECK(std::abs(r2.h_hat - 0.5) <= 0.01);
    CHECK_THROWS_AS(tangent_field_check(I, 0.5, {0.5}, {1.0}, {0.5}, {0.4}), ScaleOutOfDomain);
}

TEST_CASE("y_beta complement identity") {
    DomainSpec I = DomainSpec::interval(1.0);
    // beta=0.5, T=1, s=t=1: 2^{0.5}/0.25 * C(1,1) = 8 sqrt(2)
    CHECK(ybeta_covariance(0.5, 1.0, 1.0, 1.0) ==
          Catch::Approx(8.0 * std::sqrt(2.0)).epsilon(1e-13));
    CHECK(ybeta_covariance(0.5, 1.0, 0.0, 0.7) == Catch::Approx(0.0).margin(1e-14));
    CHECK_THROWS_AS(ybeta_covariance(1.5, 1.0, 0.5, 0.5), ParameterOutOfRange);

    // W_beta + Y_beta has the fBm combination covariance
    for (double beta : {0.25, 0.5, 0.75}) {
        const double pref = std::pow(2.0, beta) / (beta * (1.0 - beta));
        for (double s : {0.2, 0.5, 0.9})
            for (double t : {0.3, 0.5, 1.0}) {
                const double e = 1.0 - beta;
                const double cb =
                    std::pow(s, e) + std::pow(t, e) - std::pow(std::abs(s - t), e);
                const double total = hard_membrane_covariance(I, beta, {s}, {t}) +
                                     ybeta_covariance(beta, 1.0, s, t);
                CHECK(total == Catch::Approx(pref * cb).margin(1e-10));
            }
    }

    // oracle for Var Y_beta(1): (2^b/b) int_0^1 (x^{-b} + (1-x)^{-b}) dx
    quad::Options qo;
    qo.rel_tol = 1e-11;
    const double beta = 0.5;
    const double direct =
        std::pow(2.0, beta) / beta *
        quad::integrate_with_singularities(
            [beta](double x) { return std::pow(x, -beta) + std::pow(1.0 - x, -beta); }, 0.0, 1.0,
            {{0.0, beta}, {1.0, beta}}, qo);
    CHECK(ybeta_covariance(beta, 1.0, 1.0, 1.0) == Catch::Approx(direct).epsilon(1e-7));
}
