#include <catch_amalgamated.hpp>

#include <cmath>

#include "selfsim/montecarlo.hpp"
#include "selfsim/process.hpp"

using namespace selfsim;

namespace {

std::vector<Point> grid1(std::initializer_list<double> ts) {
    std::vector<Point> g;
    for (double t : ts) g.push_back({t});
    return g;
}

std::vector<double> fbm_matrix(double hurst, const std::vector<Point>& grid) {
    auto pw = [hurst](double r) { return r == 0.0 ? 0.0 : std::pow(std::abs(r), 2.0 * hurst); };
    const std::size_t K = grid.size();
    std::vector<double> m(K * K);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            const double s = grid[i][0], t = grid[j][0];
            m[i * K + j] = 0.5 * (pw(s) + pw(t) - pw(s - t));
        }
    return m;
}

}  // namespace

TEST_CASE("philox stream properties") {
    // determinism and crude moment sanity
    CHECK(rng::normal(1, 2, 3) == rng::normal(1, 2, 3));
    CHECK(rng::normal(1, 2, 3) != rng::normal(1, 2, 4));
    CHECK(rng::normal(1, 2, 3) != rng::normal(2, 2, 3));
    const long n = 200000;
    double s = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (long i = 0; i < n; ++i) {
        const double x = rng::normal(99, 0, i);
        s += x;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(s2 / n == Catch::Approx(1.0).margin(0.02));
    CHECK(std::abs(s3 / n) < 0.03);
    CHECK(s4 / n == Catch::Approx(3.0).margin(0.1));
}

TEST_CASE("empirical covariance estimator") {
    // constant paths: moment v^2, but SE needs n >= 2
    PathSample p;
    p.grid = grid1({1.0});
    p.n_paths = 4;
    p.values = {2.0, 2.0, 2.0, 2.0};
    auto e = empirical_covariance(p);
    CHECK(e.at(0, 0) == Catch::Approx(4.0));
    PathSample single;
    single.grid = grid1({1.0});
    single.n_paths = 1;
    single.values = {1.0};
    CHECK_THROWS_AS(empirical_covariance(single), ParameterOutOfRange);

    // independent standard normals: diagonal near 1 within 3 SE
    PathSample q;
    q.grid = grid1({0.0, 1.0});
    q.n_paths = 100000;
    q.values.resize(2 * q.n_paths);
    for (long i = 0; i < q.n_paths; ++i) {
        q.values[2 * i] = rng::normal(5, 0, i);
        q.values[2 * i + 1] = rng::normal(5, 1, i);
    }
    auto eq = empirical_covariance(q);
    CHECK(std::abs(eq.at(0, 0) - 1.0) < 3.0 * eq.se(0, 0));
    CHECK(std::abs(eq.at(1, 1) - 1.0) < 3.0 * eq.se(1, 1));
    CHECK(std::abs(eq.at(0, 1)) < 3.0 * eq.se(0, 1));
}

TEST_CASE("validation report") {
    EmpiricalCovariance emp;
    emp.n_grid = 2;
    emp.n = 100;
    emp.moments = {1.0, 0.5, 0.5, 1.0};
    emp.standard_errors = {0.01, 0.01, 0.01, 0.01};
    auto r1 = validate(emp, {1.0, 0.5, 0.5, 1.0}, 0.0, false);
    CHECK(r1.pass);
    CHECK(r1.scale == 1.0);
    // scale fit absorbs a factor of 2
    auto r2 = validate(emp, {0.5, 0.25, 0.25, 0.5}, 1e-9, true);
    CHECK(r2.pass);
    CHECK(r2.scale == Catch::Approx(2.0).epsilon(1e-12));
    auto r3 = validate(emp, {1.0, 0.5, 0.5, 2.0}, 3.0, false);
    CHECK_FALSE(r3.pass);
}

TEST_CASE("cholesky sampling") {
    // fBm H=1/2 on {0.5, 1}: covariance min(s,t)
    auto cov = [](const Point& a, const Point& b) { return std::min(a[0], b[0]); };
    auto grid = grid1({0.5, 1.0});
    PathSample p = cholesky_sample(cov, grid, 100000, 11);
    auto emp = empirical_covariance(p);
    std::vector<double> exact{0.5, 0.5, 0.5, 1.0};
    auto rep = validate(emp, exact, 3.5, false);
    CHECK(rep.pass);
    CHECK(p.provenance.cholesky_jitter == Catch::Approx(1e-12));

    // constant-zero builder: zero paths, first ladder rung recorded
    auto zero = [](const Point&, const Point&) { return 0.0; };
    PathSample z = cholesky_sample(zero, grid, 10, 1);
    for (double v : z.values) CHECK(v == 0.0);
    CHECK(z.provenance.cholesky_jitter == Catch::Approx(1e-12));

    // inconsistent builder: ladder exhausted
    auto bad = [](const Point& a, const Point& b) { return a[0] == b[0] ? 0.0 : 1.0; };
    CHECK_THROWS_AS(cholesky_sample(bad, grid1({0.0, 1.0, 2.0}), 2, 1),
                    NotPositiveSemidefinite);

    // Brownian-bridge builder on a 10-point grid
    BrownianBridge bb;
    auto bridge_cov = [&](const Point& a, const Point& b) { return bb.covariance(a[0], b[0]); };
    std::vector<Point> g10;
    for (int i = 1; i <= 10; ++i) g10.push_back({i / 11.0});
    PathSample pb = cholesky_sample(bridge_cov, g10, 100000, 12);
    auto embp = empirical_covariance(pb);
    std::vector<double> exact_b(10 * 10);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) exact_b[i * 10 + j] = bridge_cov(g10[i], g10[j]);
    CHECK(validate(embp, exact_b, 4.2, false).pass);
}

TEST_CASE("shot-noise basis: deterministic discretized covariance") {
    // Takenaka measures, d=1, H=0.25 (beta=0.5); the discretized second
    // moments must approach K_h times the kernel functional
    PulseFunction ball = PulseFunction::ball_indicator(1);
    const double beta = 0.5;
    TakenakaFBM fam(0.25, 1);
    auto grid = grid1({1.0, 2.0});
    std::vector<SignedMeasure> measures;
    for (const auto& t : grid) measures.push_back(fam.measure_at(t[0]));

    SimConfig cfg;
    cfg.u_min = 1e-4;
    cfg.u_max = 2e4;
    cfg.cells_per_axis = 256;
    cfg.x_quality = 8.0;
    CellBasis basis = shotnoise_basis(ball, beta, measures, cfg);
    CHECK(basis.active() > 0);
    auto cov = basis.covariance();
    const double kh = kernel_Kh(ball, beta, 1);  // negative in this range
    // exact covariance: K_h * functional = |K_h| * 2 * fbm covariance
    auto exact = fbm_matrix(0.25, grid);
    for (auto& v : exact) v *= 2.0 * std::abs(kh);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(cov[i] == Catch::Approx(exact[i]).epsilon(0.02));

    // refining the partition keeps the control-measure mass identical
    SimConfig fine = cfg;
    fine.cells_per_axis *= 2;
    CellBasis basis2 = shotnoise_basis(ball, beta, measures, fine);
    CHECK(basis2.nu_total == Catch::Approx(basis.nu_total).epsilon(1e-12));
    // and moves the discretized covariance toward the exact one
    auto cov2 = basis2.covariance();
    double err1 = 0.0, err2 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        err1 = std::max(err1, std::abs(cov[i] - exact[i]) / exact[3]);
        err2 = std::max(err2, std::abs(cov2[i] - exact[i]) / exact[3]);
    }
    CHECK(err2 <= err1 * 1.5 + 1e-4);

    // truncation gate
    SimConfig tight = cfg;
    tight.bias_tolerance = 1e-12;
    CHECK_THROWS_AS(shotnoise_basis(ball, beta, measures, tight), TruncationTooCoarse);

    // zero measure gives all-zero paths
    std::vector<SignedMeasure> zero{SignedMeasure::zero(1)};
    SimConfig zc = cfg;
    zc.n_paths = 8;
    PathSample zp = shotnoise_sample(ball, beta, zero, grid1({0.0}), zc);
    for (double v : zp.values) CHECK(v == 0.0);
}

TEST_CASE("shot-noise sampling matches the exact covariance (small run)") {
    PulseFunction ball = PulseFunction::ball_indicator(1);
    TakenakaFBM fam(0.25, 1);
    auto grid = grid1({1.0, 2.0});
    std::vector<SignedMeasure> measures;
    for (const auto& t : grid) measures.push_back(fam.measure_at(t[0]));
    SimConfig cfg;
    cfg.seed = 31;
    cfg.n_paths = 20000;
    cfg.u_min = 1e-4;
    cfg.u_max = 2e4;
    cfg.cells_per_axis = 256;
    PathSample p = shotnoise_sample(ball, 0.5, measures, grid, cfg);
    auto emp = empirical_covariance(p);
    // empirical variance ratio Var(2)/Var(1) ~ 2^{2H} = sqrt(2)
    const double ratio = emp.at(1, 1) / emp.at(0, 0);
    const double se_ratio =
        ratio * std::sqrt(std::pow(emp.se(0, 0) / emp.at(0, 0), 2.0) +
                          std::pow(emp.se(1, 1) / emp.at(1, 1), 2.0));
    CHECK(std::abs(ratio - std::sqrt(2.0)) < 3.0 * se_ratio);
    // validate against the fBm shape with a fitted scale
    auto rep = validate(emp, fbm_matrix(0.25, grid), 4.0, true);
    CHECK(rep.pass);
}

TEST_CASE("determinism under worker_hint") {
    PulseFunction ball = PulseFunction::ball_indicator(1);
    TakenakaFBM fam(0.25, 1);
    auto grid = grid1({0.5, 1.0, 1.5});
    std::vector<SignedMeasure> measures;
    for (const auto& t : grid) measures.push_back(fam.measure_at(t[0]));
    SimConfig cfg;
    cfg.seed = 77;
    cfg.n_paths = 501;  // odd, exercises the pair boundary
    cfg.u_min = 1e-2;
    cfg.u_max = 100.0;
    cfg.cells_per_axis = 64;
    cfg.worker_hint = 1;
    PathSample a = shotnoise_sample(ball, 0.5, measures, grid, cfg);
    cfg.worker_hint = 8;
    PathSample b = shotnoise_sample(ball, 0.5, measures, grid, cfg);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("hard membrane basis and sampling") {
    DomainSpec I = DomainSpec::interval(1.0);
    auto grid = grid1({0.2, 0.4, 0.6, 0.8});
    SimConfig cfg;
    cfg.u_min = 1e-3;
    cfg.cells_per_axis = 400;
    cfg.x_quality = 8.0;
    CellBasis basis = hard_membrane_basis(I, -1.0, grid, cfg);
    auto cov = basis.covariance();
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double exact = hard_membrane_covariance(I, -1.0, grid[i], grid[j]);
            CHECK(cov[i * grid.size() + j] == Catch::Approx(exact).margin(0.02 * 0.125));
        }

    // boundary grid point gives identically zero samples
    SimConfig cs = cfg;
    cs.n_paths = 64;
    PathSample pb = hard_membrane_sample(I, -1.0, grid1({0.0, 0.5}), cs);
    for (long p = 0; p < pb.n_paths; ++p) CHECK(pb.at(p, 0) == 0.0);

    // beta = 0.5 variance against the closed form, 3 SE at small n
    SimConfig c2;
    c2.seed = 5;
    c2.n_paths = 20000;
    c2.u_min = 1e-5;
    c2.cells_per_axis = 400;
    PathSample ps = hard_membrane_sample(I, 0.5, grid1({0.5}), c2);
    auto emp = empirical_covariance(ps);
    const double exact = hard_membrane_covariance(I, 0.5, {0.5}, {0.5});
    CHECK(std::abs(emp.at(0, 0) - exact) < 3.0 * emp.se(0, 0) + 0.01 * exact);
}

TEST_CASE("cholesky and shot-noise backends agree") {
    // Takenaka fBm H=0.25 on a 5-point grid: the two backends' empirical
    // covariances agree within combined 3 SE
    PulseFunction ball = PulseFunction::ball_indicator(1);
    TakenakaFBM fam(0.25, 1);
    auto grid = grid1({0.4, 0.8, 1.2, 1.6, 2.0});
    std::vector<SignedMeasure> measures;
    for (const auto& t : grid) measures.push_back(fam.measure_at(t[0]));
    SimConfig cfg;
    cfg.seed = 99;
    cfg.n_paths = 20000;
    cfg.u_min = 1e-4;
    cfg.u_max = 2e4;
    cfg.cells_per_axis = 256;
    PathSample shot = shotnoise_sample(ball, 0.5, measures, grid, cfg);
    auto emp_shot = empirical_covariance(shot);

    const double kh = std::abs(kernel_Kh(ball, 0.5, 1));
    auto cov = [&](const Point& a, const Point& b) {
        return 2.0 * kh * fam.covariance(a[0], b[0]);
    };
    PathSample chol = cholesky_sample(cov, grid, 20000, 100);
    auto emp_chol = empirical_covariance(chol);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double diff = emp_shot.at(i, j) - emp_chol.at(i, j);
            const double se = std::hypot(emp_shot.se(i, j), emp_chol.se(i, j));
            CHECK(std::abs(diff) < 3.5 * se + 0.02 * std::abs(emp_chol.at(i, j)));
        }
}

TEST_CASE("halving u_min changes the variance by less than the reported bound") {
    PulseFunction ball = PulseFunction::ball_indicator(1);
    TakenakaFBM fam(0.25, 1);
    auto grid = grid1({1.0});
    std::vector<SignedMeasure> measures{fam.measure_at(1.0)};
    SimConfig cfg;
    cfg.u_min = 4e-3;
    cfg.u_max = 1e3;
    cfg.cells_per_axis = 512;
    CellBasis coarse = shotnoise_basis(ball, 0.5, measures, cfg);
    SimConfig half = cfg;
    half.u_min = 2e-3;
    CellBasis finer = shotnoise_basis(ball, 0.5, measures, half);
    const double dv = std::abs(coarse.covariance()[0] - finer.covariance()[0]);
    CHECK(dv <= coarse.bias_lower * 1.05 + 1e-12);
}
