#pragma once

// The acceptance suite: eleven numbered criteria covering closed forms,
// quadrature identities, Monte Carlo cross-validation and reproducibility.
// Each criterion returns pass/fail with a one-line diagnostic; tolerances are
// pinned here, in code.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "selfsim/io.hpp"
#include "selfsim/kernel.hpp"
#include "selfsim/measure.hpp"
#include "selfsim/membrane.hpp"
#include "selfsim/montecarlo.hpp"
#include "selfsim/process.hpp"

namespace selfsim::validation {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

inline std::vector<double> fbm_matrix(double hurst, const std::vector<Point>& grid) {
    auto pw = [hurst](double r) { return r == 0.0 ? 0.0 : std::pow(std::abs(r), 2.0 * hurst); };
    const std::size_t K = grid.size();
    std::vector<double> m(K * K);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j)
            m[i * K + j] = 0.5 * (pw(grid[i][0]) + pw(grid[j][0]) - pw(grid[i][0] - grid[j][0]));
    return m;
}

// the documented configuration of the shot-noise acceptance run (criteria 6
// and 11)
inline SimConfig shotnoise_acceptance_config(int worker_hint) {
    SimConfig cfg;
    cfg.seed = 20240801;
    cfg.n_paths = 100000;
    cfg.u_min = 1e-4;
    cfg.u_max = 2e4;
    cfg.u_ratio = 1.05;
    cfg.cells_per_axis = 512;
    cfg.x_quality = 8.0;
    cfg.worker_hint = worker_hint;
    return cfg;
}

inline std::vector<Point> shotnoise_acceptance_grid() {
    return {{0.4}, {0.8}, {1.2}, {1.6}, {2.0}};
}

}  // namespace detail

// 1. hard-boundary bridge, beta = -1, against (1/2) s^t (1 - s v t)
inline CriterionResult criterion_hard_bridge_closed_form() {
    CriterionResult r{1, "hard membrane beta=-1 equals the Brownian bridge closed form"};
    DomainSpec I = DomainSpec::interval(1.0);
    double worst = 0.0;
    for (int i = 1; i <= 10; ++i)
        for (int j = 1; j <= 10; ++j) {
            const double s = i / 11.0, t = j / 11.0;
            const double got = hard_membrane_covariance(I, -1.0, {s}, {t});
            const double exact = 0.5 * std::min(s, t) * (1.0 - std::max(s, t));
            worst = std::max(worst, std::abs(got - exact) / exact);
        }
    r.pass = worst < 1e-10;
    r.detail = "max rel err " + detail::fmt(worst) + " (tol 1e-10)";
    return r;
}

// 2. Y_beta complement: hard + Y = 2^b/(b(1-b)) C_b(s,t)
inline CriterionResult criterion_ybeta_complement() {
    CriterionResult r{2, "hard membrane + Y_beta equals the fBm combination"};
    DomainSpec I = DomainSpec::interval(1.0);
    double worst = 0.0;
    for (double beta : {0.25, 0.5, 0.75}) {
        const double pref = std::pow(2.0, beta) / (beta * (1.0 - beta));
        for (int i = 1; i <= 10; ++i)
            for (int j = 1; j <= 10; ++j) {
                const double s = i / 10.0, t = j / 10.0;
                const double e = 1.0 - beta;
                const double cb = std::pow(s, e) + std::pow(t, e) - std::pow(std::abs(s - t), e);
                const double total = hard_membrane_covariance(I, beta, {s}, {t}) +
                                     ybeta_covariance(beta, 1.0, s, t);
                worst = std::max(worst, std::abs(total - pref * cb));
            }
    }
    r.pass = worst < 1e-10;
    r.detail = "max abs err " + detail::fmt(worst) + " (tol 1e-10)";
    return r;
}

// 3. C(mu_c, mu_c) = c^{2H} C(mu, mu) for H in {-0.4, 0.25}, c in {0.5,2,10}
inline CriterionResult criterion_self_similarity() {
    CriterionResult r{3, "second-order self-similarity of kernel functionals"};
    double worst = 0.0;
    {
        KernelSpec k = KernelSpec::power_law(0.5, 1);
        SignedMeasure mu = sum(SignedMeasure::delta1(1.3), SignedMeasure::delta1(0.0, -1.0));
        const double base = covariance_functional(k, mu, mu);
        for (double c : {0.5, 2.0, 10.0}) {
            SignedMeasure muc = dilate(mu, c);
            const double got = covariance_functional(k, muc, muc);
            worst = std::max(worst, std::abs(got / (std::pow(c, 0.5) * base) - 1.0));
        }
    }
    {
        KernelSpec k = KernelSpec::power_law(-0.8, 1);
        SignedMeasure mu;
        mu.dimension = 1;
        mu.add_density(lebesgue_on(0.0, 1.0, 1.0));
        const double base = covariance_functional(k, mu, mu, 1e-10);
        for (double c : {0.5, 2.0, 10.0}) {
            SignedMeasure muc = dilate(mu, c);
            const double got = covariance_functional(k, muc, muc, 1e-10);
            worst = std::max(worst, std::abs(got / (std::pow(c, -0.8) * base) - 1.0));
        }
    }
    r.pass = worst < 1e-8;
    r.detail = "max rel err " + detail::fmt(worst) + " (tol 1e-8)";
    return r;
}

// 4. Riesz composition rule at m1 = m2 = 0.4, d = 1
inline CriterionResult criterion_riesz_composition() {
    CriterionResult r{4, "Riesz composition rule m1=m2=0.4 reproduces C_{0.8,1}"};
    SignedMeasure second = riesz_transform(riesz_transform(SignedMeasure::delta1(0.0), 0.4), 0.4);
    const double got = density_value1(second, 1.0);
    const double expect = riesz_constant(0.8, 1);
    const double err = std::abs(got - expect);
    r.pass = err < 1e-5;
    r.detail = "density(1) = " + detail::fmt(got) + ", C = " + detail::fmt(expect) +
               ", abs err " + detail::fmt(err) + " (tol 1e-5)";
    return r;
}

// 5. Takenaka vs well-balanced representations, H = 0.25
inline CriterionResult criterion_representation_equivalence() {
    CriterionResult r{5, "Takenaka and well-balanced fBm covariances are proportional"};
    TakenakaFBM tak(0.25, 1);
    WellBalancedFBM wb(0.25);
    std::vector<double> grid{1.0 / 3, 2.0 / 3, 1.0, 4.0 / 3, 5.0 / 3, 2.0};
    std::vector<double> a(36), b(36);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            a[i * 6 + j] = wb.covariance(grid[i], grid[j]);
            b[i * 6 + j] = tak.covariance(grid[i], grid[j]);
        }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 36; ++i) {
        num += a[i] * b[i];
        den += b[i] * b[i];
    }
    const double c = num / den;
    double worst = 0.0;
    for (int i = 0; i < 36; ++i)
        worst = std::max(worst, std::abs(a[i] - c * b[i]) / std::abs(c * b[i]));
    r.pass = worst < 1e-4;
    r.detail = "fitted const " + detail::fmt(c) + ", max rel err " + detail::fmt(worst) +
               " (tol 1e-4)";
    return r;
}

// 6. shot-noise Monte Carlo vs the exact kernel covariance
inline CriterionResult criterion_shotnoise_montecarlo(int worker_hint = 1) {
    CriterionResult r{6, "shot-noise sampler reproduces the Takenaka fBm covariance"};
    PulseFunction ball = PulseFunction::ball_indicator(1);
    TakenakaFBM fam(0.25, 1);
    auto grid = detail::shotnoise_acceptance_grid();
    std::vector<SignedMeasure> measures;
    for (const auto& t : grid) measures.push_back(fam.measure_at(t[0]));
    SimConfig cfg = detail::shotnoise_acceptance_config(worker_hint);
    PathSample p = shotnoise_sample(ball, 0.5, measures, grid, cfg);
    auto emp = empirical_covariance(p);
    auto rep = validate(emp, detail::fbm_matrix(0.25, grid), 4.0, true);
    r.pass = rep.pass;
    r.detail = "max |z| = " + detail::fmt(rep.max_abs_z) + " (z_max 4), fitted scale " +
               detail::fmt(rep.scale) + ", cells " + std::to_string(p.provenance.n_cells_active);
    return r;
}

// 7. hard-membrane Monte Carlo vs the closed form, no scale fit
inline CriterionResult criterion_hard_membrane_montecarlo() {
    CriterionResult r{7, "hard-membrane sampler reproduces the bridge covariance"};
    DomainSpec I = DomainSpec::interval(1.0);
    std::vector<Point> grid{{1.0 / 6}, {2.0 / 6}, {3.0 / 6}, {4.0 / 6}, {5.0 / 6}};
    SimConfig cfg;
    cfg.seed = 20240802;
    cfg.n_paths = 200000;
    cfg.u_min = 1e-3;
    cfg.u_ratio = 1.02;
    cfg.cells_per_axis = 512;
    cfg.x_quality = 16.0;
    PathSample p = hard_membrane_sample(I, -1.0, grid, cfg);
    auto emp = empirical_covariance(p);
    const std::size_t K = grid.size();
    std::vector<double> exact(K * K);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j)
            exact[i * K + j] = hard_membrane_covariance(I, -1.0, grid[i], grid[j]);
    auto rep = validate(emp, exact, 4.0, false);
    r.pass = rep.pass;
    r.detail = "max |z| = " + detail::fmt(rep.max_abs_z) + " (z_max 4, no scale fit)";
    return r;
}

// 8. tangent-field exponents from exact covariances
inline CriterionResult criterion_tangent_exponents() {
    CriterionResult r{8, "local self-similarity exponents at z=0.5"};
    DomainSpec I = DomainSpec::interval(1.0);
    std::vector<double> eps;
    for (int k = 6; k <= 12; ++k) eps.push_back(std::pow(2.0, -k));
    std::ostringstream os;
    bool ok = true;

    auto r1 = tangent_field_check(I, 0.5, {0.5}, {1.0}, {0.5}, eps);
    ok = ok && std::abs(r1.h_hat - 0.25) <= 0.01;
    os << "beta=0.5: H=" << detail::fmt(r1.h_hat) << " (0.25+-0.01)";

    auto r2 = tangent_field_check(I, -1.0, {0.5}, {1.0}, {0.5}, eps);
    ok = ok && std::abs(r2.h_hat - 0.5) <= 0.01;
    os << "; beta=-1: H=" << detail::fmt(r2.h_hat) << " (0.5+-0.01)";

    // beta = 0 = d-1: the variance ratio sequence follows (-eps ln eps)
    auto cov = [&](double a, double b) { return hard_membrane_covariance(I, 0.0, {a}, {b}); };
    const double czz = cov(0.5, 0.5);
    std::vector<double> vars;
    for (double e : eps)
        vars.push_back(cov(0.5 + e, 0.5 + e) - 2.0 * cov(0.5 + e, 0.5) + czz);
    double ratio_err = 0.0;
    {
        const std::size_t n = eps.size();
        const double emp = vars[n - 2] / vars[n - 1];
        const double pred = (-eps[n - 2] * std::log(eps[n - 2])) /
                            (-eps[n - 1] * std::log(eps[n - 1]));
        ratio_err = std::abs(emp / pred - 1.0);
    }
    ok = ok && ratio_err < 0.02;
    os << "; beta=0 ratio err " << detail::fmt(ratio_err) << " (tol 0.02)";
    r.pass = ok;
    r.detail = os.str();
    return r;
}

// 9. soft-membrane variance vanishing toward the boundary of the disk
inline CriterionResult criterion_membrane_boundary_vanishing() {
    CriterionResult r{9, "soft membrane variance vanishes along (1-2^-k, 0)"};
    DomainSpec B = DomainSpec::ball({0.0, 0.0}, 1.0);
    std::vector<double> vars;
    for (int k = 1; k <= 6; ++k) {
        const double rho = 1.0 - std::pow(2.0, -k);
        vars.push_back(soft_membrane_covariance(B, 0.25, {rho, 0.0}, {rho, 0.0}));
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < vars.size(); ++i) decreasing = decreasing && vars[i] < vars[i - 1];
    const double final_ratio = vars.back() / vars.front();
    r.pass = decreasing && final_ratio < 0.01;
    r.detail = std::string(decreasing ? "strictly decreasing" : "NOT decreasing") +
               ", final/initial = " + detail::fmt(final_ratio) + " (required < 0.01)";
    return r;
}

// 10. bridge pinning and the zero-area property
inline CriterionResult criterion_bridge_pinning() {
    CriterionResult r{10, "bridge pinning and zero-area conditioning"};
    std::ostringstream os;
    bool ok = true;

    auto bm = std::make_shared<BrownianMotion>();
    ConditioningMeasure a;
    a.a = SignedMeasure::delta1(1.0);
    a.horizon = 1.0;
    GeneralizedBridge gb(bm, a, [](double t) { return t; });
    const double v_gb = gb.covariance(1.0, 1.0);
    ok = ok && std::abs(v_gb) < 1e-10;
    os << "gen bridge Var(1) = " << detail::fmt(std::abs(v_gb));

    for (double hurst : {0.25, 0.75}) {
        FractionalBridge fb(hurst);
        const double v = fb.covariance(1.0, 1.0);
        ok = ok && std::abs(v) < 1e-10;
        os << "; frac H=" << hurst << " Var(1) = " << detail::fmt(std::abs(v));
    }

    ZeroAreaBridge za;
    quad::Options qopt;
    qopt.rel_tol = 1e-9;
    qopt.abs_tol = 1e-9;
    double worst = 0.0;
    for (int i = 1; i <= 20; ++i) {
        const double t = i / 21.0;
        const double integral = quad::integrate_with_singularities(
            [&](double s) { return za.covariance(s, t); }, 0.0, 1.0, {{t, 0.0}}, qopt);
        worst = std::max(worst, std::abs(integral));
    }
    ok = ok && worst < 1e-6;
    os << "; zero-area max |int Cov ds| = " << detail::fmt(worst) << " (tol 1e-6)";
    r.pass = ok;
    r.detail = os.str();
    return r;
}

// 11. bitwise determinism of the criterion-6 run across worker counts
inline CriterionResult criterion_determinism(const std::filesystem::path& scratch) {
    CriterionResult r{11, "identical seed and config give bitwise-identical path files"};
    PulseFunction ball = PulseFunction::ball_indicator(1);
    TakenakaFBM fam(0.25, 1);
    auto grid = detail::shotnoise_acceptance_grid();
    std::vector<SignedMeasure> measures;
    for (const auto& t : grid) measures.push_back(fam.measure_at(t[0]));
    std::filesystem::create_directories(scratch);
    std::vector<std::uint64_t> hashes;
    for (int workers : {1, 8}) {
        SimConfig cfg = detail::shotnoise_acceptance_config(workers);
        PathSample p = shotnoise_sample(ball, 0.5, measures, grid, cfg);
        const auto file = scratch / ("paths_w" + std::to_string(workers) + ".csv");
        io::write_paths_csv(file, p);
        hashes.push_back(io::hash_file(file));
    }
    r.pass = hashes[0] == hashes[1];
    char buf[64];
    std::snprintf(buf, sizeof(buf), "fnv64 %016llx vs %016llx",
                  static_cast<unsigned long long>(hashes[0]),
                  static_cast<unsigned long long>(hashes[1]));
    r.detail = buf;
    return r;
}

inline CriterionResult run_criterion(int id, const std::filesystem::path& scratch) {
    switch (id) {
        case 1: return criterion_hard_bridge_closed_form();
        case 2: return criterion_ybeta_complement();
        case 3: return criterion_self_similarity();
        case 4: return criterion_riesz_composition();
        case 5: return criterion_representation_equivalence();
        case 6: return criterion_shotnoise_montecarlo();
        case 7: return criterion_hard_membrane_montecarlo();
        case 8: return criterion_tangent_exponents();
        case 9: return criterion_membrane_boundary_vanishing();
        case 10: return criterion_bridge_pinning();
        case 11: return criterion_determinism(scratch);
        default: throw ParameterOutOfRange("criterion id in 1..11");
    }
}

inline std::vector<CriterionResult> run_all(const std::filesystem::path& scratch) {
    std::vector<CriterionResult> results;
    for (int id = 1; id <= 11; ++id) results.push_back(run_criterion(id, scratch));
    return results;
}

}  // namespace selfsim::validation
