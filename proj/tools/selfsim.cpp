// Batch front door: evaluate covariance matrices, sample paths, run
// membranes and the validation suite from flags or a JSON config, emitting
// CSV/JSON artifacts plus a run manifest.
//
// Exit codes: 0 success, 2 validation failure, 1 configuration or runtime
// error (with a machine-readable JSON object on stderr).

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selfsim/selfsim.hpp"
#include "selfsim/validation.hpp"

namespace fs = std::filesystem;
using namespace selfsim;
using nlohmann::json;

namespace {

// grid syntax start:stop:count, inclusive endpoints
std::vector<Point> parse_grid(const std::string& spec) {
    double start = 0.0, stop = 0.0;
    int count = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &start, &stop, &count) != 3 || count < 1)
        throw ParameterOutOfRange("grid spec must be start:stop:count, got '" + spec + "'");
    std::vector<Point> g;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? start
                                    : start + (stop - start) * static_cast<double>(i) /
                                          static_cast<double>(count - 1);
        g.push_back({t});
    }
    return g;
}

std::vector<double> split_numbers(const std::string& s) {
    std::vector<double> out;
    std::string cur;
    for (char ch : s + ",") {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    return out;
}

// domain syntax: interval:0,T | ball:c1,...,cd,r | box:l1,...,ld,h1,...,hd
DomainSpec parse_domain(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ParameterOutOfRange("bad domain spec: " + spec);
    const std::string kind = spec.substr(0, colon);
    const auto nums = split_numbers(spec.substr(colon + 1));
    if (kind == "interval") {
        if (nums.size() != 2 || nums[0] != 0.0)
            throw ParameterOutOfRange("interval domains are interval:0,T");
        return DomainSpec::interval(nums[1]);
    }
    if (kind == "ball") {
        if (nums.size() < 2) throw ParameterOutOfRange("ball domain needs center and radius");
        Point c(nums.begin(), nums.end() - 1);
        return DomainSpec::ball(c, nums.back());
    }
    if (kind == "box") {
        if (nums.size() % 2 != 0) throw ParameterOutOfRange("box domain needs lo and hi lists");
        const std::size_t d = nums.size() / 2;
        Point lo(nums.begin(), nums.begin() + d), hi(nums.begin() + d, nums.end());
        return DomainSpec::box(lo, hi);
    }
    throw ParameterOutOfRange("unknown domain kind: " + kind);
}

struct CommonArgs {
    std::string out_dir = "out";
    std::string config_file;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw Error("cannot read config file " + path);
    json j;
    in >> j;
    return j;
}

int env_threads(int fallback) {
    if (const char* v = std::getenv("SELFSIM_THREADS")) {
        const int n = std::atoi(v);
        if (n > 0) return n;
    }
    return fallback;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const std::vector<fs::path>& artifacts) {
    io::write_json(dir / "manifest.json", io::manifest(command, config, artifacts));
}

std::shared_ptr<const MeasureFamily> family_from_args(const std::string& preset,
                                                      const std::map<std::string, double>& params) {
    return make_family(preset, params);
}

int run_cov(const std::string& preset, const std::map<std::string, double>& params,
            const std::string& grid_spec, const CommonArgs& common, const json& file_cfg) {
    std::string gspec = file_cfg.value("grid", grid_spec);
    auto fam = family_from_args(file_cfg.value("preset", preset), params);
    auto grid = parse_grid(gspec);
    const std::size_t K = grid.size();
    std::vector<double> m(K * K);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            m[i * K + j] = fam->covariance(grid[i][0], grid[j][0]);
            m[j * K + i] = m[i * K + j];
        }
    fs::create_directories(common.out_dir);
    const fs::path out = fs::path(common.out_dir) / "covariance.csv";
    io::write_matrix_csv(out, grid, m);
    json cfg{{"preset", fam->name()}, {"grid", gspec}, {"params", params}};
    write_manifest(common.out_dir, "cov", cfg, {out});
    std::printf("wrote %s (%zux%zu)\n", out.string().c_str(), K, K);
    return 0;
}

int run_sample(const std::string& preset, const std::map<std::string, double>& params,
               const std::string& grid_spec, const std::string& backend, SimConfig sim,
               double beta, const CommonArgs& common, const json& file_cfg) {
    auto fam = family_from_args(file_cfg.value("preset", preset), params);
    auto grid = parse_grid(file_cfg.value("grid", grid_spec));
    if (file_cfg.contains("sim")) sim = io::simconfig_from_json(file_cfg.at("sim"));
    sim.worker_hint = env_threads(sim.worker_hint);

    PathSample paths;
    if (backend == "cholesky") {
        auto cov = [&](const Point& a, const Point& b) { return fam->covariance(a[0], b[0]); };
        paths = cholesky_sample(cov, grid, sim.n_paths, sim.seed);
    } else if (backend == "shotnoise") {
        std::vector<SignedMeasure> measures;
        for (const auto& t : grid) measures.push_back(fam->measure_at(t[0]));
        PulseFunction ball = PulseFunction::ball_indicator(measures.front().dimension);
        const double b = beta != 0.0 ? beta : measures.front().dimension - 2.0 * fam->hurst();
        paths = shotnoise_sample(ball, b, measures, grid, sim);
    } else {
        throw ParameterOutOfRange("backend must be cholesky or shotnoise");
    }
    fs::create_directories(common.out_dir);
    const fs::path pfile = fs::path(common.out_dir) / "paths.csv";
    const fs::path sfile = fs::path(common.out_dir) / "paths.json";
    io::write_paths_csv(pfile, paths);
    io::write_json(sfile, io::sidecar_json(paths));

    auto emp = empirical_covariance(paths);
    const fs::path efile = fs::path(common.out_dir) / "empirical_covariance.csv";
    const fs::path sefile = fs::path(common.out_dir) / "empirical_se.csv";
    io::write_matrix_csv(efile, grid, emp.moments);
    io::write_matrix_csv(sefile, grid, emp.standard_errors);

    json cfg{{"preset", fam->name()},
             {"backend", backend},
             {"params", params},
             {"sim", io::to_json(sim)}};
    write_manifest(common.out_dir, "sample", cfg, {pfile, sfile, efile, sefile});
    std::printf("wrote %s (%ld paths x %zu points)\n", pfile.string().c_str(), paths.n_paths,
                grid.size());
    return 0;
}

int run_membrane(const std::string& mode, const std::string& domain_spec, double beta,
                 double hurst, const std::string& grid_spec, bool exact, SimConfig sim,
                 const CommonArgs& common, const json& file_cfg) {
    DomainSpec D = file_cfg.contains("domain") ? io::domain_from_json(file_cfg.at("domain"))
                                               : parse_domain(domain_spec);
    auto grid = parse_grid(file_cfg.value("grid", grid_spec));
    const std::string m = file_cfg.value("mode", mode);
    fs::create_directories(common.out_dir);
    std::vector<fs::path> artifacts;

    const std::size_t K = grid.size();
    if (exact || m == "soft") {
        std::vector<double> cov(K * K);
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                double v;
                if (m == "hard") {
                    v = hard_membrane_covariance(D, beta, grid[i], grid[j]);
                } else {
                    v = soft_membrane_covariance(D, hurst, grid[i], grid[j]);
                }
                cov[i * K + j] = v;
                cov[j * K + i] = v;
            }
        const fs::path out = fs::path(common.out_dir) / "membrane_covariance.csv";
        io::write_matrix_csv(out, grid, cov);
        artifacts.push_back(out);
    } else {
        sim.worker_hint = env_threads(sim.worker_hint);
        PathSample paths = hard_membrane_sample(D, beta, grid, sim);
        const fs::path pfile = fs::path(common.out_dir) / "paths.csv";
        const fs::path sfile = fs::path(common.out_dir) / "paths.json";
        io::write_paths_csv(pfile, paths);
        io::write_json(sfile, io::sidecar_json(paths));
        auto emp = empirical_covariance(paths);
        const fs::path efile = fs::path(common.out_dir) / "empirical_covariance.csv";
        io::write_matrix_csv(efile, grid, emp.moments);
        artifacts = {pfile, sfile, efile};
    }
    json cfg{{"mode", m},      {"domain", io::to_json(D)}, {"beta", beta},
             {"H", hurst},     {"grid", grid_spec},        {"exact", exact}};
    write_manifest(common.out_dir, "membrane", cfg, artifacts);
    std::printf("membrane artifacts in %s\n", common.out_dir.c_str());
    return 0;
}

int run_tangent(const std::string& domain_spec, double beta, double z, const CommonArgs& common,
                const json& file_cfg) {
    DomainSpec D = file_cfg.contains("domain") ? io::domain_from_json(file_cfg.at("domain"))
                                               : parse_domain(domain_spec);
    std::vector<double> eps;
    for (int k = 6; k <= 12; ++k) eps.push_back(std::pow(2.0, -k));
    auto res = tangent_field_check(D, beta, {z}, {1.0}, {0.5}, eps);
    json rows = json::array();
    for (const auto& r : res.rows)
        rows.push_back(json{{"eps", r.eps},
                            {"increment_variance", r.increment_variance},
                            {"rescaled_variance", r.rescaled_variance}});
    json out{{"H_hat", res.h_hat},
             {"constant", res.constant},
             {"shape_max_rel_err", res.shape_max_rel_err},
             {"per_eps", rows}};
    fs::create_directories(common.out_dir);
    const fs::path f = fs::path(common.out_dir) / "tangent_report.json";
    io::write_json(f, out);
    json cfg{{"domain", io::to_json(D)}, {"beta", beta}, {"z", z}};
    write_manifest(common.out_dir, "tangent", cfg, {f});
    std::printf("H_hat = %.4f, constant = %.6g (report: %s)\n", res.h_hat, res.constant,
                f.string().c_str());
    return 0;
}

int run_validate(const std::string& suite, const CommonArgs& common) {
    if (suite != "full") throw ParameterOutOfRange("only --suite full is defined");
    fs::create_directories(common.out_dir);
    auto results = selfsim::validation::run_all(fs::path(common.out_dir) / "scratch");
    int failures = 0;
    json rows = json::array();
    for (const auto& r : results) {
        std::printf("criterion %2d: %s — %s (%s)\n", r.id, r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.detail.c_str());
        std::fflush(stdout);
        rows.push_back(json{{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        if (!r.pass) ++failures;
    }
    io::write_json(fs::path(common.out_dir) / "validation_report.json", rows);
    return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-similar Gaussian fields: covariances, processes, membranes, sampling"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string preset = "fbm-takenaka", grid_spec = "0:1:11", backend = "cholesky";
    std::string domain_spec = "interval:0,1", mode = "hard", suite = "full";
    double hurst = 0.25, alpha = 1.0, sigma = 1.0, horizon = 1.0, beta = 0.0, z = 0.5;
    bool exact = false;
    SimConfig sim;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", common.out_dir, "output directory");
        cmd->add_option("--config", common.config_file, "JSON config overriding flags");
    };
    auto add_family = [&](CLI::App* cmd) {
        cmd->add_option("--preset", preset, "process preset name");
        cmd->add_option("--H", hurst, "Hurst index");
        cmd->add_option("--alpha", alpha, "Volterra alpha");
        cmd->add_option("--sigma", sigma, "OU diffusion");
        cmd->add_option("--T", horizon, "bridge horizon");
        cmd->add_option("--grid", grid_spec, "grid start:stop:count");
    };
    auto add_sim = [&](CLI::App* cmd) {
        cmd->add_option("--n-paths", sim.n_paths, "number of sampled paths");
        cmd->add_option("--seed", sim.seed, "RNG seed");
        cmd->add_option("--u-min", sim.u_min, "radius truncation lower bound");
        cmd->add_option("--u-max", sim.u_max, "radius truncation upper bound");
        cmd->add_option("--cells-per-axis", sim.cells_per_axis, "spatial cells per axis");
        cmd->add_option("--workers", sim.worker_hint, "worker threads (result-invariant)");
    };

    auto* cov = app.add_subcommand("cov", "exact covariance matrix of a process preset");
    add_family(cov);
    add_common(cov);

    auto* sample = app.add_subcommand("sample", "sample paths by cholesky or shotnoise backend");
    add_family(sample);
    add_sim(sample);
    sample->add_option("--backend", backend, "cholesky | shotnoise");
    sample->add_option("--beta", beta, "shot-noise beta (default d-2H)");
    add_common(sample);

    auto* membrane = app.add_subcommand("membrane", "hard/soft membrane covariance or sampling");
    membrane->add_option("--mode", mode, "hard | soft");
    membrane->add_option("--domain", domain_spec, "interval:0,T | ball:c..,r | box:lo..,hi..");
    membrane->add_option("--beta", beta, "hard-membrane beta (< d)");
    membrane->add_option("--H", hurst, "soft-membrane Hurst index");
    membrane->add_option("--grid", grid_spec, "grid start:stop:count");
    membrane->add_flag("--exact", exact, "emit the exact covariance matrix (hard mode)");
    add_sim(membrane);
    add_common(membrane);

    auto* tangent = app.add_subcommand("tangent", "tangent-field scaling report");
    tangent->add_option("--domain", domain_spec, "domain spec");
    tangent->add_option("--beta", beta, "control-measure exponent");
    tangent->add_option("--z", z, "interior point");
    add_common(tangent);

    auto* validate_cmd = app.add_subcommand("validate", "run the acceptance criteria");
    validate_cmd->add_option("--suite", suite, "criteria suite (full)");
    add_common(validate_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        const json file_cfg = load_config(common.config_file);
        std::map<std::string, double> params{
            {"H", hurst}, {"alpha", alpha}, {"sigma", sigma}, {"T", horizon}};
        if (cov->parsed()) return run_cov(preset, params, grid_spec, common, file_cfg);
        if (sample->parsed())
            return run_sample(preset, params, grid_spec, backend, sim, beta, common, file_cfg);
        if (membrane->parsed())
            return run_membrane(mode, domain_spec, beta, hurst, grid_spec, exact, sim, common,
                                file_cfg);
        if (tangent->parsed()) return run_tangent(domain_spec, beta, z, common, file_cfg);
        if (validate_cmd->parsed()) return run_validate(suite, common);
    } catch (const std::exception& e) {
        nlohmann::json err{{"error", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    }
    return 1;
}
