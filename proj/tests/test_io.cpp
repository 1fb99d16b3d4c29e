#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "selfsim/io.hpp"

using namespace selfsim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("selfsim_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("measure JSON round trip") {
    SignedMeasure m = SignedMeasure::delta1(0.5);
    m = sum(m, SignedMeasure::delta1(0.0, -0.5));
    m = sum(m, SignedMeasure::delta1(1.0, -0.5));
    m.add_density(lebesgue_on(0.0, 1.0, -1.5));
    auto j = io::to_json(m);
    SignedMeasure back = io::measure_from_json(j);
    REQUIRE(back.atoms.size() == m.atoms.size());
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
        CHECK(back.atoms[i].location == m.atoms[i].location);
        CHECK(back.atoms[i].weight == m.atoms[i].weight);
    }
    REQUIRE(back.densities.size() == 1);
    CHECK(density_value1(back, 0.3) == density_value1(m, 0.3));

    // user-defined densities are not serializable
    SignedMeasure user;
    user.dimension = 1;
    user.add_density(density_1d([](double x) { return x; }, Region::interval(0.0, 1.0)));
    CHECK_THROWS_AS(io::to_json(user), Error);
}

TEST_CASE("kernel and domain JSON round trips") {
    KernelSpec k = KernelSpec::power_law(0.5, 2);
    auto jk = io::to_json(k);
    CHECK(jk.at("variant") == "power_law");
    CHECK(jk.at("H") == Catch::Approx(0.25));
    KernelSpec k2 = io::kernel_from_json(jk);
    CHECK(k2.two_h == Catch::Approx(k.two_h));
    CHECK(k2.dimension == 2);

    KernelSpec prod = KernelSpec::product({{1, -0.5}, {1, -0.5}});
    KernelSpec prod2 = io::kernel_from_json(io::to_json(prod));
    CHECK(prod2.blocks.size() == 2);

    DomainSpec D = DomainSpec::ball({0.0, 0.0}, 2.0);
    DomainSpec D2 = io::domain_from_json(io::to_json(D));
    CHECK(D2.kind == DomainSpec::Kind::Ball);
    CHECK(D2.radius == Catch::Approx(2.0));

    DomainSpec I = io::domain_from_json(nlohmann::json{{"variant", "interval"}, {"T", 3.0}});
    CHECK(I.T == Catch::Approx(3.0));
}

TEST_CASE("csv artifacts are byte-stable") {
    TempDir tmp;
    std::vector<Point> grid{{0.0}, {0.5}, {1.0}};
    std::vector<double> m(9);
    for (int i = 0; i < 9; ++i) m[i] = std::sqrt(2.0) * (i + 1) / 7.0;
    const fs::path p1 = tmp.path / "a.csv";
    const fs::path p2 = tmp.path / "b.csv";
    io::write_matrix_csv(p1, grid, m);
    io::write_matrix_csv(p2, grid, m);
    CHECK(io::hash_file(p1) == io::hash_file(p2));

    std::ifstream in(p1);
    std::string header;
    std::getline(in, header);
    CHECK(header == "0,0.5,1");

    // 17 significant digits survive the round trip
    std::string cell;
    std::getline(in, cell, ',');
    CHECK(std::stod(cell) == m[0]);
}

TEST_CASE("paths csv and sidecar") {
    TempDir tmp;
    PathSample s;
    s.grid = {{0.5}, {1.0}};
    s.n_paths = 2;
    s.values = {1.0, 2.0, 3.0, 4.0};
    s.provenance.backend = "cholesky";
    s.provenance.seed = 7;
    s.provenance.config = "cholesky;seed=7";
    const fs::path p = tmp.path / "paths.csv";
    io::write_paths_csv(p, s);
    auto j = io::sidecar_json(s);
    CHECK(j.at("backend") == "cholesky");
    CHECK(j.at("seed") == 7);
    CHECK(j.at("config_hash") == io::fnv1a64(std::string("cholesky;seed=7")));

    auto man = io::manifest("sample", nlohmann::json{{"x", 1}}, {p});
    CHECK(man.at("artifacts").size() == 1);
    CHECK(man.at("artifacts")[0].at("path") == "paths.csv");
}
