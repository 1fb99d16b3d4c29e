#pragma once

// Serialization and artifact output: JSON round-trips for the value types
// (built-in densities only), CSV matrices/paths printed with 17 significant
// digits, and run manifests with FNV-1a content hashes.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfsim/errors.hpp"
#include "selfsim/kernel.hpp"
#include "selfsim/measure.hpp"
#include "selfsim/membrane.hpp"
#include "selfsim/montecarlo.hpp"
#include "selfsim/process.hpp"

namespace selfsim::io {

using nlohmann::json;

// ------------------------------------------------------------------
// hashing

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file for hashing: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    return h;
}

// ------------------------------------------------------------------
// number formatting (reproducible CSV)

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ------------------------------------------------------------------
// JSON: measures

inline json to_json(const SignedMeasure& mu) {
    json j;
    j["dimension"] = mu.dimension;
    json atoms = json::array();
    for (const auto& a : mu.atoms) atoms.push_back(json::array({a.location, a.weight}));
    j["atoms"] = atoms;
    json dens = json::array();
    for (const auto& c : mu.densities) {
        if (!c.builtin)
            throw Error("user-defined density components are not serializable");
        dens.push_back(json{{"name", c.builtin->name}, {"params", c.builtin->params}});
    }
    j["densities"] = dens;
    return j;
}

inline DensityComponent density_from_json(const json& j) {
    const std::string name = j.at("name");
    const std::vector<double> params = j.at("params");
    if (name == "lebesgue") {
        if (params.size() != 3) throw Error("lebesgue density takes [a, b, weight]");
        return lebesgue_on(params[0], params[1], params[2]);
    }
    throw Error("unknown built-in density: " + name);
}

inline SignedMeasure measure_from_json(const json& j) {
    SignedMeasure mu;
    mu.dimension = j.at("dimension");
    for (const auto& a : j.at("atoms"))
        mu.add_atom(a.at(0).get<Point>(), a.at(1).get<double>());
    for (const auto& c : j.at("densities")) mu.add_density(density_from_json(c));
    mu.validate();
    return mu;
}

// ------------------------------------------------------------------
// JSON: kernels

inline json to_json(const KernelSpec& k) {
    json j;
    switch (k.variant) {
        case KernelSpec::Variant::PowerLaw:
            j["variant"] = "power_law";
            j["H"] = k.two_h / 2.0;
            j["d"] = k.dimension;
            break;
        case KernelSpec::Variant::Log:
            j["variant"] = "log";
            j["d"] = 2;
            break;
        case KernelSpec::Variant::Product: {
            j["variant"] = "product";
            json blocks = json::array();
            for (const auto& b : k.blocks)
                blocks.push_back(json{{"d", b.dim}, {"exponent", b.exponent}});
            j["blocks"] = blocks;
            break;
        }
    }
    if (k.normalization != 1.0) j["normalization"] = k.normalization;
    return j;
}

inline KernelSpec kernel_from_json(const json& j) {
    const std::string variant = j.at("variant");
    KernelSpec k;
    if (variant == "power_law") {
        k = KernelSpec::power_law(2.0 * j.at("H").get<double>(), j.at("d").get<int>());
    } else if (variant == "log") {
        k = KernelSpec::log2d();
    } else if (variant == "product") {
        std::vector<KernelSpec::Block> blocks;
        for (const auto& b : j.at("blocks"))
            blocks.push_back({b.at("d").get<int>(), b.at("exponent").get<double>()});
        k = KernelSpec::product(std::move(blocks));
    } else {
        throw Error("unknown kernel variant: " + variant);
    }
    if (j.contains("normalization")) k.normalization = j.at("normalization");
    return k;
}

// ------------------------------------------------------------------
// JSON: domains, families, configs

inline json to_json(const DomainSpec& D) {
    json j;
    switch (D.kind) {
        case DomainSpec::Kind::Interval:
            j["variant"] = "interval";
            j["T"] = D.T;
            break;
        case DomainSpec::Kind::Ball:
            j["variant"] = "ball";
            j["center"] = D.center;
            j["radius"] = D.radius;
            break;
        case DomainSpec::Kind::Box:
            j["variant"] = "box";
            j["lo"] = D.lo;
            j["hi"] = D.hi;
            break;
    }
    return j;
}

inline DomainSpec domain_from_json(const json& j) {
    const std::string variant = j.at("variant");
    if (variant == "interval") return DomainSpec::interval(j.at("T").get<double>());
    if (variant == "ball")
        return DomainSpec::ball(j.at("center").get<Point>(), j.at("radius").get<double>());
    if (variant == "box") return DomainSpec::box(j.at("lo").get<Point>(), j.at("hi").get<Point>());
    throw Error("unknown domain variant: " + variant);
}

struct FamilySpec {
    std::string preset;
    std::map<std::string, double> params;
};

inline json to_json(const FamilySpec& f) {
    return json{{"preset", f.preset}, {"params", f.params}};
}

inline FamilySpec family_from_json(const json& j) {
    FamilySpec f;
    f.preset = j.at("preset");
    if (j.contains("params")) f.params = j.at("params").get<std::map<std::string, double>>();
    return f;
}

inline json to_json(const SimConfig& c) {
    json j{{"seed", c.seed},
           {"n_paths", c.n_paths},
           {"u_min", c.u_min},
           {"u_max", c.u_max},
           {"u_ratio", c.u_ratio},
           {"cells_per_axis", c.cells_per_axis},
           {"x_quality", c.x_quality},
           {"worker_hint", c.worker_hint}};
    return j;
}

inline SimConfig simconfig_from_json(const json& j) {
    SimConfig c;
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_paths")) c.n_paths = j.at("n_paths").get<long>();
    if (j.contains("u_min")) c.u_min = j.at("u_min");
    if (j.contains("u_max")) c.u_max = j.at("u_max");
    if (j.contains("u_ratio")) c.u_ratio = j.at("u_ratio");
    if (j.contains("cells_per_axis")) c.cells_per_axis = j.at("cells_per_axis");
    if (j.contains("x_quality")) c.x_quality = j.at("x_quality");
    if (j.contains("worker_hint")) c.worker_hint = j.at("worker_hint");
    return c;
}

// ------------------------------------------------------------------
// CSV artifacts

inline std::string grid_header(const std::vector<Point>& grid) {
    std::string s;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i) s += ',';
        for (std::size_t k = 0; k < grid[i].size(); ++k) {
            if (k) s += ' ';
            s += format_double(grid[i][k]);
        }
    }
    return s;
}

// covariance matrix: header row of grid points, then K rows of K entries
inline void write_matrix_csv(const std::filesystem::path& path, const std::vector<Point>& grid,
                             const std::vector<double>& matrix) {
    const std::size_t K = grid.size();
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << grid_header(grid) << '\n';
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
            if (j) out << ',';
            out << format_double(matrix[i * K + j]);
        }
        out << '\n';
    }
}

// paths: header row of grid points, then one row per path
inline void write_paths_csv(const std::filesystem::path& path, const PathSample& s) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << grid_header(s.grid) << '\n';
    const std::size_t K = s.grid.size();
    for (long p = 0; p < s.n_paths; ++p) {
        for (std::size_t k = 0; k < K; ++k) {
            if (k) out << ',';
            out << format_double(s.at(p, k));
        }
        out << '\n';
    }
}

inline json sidecar_json(const PathSample& s) {
    return json{{"backend", s.provenance.backend},
                {"seed", s.provenance.seed},
                {"config", s.provenance.config},
                {"config_hash", fnv1a64(s.provenance.config)},
                {"u_min", s.provenance.u_min},
                {"u_max", s.provenance.u_max},
                {"bias_upper_tail", s.provenance.bias_upper_tail},
                {"bias_lower_tail", s.provenance.bias_lower_tail},
                {"cholesky_jitter", s.provenance.cholesky_jitter},
                {"n_cells_total", s.provenance.n_cells_total},
                {"n_cells_active", s.provenance.n_cells_active}};
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

// run manifest: configuration echo plus content hashes of every artifact
inline json manifest(const std::string& command, const json& config,
                     const std::vector<std::filesystem::path>& artifacts) {
    json arts = json::array();
    for (const auto& p : artifacts) {
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016" PRIx64,
                      static_cast<std::uint64_t>(hash_file(p)));
        arts.push_back(json{{"path", p.filename().string()},
                            {"fnv1a64", std::string(hex)},
                            {"bytes", std::filesystem::file_size(p)}});
    }
    return json{{"command", command}, {"config", config}, {"artifacts", arts},
                {"library", "selfsim"}, {"format_version", 1}};
}

}  // namespace selfsim::io
