#pragma once

// Two sampling backends and their statistical validation.
//
// The white-noise backends partition (a window of) R^d x [u_min, u_max] into
// cells (geometric spacing in u, uniform in x per level), lump the Gaussian
// noise into one standard normal per cell, and evaluate the field functional
// at cell centroids with the exact cell mass:
//     X(t_k) = sum_i <mu_{t_k}, tau_{z_i} h> sqrt(nu(cell_i)) xi_i.
// Normals are counter-based in (seed, cell index, path index), so results
// are bitwise reproducible for any worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "selfsim/errors.hpp"
#include "selfsim/kernel.hpp"
#include "selfsim/measure.hpp"
#include "selfsim/membrane.hpp"
#include "selfsim/quadrature.hpp"
#include "selfsim/rng.hpp"

namespace selfsim {

struct SimConfig {
    std::uint64_t seed = 1;
    long n_paths = 1000;
    double u_min = 0.0;          // 0: default 1e-3 * support diameter
    double u_max = 0.0;          // 0: default 1e+3 * support diameter
    double u_ratio = 1.05;       // geometric spacing of radius levels
    int cells_per_axis = 512;    // per-level spatial resolution floor
    double x_quality = 8.0;      // cells additionally resolve u/x_quality
    int worker_hint = 1;         // threads; never affects results
    double bias_tolerance = quad::kInf;  // gate on the a-priori truncation bias
    std::optional<std::pair<Point, Point>> spatial_window;  // default: derived

    std::string summary(const std::string& backend) const {
        std::string s = backend + ";seed=" + std::to_string(seed) +
                        ";n=" + std::to_string(n_paths) + ";umin=" + std::to_string(u_min) +
                        ";umax=" + std::to_string(u_max) + ";ratio=" + std::to_string(u_ratio) +
                        ";cpa=" + std::to_string(cells_per_axis) +
                        ";q=" + std::to_string(x_quality);
        return s;
    }
};

struct PathProvenance {
    std::string backend;
    std::string config;
    std::uint64_t seed = 0;
    double u_min = 0.0, u_max = 0.0;
    double bias_upper_tail = 0.0;  // a-priori variance bias from u > u_max
    double bias_lower_tail = 0.0;  // and from u < u_min
    double cholesky_jitter = 0.0;
    std::uint64_t n_cells_total = 0;
    std::uint64_t n_cells_active = 0;
};

struct PathSample {
    std::vector<Point> grid;
    long n_paths = 0;
    std::vector<double> values;  // row-major: values[p * grid.size() + k]
    PathProvenance provenance;

    double at(long p, std::size_t k) const { return values[p * grid.size() + k]; }
};

// ------------------------------------------------------------------
// cell basis

struct CellBasis {
    std::size_t n_grid = 0;
    std::vector<std::uint64_t> cell_index;  // active cells, ascending
    std::vector<double> amplitude;          // n_active x n_grid, cell-major
    std::uint64_t n_cells_total = 0;
    double nu_total = 0.0;  // control-measure mass of the full partition
    double bias_upper = 0.0, bias_lower = 0.0;

    std::size_t active() const { return cell_index.size(); }

    // exact second moments of the discretized field: sum_i a_i a_i^T
    std::vector<double> covariance() const {
        std::vector<double> c(n_grid * n_grid, 0.0);
        for (std::size_t i = 0; i < active(); ++i) {
            const double* a = amplitude.data() + i * n_grid;
            for (std::size_t r = 0; r < n_grid; ++r)
                for (std::size_t s = 0; s < n_grid; ++s) c[r * n_grid + s] += a[r] * a[s];
        }
        return c;
    }
};

namespace detail {

struct Level {
    double u_lo, u_hi;
    double u_mid;
    double nu_u;  // int_{u_lo}^{u_hi} u^{-beta-1} du
    std::vector<double> x_lo, x_width;  // per axis
    std::vector<std::uint64_t> n_axis;
    std::uint64_t cells = 0;
    std::uint64_t offset = 0;
};

inline double nu_u_integral(double a, double b, double beta) {
    if (beta == 0.0) return std::log(b / a);
    return (std::pow(a, -beta) - std::pow(b, -beta)) / beta;
}

inline std::vector<Level> build_levels(double u_min, double u_max, double ratio, double beta,
                                       int d, const Point& wlo, const Point& whi,
                                       double feature_radius, int cells_per_axis,
                                       double x_quality, bool pad_window) {
    if (!(u_min > 0.0 && u_max > u_min)) throw NonAdmissible("empty radius truncation");
    if (!(ratio > 1.0)) throw NonAdmissible("u_ratio must exceed 1");
    std::vector<Level> levels;
    std::uint64_t offset = 0;
    double lo = u_min;
    while (lo < u_max) {
        Level lv;
        lv.u_lo = lo;
        lv.u_hi = std::min(lo * ratio, u_max);
        lv.u_mid = 0.5 * (lv.u_lo + lv.u_hi);
        lv.nu_u = nu_u_integral(lv.u_lo, lv.u_hi, beta);
        lv.offset = offset;
        lv.cells = 1;
        for (int k = 0; k < d; ++k) {
            const double pad = pad_window ? lv.u_hi * feature_radius : 0.0;
            const double a = wlo[k] - pad, b = whi[k] + pad;
            const double width = b - a;
            const double resolve = lv.u_lo * feature_radius / x_quality;
            std::uint64_t n = std::max<std::uint64_t>(
                cells_per_axis, static_cast<std::uint64_t>(std::ceil(width / resolve)));
            n = std::min<std::uint64_t>(n, 1ull << 40);
            lv.x_lo.push_back(a);
            lv.x_width.push_back(width / static_cast<double>(n));
            lv.n_axis.push_back(n);
            lv.cells *= n;
        }
        offset += lv.cells;
        levels.push_back(std::move(lv));
        lo = lv.u_hi;
    }
    return levels;
}

// index ranges of cells whose centroid lies within `reach` of point y
inline std::pair<std::uint64_t, std::uint64_t> axis_range(const Level& lv, int axis, double y,
                                                          double reach) {
    const double w = lv.x_width[axis];
    const double lo = lv.x_lo[axis];
    double a = (y - reach - lo) / w - 0.5;
    double b = (y + reach - lo) / w - 0.5;
    const double n = static_cast<double>(lv.n_axis[axis]);
    a = std::clamp(std::ceil(a), 0.0, n);
    b = std::clamp(std::floor(b) + 1.0, 0.0, n);
    if (b < a) b = a;
    return {static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b)};
}

}  // namespace detail

// ------------------------------------------------------------------
// shot-noise backend

namespace detail {

inline double pulse_pairing(const SignedMeasure& mu, const PulseFunction& h, const Point& xc,
                            double uc) {
    // <mu, tau_z h> with z = (xc, uc)
    const int d = mu.dimension;
    double v = 0.0;
    double buf[3];
    for (const auto& a : mu.atoms) {
        for (int k = 0; k < d; ++k) buf[k] = (a.location[k] - xc[k]) / uc;
        v += a.weight * h.evaluate(std::span<const double>(buf, d));
    }
    if (!mu.densities.empty()) {
        if (d != 1) throw DimensionUnsupported("density pulse pairing implemented for d=1");
        quad::Options opt;
        opt.rel_tol = 1e-8;
        opt.abs_tol = 1e-13;
        const double R = h.support_radius() * uc;
        for (const auto& c : mu.densities) {
            double a = xc[0] - R, b = xc[0] + R;
            if (c.support.bounded()) {
                auto [slo, shi] = c.support.axis_bounds(0);
                a = std::max(a, slo);
                b = std::min(b, shi);
            }
            if (!(a < b)) continue;
            std::vector<quad::SingularPoint> pts;
            for (const auto& sg : c.singularities) pts.push_back({sg.location[0], sg.exponent});
            v += quad::integrate_with_singularities(
                [&](double y) {
                    const double ys[1] = {y};
                    const double hz[1] = {(y - xc[0]) / uc};
                    return c.evaluate(std::span<const double>(ys, 1)) *
                           h.evaluate(std::span<const double>(hz, 1));
                },
                a, b, pts, opt);
        }
    }
    return v;
}

// exact u-tail of the covariance of atomic measures, used as the a-priori
// truncation bias: int_T u^{d-beta-1} sum_{ij} w_i w_j V_h(|y_i-y_j|/u) du,
// with the V_h(0)-term cancelled for mass-zero measures.
inline double atomic_u_tail(const SignedMeasure& mu, const PulseFunction& h, double beta,
                            bool upper, double cut) {
    if (!mu.densities.empty()) return std::numeric_limits<double>::quiet_NaN();
    const int d = mu.dimension;
    double mass = 0.0;
    for (const auto& a : mu.atoms) mass += a.weight;
    const bool mass_zero = std::abs(mass) < 1e-12;
    auto g = [&](double u) {
        double s = 0.0;
        for (const auto& a : mu.atoms)
            for (const auto& b : mu.atoms) {
                const double r = distance(a.location, b.location) / u;
                s += a.weight * b.weight * h.autocorrelation(r);
            }
        return std::pow(u, d - beta - 1.0) * s;
    };
    quad::Options opt;
    opt.rel_tol = 1e-6;
    opt.abs_tol = 1e-14;
    opt.throw_on_failure = false;
    if (upper) {
        // for mass-zero measures the integrand decays like u^{d-beta-2}
        const double decay = beta + (mass_zero ? 2.0 : 1.0) - d;
        if (!(decay > 1.0 - 1e-9)) return std::numeric_limits<double>::quiet_NaN();
        return std::abs(quad::integrate_semi_infinite(g, cut, {}, std::max(decay, 1.01), opt));
    }
    return std::abs(quad::integrate_with_singularities(
        g, 0.0, cut, {{0.0, std::max(0.0, beta + 1.0 - d)}}, opt));
}

}  // namespace detail

// Discretize X_h(mu) = int <mu, tau_z h> M_beta(dz) for the given family of
// indexing measures (one per grid label).
inline CellBasis shotnoise_basis(const PulseFunction& h, double beta,
                                 const std::vector<SignedMeasure>& measures,
                                 const SimConfig& cfg) {
    if (measures.empty()) throw NonAdmissible("no indexing measures");
    const int d = measures.front().dimension;
    if (d > 2) throw DimensionUnsupported("shot-noise sampling implemented for d <= 2");
    const bool first_range = (beta > d && beta < 2.0 * d);
    const bool second_range = (beta > d - 1 && beta < d);
    if (!first_range && !second_range)
        throw NonAdmissible("beta must lie in (d-1,d) or (d,2d)");
    if (!h.square_integrable()) throw NonAdmissible("pulse must be square integrable");
    if (!std::isfinite(h.support_radius()))
        throw NonAdmissible("pulse needs an effective support radius for windowing");
    if (second_range) {
        for (const auto& m : measures) {
            const double mass = total_mass(m);
            if (std::abs(mass) > 1e-8)
                throw NonAdmissible("measures must lie in M_1 for d-1 < beta < d");
        }
    }

    // support box of all indexing measures
    Point slo(d, quad::kInf), shi(d, -quad::kInf);
    bool any_support = false;
    for (const auto& m : measures) {
        for (const auto& a : m.atoms)
            for (int k = 0; k < d; ++k) {
                slo[k] = std::min(slo[k], a.location[k]);
                shi[k] = std::max(shi[k], a.location[k]);
                any_support = true;
            }
        for (const auto& c : m.densities) {
            if (!c.support.bounded())
                throw NonAdmissible("sampled measures need bounded support");
            for (int k = 0; k < d; ++k) {
                auto [a, b] = c.support.axis_bounds(k);
                slo[k] = std::min(slo[k], a);
                shi[k] = std::max(shi[k], b);
                any_support = true;
            }
        }
    }
    if (!any_support) {
        slo.assign(d, 0.0);
        shi.assign(d, 0.0);
    }
    double diam = 1e-6;
    for (int k = 0; k < d; ++k) diam = std::max(diam, shi[k] - slo[k]);

    SimConfig c = cfg;
    if (c.u_min <= 0.0) c.u_min = 1e-3 * diam;
    if (c.u_max <= 0.0) c.u_max = 1e3 * diam;
    if (c.spatial_window) {
        slo = c.spatial_window->first;
        shi = c.spatial_window->second;
    }

    const double rh = h.support_radius();
    auto levels = detail::build_levels(c.u_min, c.u_max, c.u_ratio, beta, d, slo, shi, rh,
                                       c.cells_per_axis, c.x_quality, !c.spatial_window);

    CellBasis basis;
    basis.n_grid = measures.size();
    const std::size_t K = basis.n_grid;
    std::vector<double> amps(K);
    Point xc(d);
    for (const auto& lv : levels) {
        basis.n_cells_total += lv.cells;
        double cell_area = 1.0;
        for (int k = 0; k < d; ++k)
            cell_area *= lv.x_width[k] * static_cast<double>(lv.n_axis[k]);
        basis.nu_total += lv.nu_u * cell_area;
        const double reach = lv.u_hi * rh + 0.5 * lv.x_width[0];
        // candidate cells: near any atom or any density support
        auto visit = [&](std::uint64_t flat) {
            // decode flat -> centroid
            std::uint64_t rem = flat;
            for (int k = d - 1; k >= 0; --k) {
                const std::uint64_t ix = rem % lv.n_axis[k];
                rem /= lv.n_axis[k];
                xc[k] = lv.x_lo[k] + (static_cast<double>(ix) + 0.5) * lv.x_width[k];
            }
            const double nu_cell = [&] {
                double a = lv.nu_u;
                for (int k = 0; k < d; ++k) a *= lv.x_width[k];
                return a;
            }();
            const double root = std::sqrt(nu_cell);
            bool any = false;
            for (std::size_t m = 0; m < K; ++m) {
                const double v = detail::pulse_pairing(measures[m], h, xc, lv.u_mid) * root;
                amps[m] = v;
                any = any || v != 0.0;
            }
            if (any) {
                basis.cell_index.push_back(lv.offset + flat);
                basis.amplitude.insert(basis.amplitude.end(), amps.begin(), amps.end());
            }
        };
        if (d == 1) {
            std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
            auto add_range = [&](double y) {
                ranges.push_back(detail::axis_range(lv, 0, y, reach));
            };
            for (const auto& m : measures) {
                for (const auto& a : m.atoms) add_range(a.location[0]);
                for (const auto& cdens : m.densities) {
                    auto [a, b] = cdens.support.axis_bounds(0);
                    auto ra = detail::axis_range(lv, 0, 0.5 * (a + b), reach + 0.5 * (b - a));
                    ranges.push_back(ra);
                }
            }
            std::sort(ranges.begin(), ranges.end());
            std::uint64_t cursor = 0;
            for (const auto& r : ranges) {
                const std::uint64_t start = std::max(cursor, r.first);
                for (std::uint64_t ix = start; ix < r.second; ++ix) visit(ix);
                cursor = std::max(cursor, r.second);
            }
        } else {
            // d == 2: union of per-atom boxes
            std::vector<std::uint64_t> flats;
            for (const auto& m : measures)
                for (const auto& a : m.atoms) {
                    auto rx = detail::axis_range(lv, 0, a.location[0], reach);
                    auto ry = detail::axis_range(lv, 1, a.location[1], reach);
                    for (std::uint64_t ix = rx.first; ix < rx.second; ++ix)
                        for (std::uint64_t iy = ry.first; iy < ry.second; ++iy)
                            flats.push_back(ix * lv.n_axis[1] + iy);
                }
            std::sort(flats.begin(), flats.end());
            flats.erase(std::unique(flats.begin(), flats.end()), flats.end());
            for (auto fl : flats) visit(fl);
        }
    }

    // a-priori truncation bias (exact atomic tails; NaN when not available)
    double up = 0.0, low = 0.0;
    for (const auto& m : measures) {
        up = std::max(up, detail::atomic_u_tail(m, h, beta, true, c.u_max));
        low = std::max(low, detail::atomic_u_tail(m, h, beta, false, c.u_min));
    }
    basis.bias_upper = up;
    basis.bias_lower = low;
    if (std::isfinite(cfg.bias_tolerance) && (up + low) > cfg.bias_tolerance)
        throw TruncationTooCoarse("a-priori truncation bias " + std::to_string(up + low) +
                                  " exceeds tolerance");
    return basis;
}

// ------------------------------------------------------------------
// hard-membrane backend

inline CellBasis hard_membrane_basis(const DomainSpec& D, double beta,
                                     const std::vector<Point>& grid, const SimConfig& cfg) {
    const int d = D.dimension;
    if (d > 2) throw DimensionUnsupported("hard-membrane sampling implemented for d <= 2");
    if (!(beta < d)) throw NonAdmissible("hard membrane requires beta < d");
    for (const auto& t : grid)
        if (static_cast<int>(t.size()) != d || !D.contains(t))
            throw NonAdmissible("grid must lie in the closed domain");

    SimConfig c = cfg;
    const double sup_r = D.sup_inradius();
    if (c.u_min <= 0.0) c.u_min = 1e-3 * D.diameter();
    // u_max beyond the largest inscribed ball is exact truncation
    if (c.u_max <= 0.0 || c.u_max > sup_r) c.u_max = sup_r;
    auto [wlo, whi] = D.bounding_box();
    auto levels = detail::build_levels(c.u_min, c.u_max, c.u_ratio, beta, d, wlo, whi, 1.0,
                                       c.cells_per_axis, c.x_quality, false);

    CellBasis basis;
    basis.n_grid = grid.size();
    const std::size_t K = basis.n_grid;
    std::vector<double> amps(K);
    Point xc(d);
    for (const auto& lv : levels) {
        basis.n_cells_total += lv.cells;
        double cell_area = 1.0;
        for (int k = 0; k < d; ++k)
            cell_area *= lv.x_width[k] * static_cast<double>(lv.n_axis[k]);
        basis.nu_total += lv.nu_u * cell_area;
        const double reach = lv.u_hi + 0.5 * lv.x_width[0];
        auto visit = [&](std::uint64_t flat) {
            std::uint64_t rem = flat;
            for (int k = d - 1; k >= 0; --k) {
                const std::uint64_t ix = rem % lv.n_axis[k];
                rem /= lv.n_axis[k];
                xc[k] = lv.x_lo[k] + (static_cast<double>(ix) + 0.5) * lv.x_width[k];
            }
            // thinning indicator at the centroid: B(xc, u_mid) inside D
            if (D.inradius_at(xc) < lv.u_mid) return;
            double nu_cell = lv.nu_u;
            for (int k = 0; k < d; ++k) nu_cell *= lv.x_width[k];
            const double root = std::sqrt(nu_cell);
            bool any = false;
            for (std::size_t m = 0; m < K; ++m) {
                const double v = distance(grid[m], xc) <= lv.u_mid ? root : 0.0;
                amps[m] = v;
                any = any || v != 0.0;
            }
            if (any) {
                basis.cell_index.push_back(lv.offset + flat);
                basis.amplitude.insert(basis.amplitude.end(), amps.begin(), amps.end());
            }
        };
        if (d == 1) {
            std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
            for (const auto& t : grid) ranges.push_back(detail::axis_range(lv, 0, t[0], reach));
            std::sort(ranges.begin(), ranges.end());
            std::uint64_t cursor = 0;
            for (const auto& r : ranges) {
                const std::uint64_t start = std::max(cursor, r.first);
                for (std::uint64_t ix = start; ix < r.second; ++ix) visit(ix);
                cursor = std::max(cursor, r.second);
            }
        } else {
            std::vector<std::uint64_t> flats;
            for (const auto& t : grid) {
                auto rx = detail::axis_range(lv, 0, t[0], reach);
                auto ry = detail::axis_range(lv, 1, t[1], reach);
                for (std::uint64_t ix = rx.first; ix < rx.second; ++ix)
                    for (std::uint64_t iy = ry.first; iy < ry.second; ++iy)
                        flats.push_back(ix * lv.n_axis[1] + iy);
            }
            std::sort(flats.begin(), flats.end());
            flats.erase(std::unique(flats.begin(), flats.end()), flats.end());
            for (auto fl : flats) visit(fl);
        }
    }
    // u_max is exact here; the u_min tail is bounded by the covered ball mass
    basis.bias_upper = 0.0;
    basis.bias_lower = unit_ball_volume(d) * std::pow(c.u_min, d - beta) / (d - beta);
    if (std::isfinite(cfg.bias_tolerance) &&
        (basis.bias_upper + basis.bias_lower) > cfg.bias_tolerance)
        throw TruncationTooCoarse("a-priori truncation bias exceeds tolerance");
    return basis;
}

// ------------------------------------------------------------------
// path generation

namespace detail {

inline void accumulate_block(const CellBasis& basis, std::uint64_t seed, long p_begin,
                             long p_end, std::vector<double>& values, std::size_t K) {
    // one normal per (cell, path); each Philox pair serves paths 2q and 2q+1
    auto axpy = [&](const double* a, long p, double xi) {
        double* row = values.data() + static_cast<std::size_t>(p) * K;
        for (std::size_t k = 0; k < K; ++k) row[k] += a[k] * xi;
    };
    for (std::size_t i = 0; i < basis.active(); ++i) {
        const double* a = basis.amplitude.data() + i * K;
        const std::uint64_t stream = basis.cell_index[i];
        long p = p_begin;
        if (p % 2 != 0 && p < p_end) {
            axpy(a, p, rng::normal_pair(seed, stream, static_cast<std::uint64_t>(p) / 2).second);
            ++p;
        }
        for (; p + 1 < p_end; p += 2) {
            const auto pair = rng::normal_pair(seed, stream, static_cast<std::uint64_t>(p) / 2);
            axpy(a, p, pair.first);
            axpy(a, p + 1, pair.second);
        }
        if (p < p_end)
            axpy(a, p, rng::normal_pair(seed, stream, static_cast<std::uint64_t>(p) / 2).first);
    }
}

inline PathSample sample_from_basis(const CellBasis& basis, std::vector<Point> grid,
                                    const SimConfig& cfg, const std::string& backend) {
    PathSample out;
    out.grid = std::move(grid);
    out.n_paths = cfg.n_paths;
    const std::size_t K = basis.n_grid;
    out.values.assign(static_cast<std::size_t>(cfg.n_paths) * K, 0.0);
    const int workers = std::max(1, cfg.worker_hint);
    if (workers == 1) {
        accumulate_block(basis, cfg.seed, 0, cfg.n_paths, out.values, K);
    } else {
        // disjoint path blocks; identical per-(cell,path) normals regardless
        // of the partition
        std::vector<std::thread> pool;
        const long chunk = (cfg.n_paths + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const long b = w * chunk;
            const long e = std::min<long>(cfg.n_paths, b + chunk);
            if (b >= e) break;
            pool.emplace_back([&, b, e] {
                accumulate_block(basis, cfg.seed, b, e, out.values, K);
            });
        }
        for (auto& th : pool) th.join();
    }
    out.provenance.backend = backend;
    out.provenance.config = cfg.summary(backend);
    out.provenance.seed = cfg.seed;
    out.provenance.bias_upper_tail = basis.bias_upper;
    out.provenance.bias_lower_tail = basis.bias_lower;
    out.provenance.n_cells_total = basis.n_cells_total;
    out.provenance.n_cells_active = basis.active();
    return out;
}

}  // namespace detail

// Sample the shot-noise field at the indexing measures `measures` (labelled
// by `grid` for bookkeeping).
inline PathSample shotnoise_sample(const PulseFunction& h, double beta,
                                   const std::vector<SignedMeasure>& measures,
                                   std::vector<Point> grid, const SimConfig& cfg) {
    CellBasis basis = shotnoise_basis(h, beta, measures, cfg);
    SimConfig c = cfg;
    PathSample s = detail::sample_from_basis(basis, std::move(grid), c, "shotnoise");
    s.provenance.u_min = c.u_min;
    s.provenance.u_max = c.u_max;
    return s;
}

inline PathSample hard_membrane_sample(const DomainSpec& D, double beta,
                                       const std::vector<Point>& grid, const SimConfig& cfg) {
    CellBasis basis = hard_membrane_basis(D, beta, grid, cfg);
    return detail::sample_from_basis(basis, grid, cfg, "hard-membrane");
}

// ------------------------------------------------------------------
// Cholesky backend

// Exact sampling from a covariance builder on a finite grid.  The Gram matrix
// gets a jitter ladder delta in {1e-12..1e-6} (times the max diagonal) before
// factorization; the first successful delta is recorded.
inline PathSample cholesky_sample(const std::function<double(const Point&, const Point&)>& cov,
                                  const std::vector<Point>& grid, long n_paths,
                                  std::uint64_t seed) {
    const std::size_t K = grid.size();
    std::vector<double> gram(K * K);
    double max_diag = 0.0;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = cov(grid[i], grid[j]);
            gram[i * K + j] = v;
            gram[j * K + i] = v;
            if (i == j) max_diag = std::max(max_diag, std::abs(v));
        }
    std::vector<double> chol;
    double used_delta = 0.0;
    bool ok = false;
    for (double delta = 1e-12; delta <= 1.0000001e-6; delta *= 10.0) {
        chol.assign(gram.begin(), gram.end());
        const double bump = delta * max_diag;
        for (std::size_t i = 0; i < K; ++i) chol[i * K + i] += bump;
        ok = true;
        for (std::size_t j = 0; j < K && ok; ++j) {
            double diag = chol[j * K + j];
            for (std::size_t k = 0; k < j; ++k) diag -= chol[j * K + k] * chol[j * K + k];
            if (!(diag > 0.0)) {
                // a zero column is legitimate for degenerate covariances
                bool zero_col = true;
                for (std::size_t i = j; i < K && zero_col; ++i) {
                    double v = chol[i * K + j];
                    for (std::size_t k = 0; k < j; ++k) v -= chol[i * K + k] * chol[j * K + k];
                    if (std::abs(v) > 1e-14 * std::max(1.0, max_diag)) zero_col = false;
                }
                if (zero_col && diag > -1e-12 * std::max(1.0, max_diag)) {
                    chol[j * K + j] = 0.0;
                    for (std::size_t i = j + 1; i < K; ++i) chol[i * K + j] = 0.0;
                    continue;
                }
                ok = false;
                break;
            }
            const double root = std::sqrt(diag);
            chol[j * K + j] = root;
            for (std::size_t i = j + 1; i < K; ++i) {
                double v = chol[i * K + j];
                for (std::size_t k = 0; k < j; ++k) v -= chol[i * K + k] * chol[j * K + k];
                chol[i * K + j] = v / root;
            }
        }
        if (ok) {
            used_delta = delta;
            break;
        }
    }
    if (!ok)
        throw NotPositiveSemidefinite(
            "jitter ladder exhausted; covariance builder is inconsistent");
    // zero the strict upper triangle
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i + 1; j < K; ++j) chol[i * K + j] = 0.0;

    PathSample out;
    out.grid = grid;
    out.n_paths = n_paths;
    out.values.assign(static_cast<std::size_t>(n_paths) * K, 0.0);
    std::vector<double> xi(K);
    for (long p = 0; p < n_paths; ++p) {
        for (std::size_t k = 0; k < K; ++k)
            xi[k] = rng::normal(seed, static_cast<std::uint64_t>(k),
                                static_cast<std::uint64_t>(p));
        double* row = out.values.data() + static_cast<std::size_t>(p) * K;
        for (std::size_t i = 0; i < K; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k <= i; ++k) acc += chol[i * K + k] * xi[k];
            row[i] = acc;
        }
    }
    out.provenance.backend = "cholesky";
    out.provenance.seed = seed;
    out.provenance.cholesky_jitter = used_delta;
    out.provenance.config = "cholesky;seed=" + std::to_string(seed) +
                            ";n=" + std::to_string(n_paths) + ";delta=" + std::to_string(used_delta);
    return out;
}

// ------------------------------------------------------------------
// estimation and validation

struct EmpiricalCovariance {
    std::size_t n_grid = 0;
    long n = 0;
    std::vector<double> moments;          // K x K zero-mean second moments
    std::vector<double> standard_errors;  // same shape

    double at(std::size_t i, std::size_t j) const { return moments[i * n_grid + j]; }
    double se(std::size_t i, std::size_t j) const { return standard_errors[i * n_grid + j]; }
};

// Zero-mean second-moment estimator (the sampled processes are centered, so
// no mean subtraction); standard errors from the Gaussian fourth-moment
// formula SE^2 = (C_ss C_tt + C_st^2)/n.
inline EmpiricalCovariance empirical_covariance(const PathSample& p) {
    if (p.n_paths < 2) throw ParameterOutOfRange("need at least two paths");
    const std::size_t K = p.grid.size();
    EmpiricalCovariance e;
    e.n_grid = K;
    e.n = p.n_paths;
    e.moments.assign(K * K, 0.0);
    for (long q = 0; q < p.n_paths; ++q) {
        const double* row = p.values.data() + static_cast<std::size_t>(q) * K;
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j <= i; ++j) e.moments[i * K + j] += row[i] * row[j];
    }
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            e.moments[i * K + j] /= static_cast<double>(p.n_paths);
            e.moments[j * K + i] = e.moments[i * K + j];
        }
    e.standard_errors.assign(K * K, 0.0);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            const double v = (e.at(i, i) * e.at(j, j) + e.at(i, j) * e.at(i, j)) /
                             static_cast<double>(p.n_paths);
            e.standard_errors[i * K + j] = std::sqrt(std::max(v, 0.0));
        }
    return e;
}

struct ValidationEntry {
    std::size_t i = 0, j = 0;
    double empirical = 0.0, exact = 0.0, z = 0.0;
};

struct ValidationReport {
    bool pass = false;
    double scale = 1.0;
    double max_abs_z = 0.0;
    std::vector<ValidationEntry> worst;
};

// Compare an empirical covariance against an exact matrix entrywise in
// z-score units; optionally fit a single scalar (the paper's "const") by
// least squares first.
inline ValidationReport validate(const EmpiricalCovariance& emp,
                                 const std::vector<double>& exact, double z_max,
                                 bool allow_scale_fit) {
    const std::size_t K = emp.n_grid;
    if (exact.size() != K * K) throw ParameterOutOfRange("matrix shapes differ");
    ValidationReport rep;
    double num = 0.0, den = 0.0;
    if (allow_scale_fit) {
        for (std::size_t i = 0; i < K * K; ++i) {
            num += emp.moments[i] * exact[i];
            den += exact[i] * exact[i];
        }
        rep.scale = den > 0.0 ? num / den : 1.0;
    }
    std::vector<ValidationEntry> entries;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            ValidationEntry e;
            e.i = i;
            e.j = j;
            e.empirical = emp.at(i, j);
            e.exact = rep.scale * exact[i * K + j];
            const double se = emp.se(i, j);
            const double diff = e.empirical - e.exact;
            e.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : quad::kInf);
            entries.push_back(e);
            rep.max_abs_z = std::max(rep.max_abs_z, std::abs(e.z));
        }
    std::sort(entries.begin(), entries.end(), [](const ValidationEntry& a, const ValidationEntry& b) {
        return std::abs(a.z) > std::abs(b.z);
    });
    entries.resize(std::min<std::size_t>(entries.size(), 5));
    rep.worst = std::move(entries);
    rep.pass = rep.max_abs_z <= z_max;
    return rep;
}

}  // namespace selfsim
