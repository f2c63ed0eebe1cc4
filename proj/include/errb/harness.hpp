#pragma once

// Brute-force oracles, sampling-based empirical validation, instance
// serialization and scenario orchestration.
//
// Instance files are JSON with an explicit schema tag; reports carry the
// library version, the norm tag and the active tolerance profile so runs
// remain comparable. Sampling is box-uniform: the error-bound inequality is
// quantified over all of X, and boxes stress the corner directions where
// polyhedral residuals are extreme.

#include <array>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "errb/bounds.hpp"
#include "errb/cones.hpp"
#include "errb/duality.hpp"
#include "errb/functions.hpp"
#include "errb/geometry.hpp"
#include "errb/numerics.hpp"
#include "errb/rng.hpp"
#include "errb/version.hpp"

namespace errb {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Instance specification and serialization

struct SamplingSpec {
    double box_halfwidth = 10.0;
    int count = 10000;
    std::uint64_t seed = 1; // mandatory in files: reproducibility
};

struct InstanceSpec {
    ProblemInstance problem;
    SamplingSpec sampling;
    Json scenario; // optional per-file scenario configuration
};

namespace detail {

inline Vec parse_vec(const Json& j) {
    if (!j.is_array()) throw ParseError("expected a number array");
    Vec v;
    for (const auto& e : j) {
        if (!e.is_number()) throw ParseError("expected a number array");
        v.push_back(e.get<double>());
    }
    return v;
}

inline std::vector<Vec> parse_matrix(const Json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("expected a nonempty matrix");
    std::vector<Vec> m;
    for (const auto& row : j) m.push_back(parse_vec(row));
    return m;
}

inline ConeSpec parse_cone(const Json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "orthant") return ConeSpec::orthant(j.at("k").get<int>());
    if (type == "soc") return ConeSpec::second_order(j.at("k").get<int>());
    if (type == "polyhedral") return ConeSpec::polyhedral(parse_matrix(j.at("rows")));
    throw ParseError("unknown cone type '" + type + "'");
}

inline AffineMap parse_affine_map(const Json& j) {
    return AffineMap(parse_matrix(j.at("M")), parse_vec(j.at("q")));
}

inline ConvexFunctionSpec parse_function(const Json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "quadratic") {
        SymMatrix A = SymMatrix::from_rows(parse_matrix(j.at("A")));
        return ConvexFunctionSpec::quadratic(A, parse_vec(j.at("b")), j.at("c").get<double>());
    }
    if (type == "max_affine") {
        std::vector<MaxAffineRow> rows;
        for (const auto& r : j.at("rows"))
            rows.push_back({parse_vec(r.at("a")), r.at("beta").get<double>()});
        return ConvexFunctionSpec::max_affine(rows);
    }
    if (type == "scalarized")
        return ConvexFunctionSpec::scalarized(parse_affine_map(j.at("map")),
                                              parse_cone(j.at("cone")));
    throw ParseError("unknown function type '" + type + "'");
}

inline Json vec_to_json(const Vec& v) {
    Json j = Json::array();
    for (double x : v) j.push_back(x);
    return j;
}

inline Json matrix_to_json(const std::vector<Vec>& m) {
    Json j = Json::array();
    for (const auto& r : m) j.push_back(vec_to_json(r));
    return j;
}

inline Json cone_to_json(const ConeSpec& K) {
    Json j;
    switch (K.kind()) {
        case ConeKind::Orthant: j["type"] = "orthant"; j["k"] = K.k(); break;
        case ConeKind::SecondOrder: j["type"] = "soc"; j["k"] = K.k(); break;
        case ConeKind::PolyhedralH:
            j["type"] = "polyhedral";
            j["rows"] = matrix_to_json(K.rows());
            break;
    }
    return j;
}

inline Json function_to_json(const ConvexFunctionSpec& f) {
    Json j;
    if (f.is_quadratic()) {
        const auto& q = f.as_quadratic();
        j["type"] = "quadratic";
        std::vector<Vec> rows(q.A.dim(), Vec(q.A.dim()));
        for (int i = 0; i < q.A.dim(); ++i)
            for (int c = 0; c < q.A.dim(); ++c) rows[i][c] = q.A(i, c);
        j["A"] = matrix_to_json(rows);
        j["b"] = vec_to_json(q.b);
        j["c"] = q.c;
    } else if (f.is_max_affine()) {
        j["type"] = "max_affine";
        Json rows = Json::array();
        for (const auto& r : f.as_max_affine().rows) {
            Json row;
            row["a"] = vec_to_json(r.a);
            row["beta"] = r.beta;
            rows.push_back(row);
        }
        j["rows"] = rows;
    } else {
        const auto& s = f.as_scalarized();
        j["type"] = "scalarized";
        Json map;
        map["M"] = matrix_to_json(s.g.M);
        map["q"] = vec_to_json(s.g.q);
        j["map"] = map;
        j["cone"] = cone_to_json(s.K);
    }
    return j;
}

} // namespace detail

inline InstanceSpec parse_instance_json(const Json& j) {
    try {
        if (j.at("schema").get<std::string>() != "errb/1")
            throw ParseError("unsupported schema (expected errb/1)");
        InstanceSpec s;
        s.problem.name = j.at("name").get<std::string>();
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "scalar") {
            s.problem.scalar = true;
            s.problem.f = detail::parse_function(j.at("f"));
        } else if (kind == "vector") {
            s.problem.scalar = false;
            s.problem.g = detail::parse_affine_map(j.at("g"));
            s.problem.K = detail::parse_cone(j.at("cone"));
            if (s.problem.g->rows() != static_cast<std::size_t>(s.problem.K->k()))
                throw ParseError("map rows and cone dimension disagree");
        } else {
            throw ParseError("kind must be scalar or vector");
        }
        if (j.contains("slater_hint")) {
            Vec h = detail::parse_vec(j.at("slater_hint"));
            check_dim(h.size(), s.problem.dim(), "slater_hint");
            s.problem.slater_hint = h;
        }
        const Json& sm = j.at("sampling");
        s.sampling.box_halfwidth = sm.at("box_halfwidth").get<double>();
        s.sampling.count = sm.at("count").get<int>();
        s.sampling.seed = sm.at("seed").get<std::uint64_t>();
        if (s.sampling.box_halfwidth <= 0.0 || s.sampling.count <= 0)
            throw ParseError("sampling needs positive box_halfwidth and count");
        if (j.contains("scenario")) s.scenario = j.at("scenario");
        return s;
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(std::string("instance error: ") + e.what());
    } catch (const std::exception& e) {
        throw ParseError(std::string("malformed instance: ") + e.what());
    }
}

inline InstanceSpec load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return parse_instance_json(j);
}

inline Json instance_to_json(const InstanceSpec& s) {
    Json j;
    j["schema"] = "errb/1";
    j["name"] = s.problem.name;
    j["kind"] = s.problem.scalar ? "scalar" : "vector";
    if (s.problem.scalar) {
        j["f"] = detail::function_to_json(*s.problem.f);
    } else {
        Json g;
        g["M"] = detail::matrix_to_json(s.problem.g->M);
        g["q"] = detail::vec_to_json(s.problem.g->q);
        j["g"] = g;
        j["cone"] = detail::cone_to_json(*s.problem.K);
    }
    if (s.problem.slater_hint) j["slater_hint"] = detail::vec_to_json(*s.problem.slater_hint);
    Json sm;
    sm["box_halfwidth"] = s.sampling.box_halfwidth;
    sm["count"] = s.sampling.count;
    sm["seed"] = s.sampling.seed;
    j["sampling"] = sm;
    if (!s.scenario.is_null()) j["scenario"] = s.scenario;
    return j;
}

// ---------------------------------------------------------------------------
// Residual and solution-set access

inline double residual(const ProblemInstance& inst, const Vec& x) {
    if (inst.scalar) return plus_part(*inst.f, x);
    return dist_to_minus_cone(*inst.K, inst.g->apply(x)).d;
}

inline SetSpec solution_set(const ProblemInstance& inst,
                            const std::optional<Vec>& feasible = {}) {
    std::optional<Vec> hint = feasible ? feasible : inst.slater_hint;
    return SetSpec::level_set(inst.residual_function(), hint);
}

// ---------------------------------------------------------------------------
// Empirical validation

struct PlateauEntry {
    double radius = 0.0;
    double alpha = 0.0;
    bool no_positive_residual = false;
};

struct ValidationReport {
    double empirical_alpha = 0.0;
    Vec worst_witness;
    std::array<std::uint64_t, 32> ratio_histogram{};
    std::optional<double> certificate_alpha;
    std::optional<bool> sound;
    std::vector<PlateauEntry> plateau_trace;
    int positive_residuals = 0;
    int sample_count = 0;
    double radius = 0.0;
    std::uint64_t seed = 0;
    bool no_positive_residual = false;
};

namespace detail {

// one sample: the ratio d(x, S)/residual(x), or a negative sentinel when the
// residual is below the floor
inline double sample_ratio(const ProblemInstance& inst, const SetSpec& S, const Vec& x,
                           const Tolerances& tol) {
    double r = residual(inst, x);
    if (r <= tol.residual_floor) return -1.0;
    return project(S, x, tol).d / r;
}

// Deterministic parallel map over sample indices: each sample depends only on
// (seed, index), and the reduction runs in index order after the join.
inline std::vector<double> ratio_table(const ProblemInstance& inst, const SetSpec& S,
                                       double radius, int count, std::uint64_t seed, int threads,
                                       const Tolerances& tol) {
    std::vector<double> ratios(static_cast<std::size_t>(count), -1.0);
    const std::size_t m = inst.dim();
    auto work = [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(i));
            Vec x = box_point(rng, m, radius);
            ratios[static_cast<std::size_t>(i)] = sample_ratio(inst, S, x, tol);
        }
    };
    if (threads <= 1) {
        work(0, count);
    } else {
        std::vector<std::thread> pool;
        int chunk = (count + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            int lo = t * chunk, hi = std::min(count, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return ratios;
}

} // namespace detail

inline ValidationReport empirical_alpha(const ProblemInstance& inst, double radius, int count,
                                        std::uint64_t seed,
                                        std::optional<double> certificate_alpha = {},
                                        int threads = 1,
                                        const Tolerances& tol = Tolerances::defaults()) {
    if (!(radius > 0.0)) throw Error("empirical_alpha: radius must be positive");
    SetSpec S = solution_set(inst);
    std::vector<double> ratios = detail::ratio_table(inst, S, radius, count, seed, threads, tol);

    ValidationReport rep;
    rep.radius = radius;
    rep.sample_count = count;
    rep.seed = seed;
    rep.certificate_alpha = certificate_alpha;

    int best_idx = -1;
    for (int i = 0; i < count; ++i) {
        double r = ratios[static_cast<std::size_t>(i)];
        if (r < 0.0) continue;
        ++rep.positive_residuals;
        if (r > rep.empirical_alpha) {
            rep.empirical_alpha = r;
            best_idx = i;
        }
    }
    if (rep.positive_residuals == 0) {
        rep.no_positive_residual = true;
        return rep;
    }
    if (best_idx >= 0) {
        SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(best_idx));
        rep.worst_witness = box_point(rng, inst.dim(), radius);
    }
    if (rep.empirical_alpha > 0.0) {
        for (double r : ratios) {
            if (r < 0.0) continue;
            auto bin = static_cast<std::size_t>(r / rep.empirical_alpha * 32.0);
            rep.ratio_histogram[std::min<std::size_t>(bin, 31)]++;
        }
    }
    if (certificate_alpha)
        rep.sound = rep.empirical_alpha <= *certificate_alpha * (1.0 + 1e-12) + 1e-12;
    return rep;
}

// Growth study for the unbounded-quadratic regime (scalar convex quadratic, Slater,
// possibly unbounded solution set). Each trace entry reports the empirical
// constant over the union of all boxes sampled so far, which is nondecreasing
// by construction; a plateau is the empirical signature of a finite global
// constant.
inline ValidationReport plateau_study(const ProblemInstance& inst, const std::vector<double>& radii,
                                      int count, std::uint64_t seed, int threads = 1,
                                      const Tolerances& tol = Tolerances::defaults()) {
    if (!inst.scalar || !inst.f->is_quadratic())
        throw Unsupported("plateau_study: needs a scalar convex quadratic instance");
    SetSpec S = solution_set(inst);

    ValidationReport rep;
    rep.seed = seed;
    rep.sample_count = count;
    double running = 0.0;
    Vec witness;
    for (std::size_t j = 0; j < radii.size(); ++j) {
        std::uint64_t sub_seed = substream(seed, 0xBEEF00ULL + j).state;
        std::vector<double> ratios =
            detail::ratio_table(inst, S, radii[j], count, sub_seed, threads, tol);
        double local = 0.0;
        int best_idx = -1;
        int positives = 0;
        for (int i = 0; i < count; ++i) {
            double r = ratios[static_cast<std::size_t>(i)];
            if (r < 0.0) continue;
            ++positives;
            if (r > local) {
                local = r;
                best_idx = i;
            }
        }
        PlateauEntry e;
        e.radius = radii[j];
        e.no_positive_residual = positives == 0;
        if (local > running && best_idx >= 0) {
            running = local;
            SplitMix64 rng = substream(sub_seed, static_cast<std::uint64_t>(best_idx));
            witness = box_point(rng, inst.dim(), radii[j]);
        }
        e.alpha = running;
        rep.plateau_trace.push_back(e);
        rep.positive_residuals += positives;
        rep.radius = radii[j];
    }
    rep.empirical_alpha = running;
    rep.worst_witness = witness;
    rep.no_positive_residual = rep.positive_residuals == 0;
    return rep;
}

// ---------------------------------------------------------------------------
// Brute-force oracles (dimension <= 3)

struct OracleValue {
    double value = -kInf;
    bool max_on_boundary = false; // conjugate only: sup escaped toward the box edge
};

namespace detail {

template <class F>
inline void for_grid(std::size_t m, double halfwidth, double resolution, F&& fn) {
    const auto n = static_cast<std::size_t>(2.0 * halfwidth / resolution) + 1;
    Vec x(m);
    std::vector<std::size_t> idx(m, 0);
    for (;;) {
        for (std::size_t d = 0; d < m; ++d)
            x[d] = -halfwidth + resolution * static_cast<double>(idx[d]);
        fn(const_cast<const Vec&>(x), idx, n);
        std::size_t d = 0;
        for (; d < m; ++d) {
            if (++idx[d] < n) break;
            idx[d] = 0;
        }
        if (d == m) break;
    }
}

} // namespace detail

// Conjugate oracle over a shared f-grid, amortized across many y queries.
inline std::vector<OracleValue> oracle_conjugate_batch(const ConvexFunctionSpec& f,
                                                       const std::vector<Vec>& ys,
                                                       double halfwidth, double resolution) {
    const std::size_t m = f.dim();
    if (m > 3) throw TooHighDimension("oracle_conjugate: dimension > 3");
    std::vector<Vec> grid;
    std::vector<double> fvals;
    std::vector<bool> boundary;
    detail::for_grid(m, halfwidth, resolution,
                     [&](const Vec& x, const std::vector<std::size_t>& idx, std::size_t n) {
                         grid.push_back(x);
                         fvals.push_back(eval(f, x));
                         bool edge = false;
                         for (std::size_t d = 0; d < m; ++d)
                             if (idx[d] == 0 || idx[d] + 1 == n) edge = true;
                         boundary.push_back(edge);
                     });
    std::vector<OracleValue> out(ys.size());
    for (std::size_t q = 0; q < ys.size(); ++q) {
        check_dim(ys[q].size(), m, "oracle_conjugate");
        OracleValue best;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double v = dot(ys[q], grid[i]) - fvals[i];
            if (i == 0) {
                best.value = v;
                best.max_on_boundary = boundary[i];
                continue;
            }
            double tie = 1e-12 * (1.0 + std::abs(best.value));
            if (v > best.value + tie) {
                best.value = v;
                best.max_on_boundary = boundary[i];
            } else if (v >= best.value - tie && best.max_on_boundary && !boundary[i]) {
                // flat direction: an interior point attains the same value,
                // so the sup is not escaping
                best.max_on_boundary = false;
            }
        }
        out[q] = best;
    }
    return out;
}

inline OracleValue oracle_conjugate(const ConvexFunctionSpec& f, const Vec& y, double halfwidth,
                                    double resolution) {
    return oracle_conjugate_batch(f, {y}, halfwidth, resolution)[0];
}

inline double oracle_distance(const SetSpec& S, const Vec& x, double halfwidth,
                              double resolution, const Tolerances& tol = Tolerances::defaults()) {
    const std::size_t m = S.dim();
    if (m > 3) throw TooHighDimension("oracle_distance: dimension > 3");
    check_dim(x.size(), m, "oracle_distance");
    double best = kInf;
    detail::for_grid(m, halfwidth, resolution,
                     [&](const Vec& s, const std::vector<std::size_t>&, std::size_t) {
                         if (contains(S, s, tol)) best = std::min(best, norm2(sub(x, s)));
                     });
    if (best == kInf) throw EmptyGrid("oracle_distance: no feasible grid point");
    return best;
}

} // namespace errb
