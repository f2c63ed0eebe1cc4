#pragma once

// Solution-set geometry: membership, projection/distance, support function,
// vertex enumeration, diameter and boundedness for the representable convex
// sets:
//   LevelSet    S = {x : f(x) <= 0} for a ConvexFunctionSpec f
//   PolytopeV   conv{v_1..v_p}
//   PolyhedronH {x : <a_i, x> <= beta_i}
//
// Level sets certify nonemptiness with a stored feasible point, supplied at
// construction or found by subgradient descent.

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "errb/functions.hpp"
#include "errb/numerics.hpp"
#include "errb/rng.hpp"

namespace errb {

// ---------------------------------------------------------------------------
// Subgradient descent with exact line search; shared by level-set
// construction and the Slater searches.

struct DescentResult {
    Vec x;
    double value = kInf;
};

inline DescentResult minimize_convex(const ConvexFunctionSpec& f, std::vector<Vec> starts,
                                     int rounds = 300) {
    if (starts.empty()) starts.push_back(zeros(f.dim()));
    DescentResult best;
    for (const Vec& s0 : starts) {
        Vec x = s0;
        double fx = eval(f, x);
        if (fx < best.value) { best = {x, fx}; }
        double span = 1.0 + norm2(x);
        for (int it = 0; it < rounds; ++it) {
            Vec s = subgradient(f, x);
            double ns = norm2(s);
            if (ns < 1e-14) break;
            Vec dir = scale(s, -1.0 / ns);
            auto along = [&](double t) { return eval(f, axpy(x, t, dir)); };
            Min1DResult m = minimize_1d(along, 0.0, span, 1e-12 * span);
            // grow the search span while the minimizer keeps hitting the end
            int grow = 0;
            while (m.arg > 0.9 * span && grow++ < 40) {
                span *= 4.0;
                m = minimize_1d(along, 0.0, span, 1e-12 * span);
            }
            if (m.value >= fx - 1e-15 * (1.0 + std::abs(fx))) break;
            x = axpy(x, m.arg, dir);
            fx = m.value;
            span = std::max(2.0 * m.arg, 1e-3);
            if (fx < best.value) best = {x, fx};
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

struct HalfSpace {
    Vec a;
    double beta = 0.0;
};

enum class SetKind { LevelSet, PolytopeV, PolyhedronH };

class SetSpec {
  public:
    static SetSpec level_set(ConvexFunctionSpec f, std::optional<Vec> feasible_hint = {}) {
        SetSpec s;
        s.kind_ = SetKind::LevelSet;
        s.dim_ = f.dim();
        if (feasible_hint && eval(f, *feasible_hint) <= 1e-9) {
            s.feasible_ = *feasible_hint;
        } else {
            std::vector<Vec> starts;
            starts.push_back(zeros(f.dim()));
            if (feasible_hint) starts.push_back(*feasible_hint);
            DescentResult d = minimize_convex(f, starts);
            if (d.value > 1e-9)
                throw EmptySet("level_set: no feasible point found (min value " +
                               std::to_string(d.value) + ")");
            s.feasible_ = d.x;
        }
        s.f_ = std::move(f);
        return s;
    }

    static SetSpec polytope_v(std::vector<Vec> vertices) {
        if (vertices.empty()) throw ConstructionError("polytope_v: needs vertices");
        for (const auto& v : vertices) check_dim(v.size(), vertices[0].size(), "polytope_v");
        SetSpec s;
        s.kind_ = SetKind::PolytopeV;
        s.dim_ = vertices[0].size();
        s.vertices_ = std::move(vertices);
        return s;
    }

    static SetSpec polyhedron_h(std::vector<HalfSpace> rows) {
        if (rows.empty()) throw ConstructionError("polyhedron_h: needs rows");
        for (const auto& r : rows) check_dim(r.a.size(), rows[0].a.size(), "polyhedron_h");
        SetSpec s;
        s.kind_ = SetKind::PolyhedronH;
        s.dim_ = rows[0].a.size();
        s.rows_ = std::move(rows);
        return s;
    }

    SetKind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    const ConvexFunctionSpec& function() const { return *f_; }
    const std::vector<Vec>& vertex_list() const { return vertices_; }
    const std::vector<HalfSpace>& rows() const { return rows_; }
    const Vec& feasible_point() const { return feasible_; }

  private:
    SetSpec() = default;

    SetKind kind_ = SetKind::PolytopeV;
    std::size_t dim_ = 0;
    std::optional<ConvexFunctionSpec> f_;
    Vec feasible_;
    std::vector<Vec> vertices_;
    std::vector<HalfSpace> rows_;
};

// MaxAffine level sets and orthant-scalarized level sets are polyhedra; the
// rewrite lets the polyhedral machinery handle them exactly.
inline std::optional<SetSpec> as_polyhedron(const SetSpec& s) {
    if (s.kind() == SetKind::PolyhedronH) return s;
    if (s.kind() != SetKind::LevelSet) return std::nullopt;
    const auto& f = s.function();
    if (f.is_max_affine()) {
        std::vector<HalfSpace> rows;
        for (const auto& r : f.as_max_affine().rows) rows.push_back({r.a, r.beta});
        return SetSpec::polyhedron_h(std::move(rows));
    }
    if (f.is_scalarized()) {
        const auto& sc = f.as_scalarized();
        if (sc.K.kind() == ConeKind::Orthant) {
            std::vector<HalfSpace> rows;
            for (std::size_t i = 0; i < sc.g.rows(); ++i) rows.push_back({sc.g.M[i], -sc.g.q[i]});
            return SetSpec::polyhedron_h(std::move(rows));
        }
        if (sc.K.kind() == ConeKind::PolyhedralH) {
            // Mx + q in -K  <=>  <n_i, Mx + q> <= 0
            std::vector<HalfSpace> rows;
            for (const auto& n : sc.K.rows()) {
                Vec a = sc.g.apply_transpose(n);
                rows.push_back({a, -dot(n, sc.g.q)});
            }
            return SetSpec::polyhedron_h(std::move(rows));
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Projection

struct ProjectResult {
    Vec p;
    double d = 0.0;
};

inline ProjectResult project(const SetSpec& s, const Vec& x,
                             const Tolerances& tol = Tolerances::defaults());

// ---------------------------------------------------------------------------
// Membership

inline bool contains(const SetSpec& s, const Vec& x,
                     const Tolerances& tol = Tolerances::defaults()) {
    check_dim(x.size(), s.dim(), "contains");
    const double eps = tol.membership * (1.0 + norm2(x));
    switch (s.kind()) {
        case SetKind::LevelSet:
            return eval(s.function(), x) <= eps;
        case SetKind::PolyhedronH:
            for (const auto& r : s.rows())
                if (dot(r.a, x) > r.beta + eps * (1.0 + norm2(r.a))) return false;
            return true;
        case SetKind::PolytopeV:
            // membership via projection distance
            return project(s, x, tol).d <= 1e-7 * (1.0 + norm2(x));
    }
    return false;
}

namespace detail {

inline ProjectResult project_halfspaces(const std::vector<HalfSpace>& rows, const Vec& x,
                                        const Tolerances& tol) {
    Vec z = x;
    std::vector<Vec> inc(rows.size(), zeros(x.size()));
    const int cap = 200000;
    for (int sweep = 0; sweep < cap; ++sweep) {
        double move = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Vec w = add(z, inc[i]);
            double viol = dot(rows[i].a, w) - rows[i].beta;
            Vec zp = w;
            if (viol > 0.0) zp = axpy(w, -viol / dot(rows[i].a, rows[i].a), rows[i].a);
            inc[i] = sub(w, zp);
            move += norm2(sub(z, zp));
            z = zp;
        }
        if (move <= tol.dykstra) return {z, norm2(sub(x, z))};
    }
    throw NonConvergence("project: Dykstra iteration cap");
}

// Projection onto a quadratic level set via the one-dimensional multiplier
// search: s(mu) = (I + mu A)^{-1}(x - mu b), with f(s(mu)) strictly
// decreasing from f(x) > 0. (I + mu A) stays positive definite for mu >= 0,
// so no general QP solver is needed.
inline ProjectResult project_quadratic_level(const ConvexFunctionSpec& f, const Vec& x,
                                             const Tolerances& tol) {
    const auto& q = f.as_quadratic();
    const auto& e = f.quadratic_eig();
    if (eval(f, x) <= 0.0) return {x, 0.0};

    auto s_of = [&](double mu) {
        Vec rhs = axpy(x, -mu, q.b);
        Vec s = zeros(x.size());
        for (std::size_t j = 0; j < e.eigenvalues.size(); ++j) {
            double denom = 1.0 + mu * e.eigenvalues[j];
            s = axpy(s, dot(e.eigenvectors[j], rhs) / denom, e.eigenvectors[j]);
        }
        return s;
    };
    auto phi = [&](double mu) { return eval(f, s_of(mu)); };

    double hi = 1.0;
    int grow = 0;
    while (phi(hi) > 0.0 && grow++ < 200) hi *= 4.0;
    if (phi(hi) > 0.0) throw NonConvergence("project: multiplier bracket did not close");
    double mu = find_root_1d(phi, 0.0, hi, tol.root);
    Vec p = s_of(mu);
    return {p, norm2(sub(x, p))};
}

// Away-step Frank-Wolfe over the convex hull; linear convergence on
// polytopes, duality-gap stop.
inline ProjectResult project_polytope(const std::vector<Vec>& verts, const Vec& x,
                                      const Tolerances& tol) {
    const std::size_t p = verts.size();
    std::vector<double> w(p, 0.0);
    w[0] = 1.0;
    Vec z = verts[0];
    const int cap = 200000;
    for (int it = 0; it < cap; ++it) {
        Vec grad = sub(z, x);
        // FW vertex (min gradient) and away vertex (max gradient over support)
        std::size_t fw = 0, away = 0;
        double fwv = kInf, awv = -kInf;
        for (std::size_t i = 0; i < p; ++i) {
            double gi = dot(grad, verts[i]);
            if (gi < fwv) { fwv = gi; fw = i; }
            if (w[i] > 1e-16 && gi > awv) { awv = gi; away = i; }
        }
        double gap = dot(grad, z) - fwv;
        if (gap <= tol.fw_gap) break;

        bool away_step = (awv - dot(grad, z)) > gap && w[away] > 1e-16;
        Vec dir;
        double tmax;
        if (away_step) {
            dir = sub(z, verts[away]);
            tmax = w[away] / (1.0 - w[away] + 1e-300);
        } else {
            dir = sub(verts[fw], z);
            tmax = 1.0;
        }
        double dd = dot(dir, dir);
        if (dd < 1e-30) break;
        double t = std::clamp(-dot(grad, dir) / dd, 0.0, tmax);
        if (t <= 0.0) break;
        if (away_step) {
            for (std::size_t i = 0; i < p; ++i) w[i] *= (1.0 + t);
            w[away] -= t;
        } else {
            for (std::size_t i = 0; i < p; ++i) w[i] *= (1.0 - t);
            w[fw] += t;
        }
        z = axpy(z, t, dir);
    }
    return {z, norm2(sub(x, z))};
}

// Subgradient-direction projection for general level sets (the scalarized
// SOC case). Every iterate is a boundary point, so the returned distance is
// an upper bound that decreases toward d(x, S); accuracy target 1e-7,
// documented as approximate.
inline ProjectResult project_levelset_general(const ConvexFunctionSpec& f, const Vec& anchor,
                                              const Vec& x, const Tolerances& tol) {
    if (eval(f, x) <= 0.0) return {x, 0.0};

    auto root_along = [&](const Vec& dir_unit, double t_feasible) -> Vec {
        auto phi = [&](double t) { return eval(f, axpy(x, t, dir_unit)); };
        double t = find_root_1d(phi, 0.0, t_feasible, tol.root);
        return axpy(x, t, dir_unit);
    };

    // start on the segment toward the stored feasible point; an anchor within
    // the construction tolerance of the boundary is used as-is
    Vec to_anchor = sub(anchor, x);
    double seg = norm2(to_anchor);
    if (seg < 1e-15) return {x, 0.0};
    Vec best = eval(f, anchor) <= 0.0 ? root_along(scale(to_anchor, 1.0 / seg), seg) : anchor;
    double bestd = norm2(sub(x, best));

    Vec p = best;
    for (int it = 0; it < 120; ++it) {
        Vec s = subgradient(f, p);
        double ns = norm2(s);
        if (ns < 1e-14) break;
        Vec u = scale(s, -1.0 / ns);
        // find a feasible point along x + t u
        double t_hi = bestd;
        bool bracketed = false;
        for (int g = 0; g < 60; ++g) {
            if (eval(f, axpy(x, t_hi, u)) <= 0.0) { bracketed = true; break; }
            t_hi *= 1.5;
            if (t_hi > 64.0 * bestd + 64.0) break;
        }
        if (!bracketed) break;
        Vec pn = root_along(u, t_hi);
        double dn = norm2(sub(x, pn));
        double improve = bestd - dn;
        if (dn < bestd) { best = pn; bestd = dn; }
        p = pn;
        if (improve < tol.subgrad_proj * 1e-3 * (1.0 + bestd) && it > 2) break;
    }
    return {best, bestd};
}

} // namespace detail

inline ProjectResult project(const SetSpec& s, const Vec& x,
                             const Tolerances& tol) {
    check_dim(x.size(), s.dim(), "project");
    switch (s.kind()) {
        case SetKind::PolyhedronH: {
            if (contains(s, x, tol)) return {x, 0.0};
            return detail::project_halfspaces(s.rows(), x, tol);
        }
        case SetKind::PolytopeV:
            return detail::project_polytope(s.vertex_list(), x, tol);
        case SetKind::LevelSet: {
            const auto& f = s.function();
            if (f.is_quadratic()) return detail::project_quadratic_level(f, x, tol);
            if (auto poly = as_polyhedron(s)) return project(*poly, x, tol);
            return detail::project_levelset_general(f, s.feasible_point(), x, tol);
        }
    }
    throw Error("project: unreachable");
}

// ---------------------------------------------------------------------------
// Vertex enumeration for PolyhedronH: all basic feasible solutions. For each
// m-subset of rows with nonsingular system, solve and keep feasible points;
// singular subsets are skipped; duplicates removed at 1e-8.

inline std::vector<Vec> vertices(const SetSpec& s,
                                 const Tolerances& tol = Tolerances::defaults()) {
    if (s.kind() != SetKind::PolyhedronH)
        throw Unsupported("vertices: requires an H-polyhedron");
    const std::size_t m = s.dim();
    const auto& rows = s.rows();
    if (m > 6) throw TooLarge("vertices: dimension > 6");
    if (rows.size() > 24) throw TooLarge("vertices: more than 24 rows");
    if (rows.size() < m) return {};

    std::vector<Vec> out;
    std::vector<std::size_t> idx;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (idx.size() == m) {
            std::vector<Vec> a(m);
            Vec rhs(m);
            for (std::size_t i = 0; i < m; ++i) {
                a[i] = rows[idx[i]].a;
                rhs[i] = rows[idx[i]].beta;
            }
            Vec x;
            if (solve_dense(a, rhs, x)) {
                bool feas = true;
                for (const auto& r : rows)
                    if (dot(r.a, x) > r.beta + 1e-9 * (1.0 + norm2(x)) * (1.0 + norm2(r.a)))
                        feas = false;
                if (feas) {
                    bool dup = false;
                    for (const auto& v : out)
                        if (norm2(sub(v, x)) <= tol.vertex_dedup) dup = true;
                    if (!dup) out.push_back(x);
                }
            }
            return;
        }
        for (std::size_t i = start; i < rows.size(); ++i) {
            idx.push_back(i);
            rec(i + 1);
            idx.pop_back();
        }
    };
    rec(0);
    return out;
}

// ---------------------------------------------------------------------------
// Boundedness

enum class Boundedness { bounded, unbounded, inconclusive };

namespace detail {

// recession cone {d : <a_i, d> <= 0} intersected with the unit inf-ball;
// bounded iff that polytope is the origin alone
inline bool recession_trivial(const std::vector<HalfSpace>& rows, std::size_t m,
                              const Tolerances& tol) {
    std::vector<HalfSpace> rec;
    for (const auto& r : rows) rec.push_back({r.a, 0.0});
    for (std::size_t j = 0; j < m; ++j) {
        rec.push_back({basis(m, j, 1.0), 1.0});
        rec.push_back({basis(m, j, -1.0), 1.0});
    }
    SetSpec box = SetSpec::polyhedron_h(rec);
    for (const auto& v : vertices(box, tol))
        if (norm_inf(v) > 0.5) return false;
    return true;
}

// max <y, d> over the recession cone cut to the unit inf-ball; 0 iff no
// recession direction has positive inner product with y
inline double recession_support(const std::vector<HalfSpace>& rows, const Vec& y,
                                const Tolerances& tol) {
    const std::size_t m = y.size();
    std::vector<HalfSpace> rec;
    for (const auto& r : rows) rec.push_back({r.a, 0.0});
    for (std::size_t j = 0; j < m; ++j) {
        rec.push_back({basis(m, j, 1.0), 1.0});
        rec.push_back({basis(m, j, -1.0), 1.0});
    }
    SetSpec box = SetSpec::polyhedron_h(rec);
    double best = 0.0;
    for (const auto& v : vertices(box, tol)) best = std::max(best, dot(y, v));
    return best;
}

// Convex minimization of d |-> Delta_{-K}(M d) over one face of the unit
// inf-ball, by clamped projected subgradient with line search.
inline double scalarized_face_min(const Scalarized& sc, std::size_t coord, double sign) {
    const std::size_t m = sc.g.cols();
    AffineMap hom(sc.g.M, zeros(sc.g.rows()));
    ConvexFunctionSpec h = ConvexFunctionSpec::scalarized(hom, sc.K);

    auto clamp_face = [&](Vec d) {
        for (std::size_t j = 0; j < m; ++j) d[j] = std::clamp(d[j], -1.0, 1.0);
        d[coord] = sign;
        return d;
    };
    Vec d = clamp_face(zeros(m));
    double best = eval(h, d);
    for (int it = 1; it <= 400; ++it) {
        Vec s = subgradient(h, d);
        double ns = norm2(s);
        if (ns < 1e-14) break;
        double step = 1.0 / std::sqrt(static_cast<double>(it));
        d = clamp_face(axpy(d, -step / ns, s));
        best = std::min(best, eval(h, d));
    }
    return best;
}

} // namespace detail

inline Boundedness boundedness(const SetSpec& s, const Tolerances& tol = Tolerances::defaults()) {
    switch (s.kind()) {
        case SetKind::PolytopeV:
            return Boundedness::bounded;
        case SetKind::PolyhedronH:
            return detail::recession_trivial(s.rows(), s.dim(), tol) ? Boundedness::bounded
                                                                     : Boundedness::unbounded;
        case SetKind::LevelSet: {
            const auto& f = s.function();
            if (f.is_quadratic()) {
                // recession cone {d : Ad = 0, <b,d> <= 0} is trivial iff
                // null(A) = {0}, the null space being symmetric
                const auto& e = f.quadratic_eig();
                double thresh = tol.rank_rel * std::max(e.spectral_radius(), 1.0);
                return e.min_eigenvalue() > thresh ? Boundedness::bounded
                                                   : Boundedness::unbounded;
            }
            if (auto poly = as_polyhedron(s)) return boundedness(*poly, tol);
            // scalarized with a second-order cone: Q is bounded iff no d with
            // M d in -K; directions are scanned over the faces of the unit
            // inf-ball (each face is convex, so the per-face minimum of
            // Delta_{-K}(M d) is reliable; a positive floor certifies
            // boundedness, a clearly negative value certifies unboundedness)
            const auto& sc = f.as_scalarized();
            double worst = kInf;
            for (std::size_t j = 0; j < s.dim(); ++j)
                for (double sign : {1.0, -1.0})
                    worst = std::min(worst, detail::scalarized_face_min(sc, j, sign));
            if (worst > 1e-6) return Boundedness::bounded;
            if (worst < -1e-9) return Boundedness::unbounded;
            return Boundedness::inconclusive;
        }
    }
    return Boundedness::inconclusive;
}

inline bool is_bounded(const SetSpec& s, const Tolerances& tol = Tolerances::defaults()) {
    Boundedness b = boundedness(s, tol);
    if (b == Boundedness::inconclusive)
        throw Unsupported("is_bounded: inconclusive for this set; use boundedness()");
    return b == Boundedness::bounded;
}

// ---------------------------------------------------------------------------
// One-dimensional boundary search: for m = 1 every representable convex set
// is an interval, so support and diameter are exact via root finding along
// the line from the stored feasible point.

namespace detail {

// largest t with f(x0 + t*dir) <= 0, or +inf when the ray stays feasible
inline double ray_extent(const ConvexFunctionSpec& f, const Vec& x0, const Vec& dir,
                         const Tolerances& tol) {
    auto phi = [&](double t) { return eval(f, axpy(x0, t, dir)); };
    double hi = 1.0;
    for (int g = 0; g < 120; ++g) {
        if (phi(hi) > 0.0) break;
        hi *= 2.0;
        if (hi > 1e18) return kInf;
    }
    if (phi(hi) <= 0.0) return kInf;
    double lo = 0.0;
    // f(x0) <= 0 by construction of the feasible point
    return find_root_1d(phi, lo, hi, tol.root);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Support function

inline double support(const SetSpec& s, const Vec& y,
                      const Tolerances& tol = Tolerances::defaults());

namespace detail {

inline double support_quadratic_level(const ConvexFunctionSpec& f, const Vec& y,
                                      const Tolerances& tol) {
    const auto& q = f.as_quadratic();
    const auto& e = f.quadratic_eig();
    double thresh = tol.rank_rel * std::max(e.spectral_radius(), 1.0);
    if (e.min_eigenvalue() <= thresh)
        throw Unsupported("support: singular quadratic level set; "
                          "use support_via_duality");

    Vec center = scale(pinv_apply(e, q.b).w, -1.0);
    double fstar0 = q.c + 0.5 * dot(q.b, pinv_apply(e, q.b).w);
    if (fstar0 < -1e-12) throw EmptySet("support: empty quadratic level set");
    if (norm2(y) == 0.0) return 0.0;
    if (fstar0 <= 1e-14) return dot(y, center); // singleton {center}

    // maximizer x(mu) = A^{-1}(y/mu - b); f(x(mu)) decreases in mu, crossing
    // zero at the boundary multiplier
    auto x_of = [&](double mu) {
        Vec rhs = axpy(scale(y, 1.0 / mu), -1.0, q.b);
        return pinv_apply(e, rhs).w;
    };
    auto phi = [&](double mu) { return eval(f, x_of(mu)); };

    double hi = 1.0;
    int g = 0;
    while (phi(hi) > 0.0 && g++ < 300) hi *= 4.0;
    double lo = hi;
    g = 0;
    while (phi(lo) < 0.0 && g++ < 300) lo /= 4.0;
    double mu = find_root_1d(phi, lo, hi, tol.root * std::max(1.0, hi));
    return dot(y, x_of(mu));
}

} // namespace detail

inline double support(const SetSpec& s, const Vec& y, const Tolerances& tol) {
    check_dim(y.size(), s.dim(), "support");
    if (norm2(y) == 0.0) return 0.0;
    switch (s.kind()) {
        case SetKind::PolytopeV: {
            double best = -kInf;
            for (const auto& v : s.vertex_list()) best = std::max(best, dot(y, v));
            return best;
        }
        case SetKind::PolyhedronH: {
            if (detail::recession_support(s.rows(), y, tol) > 1e-9) return kInf;
            double best = -kInf;
            for (const auto& v : vertices(s, tol)) best = std::max(best, dot(y, v));
            if (best == -kInf) throw EmptySet("support: polyhedron has no vertices");
            return best;
        }
        case SetKind::LevelSet: {
            const auto& f = s.function();
            if (f.is_quadratic()) return detail::support_quadratic_level(f, y, tol);
            if (auto poly = as_polyhedron(s)) return support(*poly, y, tol);
            if (s.dim() == 1) {
                double t = detail::ray_extent(f, s.feasible_point(), {y[0] > 0 ? 1.0 : -1.0}, tol);
                if (t == kInf) return kInf;
                double xb = s.feasible_point()[0] + (y[0] > 0 ? t : -t);
                return y[0] * xb;
            }
            throw Unsupported("support: scalarized SOC level set with m >= 2");
        }
    }
    throw Error("support: unreachable");
}

// ---------------------------------------------------------------------------
// Diameter

enum class DiamStatus { exact, lower_estimate, infinite };

struct DiameterResult {
    double value = 0.0;
    DiamStatus status = DiamStatus::exact;
    Vec witness_a, witness_b;
};

namespace detail {

inline DiameterResult diameter_vertex_set(const std::vector<Vec>& verts) {
    DiameterResult r;
    r.status = DiamStatus::exact;
    if (verts.empty()) throw EmptySet("diameter: no vertices");
    r.witness_a = r.witness_b = verts[0];
    for (std::size_t i = 0; i < verts.size(); ++i)
        for (std::size_t j = i; j < verts.size(); ++j) {
            double d = norm2(sub(verts[i], verts[j]));
            if (d > r.value) {
                r.value = d;
                r.witness_a = verts[i];
                r.witness_b = verts[j];
            }
        }
    return r;
}

// support estимate in one direction by projected ascent (projection via the
// general level-set path); used only for the sampled lower bound
inline Vec ascend_direction(const SetSpec& s, const Vec& d, const Tolerances& tol) {
    Vec x = s.feasible_point();
    for (int it = 1; it <= 60; ++it) {
        double step = 4.0 / std::sqrt(static_cast<double>(it));
        ProjectResult pr = project(s, axpy(x, step, d), tol);
        if (dot(d, pr.p) <= dot(d, x) + 1e-12) break;
        x = pr.p;
    }
    return x;
}

} // namespace detail

inline DiameterResult diameter(const SetSpec& s, const Tolerances& tol = Tolerances::defaults(),
                               int sample_dirs = 10000, std::uint64_t seed = 0x5eedULL) {
    switch (s.kind()) {
        case SetKind::PolytopeV:
            return detail::diameter_vertex_set(s.vertex_list());
        case SetKind::PolyhedronH: {
            if (boundedness(s, tol) != Boundedness::bounded) {
                DiameterResult r;
                r.status = DiamStatus::infinite;
                r.value = kInf;
                return r;
            }
            return detail::diameter_vertex_set(vertices(s, tol));
        }
        case SetKind::LevelSet: {
            const auto& f = s.function();
            if (f.is_quadratic()) {
                const auto& q = f.as_quadratic();
                const auto& e = f.quadratic_eig();
                double thresh = tol.rank_rel * std::max(e.spectral_radius(), 1.0);
                if (e.min_eigenvalue() <= thresh) {
                    DiameterResult r;
                    r.status = DiamStatus::infinite;
                    r.value = kInf;
                    return r;
                }
                // ellipsoid {1/2 <z, Az> <= f*(0)} around the center: the
                // diameter is twice the semi-axis on the smallest eigenvalue
                Vec center = scale(pinv_apply(e, q.b).w, -1.0);
                double fstar0 = q.c + 0.5 * dot(q.b, pinv_apply(e, q.b).w);
                if (fstar0 < -1e-12) throw EmptySet("diameter: empty quadratic level set");
                DiameterResult r;
                r.status = DiamStatus::exact;
                if (fstar0 <= 0.0) {
                    r.value = 0.0;
                    r.witness_a = r.witness_b = center;
                    return r;
                }
                double lam_min = e.min_eigenvalue();
                double semi = std::sqrt(2.0 * fstar0 / lam_min);
                const Vec& vmin = e.eigenvectors.back();
                r.value = 2.0 * semi;
                r.witness_a = axpy(center, semi, vmin);
                r.witness_b = axpy(center, -semi, vmin);
                return r;
            }
            if (auto poly = as_polyhedron(s)) return diameter(*poly, tol, sample_dirs, seed);

            if (s.dim() == 1) {
                double tp = detail::ray_extent(f, s.feasible_point(), {1.0}, tol);
                double tm = detail::ray_extent(f, s.feasible_point(), {-1.0}, tol);
                DiameterResult r;
                if (tp == kInf || tm == kInf) {
                    r.status = DiamStatus::infinite;
                    r.value = kInf;
                    return r;
                }
                r.status = DiamStatus::exact;
                r.witness_a = {s.feasible_point()[0] + tp};
                r.witness_b = {s.feasible_point()[0] - tm};
                r.value = tp + tm;
                return r;
            }

            Boundedness b = boundedness(s, tol);
            if (b == Boundedness::unbounded) {
                DiameterResult r;
                r.status = DiamStatus::infinite;
                r.value = kInf;
                return r;
            }
            // sampled width lower bound: max over directions of sigma(d) +
            // sigma(-d), each sigma estimated by projected ascent
            DiameterResult r;
            r.status = DiamStatus::lower_estimate;
            SplitMix64 rng(seed);
            std::vector<Vec> dirs;
            for (std::size_t j = 0; j < s.dim(); ++j) dirs.push_back(basis(s.dim(), j, 1.0));
            while (dirs.size() < static_cast<std::size_t>(sample_dirs))
                dirs.push_back(sphere_direction(rng, s.dim()));
            for (const auto& d : dirs) {
                Vec xa = detail::ascend_direction(s, d, tol);
                Vec xb = detail::ascend_direction(s, scale(d, -1.0), tol);
                double w = norm2(sub(xa, xb));
                if (w > r.value) {
                    r.value = w;
                    r.witness_a = xa;
                    r.witness_b = xb;
                }
            }
            return r;
        }
    }
    throw Error("diameter: unreachable");
}

} // namespace errb
