#pragma once

// Cone geometry: membership, projection onto -K, distance to the complement
// of -K, the Hiriart-Urruty oriented distance Delta_{-K}, and dual-cone
// membership. Three representable cone families: nonnegative orthant,
// second-order cone, and polyhedral cones in H-form (intersection of
// homogeneous half-spaces <n_i, y> >= 0).
//
// The norm is Euclidean throughout; that fixes closed forms for orthant and
// SOC and a unique projection witness.

#include <cstddef>
#include <optional>
#include <vector>

#include "errb/numerics.hpp"

namespace errb {

enum class ConeKind { Orthant, SecondOrder, PolyhedralH };

class ConeSpec {
  public:
    static ConeSpec orthant(int k) {
        if (k < 1) throw ConstructionError("ConeSpec: k must be >= 1");
        ConeSpec c;
        c.kind_ = ConeKind::Orthant;
        c.k_ = k;
        c.interior_ = Vec(k, 1.0);
        return c;
    }

    // K = {(t, u) in R x R^{k-1} : ||u||_2 <= t}. Requires k >= 2; the k = 1
    // degenerate case is the orthant.
    static ConeSpec second_order(int k) {
        if (k < 2) throw ConstructionError("ConeSpec: second-order cone needs k >= 2");
        ConeSpec c;
        c.kind_ = ConeKind::SecondOrder;
        c.k_ = k;
        c.interior_ = basis(k, 0, 1.0);
        return c;
    }

    // K = {y : <n_i, y> >= 0 for all i}. A strictly interior witness with
    // <n_i, y> >= 1 is located by normalized subgradient descent on
    // max_i(-<n_i/||n_i||, y>); if none is found construction fails, since a
    // cone with empty interior cannot carry a Slater condition.
    static ConeSpec polyhedral(std::vector<Vec> rows) {
        if (rows.empty()) throw ConstructionError("ConeSpec: polyhedral cone needs rows");
        const std::size_t k = rows[0].size();
        if (k < 1) throw ConstructionError("ConeSpec: k must be >= 1");
        if (rows.size() > 16) throw TooLarge("ConeSpec: more than 16 polyhedral rows");
        for (const auto& n : rows) {
            check_dim(n.size(), k, "ConeSpec::polyhedral");
            if (norm2(n) == 0.0) throw ConstructionError("ConeSpec: zero normal row");
        }
        ConeSpec c;
        c.kind_ = ConeKind::PolyhedralH;
        c.k_ = static_cast<int>(k);
        c.rows_ = std::move(rows);
        c.interior_ = c.find_interior_witness();
        return c;
    }

    ConeKind kind() const { return kind_; }
    int k() const { return k_; }
    const std::vector<Vec>& rows() const { return rows_; }
    // A point of int K; for PolyhedralH it satisfies <n_i, y> >= 1.
    const Vec& interior_point() const { return interior_; }

  private:
    ConeSpec() = default;

    Vec find_interior_witness() const {
        const std::size_t k = static_cast<std::size_t>(k_);
        std::vector<Vec> nh(rows_.size());
        for (std::size_t i = 0; i < rows_.size(); ++i) nh[i] = unit(rows_[i]);

        auto psi = [&](const Vec& y) {
            double worst = -kInf;
            for (const auto& n : nh) worst = std::max(worst, -dot(n, y));
            return worst;
        };

        Vec best_y;
        double best = kInf;
        std::vector<Vec> starts;
        {
            Vec s = zeros(k);
            for (const auto& n : nh) s = add(s, n);
            if (norm2(s) > 1e-12) starts.push_back(unit(s));
        }
        for (const auto& n : nh) starts.push_back(n);

        for (Vec y : starts) {
            for (int it = 0; it < 300; ++it) {
                double v = psi(y);
                if (v < best) { best = v; best_y = y; }
                if (v < -0.2) break;
                // lowest-index active row
                std::size_t arg = 0;
                double worst = -kInf;
                for (std::size_t i = 0; i < nh.size(); ++i) {
                    double vi = -dot(nh[i], y);
                    if (vi > worst + 1e-15) { worst = vi; arg = i; }
                }
                const Vec dir = nh[arg];
                auto along = [&](double t) {
                    Vec z = axpy(y, t, dir);
                    double n = norm2(z);
                    return n < 1e-12 ? kInf : psi(scale(z, 1.0 / n));
                };
                double t = minimize_1d(along, 0.0, 2.0, 1e-10).arg;
                Vec z = axpy(y, t, dir);
                double n = norm2(z);
                if (n < 1e-12 || t < 1e-14) break;
                y = scale(z, 1.0 / n);
            }
            if (best < -0.2) break;
        }
        if (!(best < -1e-7))
            throw ConstructionError("ConeSpec: polyhedral cone has empty interior "
                                    "(no strictly feasible point found)");
        // scale so every raw inequality clears 1
        double m = kInf;
        for (const auto& n : rows_) m = std::min(m, dot(n, best_y));
        return scale(best_y, 1.0 / m);
    }

    ConeKind kind_ = ConeKind::Orthant;
    int k_ = 0;
    std::vector<Vec> rows_;
    Vec interior_;
};

// ---------------------------------------------------------------------------
// Membership

inline bool in_cone(const ConeSpec& K, const Vec& y,
                    const Tolerances& tol = Tolerances::defaults()) {
    check_dim(y.size(), static_cast<std::size_t>(K.k()), "in_cone");
    const double eps = tol.membership * (1.0 + norm2(y));
    switch (K.kind()) {
        case ConeKind::Orthant:
            for (double v : y)
                if (v < -eps) return false;
            return true;
        case ConeKind::SecondOrder: {
            double un = 0.0;
            for (std::size_t i = 1; i < y.size(); ++i) un += y[i] * y[i];
            return std::sqrt(un) <= y[0] + eps;
        }
        case ConeKind::PolyhedralH:
            for (const auto& n : K.rows())
                if (dot(n, y) < -eps * norm2(n)) return false;
            return true;
    }
    return false;
}

inline bool in_minus_cone(const ConeSpec& K, const Vec& y,
                          const Tolerances& tol = Tolerances::defaults()) {
    return in_cone(K, scale(y, -1.0), tol);
}

// ---------------------------------------------------------------------------
// Projections

namespace detail {

// standard SOC projection of z = (s, v)
inline Vec project_soc(const Vec& z) {
    double s = z[0];
    double a = 0.0;
    for (std::size_t i = 1; i < z.size(); ++i) a += z[i] * z[i];
    a = std::sqrt(a);
    if (a <= s) return z;
    if (a <= -s) return zeros(z.size());
    double c = 0.5 * (1.0 + s / a);
    Vec p(z.size());
    p[0] = c * a;
    for (std::size_t i = 1; i < z.size(); ++i) p[i] = c * z[i];
    return p;
}

// Dykstra over the half-spaces {<n_i, x> <= 0}
inline Vec project_polyhedral_minus(const std::vector<Vec>& rows, const Vec& y,
                                    const Tolerances& tol) {
    const std::size_t k = y.size();
    Vec x = y;
    std::vector<Vec> inc(rows.size(), zeros(k));
    const int cap = 100000;
    for (int sweep = 0; sweep < cap; ++sweep) {
        double move = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Vec w = add(x, inc[i]);
            double viol = dot(rows[i], w);
            Vec xp = w;
            if (viol > 0.0) xp = axpy(w, -viol / dot(rows[i], rows[i]), rows[i]);
            inc[i] = sub(w, xp);
            move += norm2(sub(x, xp));
            x = xp;
        }
        if (move <= tol.dykstra) return x;
    }
    throw NonConvergence("project_polyhedral_minus: Dykstra iteration cap");
}

} // namespace detail

struct ConeDistResult {
    double d = 0.0;
    Vec proj;
};

inline ConeDistResult dist_to_minus_cone(const ConeSpec& K, const Vec& y,
                                         const Tolerances& tol = Tolerances::defaults()) {
    check_dim(y.size(), static_cast<std::size_t>(K.k()), "dist_to_minus_cone");
    ConeDistResult r;
    switch (K.kind()) {
        case ConeKind::Orthant: {
            r.proj.resize(y.size());
            double s = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                r.proj[i] = std::min(y[i], 0.0);
                double p = std::max(y[i], 0.0);
                s += p * p;
            }
            r.d = std::sqrt(s);
            return r;
        }
        case ConeKind::SecondOrder: {
            // proj_{-K}(y) = -proj_K(-y)
            r.proj = scale(detail::project_soc(scale(y, -1.0)), -1.0);
            r.d = norm2(sub(y, r.proj));
            return r;
        }
        case ConeKind::PolyhedralH: {
            if (in_minus_cone(K, y, tol)) {
                r.proj = y;
                r.d = 0.0;
                return r;
            }
            r.proj = detail::project_polyhedral_minus(K.rows(), y, tol);
            r.d = norm2(sub(y, r.proj));
            return r;
        }
    }
    return r;
}

// d(y, Y \ (-K)): zero unless y lies in the interior of -K; then it is the
// distance to the cone boundary, which for each representable family is the
// least distance to a facet/boundary hyperplane. (For PolyhedralH the
// perpendicular foot on the nearest facet hyperplane stays inside -K: with
// d_i = -<n_i,y>/||n_i|| and i* the minimizer, <n_j, foot> <= ||n_j||
// (d_{i*} - d_j) <= 0 for all j, so the foot is a genuine boundary point and
// the hyperplane distance is attained on the boundary.)
inline double dist_to_complement(const ConeSpec& K, const Vec& y) {
    check_dim(y.size(), static_cast<std::size_t>(K.k()), "dist_to_complement");
    switch (K.kind()) {
        case ConeKind::Orthant: {
            double m = kInf;
            for (double v : y) m = std::min(m, -v);
            return std::max(0.0, m);
        }
        case ConeKind::SecondOrder: {
            double un = 0.0;
            for (std::size_t i = 1; i < y.size(); ++i) un += y[i] * y[i];
            return std::max(0.0, (-y[0] - std::sqrt(un)) / std::sqrt(2.0));
        }
        case ConeKind::PolyhedralH: {
            double m = kInf;
            for (const auto& n : K.rows()) m = std::min(m, -dot(n, y) / norm2(n));
            return std::max(0.0, m);
        }
    }
    return 0.0;
}

// Nearest boundary point of -K seen from an interior point y (returns y
// itself when y is not interior).
inline Vec nearest_complement_foot(const ConeSpec& K, const Vec& y) {
    const double dc = dist_to_complement(K, y);
    if (dc <= 0.0) return y;
    switch (K.kind()) {
        case ConeKind::Orthant: {
            std::size_t arg = 0;
            double m = kInf;
            for (std::size_t i = 0; i < y.size(); ++i)
                if (-y[i] < m - 1e-15) { m = -y[i]; arg = i; }
            Vec foot = y;
            foot[arg] = 0.0;
            return foot;
        }
        case ConeKind::SecondOrder: {
            Vec w(y.size(), 0.0);
            w[0] = 1.0 / std::sqrt(2.0);
            double un = 0.0;
            for (std::size_t i = 1; i < y.size(); ++i) un += y[i] * y[i];
            un = std::sqrt(un);
            if (un > 1e-15) {
                for (std::size_t i = 1; i < y.size(); ++i)
                    w[i] = y[i] / un / std::sqrt(2.0);
            } else {
                w[1] = 1.0 / std::sqrt(2.0);
            }
            return axpy(y, dc, w);
        }
        case ConeKind::PolyhedralH: {
            std::size_t arg = 0;
            double m = kInf;
            for (std::size_t i = 0; i < K.rows().size(); ++i) {
                double di = -dot(K.rows()[i], y) / norm2(K.rows()[i]);
                if (di < m - 1e-15) { m = di; arg = i; }
            }
            return axpy(y, dc, unit(K.rows()[arg]));
        }
    }
    return y;
}

// ---------------------------------------------------------------------------
// Oriented distance Delta_{-K}(y) = d(y, -K) - d(y, Y \ (-K))

enum class ConeSide { inside, boundary, outside };

struct OrientedDistanceValue {
    double value = 0.0;
    ConeSide side = ConeSide::boundary;
    Vec witness; // attains the active distance
};

inline OrientedDistanceValue oriented_distance(const ConeSpec& K, const Vec& y,
                                               const Tolerances& tol = Tolerances::defaults()) {
    ConeDistResult dm = dist_to_minus_cone(K, y, tol);
    double dc = dist_to_complement(K, y);
    OrientedDistanceValue r;
    r.value = dm.d - dc;
    if (dm.d > 0.0) {
        r.side = ConeSide::outside;
        r.witness = dm.proj;
    } else if (dc > 0.0) {
        r.side = ConeSide::inside;
        r.witness = nearest_complement_foot(K, y);
    } else {
        r.side = ConeSide::boundary;
        r.witness = y;
    }
    return r;
}

// A subgradient of Delta_{-K} at y. Outside: the unit vector from the
// projection to y. Inside/boundary: the outward unit normal of the nearest
// (lowest-index on ties) facet, or (1, u/||u||)/sqrt(2) for the SOC.
inline Vec delta_subgradient(const ConeSpec& K, const Vec& y,
                             const Tolerances& tol = Tolerances::defaults()) {
    check_dim(y.size(), static_cast<std::size_t>(K.k()), "delta_subgradient");
    ConeDistResult dm = dist_to_minus_cone(K, y, tol);
    if (dm.d > 1e-13 * (1.0 + norm2(y))) return scale(sub(y, dm.proj), 1.0 / dm.d);

    switch (K.kind()) {
        case ConeKind::Orthant: {
            // nearest facet; lowest index on ties
            std::size_t arg = 0;
            double m = kInf;
            for (std::size_t i = 0; i < y.size(); ++i)
                if (-y[i] < m - 1e-15) { m = -y[i]; arg = i; }
            return basis(y.size(), arg, 1.0);
        }
        case ConeKind::SecondOrder: {
            Vec g(y.size(), 0.0);
            const double r2 = 1.0 / std::sqrt(2.0);
            g[0] = r2;
            double un = 0.0;
            for (std::size_t i = 1; i < y.size(); ++i) un += y[i] * y[i];
            un = std::sqrt(un);
            if (un > 1e-15) {
                for (std::size_t i = 1; i < y.size(); ++i) g[i] = r2 * y[i] / un;
            } else {
                g[1] = r2; // apex / axis: lowest-index supporting direction
            }
            return g;
        }
        case ConeKind::PolyhedralH: {
            std::size_t arg = 0;
            double m = kInf;
            for (std::size_t i = 0; i < K.rows().size(); ++i) {
                double di = -dot(K.rows()[i], y) / norm2(K.rows()[i]);
                if (di < m - 1e-15) { m = di; arg = i; }
            }
            return unit(K.rows()[arg]);
        }
    }
    return zeros(y.size());
}

// ---------------------------------------------------------------------------
// Dual cone K* = {lambda : <lambda, k> >= 0 for all k in K}

namespace detail {

// lambda in cone{n_1..n_r}? Basic-subset enumeration: a conic representation
// with at most k linearly independent generators exists whenever membership
// holds (Caratheodory for cones).
inline bool in_generated_cone(const std::vector<Vec>& gens, const Vec& lam,
                              const Tolerances& tol) {
    const double eps = tol.membership * 100.0 * (1.0 + norm2(lam));
    if (norm2(lam) <= eps) return true;
    const std::size_t r = gens.size();
    const std::size_t k = lam.size();
    std::vector<std::size_t> idx;

    std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t start,
                                                            std::size_t depth) -> bool {
        if (!idx.empty()) {
            // least squares: columns gens[idx], target lam
            std::vector<Vec> a(k, Vec(idx.size()));
            for (std::size_t c = 0; c < idx.size(); ++c)
                for (std::size_t rr = 0; rr < k; ++rr) a[rr][c] = gens[idx[c]][rr];
            Vec theta;
            double resid = 0.0;
            if (solve_least_squares(a, lam, theta, resid) && resid <= eps) {
                bool nn = true;
                for (double t : theta)
                    if (t < -1e-9 * (1.0 + norm_inf(theta))) nn = false;
                if (nn) return true;
            }
        }
        if (depth == std::min(k, r)) return false;
        for (std::size_t i = start; i < r; ++i) {
            idx.push_back(i);
            if (rec(i + 1, depth + 1)) return true;
            idx.pop_back();
        }
        return false;
    };
    return rec(0, 0);
}

// Exact projection onto cone{n_1..n_r} by face enumeration: for each subset
// solve the unconstrained least squares; the face whose coefficients are
// nonnegative and whose residual satisfies the polar condition <z - p, n_j>
// <= 0 for all j is the projection.
inline Vec project_generated_cone(const std::vector<Vec>& gens, const Vec& z) {
    const std::size_t r = gens.size();
    const std::size_t k = z.size();

    Vec best = zeros(k);
    double best_d = norm2(z); // empty face: projection 0
    bool best_valid = true;
    for (const auto& n : gens)
        if (dot(n, z) > 1e-12 * (1.0 + norm2(z)) * norm2(n)) best_valid = false;

    std::vector<std::size_t> idx;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (!idx.empty()) {
            std::vector<Vec> a(k, Vec(idx.size()));
            for (std::size_t c = 0; c < idx.size(); ++c)
                for (std::size_t rr = 0; rr < k; ++rr) a[rr][c] = gens[idx[c]][rr];
            Vec theta;
            double resid = 0.0;
            if (solve_least_squares(a, z, theta, resid)) {
                bool nn = true;
                for (double t : theta)
                    if (t < -1e-11) nn = false;
                if (nn) {
                    Vec p = zeros(k);
                    for (std::size_t c = 0; c < idx.size(); ++c)
                        p = axpy(p, std::max(theta[c], 0.0), gens[idx[c]]);
                    Vec res = sub(z, p);
                    bool polar = true;
                    for (const auto& n : gens)
                        if (dot(n, res) > 1e-9 * (1.0 + norm2(z)) * norm2(n)) polar = false;
                    double d = norm2(res);
                    if (polar && (!best_valid || d < best_d)) {
                        best = p;
                        best_d = d;
                        best_valid = true;
                    }
                }
            }
        }
        if (idx.size() == std::min(k, r)) return;
        for (std::size_t i = start; i < r; ++i) {
            idx.push_back(i);
            rec(i + 1);
            idx.pop_back();
        }
    };
    rec(0);
    return best;
}

} // namespace detail

inline bool in_dual_cone(const ConeSpec& K, const Vec& lam,
                         const Tolerances& tol = Tolerances::defaults()) {
    check_dim(lam.size(), static_cast<std::size_t>(K.k()), "in_dual_cone");
    switch (K.kind()) {
        case ConeKind::Orthant:
            return in_cone(K, lam, tol);
        case ConeKind::SecondOrder:
            return in_cone(K, lam, tol); // self-dual
        case ConeKind::PolyhedralH:
            return detail::in_generated_cone(K.rows(), lam, tol);
    }
    return false;
}

// Projection onto K* (orthant and SOC are self-dual; PolyhedralH duals are
// generated by the rows).
inline Vec project_dual_cone(const ConeSpec& K, const Vec& z) {
    check_dim(z.size(), static_cast<std::size_t>(K.k()), "project_dual_cone");
    switch (K.kind()) {
        case ConeKind::Orthant: {
            Vec p(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::max(z[i], 0.0);
            return p;
        }
        case ConeKind::SecondOrder:
            return detail::project_soc(z);
        case ConeKind::PolyhedralH:
            return detail::project_generated_cone(K.rows(), z);
    }
    return z;
}

} // namespace errb
