#pragma once

// Certified global error-bound constants.
//
// For a vector system g(x) <=_K 0 with Slater point x0 and bounded solution
// set Q, the certified constant is
//
//     alpha = diam Q / d(g(x0), Y \ (-K)),
//
// the infimum of the Robinson family diam Q / delta over all delta > 0 with
// delta B(0,1) contained in g(x0) + K. The scalar case specializes through
// Y = R, K = R_+, where the margin is -f(x0).
//
// Certificates built on diameter lower estimates would not be covered by the
// theorem (an underestimated diameter invalidates the constant), so they are
// demoted to "empirical".

#include <optional>
#include <string>
#include <vector>

#include "errb/cones.hpp"
#include "errb/duality.hpp"
#include "errb/functions.hpp"
#include "errb/geometry.hpp"
#include "errb/numerics.hpp"
#include "errb/rng.hpp"

namespace errb {

// ---------------------------------------------------------------------------
// Slater searches. Heuristic by design: not_found is "no strictly feasible
// point located", never a claim that none exists.

struct SlaterResult {
    bool found = false;
    Vec x0;
    double margin = 0.0; // -f(x0), resp. d(g(x0), Y \ (-K))
};

inline SlaterResult find_slater_scalar(const ConvexFunctionSpec& f,
                                       const std::optional<Vec>& hint = {},
                                       const Tolerances& tol = Tolerances::defaults()) {
    std::vector<Vec> starts{zeros(f.dim())};
    if (hint) starts.push_back(*hint);
    DescentResult d = minimize_convex(f, starts);
    SlaterResult r;
    if (d.value < -tol.slater_strict) {
        r.found = true;
        r.x0 = d.x;
        r.margin = -d.value;
    }
    return r;
}

inline SlaterResult find_slater_vector(const AffineMap& g, const ConeSpec& K,
                                       const std::optional<Vec>& hint = {},
                                       const Tolerances& tol = Tolerances::defaults()) {
    ConvexFunctionSpec f = ConvexFunctionSpec::scalarized(g, K);
    std::vector<Vec> starts{zeros(f.dim())};
    if (hint) starts.push_back(*hint);
    DescentResult d = minimize_convex(f, starts);
    SlaterResult r;
    if (d.value < -tol.slater_strict) {
        r.found = true;
        r.x0 = d.x;
        r.margin = dist_to_complement(K, g.apply(d.x));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Robinson's inclusion delta B(0,1) subseteq g(x0) + K, i.e. u - g(x0) in K
// for every ||u|| <= delta. The closed form is the orthant margin
// min_i(-g(x0)_i), resp. d(g(x0), Y \ (-K)) for SOC/polyhedral cones; an
// independent sphere-sampled membership test (axis probes, the analytic
// worst direction, and random directions) acts as a refuter.

namespace detail {

inline bool inclusion_sampled(const ConeSpec& K, const Vec& y0, double delta, int n_random,
                              std::uint64_t seed, const Tolerances& tol) {
    const std::size_t k = y0.size();
    std::vector<Vec> dirs;
    for (std::size_t j = 0; j < k; ++j) {
        dirs.push_back(basis(k, j, 1.0));
        dirs.push_back(basis(k, j, -1.0));
    }
    // worst direction: u = -(foot - y0)/||..||, where foot is the nearest
    // boundary point of -K seen from y0
    Vec foot = nearest_complement_foot(K, y0);
    Vec w = sub(foot, y0);
    if (norm2(w) > 1e-14) dirs.push_back(scale(unit(w), -1.0));
    SplitMix64 rng(seed);
    for (int i = 0; i < n_random; ++i) dirs.push_back(sphere_direction(rng, k));

    for (const auto& u : dirs) {
        // u_delta - g(x0) must land in K
        if (!in_cone(K, sub(scale(u, delta), y0), tol)) return false;
    }
    return true;
}

inline double inclusion_closed_form_bound(const ConeSpec& K, const Vec& y0) {
    if (K.kind() == ConeKind::Orthant) {
        double m = kInf;
        for (double v : y0) m = std::min(m, -v);
        return std::max(0.0, m);
    }
    return dist_to_complement(K, y0);
}

} // namespace detail

inline bool inclusion_radius_check(const AffineMap& g, const ConeSpec& K, const Vec& x0,
                                   double delta, const Tolerances& tol = Tolerances::defaults(),
                                   int n_random = 1000, std::uint64_t seed = 0x1c51ULL) {
    if (!(delta > 0.0)) throw Error("inclusion_radius_check: delta must be positive");
    Vec y0 = g.apply(x0);
    bool closed = delta <= detail::inclusion_closed_form_bound(K, y0) * (1.0 + 1e-12) + 1e-15;
    bool sampled = detail::inclusion_sampled(K, y0, delta, n_random, seed, tol);
    return closed && sampled;
}

// ---------------------------------------------------------------------------
// Certificates

enum class CertStatus { certified, empirical };
enum class BoundKind { scalar, vector };

struct BoundCertificate {
    double alpha = 0.0;
    BoundKind kind = BoundKind::scalar;
    Vec slater_point;
    double margin = 0.0;
    DiameterResult diam;
    CertStatus status = CertStatus::certified;
    std::string norm = "euclidean";
    std::vector<std::string> notes;
};

inline double robinson_alpha(const AffineMap& g, const ConeSpec& K, const Vec& x0, double delta,
                             const DiameterResult& diamQ,
                             const Tolerances& tol = Tolerances::defaults()) {
    if (diamQ.status != DiamStatus::exact)
        throw InfiniteDiameter("robinson_alpha: needs an exact finite diameter");
    if (!inclusion_radius_check(g, K, x0, delta, tol))
        throw InvalidDelta("robinson_alpha: delta ball does not fit inside g(x0) + K");
    return diamQ.value / delta;
}

inline BoundCertificate alpha_bc(const AffineMap& g, const ConeSpec& K, const Vec& x0,
                                 const DiameterResult& diamQ) {
    if (diamQ.status == DiamStatus::infinite)
        throw InfiniteDiameter("alpha_bc: diameter is infinite");
    double margin = dist_to_complement(K, g.apply(x0));
    if (!(margin > 0.0)) throw ZeroMargin("alpha_bc: g(x0) is not interior to -K");
    BoundCertificate c;
    c.kind = BoundKind::vector;
    c.slater_point = x0;
    c.margin = margin;
    c.diam = diamQ;
    c.alpha = diamQ.value / margin;
    c.status = diamQ.status == DiamStatus::exact ? CertStatus::certified : CertStatus::empirical;
    if (c.status == CertStatus::empirical)
        c.notes.push_back("diameter is a sampled lower estimate; constant not certified");
    return c;
}

// Scalar specialization: in R, d(f(x0), R \ R_-) = -f(x0); using the value
// directly avoids a degenerate one-dimensional cone object.
inline BoundCertificate alpha_scalar(const ConvexFunctionSpec& f, const Vec& x0,
                                     const DiameterResult& diamS) {
    if (diamS.status == DiamStatus::infinite)
        throw InfiniteDiameter("alpha_scalar: diameter is infinite");
    double margin = -eval(f, x0);
    if (!(margin > 0.0)) throw ZeroMargin("alpha_scalar: f(x0) is not negative");
    BoundCertificate c;
    c.kind = BoundKind::scalar;
    c.slater_point = x0;
    c.margin = margin;
    c.diam = diamS;
    c.alpha = diamS.value / margin;
    c.status = diamS.status == DiamStatus::exact ? CertStatus::certified : CertStatus::empirical;
    if (c.status == CertStatus::empirical)
        c.notes.push_back("diameter is a sampled lower estimate; constant not certified");
    return c;
}

// ---------------------------------------------------------------------------
// Equivalence d(g(x0), Y \ (-K)) = sup{delta > 0 : delta B(0,1) in g(x0)+K}.
// The left side is the closed form; the right side is recovered by bisecting
// delta over the sampled membership test only, so the two routes stay
// independent.

struct EqFinalResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
};

inline EqFinalResult check_eqfinal(const AffineMap& g, const ConeSpec& K, const Vec& x0,
                                   const Tolerances& tol = Tolerances::defaults(),
                                   int n_random = 1000, std::uint64_t seed = 0xefULL) {
    Vec y0 = g.apply(x0);
    OrientedDistanceValue od = oriented_distance(K, y0, tol);
    if (od.value > tol.membership * (1.0 + norm2(y0)))
        throw NoSlaterCertificate("check_eqfinal: g(x0) is not in -K");

    EqFinalResult r;
    r.lhs = dist_to_complement(K, y0);

    double hi = 2.0 * r.lhs + 1.0;
    if (detail::inclusion_sampled(K, y0, hi, n_random, seed, tol)) {
        // should not happen; widen once before giving up
        hi = 4.0 * hi + 1.0;
    }
    double lo = 0.0;
    for (int it = 0; it < 40; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid > 0.0 && detail::inclusion_sampled(K, y0, mid, n_random, seed, tol))
            lo = mid;
        else
            hi = mid;
    }
    r.rhs = lo;
    r.gap = std::abs(r.lhs - r.rhs);
    return r;
}

// ---------------------------------------------------------------------------
// Hypothesis checking and certification

enum class BoundedVerdict { yes, no, inconclusive };

struct HypothesisReport {
    bool proper = true; // representable variants are finite-valued everywhere
    SlaterResult slater;
    BoundedVerdict bounded = BoundedVerdict::inconclusive;
    bool nonempty = false;
};

// Instance view shared with the harness: a scalar inequality f(x) <= 0 or a
// vector system g(x) in -K.
struct ProblemInstance {
    std::string name;
    bool scalar = true;
    std::optional<ConvexFunctionSpec> f;
    std::optional<AffineMap> g;
    std::optional<ConeSpec> K;
    std::optional<Vec> slater_hint;

    std::size_t dim() const { return scalar ? f->dim() : g->cols(); }

    // residual function: f itself, or Delta_{-K} o g
    ConvexFunctionSpec residual_function() const {
        if (scalar) return *f;
        return ConvexFunctionSpec::scalarized(*g, *K);
    }
};

enum class CertifyStatus { certificate, quadratic_regime, refusal };

struct CertifyOutcome {
    HypothesisReport hypotheses;
    std::optional<BoundCertificate> certificate;
    std::optional<SetSpec> solution_set;
    CertifyStatus status = CertifyStatus::refusal;
    std::string reason;
};

inline CertifyOutcome certify(const ProblemInstance& inst,
                              const Tolerances& tol = Tolerances::defaults()) {
    CertifyOutcome out;
    out.hypotheses.proper = true;

    SlaterResult sl = inst.scalar ? find_slater_scalar(*inst.f, inst.slater_hint, tol)
                                  : find_slater_vector(*inst.g, *inst.K, inst.slater_hint, tol);
    out.hypotheses.slater = sl;

    ConvexFunctionSpec residual = inst.residual_function();
    std::optional<Vec> feasible;
    if (sl.found) {
        feasible = sl.x0;
        out.hypotheses.nonempty = true;
    } else {
        DescentResult d = minimize_convex(residual, {zeros(inst.dim())});
        if (d.value <= 1e-9) {
            feasible = d.x;
            out.hypotheses.nonempty = true;
        }
    }
    if (!out.hypotheses.nonempty) {
        out.status = CertifyStatus::refusal;
        out.reason = "nonempty: no feasible point found";
        return out;
    }

    SetSpec S = SetSpec::level_set(residual, feasible);
    Boundedness b = boundedness(S, tol);
    out.hypotheses.bounded = b == Boundedness::bounded    ? BoundedVerdict::yes
                             : b == Boundedness::unbounded ? BoundedVerdict::no
                                                           : BoundedVerdict::inconclusive;
    out.solution_set = S;

    if (!sl.found) {
        out.status = CertifyStatus::refusal;
        out.reason = "slater: not_found";
        return out;
    }

    if (b == Boundedness::bounded) {
        DiameterResult diam = diameter(S, tol);
        BoundCertificate cert = inst.scalar ? alpha_scalar(*inst.f, sl.x0, diam)
                                            : alpha_bc(*inst.g, *inst.K, sl.x0, diam);
        out.certificate = cert;
        out.status = CertifyStatus::certificate;
        return out;
    }

    if (b == Boundedness::unbounded && inst.scalar && inst.f->is_quadratic()) {
        out.status = CertifyStatus::quadratic_regime;
        out.reason = "bound exists (convex quadratic with Slater, solution set unbounded); "
                     "no constant is certified";
        return out;
    }

    out.status = CertifyStatus::refusal;
    out.reason = b == Boundedness::unbounded
                     ? "bounded: false (no certified constant outside the quadratic regime)"
                     : "bounded: inconclusive";
    return out;
}

} // namespace errb
