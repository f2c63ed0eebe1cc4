#pragma once

// Conjugate-duality engine: the (f_+)^* identity, scalar and vector Lagrange
// dual values, support-by-duality, and the sampled sweeps that exercise the
// error-bound characterizations
//
//   min_{lambda in [0,1]} (lambda f)^*(x^*) <= sigma_S(x^*)   (scalar)
//   min_{lambda in K*, ||lambda|| <= 1} (lambda g)^*(x^*) <= sigma_Q(x^*)
//
// over the ball ||x^*|| <= 1/alpha. Sampling can refute but never prove the
// quantified statement; reports say "holds" in the sense of "no violation
// found".

#include <cstdint>
#include <optional>
#include <vector>

#include "errb/cones.hpp"
#include "errb/functions.hpp"
#include "errb/geometry.hpp"
#include "errb/numerics.hpp"
#include "errb/rng.hpp"

namespace errb {

// ---------------------------------------------------------------------------
// (f_+)^*(y) = min over lambda in [0,1] of (lambda f)^*(y)

struct FplusConjugate {
    double value = kInf;
    double lambda_star = 0.0;
};

namespace detail {

// shared minimizer of lambda |-> (lambda f)^*(y) over [0, cap] with the
// lambda = 0 endpoint meaning the conjugate of the zero function
inline FplusConjugate minimize_scaled_conjugate(const ConvexFunctionSpec& f, const Vec& y,
                                                double cap, const Tolerances& tol) {
    LambdaDomain dom = lambda_conjugate_domain(f, y);
    const bool zero_ok = norm2(y) == 0.0;

    FplusConjugate best;
    if (zero_ok) best = {0.0, 0.0};

    auto consider_point = [&](double lam) {
        if (lam < 0.0 || lam > cap * (1.0 + 1e-12)) return;
        double v = lambda_scaled_conjugate(f, std::min(lam, cap), y);
        if (v < best.value) best = {v, std::min(lam, cap)};
    };

    switch (dom.kind) {
        case LambdaDomain::Empty:
            break;
        case LambdaDomain::Point:
            consider_point(dom.lo);
            break;
        case LambdaDomain::All:
        case LambdaDomain::Interval: {
            double a = dom.kind == LambdaDomain::All ? 0.0 : std::max(dom.lo, 0.0);
            double b = std::min(dom.kind == LambdaDomain::All ? cap : dom.hi, cap);
            if (a > b) break;
            if (b - a <= 1e-14 * (1.0 + b)) {
                consider_point(a);
                break;
            }
            auto phi = [&](double lam) { return lambda_scaled_conjugate(f, lam, y); };
            Min1DResult m = minimize_1d(phi, a, b, tol.golden * std::max(1.0, b));
            if (m.value < best.value) best = {m.value, m.arg};
            break;
        }
    }
    if (best.value == kInf)
        throw AllInfinite("scaled conjugate: y lies outside every scaled domain");
    return best;
}

} // namespace detail

inline FplusConjugate fplus_conjugate(const ConvexFunctionSpec& f, const Vec& y,
                                      const Tolerances& tol = Tolerances::defaults()) {
    check_dim(y.size(), f.dim(), "fplus_conjugate");
    return detail::minimize_scaled_conjugate(f, y, 1.0, tol);
}

// ---------------------------------------------------------------------------
// Scalar dual value: inf over lambda in [0, lambda_max] of (lambda f)^*(y).
// lambda_max = 1 realizes the left side of the Lemma 1 characterization;
// lambda_max = +inf realizes sigma_S under Slater. The unbounded case runs a
// geometric cap expansion 1, 2, 4, ... and flags (rather than loops forever)
// when the minimum keeps sliding past 2^20.

struct ScalarDualResult {
    double value = kInf;
    double lambda_star = 0.0;
    bool unbounded_suspected = false;
};

inline ScalarDualResult scalar_dual_value(const ConvexFunctionSpec& f, const Vec& y,
                                          double lambda_max,
                                          const Tolerances& tol = Tolerances::defaults()) {
    check_dim(y.size(), f.dim(), "scalar_dual_value");
    if (lambda_max != kInf && lambda_max != 1.0)
        throw Error("scalar_dual_value: lambda_max must be 1 or +inf");

    if (lambda_max == 1.0) {
        FplusConjugate r = detail::minimize_scaled_conjugate(f, y, 1.0, tol);
        return {r.value, r.lambda_star, false};
    }

    LambdaDomain dom = lambda_conjugate_domain(f, y);
    if (dom.kind == LambdaDomain::Point || dom.kind == LambdaDomain::Empty ||
        (dom.kind == LambdaDomain::Interval && dom.hi < kInf)) {
        // bounded domain: a single capped minimization suffices
        double cap = dom.kind == LambdaDomain::Point ? std::max(dom.lo, 1.0)
                     : dom.kind == LambdaDomain::Interval ? std::max(dom.hi, 1.0)
                                                          : 1.0;
        FplusConjugate r = detail::minimize_scaled_conjugate(f, y, cap, tol);
        return {r.value, r.lambda_star, false};
    }

    const double hard_cap = static_cast<double>(1 << 20);
    double cap = 1.0;
    FplusConjugate r;
    for (;;) {
        r = detail::minimize_scaled_conjugate(f, y, cap, tol);
        if (r.lambda_star < 0.9 * cap || cap >= hard_cap) break;
        cap *= 2.0;
    }
    ScalarDualResult out{r.value, r.lambda_star, false};
    if (r.lambda_star >= 0.9 * hard_cap) out.unbounded_suspected = true;
    return out;
}

// sigma_S(y) for S = {f <= 0} under a Slater certificate (strong duality).
inline double support_via_duality(const ConvexFunctionSpec& f, const Vec& slater_point,
                                  const Vec& y, const Tolerances& tol = Tolerances::defaults()) {
    if (!(eval(f, slater_point) < -tol.slater_strict))
        throw NoSlaterCertificate("support_via_duality: point is not strictly feasible");
    return scalar_dual_value(f, y, kInf, tol).value;
}

// ---------------------------------------------------------------------------
// Vector dual value: min -<lambda, q> over {lambda in K*, ||lambda||_2 <= 1,
// M^T lambda = y}. For affine g, (lambda g)^*(y) = -<lambda, q> when
// M^T lambda = y and +inf otherwise, so this value is exactly
// min_{lambda in K*, ||lambda|| <= 1} (lambda g)^*(y).
//
// Solved exactly for the orthant (active-set enumeration over zero patterns,
// with a closed-form sphere minimizer per face) and for any cone whose
// affine slice is one-dimensional (interval search with a membership
// bisection). Higher-dimensional non-polyhedral slices fall back to
// alternating projections with a projected-subgradient objective pass, with
// a 1e-7 accuracy target.

struct VectorDualResult {
    double value = kInf;
    Vec lambda;
    bool feasible = false;
};

namespace detail {

struct AffineSlice {
    Vec lambda_hat;          // min-norm solution of M^T lambda = y
    std::vector<Vec> nullb;  // orthonormal basis of null(M^T)
    bool consistent = false;
};

inline AffineSlice affine_slice(const AffineMap& g, const Vec& y) {
    const std::size_t k = g.rows(), m = g.cols();
    AffineSlice s;

    std::vector<Vec> mtm(m, Vec(m, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) mtm[a][b] += g.M[i][a] * g.M[i][b];
    PinvResult w = pinv_apply(SymMatrix::symmetrized(mtm), y);
    if (!w.in_range) return s;
    s.consistent = true;
    s.lambda_hat.resize(k);
    for (std::size_t i = 0; i < k; ++i) s.lambda_hat[i] = dot(g.M[i], w.w);

    std::vector<Vec> mmt(k, Vec(k, 0.0));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) mmt[a][b] = dot(g.M[a], g.M[b]);
    EigDecomposition e = eig_sym(SymMatrix::symmetrized(mmt));
    double tau = Tolerances::defaults().rank_rel * std::max(e.spectral_radius(), 1.0);
    for (std::size_t j = 0; j < e.eigenvalues.size(); ++j)
        if (std::abs(e.eigenvalues[j]) <= tau) s.nullb.push_back(e.eigenvectors[j]);
    return s;
}

inline bool dual_feasible(const AffineMap& g, const ConeSpec& K, const Vec& y, const Vec& lam,
                          const Tolerances& tol) {
    if (norm2(lam) > 1.0 + 1e-9) return false;
    if (!in_dual_cone(K, lam, tol)) return false;
    return norm2(sub(g.apply_transpose(lam), y)) <= 1e-7 * (1.0 + norm2(y));
}

inline VectorDualResult vector_dual_orthant(const AffineMap& g, const Vec& y, const Vec& c,
                                            const Tolerances& tol) {
    const std::size_t k = g.rows();
    if (k > 16) throw TooLarge("vector_dual_value: more than 16 orthant rows");
    VectorDualResult best;

    auto try_candidate = [&](Vec lam) {
        for (auto& v : lam) v = std::max(v, 0.0);
        ConeSpec orth = ConeSpec::orthant(static_cast<int>(k));
        if (!dual_feasible(g, orth, y, lam, tol)) return;
        double val = dot(c, lam);
        if (!best.feasible || val < best.value) {
            best.feasible = true;
            best.value = val;
            best.lambda = lam;
        }
    };

    if (norm2(y) <= 1e-12) try_candidate(zeros(k)); // the empty face

    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        std::vector<std::size_t> F;
        for (std::size_t i = 0; i < k; ++i)
            if (mask & (1u << i)) F.push_back(i);

        // restricted map: columns M_i for i in F
        std::vector<Vec> rowsF;
        Vec cF(F.size());
        for (std::size_t a = 0; a < F.size(); ++a) {
            rowsF.push_back(g.M[F[a]]);
            cF[a] = c[F[a]];
        }
        AffineMap gF(rowsF, zeros(F.size()));
        AffineSlice sl = affine_slice(gF, y);
        if (!sl.consistent) continue;

        auto embed = [&](const Vec& lamF) {
            Vec lam = zeros(k);
            for (std::size_t a = 0; a < F.size(); ++a) lam[F[a]] = lamF[a];
            return lam;
        };

        if (sl.nullb.empty()) {
            try_candidate(embed(sl.lambda_hat));
            continue;
        }

        // linear objective on the affine slice: the face optimum is either
        // on the sphere (closed form below) or on a smaller face (covered by
        // another zero mask)
        try_candidate(embed(sl.lambda_hat));
        double r2 = 1.0 - dot(sl.lambda_hat, sl.lambda_hat);
        if (r2 < 0.0) continue;
        Vec w(sl.nullb.size());
        for (std::size_t j = 0; j < sl.nullb.size(); ++j) w[j] = dot(cF, sl.nullb[j]);
        double nw = norm2(w);
        if (nw > 1e-13) {
            Vec lamF = sl.lambda_hat;
            double r = std::sqrt(std::max(r2, 0.0));
            for (std::size_t j = 0; j < sl.nullb.size(); ++j)
                lamF = axpy(lamF, -r * w[j] / nw, sl.nullb[j]);
            try_candidate(embed(lamF));
        }
    }
    return best;
}

inline VectorDualResult vector_dual_interval(const AffineMap& g, const ConeSpec& K, const Vec& y,
                                             const Vec& c, const AffineSlice& sl,
                                             const Tolerances& tol) {
    const Vec& n = sl.nullb[0];
    auto lam_of = [&](double u) { return axpy(sl.lambda_hat, u, n); };
    auto infeas = [&](double u) {
        Vec lam = lam_of(u);
        Vec pd = project_dual_cone(K, lam);
        return std::max(norm2(sub(lam, pd)), norm2(lam) - 1.0);
    };
    double span = 1.0 + norm2(sl.lambda_hat) + 1.0;
    Min1DResult md = minimize_1d(infeas, -span, span, 1e-13 * span);
    if (md.value > 1e-9) return {};

    auto edge = [&](double dir) {
        double lo = md.arg, hi = md.arg + dir * span;
        // infeas is convex along u; bisect the boundary of {infeas <= 0}
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi);
            if (infeas(mid) <= 1e-11)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    };
    double u_plus = edge(+1.0), u_minus = edge(-1.0);

    VectorDualResult best;
    for (double u : {u_minus, u_plus, md.arg}) {
        Vec lam = lam_of(u);
        if (!dual_feasible(g, K, y, lam, tol)) continue;
        double val = dot(c, lam);
        if (!best.feasible || val < best.value) {
            best.feasible = true;
            best.value = val;
            best.lambda = lam;
        }
    }
    return best;
}

inline VectorDualResult vector_dual_iterative(const AffineMap& g, const ConeSpec& K, const Vec& y,
                                              const Vec& c, const AffineSlice& sl,
                                              const Tolerances& tol) {
    const std::size_t k = g.rows();
    auto proj_aff = [&](const Vec& lam) {
        // lam - M (M^T M)^+ (M^T lam - y)
        Vec r = sub(g.apply_transpose(lam), y);
        std::vector<Vec> mtm(g.cols(), Vec(g.cols(), 0.0));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t a = 0; a < g.cols(); ++a)
                for (std::size_t b = 0; b < g.cols(); ++b) mtm[a][b] += g.M[i][a] * g.M[i][b];
        Vec w = pinv_apply(SymMatrix::symmetrized(mtm), r).w;
        Vec out = lam;
        for (std::size_t i = 0; i < k; ++i) out[i] -= dot(g.M[i], w);
        return out;
    };
    auto restore = [&](Vec lam) {
        for (int it = 0; it < 3000; ++it) {
            Vec nxt = lam;
            nxt = project_dual_cone(K, nxt);
            double n = norm2(nxt);
            if (n > 1.0) nxt = scale(nxt, 1.0 / n);
            nxt = proj_aff(nxt);
            double move = norm2(sub(nxt, lam));
            lam = nxt;
            if (move < 1e-12) break;
        }
        return lam;
    };

    Vec lam = restore(sl.lambda_hat);
    if (!dual_feasible(g, K, y, lam, tol)) return {};

    VectorDualResult best{dot(c, lam), lam, true};
    double nc = norm2(c);
    if (nc < 1e-14) return best;
    for (int t = 1; t <= 400; ++t) {
        double step = 0.5 / (nc * std::sqrt(static_cast<double>(t)));
        lam = restore(axpy(lam, -step, c));
        if (dual_feasible(g, K, y, lam, tol)) {
            double val = dot(c, lam);
            if (val < best.value) best = {val, lam, true};
        }
    }
    return best;
}

} // namespace detail

inline VectorDualResult vector_dual_value(const AffineMap& g, const ConeSpec& K, const Vec& y,
                                          const Tolerances& tol = Tolerances::defaults()) {
    check_dim(y.size(), g.cols(), "vector_dual_value");
    check_dim(g.rows(), static_cast<std::size_t>(K.k()), "vector_dual_value");
    const Vec c = scale(g.q, -1.0);

    if (K.kind() == ConeKind::Orthant) return detail::vector_dual_orthant(g, y, c, tol);

    detail::AffineSlice sl = detail::affine_slice(g, y);
    if (!sl.consistent) return {};
    if (sl.nullb.empty()) {
        VectorDualResult r;
        if (detail::dual_feasible(g, K, y, sl.lambda_hat, tol)) {
            r.feasible = true;
            r.lambda = sl.lambda_hat;
            r.value = dot(c, sl.lambda_hat);
        }
        return r;
    }
    if (sl.nullb.size() == 1) return detail::vector_dual_interval(g, K, y, c, sl, tol);
    return detail::vector_dual_iterative(g, K, y, c, sl, tol);
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepVerdict { holds, violated };

struct DualitySweepReport {
    double radius = 0.0;   // 1/alpha
    int sample_count = 0;  // random samples (axis probes come on top)
    double max_violation = 0.0;
    double max_gap = 0.0;
    double argmin_lambda_lo = kInf;  // scalar lambda* (or ||lambda*|| for vector sweeps)
    double argmin_lambda_hi = -kInf;
    SweepVerdict verdict = SweepVerdict::holds;
    Vec witness;             // stored iff verdict == violated
    double witness_excess = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

template <class MinConj, class Sigma>
inline DualitySweepReport run_sweep(std::size_t m, double alpha, int sample_count,
                                    std::uint64_t seed, const Tolerances& tol, MinConj&& minconj,
                                    Sigma&& sigma) {
    if (!(alpha > 0.0)) throw Error("sweep: alpha must be positive");
    DualitySweepReport rep;
    rep.radius = 1.0 / alpha;
    rep.sample_count = sample_count;
    rep.seed = seed;

    std::vector<Vec> pts;
    for (std::size_t j = 0; j < m; ++j) {
        pts.push_back(basis(m, j, rep.radius));
        pts.push_back(basis(m, j, -rep.radius));
    }
    for (int i = 0; i < sample_count; ++i) {
        SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(i));
        pts.push_back(ball_point(rng, m, rep.radius));
    }

    for (const Vec& y : pts) {
        double mc, lam;
        minconj(y, mc, lam);
        double sg = sigma(y);
        if (std::isfinite(mc)) {
            rep.argmin_lambda_lo = std::min(rep.argmin_lambda_lo, lam);
            rep.argmin_lambda_hi = std::max(rep.argmin_lambda_hi, lam);
        }

        double excess, gap;
        if (std::isfinite(mc) && std::isfinite(sg)) {
            excess = mc - sg;
            gap = std::abs(mc - sg);
        } else if (!std::isfinite(mc) && !std::isfinite(sg)) {
            excess = 0.0;
            gap = 0.0;
        } else if (!std::isfinite(mc)) {
            excess = kInf; // conjugate minimum infinite while sigma is finite
            gap = kInf;
        } else {
            excess = -kInf; // sigma infinite: inequality holds trivially
            gap = kInf;
        }

        rep.max_violation = std::max(rep.max_violation, std::max(excess, 0.0));
        rep.max_gap = std::max(rep.max_gap, gap);
        double thresh = tol.violation_rel * (1.0 + (std::isfinite(sg) ? std::abs(sg) : 0.0));
        if (excess > thresh && excess > rep.witness_excess) {
            rep.verdict = SweepVerdict::violated;
            rep.witness = y;
            rep.witness_excess = excess;
        }
    }
    return rep;
}

} // namespace detail

// Lemma-1 sweep: samples the ball of radius 1/alpha (plus the 2m axis
// points) and compares (f_+)^* against sigma_S.
inline DualitySweepReport lemma1_sweep(const ConvexFunctionSpec& f, const SetSpec& S,
                                       double alpha, int sample_count, std::uint64_t seed,
                                       const Tolerances& tol = Tolerances::defaults()) {
    auto minconj = [&](const Vec& y, double& mc, double& lam) {
        try {
            FplusConjugate r = fplus_conjugate(f, y, tol);
            mc = r.value;
            lam = r.lambda_star;
        } catch (const AllInfinite&) {
            mc = kInf;
            lam = 0.0;
        }
    };
    auto sigma = [&](const Vec& y) -> double {
        try {
            return support(S, y, tol);
        } catch (const Unsupported&) {
            try {
                return support_via_duality(f, S.feasible_point(), y, tol);
            } catch (const AllInfinite&) {
                return kInf;
            }
        }
    };
    return detail::run_sweep(f.dim(), alpha, sample_count, seed, tol, minconj, sigma);
}

// Lemma-6 sweep: vector analogue with the capped conic dual.
inline DualitySweepReport lemma6_sweep(const AffineMap& g, const ConeSpec& K, const SetSpec& Q,
                                       double alpha, int sample_count, std::uint64_t seed,
                                       const Tolerances& tol = Tolerances::defaults()) {
    auto minconj = [&](const Vec& y, double& mc, double& lam) {
        VectorDualResult r = vector_dual_value(g, K, y, tol);
        mc = r.feasible ? r.value : kInf;
        lam = r.feasible ? norm2(r.lambda) : 0.0;
    };
    auto sigma = [&](const Vec& y) -> double { return support(Q, y, tol); };
    return detail::run_sweep(g.cols(), alpha, sample_count, seed, tol, minconj, sigma);
}

} // namespace errb
