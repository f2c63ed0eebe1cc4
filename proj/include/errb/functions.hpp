#pragma once

// Representable proper convex functions f : R^m -> R u {+inf} with
// evaluation, subgradients and closed-form conjugate calculus.
//
// Three variants:
//   Quadratic   f(x) = 1/2 <x, Ax> + <b, x> - c, A symmetric PSD
//   MaxAffine   f(x) = max_i (<a_i, x> - beta_i)
//   Scalarized  f(x) = Delta_{-K}(g(x)) for an affine map g and cone K
//
// All variants are finite everywhere, so dom f = R^m and the paper's improper
// lower-semicontinuous-hull branch has no runtime counterpart.

#include <memory>
#include <variant>
#include <vector>

#include "errb/cones.hpp"
#include "errb/numerics.hpp"

namespace errb {

// g(x) = Mx + q, M a k x m matrix stored by rows.
struct AffineMap {
    std::vector<Vec> M;
    Vec q;

    AffineMap() = default;
    AffineMap(std::vector<Vec> rows, Vec offset) : M(std::move(rows)), q(std::move(offset)) {
        if (M.empty()) throw ConstructionError("AffineMap: empty matrix");
        check_dim(q.size(), M.size(), "AffineMap");
        for (const auto& r : M) check_dim(r.size(), M[0].size(), "AffineMap");
    }

    std::size_t rows() const { return M.size(); } // k
    std::size_t cols() const { return M[0].size(); } // m

    Vec apply(const Vec& x) const {
        check_dim(x.size(), cols(), "AffineMap::apply");
        Vec y(rows());
        for (std::size_t i = 0; i < rows(); ++i) y[i] = dot(M[i], x) + q[i];
        return y;
    }

    // M^T lambda
    Vec apply_transpose(const Vec& lam) const {
        check_dim(lam.size(), rows(), "AffineMap::apply_transpose");
        Vec y(cols(), 0.0);
        for (std::size_t i = 0; i < rows(); ++i)
            for (std::size_t j = 0; j < cols(); ++j) y[j] += M[i][j] * lam[i];
        return y;
    }
};

struct Quadratic {
    SymMatrix A;
    Vec b;
    double c = 0.0;
};

struct MaxAffineRow {
    Vec a;
    double beta = 0.0;
};

struct MaxAffine {
    std::vector<MaxAffineRow> rows;
};

struct Scalarized {
    AffineMap g;
    ConeSpec K;
};

class ConvexFunctionSpec {
  public:
    static ConvexFunctionSpec quadratic(SymMatrix A, Vec b, double c,
                                        const Tolerances& tol = Tolerances::defaults()) {
        check_dim(b.size(), static_cast<std::size_t>(A.dim()), "ConvexFunctionSpec::quadratic");
        auto eig = std::make_shared<EigDecomposition>(eig_sym(A));
        if (eig->min_eigenvalue() < -tol.psd_rel * eig->spectral_radius())
            throw ConstructionError("quadratic: matrix is not positive semidefinite");
        ConvexFunctionSpec f;
        f.dim_ = b.size();
        f.v_ = Quadratic{std::move(A), std::move(b), c};
        f.eig_ = std::move(eig);
        return f;
    }

    static ConvexFunctionSpec max_affine(std::vector<MaxAffineRow> rows) {
        if (rows.empty()) throw ConstructionError("max_affine: needs at least one row");
        for (const auto& r : rows) check_dim(r.a.size(), rows[0].a.size(), "max_affine");
        ConvexFunctionSpec f;
        f.dim_ = rows[0].a.size();
        f.v_ = MaxAffine{std::move(rows)};
        return f;
    }

    static ConvexFunctionSpec scalarized(AffineMap g, ConeSpec K) {
        check_dim(g.rows(), static_cast<std::size_t>(K.k()), "scalarized");
        ConvexFunctionSpec f;
        f.dim_ = g.cols();
        f.v_ = Scalarized{std::move(g), std::move(K)};
        return f;
    }

    std::size_t dim() const { return dim_; }

    bool is_quadratic() const { return std::holds_alternative<Quadratic>(v_); }
    bool is_max_affine() const { return std::holds_alternative<MaxAffine>(v_); }
    bool is_scalarized() const { return std::holds_alternative<Scalarized>(v_); }

    const Quadratic& as_quadratic() const { return std::get<Quadratic>(v_); }
    const MaxAffine& as_max_affine() const { return std::get<MaxAffine>(v_); }
    const Scalarized& as_scalarized() const { return std::get<Scalarized>(v_); }

    // eigendecomposition of the quadratic's A, computed once at construction
    const EigDecomposition& quadratic_eig() const { return *eig_; }

  private:
    ConvexFunctionSpec() = default;

    std::size_t dim_ = 0;
    std::variant<Quadratic, MaxAffine, Scalarized> v_;
    std::shared_ptr<const EigDecomposition> eig_;
};

// ---------------------------------------------------------------------------
// Evaluation and subgradients

inline double eval(const ConvexFunctionSpec& f, const Vec& x) {
    check_dim(x.size(), f.dim(), "eval");
    if (f.is_quadratic()) {
        const auto& q = f.as_quadratic();
        return 0.5 * q.A.quad(x) + dot(q.b, x) - q.c;
    }
    if (f.is_max_affine()) {
        double m = -kInf;
        for (const auto& r : f.as_max_affine().rows) m = std::max(m, dot(r.a, x) - r.beta);
        return m;
    }
    const auto& s = f.as_scalarized();
    return oriented_distance(s.K, s.g.apply(x)).value;
}

inline double plus_part(const ConvexFunctionSpec& f, const Vec& x) {
    return std::max(eval(f, x), 0.0);
}

// Lowest-index tie rule for MaxAffine keeps outputs deterministic.
inline Vec subgradient(const ConvexFunctionSpec& f, const Vec& x) {
    check_dim(x.size(), f.dim(), "subgradient");
    if (f.is_quadratic()) {
        const auto& q = f.as_quadratic();
        return add(q.A.apply(x), q.b);
    }
    if (f.is_max_affine()) {
        const auto& rows = f.as_max_affine().rows;
        std::size_t arg = 0;
        double best = -kInf;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double v = dot(rows[i].a, x) - rows[i].beta;
            if (v > best + 1e-15) { best = v; arg = i; }
        }
        return rows[arg].a;
    }
    const auto& s = f.as_scalarized();
    Vec lam = delta_subgradient(s.K, s.g.apply(x));
    return s.g.apply_transpose(lam);
}

// ---------------------------------------------------------------------------
// Conjugates
//
// Quadratic: f*(y) = 1/2 <y-b, A^+(y-b)> + c when y-b lies in range(A), +inf
// otherwise (dom f* = b + A(R^m)).
//
// MaxAffine: f*(y) = min { sum theta_i beta_i : theta >= 0, sum theta_i = 1,
// sum theta_i a_i = y }, +inf when y is outside conv{a_i}. Solved by
// enumerating basic feasible weight subsets; row counts above 12 are a
// documented input limit.

namespace detail {

inline double conjugate_quadratic(const ConvexFunctionSpec& f, const Vec& y) {
    const auto& q = f.as_quadratic();
    PinvResult p = pinv_apply(f.quadratic_eig(), sub(y, q.b));
    if (!p.in_range) return kInf;
    return 0.5 * dot(sub(y, q.b), p.w) + q.c;
}

// Enumerate subsets of rows of size <= cap; solve the (m+1)-equation system
// sum theta_i a_i = y, sum theta_i = rhs_sum by least squares and keep
// feasible nonnegative solutions. Returns the minimal objective
// sum theta_i beta_i, or +inf.
inline double max_affine_weight_program(const std::vector<MaxAffineRow>& rows, const Vec& y,
                                        double rhs_sum) {
    const std::size_t m = y.size();
    const std::size_t r = rows.size();
    if (r > 12) throw TooLarge("max_affine conjugate: more than 12 rows");
    const std::size_t cap = std::min(r, m + 1);
    const double feas_eps = 1e-9 * (1.0 + norm2(y) + std::abs(rhs_sum));

    double best = kInf;
    std::vector<std::size_t> idx;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (!idx.empty()) {
            std::vector<Vec> a(m + 1, Vec(idx.size()));
            Vec rhs(m + 1);
            for (std::size_t c = 0; c < idx.size(); ++c) {
                for (std::size_t i = 0; i < m; ++i) a[i][c] = rows[idx[c]].a[i];
                a[m][c] = 1.0;
            }
            for (std::size_t i = 0; i < m; ++i) rhs[i] = y[i];
            rhs[m] = rhs_sum;
            Vec theta;
            double resid = 0.0;
            if (solve_least_squares(a, rhs, theta, resid) && resid <= feas_eps) {
                bool nn = true;
                double obj = 0.0;
                for (std::size_t c = 0; c < idx.size(); ++c) {
                    if (theta[c] < -1e-10) nn = false;
                    obj += std::max(theta[c], 0.0) * rows[idx[c]].beta;
                }
                if (nn) best = std::min(best, obj);
            }
        }
        if (idx.size() == cap) return;
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

inline double conjugate(const ConvexFunctionSpec& f, const Vec& y) {
    check_dim(y.size(), f.dim(), "conjugate");
    if (f.is_quadratic()) return detail::conjugate_quadratic(f, y);
    if (f.is_max_affine())
        return detail::max_affine_weight_program(f.as_max_affine().rows, y, 1.0);
    throw Unsupported("conjugate: not provided for scalarized functions; "
                      "use the vector dual path");
}

// (lambda f)^*(y) = lambda f^*(y / lambda) for lambda > 0; for lambda = 0 the
// scaled function is identically 0, whose conjugate is the indicator of {0}.
inline double lambda_scaled_conjugate(const ConvexFunctionSpec& f, double lambda, const Vec& y) {
    check_dim(y.size(), f.dim(), "lambda_scaled_conjugate");
    if (lambda < 0.0) throw Error("lambda_scaled_conjugate: lambda must be >= 0");
    if (lambda == 0.0) return norm2(y) == 0.0 ? 0.0 : kInf;
    return lambda * conjugate(f, scale(y, 1.0 / lambda));
}

// ---------------------------------------------------------------------------
// Domain of lambda |-> (lambda f)^*(y) over lambda > 0, needed because the
// finite region can be a single point (e.g. a one-row MaxAffine), which no
// net scan can locate. lambda = 0 belongs to the domain exactly when y = 0.

struct LambdaDomain {
    enum Kind { Empty, Point, Interval, All } kind = Empty;
    double lo = 0.0;       // Point: the point; Interval: lower end
    double hi = 0.0;       // Interval: upper end (may be +inf)

    bool unbounded_above() const { return kind == All || (kind == Interval && hi == kInf); }
};

inline LambdaDomain lambda_conjugate_domain(const ConvexFunctionSpec& f, const Vec& y) {
    check_dim(y.size(), f.dim(), "lambda_conjugate_domain");
    LambdaDomain d;

    if (f.is_quadratic()) {
        // need y - lambda b in range(A); split off the null-space components
        const auto& q = f.as_quadratic();
        const auto& e = f.quadratic_eig();
        const double tau = Tolerances::defaults().rank_rel * std::max(e.spectral_radius(), 1.0);
        Vec yn = zeros(y.size()), bn = zeros(y.size());
        for (std::size_t j = 0; j < e.eigenvalues.size(); ++j) {
            if (std::abs(e.eigenvalues[j]) <= tau) {
                yn = axpy(yn, dot(e.eigenvectors[j], y), e.eigenvectors[j]);
                bn = axpy(bn, dot(e.eigenvectors[j], q.b), e.eigenvectors[j]);
            }
        }
        double nyn = norm2(yn), nbn = norm2(bn);
        if (nbn <= tau * (1.0 + norm2(q.b))) {
            d.kind = nyn <= tau * (1.0 + norm2(y)) ? LambdaDomain::All : LambdaDomain::Empty;
            return d;
        }
        double lam0 = dot(yn, bn) / (nbn * nbn);
        if (lam0 > 0.0 && norm2(sub(yn, scale(bn, lam0))) <= 1e-9 * (1.0 + norm2(y))) {
            d.kind = LambdaDomain::Point;
            d.lo = d.hi = lam0;
        }
        return d;
    }

    if (f.is_max_affine()) {
        // (lambda f)^*(y) finite iff y in lambda conv{a_i}, i.e. iff there is
        // theta >= 0 with sum theta_i a_i = y and sum theta_i = lambda. The
        // reachable sums {sum theta} form an interval; its finite ends are
        // attained at basic solutions of {theta >= 0 : sum theta_i a_i = y},
        // and the upper end is +inf exactly when 0 in conv{a_i}.
        const auto& rows = f.as_max_affine().rows;
        const std::size_t m = y.size();
        const std::size_t r = rows.size();
        if (r > 12) throw TooLarge("lambda_conjugate_domain: more than 12 rows");
        const double feas_eps = 1e-9 * (1.0 + norm2(y));

        double lo = kInf, hi = -kInf;
        std::vector<std::size_t> idx;
        std::function<void(std::size_t)> rec = [&](std::size_t start) {
            if (!idx.empty()) {
                std::vector<Vec> a(m, Vec(idx.size()));
                for (std::size_t c = 0; c < idx.size(); ++c)
                    for (std::size_t i = 0; i < m; ++i) a[i][c] = rows[idx[c]].a[i];
                Vec theta;
                double resid = 0.0;
                if (solve_least_squares(a, y, theta, resid) && resid <= feas_eps) {
                    bool nn = true;
                    double s = 0.0;
                    for (double t : theta) {
                        if (t < -1e-10) nn = false;
                        s += std::max(t, 0.0);
                    }
                    if (nn) {
                        lo = std::min(lo, s);
                        hi = std::max(hi, s);
                    }
                }
            }
            if (idx.size() == std::min(r, m)) return;
            for (std::size_t i = start; i < r; ++i) {
                idx.push_back(i);
                rec(i + 1);
                idx.pop_back();
            }
        };
        rec(0);

        if (norm2(y) <= feas_eps) { lo = std::min(lo, 0.0); hi = std::max(hi, 0.0); }
        if (lo == kInf) return d; // empty

        Vec zero_m = zeros(m);
        bool recession = detail::max_affine_weight_program(rows, zero_m, 1.0) < kInf;
        d.kind = LambdaDomain::Interval;
        d.lo = std::max(lo, 0.0);
        d.hi = recession ? kInf : hi;
        if (d.hi < d.lo) d.hi = d.lo;
        if (d.hi == d.lo) { d.kind = LambdaDomain::Point; }
        return d;
    }

    throw Unsupported("lambda_conjugate_domain: scalarized functions use the vector dual path");
}

} // namespace errb
