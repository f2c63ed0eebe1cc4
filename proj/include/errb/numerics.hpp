#pragma once

// Dense symmetric linear algebra and one-dimensional search kernels.
// Everything here is self-contained: fixed small dimensions (<= 32),
// no external linear-algebra dependency.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace errb {

using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
// Distinct from NonConvergence: an iteration cap that should be unreachable
// for valid input (e.g. Jacobi on a symmetric matrix).
struct InternalDefect : Error { using Error::Error; };
struct AllInfinite : Error { using Error::Error; };
struct NoBracket : Error { using Error::Error; };
struct EmptySet : Error { using Error::Error; };
struct EmptyGrid : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct TooHighDimension : Error { using Error::Error; };
struct Unsupported : Error { using Error::Error; };
struct ConstructionError : Error { using Error::Error; };
struct InvalidDelta : Error { using Error::Error; };
struct ZeroMargin : Error { using Error::Error; };
struct InfiniteDiameter : Error { using Error::Error; };
struct NoSlaterCertificate : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Tolerances, centralized. Reports serialize this record so runs are
// comparable.

struct Tolerances {
    double rank_rel = 1e-10;       // pinv eigenvalue cutoff, relative to spectral radius
    double psd_rel = 1e-10;        // PSD acceptance: lambda_min >= -psd_rel * rho(A)
    double membership = 1e-10;     // cone/set defining-inequality slack
    double golden = 1e-10;         // minimize_1d bracket width
    double root = 1e-12;           // find_root_1d bracket width / residual
    double dykstra = 1e-9;         // alternating-projection movement stop
    double fw_gap = 1e-9;          // Frank-Wolfe duality gap stop
    double subgrad_proj = 1e-7;    // scalarized-level-set projection target
    double vertex_dedup = 1e-8;    // vertex enumeration dedup radius
    double violation_rel = 1e-6;   // duality-sweep verdict threshold (relative)
    double slater_strict = 1e-9;   // strict-feasibility threshold
    double residual_floor = 1e-12; // empirical-alpha positive-residual cutoff

    static const Tolerances& defaults() {
        static const Tolerances t{};
        return t;
    }
    static Tolerances strict() {
        Tolerances t;
        t.golden = 1e-12;
        t.root = 1e-13;
        t.dykstra = 1e-11;
        t.membership = 1e-11;
        t.violation_rel = 1e-7;
        t.subgrad_proj = 1e-9;
        return t;
    }
};

// ---------------------------------------------------------------------------
// Small vector helpers

inline void check_dim(std::size_t got, std::size_t want, const char* where) {
    if (got != want)
        throw DimensionMismatch(std::string(where) + ": dimension " + std::to_string(got) +
                                ", expected " + std::to_string(want));
}

inline double dot(const Vec& a, const Vec& b) {
    check_dim(a.size(), b.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::abs(v));
    return s;
}

inline Vec add(const Vec& a, const Vec& b) {
    check_dim(a.size(), b.size(), "add");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
    check_dim(a.size(), b.size(), "sub");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec scale(const Vec& a, double t) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = t * a[i];
    return r;
}

// r = a + t*b
inline Vec axpy(const Vec& a, double t, const Vec& b) {
    check_dim(a.size(), b.size(), "axpy");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + t * b[i];
    return r;
}

inline Vec unit(const Vec& a) {
    double n = norm2(a);
    if (n == 0.0) throw Error("unit: zero vector");
    return scale(a, 1.0 / n);
}

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline Vec basis(std::size_t n, std::size_t i, double v = 1.0) {
    Vec r(n, 0.0);
    r[i] = v;
    return r;
}

// ---------------------------------------------------------------------------
// SymMatrix: dense symmetric matrix, entries stored full, exact symmetry
// enforced at construction.

class SymMatrix {
  public:
    SymMatrix() : dim_(0) {}

    static SymMatrix zero(int n) {
        SymMatrix m;
        m.dim_ = n;
        m.a_.assign(static_cast<std::size_t>(n) * n, 0.0);
        m.validate();
        return m;
    }

    static SymMatrix diagonal(const Vec& d) {
        SymMatrix m = zero(static_cast<int>(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i) m.a_[i * d.size() + i] = d[i];
        return m;
    }

    // Rows must be exactly symmetric; throws otherwise.
    static SymMatrix from_rows(const std::vector<Vec>& rows) {
        SymMatrix m;
        m.dim_ = static_cast<int>(rows.size());
        m.a_.reserve(rows.size() * rows.size());
        for (const auto& r : rows) {
            check_dim(r.size(), rows.size(), "SymMatrix::from_rows");
            m.a_.insert(m.a_.end(), r.begin(), r.end());
        }
        m.validate();
        for (int i = 0; i < m.dim_; ++i)
            for (int j = 0; j < i; ++j)
                if (m(i, j) != m(j, i))
                    throw ConstructionError("SymMatrix: entries not symmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
        return m;
    }

    // (M + M^T)/2, useful when assembling products that are symmetric only up
    // to roundoff.
    static SymMatrix symmetrized(const std::vector<Vec>& rows) {
        int n = static_cast<int>(rows.size());
        std::vector<Vec> s(n, Vec(n));
        for (int i = 0; i < n; ++i) {
            check_dim(rows[i].size(), rows.size(), "SymMatrix::symmetrized");
            for (int j = 0; j < n; ++j) s[i][j] = 0.5 * (rows[i][j] + rows[j][i]);
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) s[i][j] = s[j][i];
        return from_rows(s);
    }

    int dim() const { return dim_; }

    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }

    Vec apply(const Vec& x) const {
        check_dim(x.size(), static_cast<std::size_t>(dim_), "SymMatrix::apply");
        Vec y(dim_, 0.0);
        for (int i = 0; i < dim_; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    double quad(const Vec& x) const { return dot(x, apply(x)); } // <x, Ax>

    double max_abs() const {
        double s = 0.0;
        for (double v : a_) s = std::max(s, std::abs(v));
        return s;
    }

  private:
    void validate() const {
        if (dim_ < 1) throw ConstructionError("SymMatrix: dim must be >= 1");
    }

    int dim_;
    std::vector<double> a_; // row-major dim x dim
};

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition via cyclic Jacobi. dim <= 32.

struct EigDecomposition {
    Vec eigenvalues;                // sorted descending
    std::vector<Vec> eigenvectors; // eigenvectors[j] is the column for eigenvalues[j], orthonormal

    double spectral_radius() const {
        double s = 0.0;
        for (double v : eigenvalues) s = std::max(s, std::abs(v));
        return s;
    }
    double min_eigenvalue() const { return eigenvalues.empty() ? 0.0 : eigenvalues.back(); }
};

inline EigDecomposition eig_sym(const SymMatrix& A) {
    const int n = A.dim();
    if (n > 32) throw TooLarge("eig_sym: dim > 32");

    std::vector<Vec> a(n, Vec(n));
    std::vector<Vec> v(n, Vec(n, 0.0));
    for (int i = 0; i < n; ++i) {
        v[i][i] = 1.0;
        for (int j = 0; j < n; ++j) a[i][j] = A(i, j);
    }

    const double scale = 1.0 + A.max_abs();
    const double stop = 1e-14 * scale;
    const int max_sweeps = 128;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a[p][q]));
        if (off <= stop) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a[p][q];
                if (std::abs(apq) <= 0.1 * stop) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int i = 0; i < n; ++i) {
                    double aip = a[i][p], aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (int j = 0; j < n; ++j) {
                    double apj = a[p][j], aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for (int i = 0; i < n; ++i) {
                    double vip = v[i][p], viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    if (sweep >= max_sweeps)
        throw InternalDefect("eig_sym: Jacobi iteration cap exceeded on symmetric input");

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] > a[j][j]; });

    EigDecomposition e;
    e.eigenvalues.resize(n);
    e.eigenvectors.assign(n, Vec(n));
    for (int j = 0; j < n; ++j) {
        e.eigenvalues[j] = a[order[j]][order[j]];
        for (int i = 0; i < n; ++i) e.eigenvectors[j][i] = v[i][order[j]];
    }
    return e;
}

// ---------------------------------------------------------------------------
// Pseudo-inverse application and range test. Default rank tolerance is
// relative to the spectral radius; the membership slack is relative to the
// input vector, which keeps the dom f* test stable across scales.

struct PinvResult {
    Vec w;
    bool in_range = false;
};

inline PinvResult pinv_apply(const EigDecomposition& e, const Vec& v, double rank_tol = -1.0) {
    const std::size_t n = e.eigenvalues.size();
    check_dim(v.size(), n, "pinv_apply");
    double tau = rank_tol;
    if (tau < 0.0) tau = Tolerances::defaults().rank_rel * e.spectral_radius();

    PinvResult r;
    r.w = zeros(n);
    Vec kept = zeros(n); // component of v in the retained eigenspace
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(e.eigenvalues[j]) > tau) {
            double c = dot(e.eigenvectors[j], v);
            for (std::size_t i = 0; i < n; ++i) {
                r.w[i] += (c / e.eigenvalues[j]) * e.eigenvectors[j][i];
                kept[i] += c * e.eigenvectors[j][i];
            }
        }
    }
    double resid = norm2(sub(v, kept));
    r.in_range = resid <= std::max(tau, Tolerances::defaults().rank_rel) * (1.0 + norm2(v));
    return r;
}

inline PinvResult pinv_apply(const SymMatrix& A, const Vec& v, double rank_tol = -1.0) {
    return pinv_apply(eig_sym(A), v, rank_tol);
}

// ---------------------------------------------------------------------------
// One-dimensional convex minimization, golden-section style, tolerant of
// +inf values. An infinite probe contracts the bracket toward the best known
// finite point; if no finite value exists on a net refined down to tol (or
// 2^20 points), AllInfinite is thrown.

struct Min1DResult {
    double arg = 0.0;
    double value = kInf;
};

inline Min1DResult minimize_1d(const std::function<double(double)>& phi, double lo, double hi,
                               double tol) {
    if (!(lo < hi)) throw Error("minimize_1d: need lo < hi");
    if (!(tol > 0.0)) throw Error("minimize_1d: need tol > 0");

    double xm = lo, fm = phi(lo);
    {
        double fhi = phi(hi);
        if (fhi < fm) { fm = fhi; xm = hi; }
    }
    for (std::size_t pts = 9; !std::isfinite(fm); pts = pts * 4 - 3) {
        double step = (hi - lo) / static_cast<double>(pts - 1);
        for (std::size_t i = 1; i + 1 < pts; ++i) {
            double x = lo + step * static_cast<double>(i);
            double f = phi(x);
            if (f < fm) { fm = f; xm = x; }
        }
        if (std::isfinite(fm)) break;
        if (step <= tol || pts > (1u << 20))
            throw AllInfinite("minimize_1d: no finite value found on the search net");
    }

    // Three-point contraction around the finite anchor.
    const double g2 = 0.3819660112501051; // 1 - 1/golden ratio
    double a = lo, b = hi;
    int guard = 0;
    while (b - a > tol && guard++ < 2000) {
        double c = (xm - a >= b - xm) ? xm - g2 * (xm - a) : xm + g2 * (b - xm);
        if (c <= a || c >= b || c == xm) break; // numerically exhausted
        double fc = phi(c);
        if (fc < fm) {
            if (c < xm) b = xm; else a = xm;
            xm = c;
            fm = fc;
        } else {
            if (c < xm) a = c; else b = c;
        }
    }
    return {xm, fm};
}

// ---------------------------------------------------------------------------
// Bracketed root finding (bisection with a secant nudge). Requires a sign
// change on [lo, hi].

inline double find_root_1d(const std::function<double(double)>& phi, double lo, double hi,
                           double tol) {
    double fa = phi(lo), fb = phi(hi);
    if (std::abs(fa) <= tol) return lo;
    if (std::abs(fb) <= tol) return hi;
    if (fa * fb > 0.0) throw NoBracket("find_root_1d: phi(lo) and phi(hi) have the same sign");

    double a = lo, b = hi;
    for (int it = 0; it < 400 && (b - a) > tol; ++it) {
        double m = 0.5 * (a + b);
        // Secant candidate, used only if it falls safely inside the bracket.
        if (std::isfinite(fa) && std::isfinite(fb) && fb != fa) {
            double s = a - fa * (b - a) / (fb - fa);
            double margin = 0.01 * (b - a);
            if (s > a + margin && s < b - margin && (it % 2 == 0)) m = s;
        }
        double fmid = phi(m);
        if (std::abs(fmid) <= tol) return m;
        if (fa * fmid <= 0.0) {
            b = m;
            fb = fmid;
        } else {
            a = m;
            fa = fmid;
        }
    }
    return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// Dense (non-symmetric) helpers for small linear systems, used by vertex and
// basic-subset enumeration. Gaussian elimination with partial pivoting;
// returns false on (numerical) singularity.

inline bool solve_dense(std::vector<Vec> a, Vec rhs, Vec& out) {
    const std::size_t n = a.size();
    if (n == 0 || rhs.size() != n) return false;
    for (auto& row : a)
        if (row.size() != n) return false;

    std::vector<std::size_t> piv(n);
    for (std::size_t i = 0; i < n; ++i) piv[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = col;
        double bv = std::abs(a[col][col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > bv) {
                bv = std::abs(a[r][col]);
                best = r;
            }
        }
        if (bv < 1e-12) return false;
        std::swap(a[col], a[best]);
        std::swap(rhs[col], rhs[best]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * out[c];
        out[i] = s / a[i][i];
    }
    return true;
}

// Least-squares solve of an overdetermined system (rows x cols, rows >= cols)
// via normal equations; returns false if the normal matrix is singular at the
// pinv tolerance. Also reports the residual norm.
inline bool solve_least_squares(const std::vector<Vec>& a, const Vec& rhs, Vec& out,
                                double& resid) {
    const std::size_t rows = a.size();
    if (rows == 0) return false;
    const std::size_t cols = a[0].size();
    if (rhs.size() != rows) return false;

    std::vector<Vec> nm(cols, Vec(cols, 0.0));
    Vec nr(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < cols; ++i) {
            nr[i] += a[r][i] * rhs[r];
            for (std::size_t j = 0; j < cols; ++j) nm[i][j] += a[r][i] * a[r][j];
        }
    }
    SymMatrix N = SymMatrix::symmetrized(nm);
    PinvResult p = pinv_apply(N, nr);
    if (!p.in_range) return false;
    out = p.w;
    double s2 = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        double pred = 0.0;
        for (std::size_t i = 0; i < cols; ++i) pred += a[r][i] * out[i];
        s2 += (pred - rhs[r]) * (pred - rhs[r]);
    }
    resid = std::sqrt(s2);
    return true;
}

} // namespace errb
