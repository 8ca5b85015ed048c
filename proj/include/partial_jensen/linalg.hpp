#pragma once

// Dense Hermitian linear algebra: operators, eigendecomposition, spectral
// functions and traces.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"

namespace pj {

/// Largest tolerated entrywise asymmetry |A - A*|, relative to max(1, max|A|).
inline constexpr double kHermitianTolerance = 1e-8;

/// Dense self-adjoint operator. Construction symmetrizes the input, so the
/// stored matrix is exactly Hermitian.
class HermitianOperator {
public:
    HermitianOperator() = default;

    explicit HermitianOperator(Matrix m) : m_(std::move(m)) {
        if (!m_.square() || m_.rows() == 0) {
            throw DimensionError("Hermitian operator needs a non-empty square matrix");
        }
        const std::size_t n = m_.rows();
        const double scale = std::max(1.0, m_.max_abs());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const Complex a = m_(i, j);
                const Complex b = std::conj(m_(j, i));
                if (std::abs(a - b) > kHermitianTolerance * scale) {
                    std::ostringstream os;
                    os << "matrix is not Hermitian: |A(" << i << "," << j << ") - conj(A(" << j << "," << i
                       << "))| = " << std::abs(a - b);
                    throw DomainError(os.str());
                }
                const Complex avg = 0.5 * (a + b);
                m_(i, j) = avg;
                m_(j, i) = std::conj(avg);
            }
            m_(i, i) = m_(i, i).real();
        }
    }

    static HermitianOperator identity(std::size_t n) { return HermitianOperator(Matrix::identity(n)); }
    static HermitianOperator zero(std::size_t n) { return HermitianOperator(Matrix(n, n)); }
    static HermitianOperator diagonal(std::span<const double> values) {
        return HermitianOperator(Matrix::diagonal(values));
    }
    static HermitianOperator diagonal(std::initializer_list<double> values) {
        const std::vector<double> v(values);
        return diagonal(std::span<const double>(v));
    }

    std::size_t dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }
    Complex operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

    friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
        return HermitianOperator(a.m_ + b.m_);
    }
    friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
        return HermitianOperator(a.m_ - b.m_);
    }
    friend HermitianOperator operator*(double s, const HermitianOperator& a) { return HermitianOperator(a.m_ * s); }
    friend HermitianOperator operator*(const HermitianOperator& a, double s) { return s * a; }

private:
    Matrix m_;
};

/// H = U diag(eigenvalues) U*, eigenvalues ascending, U unitary with
/// eigenvectors as columns.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;

    Vector eigenvector(std::size_t k) const {
        Vector v(eigenvectors.rows());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = eigenvectors(i, k);
        return v;
    }
};

namespace detail {

/// Implicit-shift QL on a real symmetric tridiagonal matrix. `d` holds the
/// diagonal, `e[i]` couples rows i and i+1 (size n, last entry ignored). On
/// return `d` holds the eigenvalues (unsorted). If `z` is non-null it must be
/// an n x n row-major matrix; it is right-multiplied by the accumulated
/// rotations.
inline void implicit_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>* z) {
    const long n = static_cast<long>(d.size());
    if (n == 0) return;
    e.resize(static_cast<std::size_t>(n), 0.0);
    e[static_cast<std::size_t>(n - 1)] = 0.0;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const int budget = 60;

    for (long l = 0; l < n; ++l) {
        int iter = 0;
        long m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == budget) {
                    throw ConvergenceError("implicit QL did not converge", std::abs(e[l]));
                }
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                long i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    e[i + 1] = (r = std::hypot(f, g));
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    d[i + 1] = g + (p = s * r);
                    g = c * r - b;
                    if (z != nullptr) {
                        auto& zz = *z;
                        for (long k = 0; k < n; ++k) {
                            f = zz[k * n + i + 1];
                            zz[k * n + i + 1] = s * zz[k * n + i] + c * f;
                            zz[k * n + i] = c * zz[k * n + i] - s * f;
                        }
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

} // namespace detail

/// Eigenvalues of the real symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off` (off[i] couples i and i+1), ascending.
inline std::vector<double> tridiagonal_eigenvalues(std::vector<double> diag, std::vector<double> off) {
    if (!diag.empty() && off.size() + 1 != diag.size()) {
        throw DimensionError("tridiagonal: off-diagonal must have n-1 entries");
    }
    detail::implicit_ql(diag, off, nullptr);
    std::sort(diag.begin(), diag.end());
    return diag;
}

/// Householder reduction to real tridiagonal form followed by implicit QL.
inline SpectralDecomposition eig_hermitian(const HermitianOperator& h) {
    const std::size_t n = h.dim();
    Matrix a = h.matrix();
    Matrix q = Matrix::identity(n);

    Vector v(n), p(n), w(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double xnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) xnorm2 += std::norm(a(i, k));
        const double xnorm = std::sqrt(xnorm2);
        if (xnorm == 0.0) continue;
        const Complex x0 = a(k + 1, k);
        const Complex phase = std::abs(x0) == 0.0 ? Complex{1.0} : x0 / std::abs(x0);
        const Complex alpha = -phase * xnorm;

        std::fill(v.begin(), v.end(), Complex{});
        for (std::size_t i = k + 1; i < n; ++i) v[i] = a(i, k);
        v[k + 1] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) vnorm2 += std::norm(v[i]);
        if (vnorm2 == 0.0) continue;
        const double vinv = 1.0 / std::sqrt(vnorm2);
        for (std::size_t i = k + 1; i < n; ++i) v[i] *= vinv;

        // Trailing block update A <- P A P with P = I - 2 v v*.
        Complex kk{};
        for (std::size_t i = k + 1; i < n; ++i) {
            Complex acc{};
            for (std::size_t j = k + 1; j < n; ++j) acc += a(i, j) * v[j];
            p[i] = acc;
        }
        for (std::size_t i = k + 1; i < n; ++i) kk += std::conj(v[i]) * p[i];
        for (std::size_t i = k + 1; i < n; ++i) w[i] = p[i] - kk * v[i];
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                a(i, j) -= 2.0 * (v[i] * std::conj(w[j]) + w[i] * std::conj(v[j]));

        a(k + 1, k) = alpha;
        a(k, k + 1) = std::conj(alpha);
        for (std::size_t i = k + 2; i < n; ++i) {
            a(i, k) = 0.0;
            a(k, i) = 0.0;
        }

        for (std::size_t r = 0; r < n; ++r) {
            Complex qv{};
            for (std::size_t j = k + 1; j < n; ++j) qv += q(r, j) * v[j];
            for (std::size_t j = k + 1; j < n; ++j) q(r, j) -= 2.0 * qv * std::conj(v[j]);
        }
    }

    // Diagonal unitary D making the tridiagonal real: T = D S D*.
    std::vector<double> d(n), e(n, 0.0);
    std::vector<Complex> phases(n, Complex{1.0});
    for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i).real();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Complex b = a(i + 1, i);
        const double mag = std::abs(b);
        e[i] = mag;
        phases[i + 1] = mag == 0.0 ? phases[i] : phases[i] * (b / mag);
    }

    std::vector<double> z(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) z[i * n + i] = 1.0;
    detail::implicit_ql(d, e, &z);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });

    SpectralDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.eigenvalues[c] = d[src];
        for (std::size_t r = 0; r < n; ++r) {
            Complex acc{};
            for (std::size_t j = 0; j < n; ++j) acc += q(r, j) * phases[j] * z[j * n + src];
            out.eigenvectors(r, c) = acc;
        }
    }
    return out;
}

/// A real function applied to operators through their spectrum.
class ScalarFunction {
public:
    enum class Kind { ExpNeg, PowerNeg, Affine, PositivePart, Square, Custom };

    /// x -> exp(-t x)
    static ScalarFunction exp_neg(double t) {
        if (!(t > 0.0)) throw DomainError("exp_neg requires t > 0");
        return ScalarFunction(Kind::ExpNeg, t, 0.0);
    }
    /// x -> x^(-p), x > 0
    static ScalarFunction power_neg(double p) {
        if (!(p > 0.0)) throw DomainError("power_neg requires p > 0");
        return ScalarFunction(Kind::PowerNeg, p, 0.0);
    }
    /// x -> a x + b
    static ScalarFunction affine(double a, double b) { return ScalarFunction(Kind::Affine, a, b); }
    static ScalarFunction positive_part() { return ScalarFunction(Kind::PositivePart, 0.0, 0.0); }
    static ScalarFunction square() { return ScalarFunction(Kind::Square, 0.0, 0.0); }

    /// Convexity of a custom function is declared by the caller, not verified.
    static ScalarFunction custom(std::function<double(double)> fn, bool convex, std::string name = "custom") {
        ScalarFunction f(Kind::Custom, 0.0, 0.0);
        f.fn_ = std::move(fn);
        f.convex_ = convex;
        f.name_ = std::move(name);
        return f;
    }

    double operator()(double x) const {
        switch (kind_) {
        case Kind::ExpNeg: return std::exp(-a_ * x);
        case Kind::PowerNeg: return std::pow(x, -a_);
        case Kind::Affine: return a_ * x + b_;
        case Kind::PositivePart: return x > 0.0 ? x : 0.0;
        case Kind::Square: return x * x;
        case Kind::Custom: return fn_(x);
        }
        return 0.0;
    }

    bool in_domain(double x) const {
        if (kind_ == Kind::PowerNeg) return x > 0.0;
        return std::isfinite(x);
    }

    Kind kind() const noexcept { return kind_; }
    bool convex() const noexcept { return convex_; }
    double parameter() const noexcept { return a_; }
    const std::string& name() const noexcept { return name_; }

    /// c * f; convex whenever f is and c >= 0.
    ScalarFunction scaled(double c) const {
        auto self = *this;
        return custom([self, c](double x) { return c * self(x); }, convex_ && c >= 0.0,
                      name_ + "*" + std::to_string(c));
    }

    /// outer(inner(x)); the caller declares convexity of the composition.
    static ScalarFunction compose(const ScalarFunction& outer, const ScalarFunction& inner, bool convex) {
        return custom([outer, inner](double x) { return outer(inner(x)); }, convex,
                      outer.name_ + "o" + inner.name_);
    }

private:
    ScalarFunction(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b), convex_(true), name_(default_name(kind)) {}

    static std::string default_name(Kind kind) {
        switch (kind) {
        case Kind::ExpNeg: return "exp_neg";
        case Kind::PowerNeg: return "power_neg";
        case Kind::Affine: return "affine";
        case Kind::PositivePart: return "positive_part";
        case Kind::Square: return "square";
        case Kind::Custom: return "custom";
        }
        return "custom";
    }

    Kind kind_;
    double a_;
    double b_;
    std::function<double(double)> fn_;
    bool convex_;
    std::string name_;
};

/// Spot check of midpoint convexity of f on [lo, hi] over a grid of node pairs.
inline bool midpoint_convex_on(const ScalarFunction& f, double lo, double hi, int samples = 33) {
    if (!(hi > lo)) return true;
    for (int i = 0; i < samples; ++i) {
        const double a = lo + (hi - lo) * i / (samples - 1);
        for (int j = i + 2; j < samples; ++j) {
            const double b = lo + (hi - lo) * j / (samples - 1);
            const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
            if (fm > 0.5 * (fa + fb) + 1e-12 * (1.0 + std::abs(fa) + std::abs(fb))) return false;
        }
    }
    return true;
}

#ifdef NDEBUG
inline constexpr bool kSpotCheckConvexity = false;
#else
inline constexpr bool kSpotCheckConvexity = true;
#endif

/// Throws if a custom function declared convex fails the midpoint spot check
/// on [lo, hi]. Active only in debug builds.
inline void check_declared_convexity(const ScalarFunction& f, double lo, double hi) {
    if constexpr (kSpotCheckConvexity) {
        if (f.kind() == ScalarFunction::Kind::Custom && f.convex() && !midpoint_convex_on(f, lo, hi)) {
            throw DomainError("function '" + f.name() + "' is declared convex but fails a midpoint check");
        }
    }
}

inline HermitianOperator apply_function(const SpectralDecomposition& sd, const ScalarFunction& f) {
    const std::size_t n = sd.eigenvalues.size();
    std::vector<double> fv(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double mu = sd.eigenvalues[k];
        if (!f.in_domain(mu)) {
            std::ostringstream os;
            os.precision(17);
            os << "eigenvalue " << mu << " lies outside the domain of " << f.name();
            throw DomainError(os.str());
        }
        fv[k] = f(mu);
    }
    const Matrix& u = sd.eigenvectors;
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            Complex acc{};
            for (std::size_t k = 0; k < n; ++k) acc += u(i, k) * fv[k] * std::conj(u(j, k));
            out(i, j) = acc;
            out(j, i) = std::conj(acc);
        }
    }
    return HermitianOperator(std::move(out));
}

/// f(H) = U f(Lambda) U*.
inline HermitianOperator apply_function(const HermitianOperator& h, const ScalarFunction& f) {
    return apply_function(eig_hermitian(h), f);
}

inline double trace(const HermitianOperator& h) { return h.matrix().trace().real(); }

/// <psi|H|psi>
inline double expectation(const HermitianOperator& h, std::span<const Complex> psi) {
    return std::real(inner(psi, h.matrix() * psi));
}

/// Writes "dim N" followed by N*N lines "re im", row-major.
inline void write_operator(std::ostream& os, const HermitianOperator& h) {
    const auto old_precision = os.precision(17);
    os << "dim " << h.dim() << '\n';
    for (const auto& z : h.matrix().data()) os << z.real() << ' ' << z.imag() << '\n';
    os.precision(old_precision);
}

inline HermitianOperator read_operator(std::istream& is) {
    std::string tag;
    std::size_t n = 0;
    if (!(is >> tag >> n) || tag != "dim" || n == 0) throw Error("operator dump: expected 'dim N' header");
    std::vector<Complex> data(n * n);
    for (auto& z : data) {
        double re = 0.0, im = 0.0;
        if (!(is >> re >> im)) throw Error("operator dump: truncated entry list");
        z = {re, im};
    }
    return HermitianOperator(Matrix(n, n, std::move(data)));
}

} // namespace pj
