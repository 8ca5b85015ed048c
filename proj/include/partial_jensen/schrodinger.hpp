#pragma once

// Finite-difference Schroedinger operators -Delta + V on a box, eigenvalue
// counting, heat and zeta traces, and coherent-state frames on a discrete
// torus.
//
// 2D grids are flattened x-major: node (ix, iy) has index ix * Py + iy, which
// matches the first-factor-major convention of bipartite.hpp with
// H1 = x-grid and H2 = y-grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bipartite.hpp"
#include "linalg.hpp"

namespace pj {

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

/// V(x) = |x|^gamma F(x/|x|) on R^d, d in {1, 2}. In 1D the profile is the
/// pair (F(+1), F(-1)); in 2D it is a function of the polar angle.
struct HomogeneousPotential {
    double gamma = 2.0;
    int dim = 1;
    std::array<double, 2> profile_1d{1.0, 1.0};
    std::function<double(double)> profile_2d;

    static HomogeneousPotential line(double gamma, double f_plus = 1.0, double f_minus = 1.0) {
        HomogeneousPotential v;
        v.gamma = gamma;
        v.dim = 1;
        v.profile_1d = {f_plus, f_minus};
        v.validate();
        return v;
    }

    static HomogeneousPotential plane(double gamma, std::function<double(double)> profile) {
        HomogeneousPotential v;
        v.gamma = gamma;
        v.dim = 2;
        v.profile_2d = std::move(profile);
        v.validate();
        return v;
    }

    void validate() const {
        if (!(gamma > 0.0)) throw DomainError("homogeneous potential needs gamma > 0");
        if (dim == 1) {
            if (!(profile_1d[0] >= 0.0) || !(profile_1d[1] >= 0.0))
                throw DomainError("potential profile must be nonnegative");
        } else if (dim == 2) {
            if (!profile_2d) throw DomainError("2D potential needs an angular profile");
        } else {
            throw DomainError("homogeneous potential supports d = 1 or d = 2");
        }
    }

    /// F at a point of the unit sphere: in 1D a sign, in 2D an angle.
    double profile_at(double direction) const {
        if (dim == 1) return direction >= 0.0 ? profile_1d[0] : profile_1d[1];
        return profile_2d(direction);
    }

    double operator()(double x) const {
        if (x == 0.0) return 0.0;
        return std::pow(std::abs(x), gamma) * profile_at(x);
    }

    double operator()(double x, double y) const {
        const double r = std::hypot(x, y);
        if (r == 0.0) return 0.0;
        return std::pow(r, gamma) * profile_2d(std::atan2(y, x));
    }
};

/// V(x, y) = |x|^alpha |y|^beta F(sign x, sign y) on R^1 x R^1.
struct SeparatelyHomogeneous {
    double alpha = 1.0;
    double beta = 2.0;
    /// F(+,+), F(+,-), F(-,+), F(-,-)
    std::array<double, 4> profile{1.0, 1.0, 1.0, 1.0};

    static SeparatelyHomogeneous make(double alpha, double beta, std::array<double, 4> profile = {1.0, 1.0, 1.0, 1.0}) {
        SeparatelyHomogeneous v{alpha, beta, profile};
        v.validate();
        return v;
    }

    void validate() const {
        if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("separately homogeneous potential needs alpha, beta > 0");
        for (double f : profile)
            if (!(f >= 0.0)) throw DomainError("potential profile must be nonnegative");
    }

    double profile_at(double sx, double sy) const {
        return profile[(sx < 0.0 ? 2 : 0) + (sy < 0.0 ? 1 : 0)];
    }

    double operator()(double x, double y) const {
        if (x == 0.0 || y == 0.0) return 0.0;
        return std::pow(std::abs(x), alpha) * std::pow(std::abs(y), beta) * profile_at(x, y);
    }
};

using PotentialSpec = std::variant<HomogeneousPotential, SeparatelyHomogeneous>;

inline int potential_dimension(const PotentialSpec& v) {
    return std::visit(
        [](const auto& p) {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, HomogeneousPotential>) return p.dim;
            else return 2;
        },
        v);
}

// ---------------------------------------------------------------------------
// Grids and banded matrices
// ---------------------------------------------------------------------------

enum class Boundary { Dirichlet, Periodic };

/// Cap on the number of 2D grid nodes.
inline constexpr std::size_t kMaxGridNodes = std::size_t{4} << 20;

struct GridAxis {
    double half_width = 1.0;
    std::size_t points = 3;
};

/// Box [-L, L]^d with P interior nodes per axis. Dirichlet spacing is
/// h = 2L/(P+1) with nodes -L + (i+1)h; periodic spacing is h = 2L/P with
/// nodes -L + i h.
struct GridSpec {
    std::vector<GridAxis> axes;
    Boundary boundary = Boundary::Dirichlet;

    static GridSpec line(double half_width, std::size_t points, Boundary boundary = Boundary::Dirichlet) {
        return GridSpec{{GridAxis{half_width, points}}, boundary};
    }

    static GridSpec plane(double lx, std::size_t px, double ly, std::size_t py) {
        return GridSpec{{GridAxis{lx, px}, GridAxis{ly, py}}, Boundary::Dirichlet};
    }

    /// Dirichlet line with spacing as close to `h` as the box allows.
    static GridSpec line_with_spacing(double half_width, double h) {
        const auto p = static_cast<std::size_t>(std::llround(2.0 * half_width / h)) - 1;
        return line(half_width, p);
    }

    int dimension() const noexcept { return static_cast<int>(axes.size()); }

    double spacing(int axis) const {
        const auto& a = axes.at(static_cast<std::size_t>(axis));
        return boundary == Boundary::Dirichlet ? 2.0 * a.half_width / static_cast<double>(a.points + 1)
                                               : 2.0 * a.half_width / static_cast<double>(a.points);
    }

    double node(int axis, std::size_t i) const {
        const auto& a = axes.at(static_cast<std::size_t>(axis));
        const double h = spacing(axis);
        return boundary == Boundary::Dirichlet ? -a.half_width + h * static_cast<double>(i + 1)
                                               : -a.half_width + h * static_cast<double>(i);
    }

    std::size_t size() const {
        std::size_t n = 1;
        for (const auto& a : axes) n *= a.points;
        return n;
    }

    void validate() const {
        if (axes.empty() || axes.size() > 2) throw DomainError("grid dimension must be 1 or 2");
        for (const auto& a : axes) {
            if (a.points < 3) throw DomainError("grid needs at least 3 points per axis");
            if (!(a.half_width > 0.0)) throw DomainError("grid half-width must be positive");
        }
        if (axes.size() == 2 && boundary == Boundary::Periodic) throw DomainError("periodic grids are 1D only");
        if (size() > kMaxGridNodes) {
            throw DimensionError("grid has " + std::to_string(size()) + " nodes, above the cap of " +
                                 std::to_string(kMaxGridNodes));
        }
    }
};

/// Real symmetric matrix stored as a sparse set of sub-diagonals:
/// band with offset k holds A(i + k, i) for i in [0, n - k).
class SymmetricBandMatrix {
public:
    struct Band {
        std::size_t offset;
        std::vector<double> values;
    };

    SymmetricBandMatrix() = default;
    explicit SymmetricBandMatrix(std::vector<double> diagonal) {
        bands_.push_back({0, std::move(diagonal)});
    }

    static SymmetricBandMatrix tridiagonal(std::vector<double> diagonal, std::vector<double> off) {
        SymmetricBandMatrix m(std::move(diagonal));
        if (m.size() > 1) m.add_band(1, std::move(off));
        return m;
    }

    void add_band(std::size_t offset, std::vector<double> values) {
        if (offset == 0 || offset >= size()) throw DimensionError("band offset out of range");
        if (values.size() != size() - offset) throw DimensionError("band length must be n - offset");
        for (auto& b : bands_) {
            if (b.offset == offset) {
                for (std::size_t i = 0; i < values.size(); ++i) b.values[i] += values[i];
                return;
            }
        }
        bands_.push_back({offset, std::move(values)});
        std::sort(bands_.begin(), bands_.end(), [](const Band& a, const Band& b) { return a.offset < b.offset; });
    }

    std::size_t size() const noexcept { return bands_.empty() ? 0 : bands_.front().values.size(); }
    std::size_t bandwidth() const noexcept { return bands_.empty() ? 0 : bands_.back().offset; }
    bool is_tridiagonal() const noexcept { return bandwidth() <= 1; }
    const std::vector<double>& diagonal() const { return bands_.front().values; }
    const std::vector<Band>& bands() const noexcept { return bands_; }

    std::vector<double> off_diagonal() const {
        for (const auto& b : bands_)
            if (b.offset == 1) return b.values;
        return std::vector<double>(size() > 0 ? size() - 1 : 0, 0.0);
    }

    double entry(std::size_t i, std::size_t j) const {
        if (i < j) std::swap(i, j);
        for (const auto& b : bands_)
            if (b.offset == i - j) return b.values[j];
        return 0.0;
    }

    /// [lower, upper] bracket of the spectrum from Gershgorin discs.
    std::pair<double, double> gershgorin() const {
        const std::size_t n = size();
        std::vector<double> radius(n, 0.0);
        for (const auto& b : bands_) {
            if (b.offset == 0) continue;
            for (std::size_t i = 0; i < b.values.size(); ++i) {
                radius[i] += std::abs(b.values[i]);
                radius[i + b.offset] += std::abs(b.values[i]);
            }
        }
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < n; ++i) {
            lo = std::min(lo, diagonal()[i] - radius[i]);
            hi = std::max(hi, diagonal()[i] + radius[i]);
        }
        return {lo, hi};
    }

    HermitianOperator to_dense() const {
        const std::size_t n = size();
        Matrix m(n, n);
        for (const auto& b : bands_)
            for (std::size_t i = 0; i < b.values.size(); ++i) {
                m(i + b.offset, i) += b.values[i];
                if (b.offset != 0) m(i, i + b.offset) += b.values[i];
            }
        return HermitianOperator(std::move(m));
    }

private:
    std::vector<Band> bands_;
};

/// Discretized -Delta + V: second-order central differences, V sampled at
/// the nodes.
class GridOperator {
public:
    GridOperator(GridSpec spec, std::vector<double> potential) : spec_(std::move(spec)), potential_(std::move(potential)) {
        spec_.validate();
        if (potential_.size() != spec_.size()) throw DimensionError("potential samples do not match grid size");
        for (double v : potential_) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("potential samples must be finite and nonnegative");
        }
        assemble();
    }

    const GridSpec& spec() const noexcept { return spec_; }
    const std::vector<double>& potential() const noexcept { return potential_; }
    const SymmetricBandMatrix& matrix() const noexcept { return matrix_; }
    std::size_t size() const noexcept { return potential_.size(); }
    double spacing(int axis = 0) const { return spec_.spacing(axis); }

private:
    void assemble() {
        const std::size_t n = size();
        std::vector<double> diag(potential_);
        if (spec_.dimension() == 1) {
            const double h = spec_.spacing(0);
            const double k = 1.0 / (h * h);
            for (auto& d : diag) d += 2.0 * k;
            matrix_ = SymmetricBandMatrix(std::move(diag));
            matrix_.add_band(1, std::vector<double>(n - 1, -k));
            if (spec_.boundary == Boundary::Periodic) matrix_.add_band(n - 1, std::vector<double>(1, -k));
            return;
        }
        const std::size_t px = spec_.axes[0].points, py = spec_.axes[1].points;
        const double hx = spec_.spacing(0), hy = spec_.spacing(1);
        const double kx = 1.0 / (hx * hx), ky = 1.0 / (hy * hy);
        for (auto& d : diag) d += 2.0 * kx + 2.0 * ky;
        matrix_ = SymmetricBandMatrix(std::move(diag));
        std::vector<double> ycoupling(n - 1, -ky);
        for (std::size_t ix = 1; ix < px; ++ix) ycoupling[ix * py - 1] = 0.0;
        matrix_.add_band(1, std::move(ycoupling));
        matrix_.add_band(py, std::vector<double>(n - py, -kx));
    }

    GridSpec spec_;
    std::vector<double> potential_;
    SymmetricBandMatrix matrix_;
};

inline std::vector<double> sample_potential(const GridSpec& spec, const PotentialSpec& v) {
    spec.validate();
    if (potential_dimension(v) != spec.dimension()) throw DimensionError("potential and grid dimensions differ");
    std::vector<double> samples(spec.size());
    if (spec.dimension() == 1) {
        const auto& hv = std::get<HomogeneousPotential>(v);
        for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = hv(spec.node(0, i));
        return samples;
    }
    const std::size_t px = spec.axes[0].points, py = spec.axes[1].points;
    for (std::size_t ix = 0; ix < px; ++ix) {
        const double x = spec.node(0, ix);
        for (std::size_t iy = 0; iy < py; ++iy) {
            const double y = spec.node(1, iy);
            samples[ix * py + iy] = std::visit([&](const auto& p) { return p(x, y); }, v);
        }
    }
    return samples;
}

/// -Delta + V on the grid, V(0) := 0.
inline GridOperator build_hamiltonian(const GridSpec& spec, const PotentialSpec& v) {
    return GridOperator(spec, sample_potential(spec, v));
}

/// Periodic second-difference Laplacian on M points with spacing h, as a dense operator.
inline HermitianOperator periodic_laplacian(std::size_t m, double h = 1.0) {
    if (m < 3) throw DomainError("periodic Laplacian needs at least 3 points");
    const double k = 1.0 / (h * h);
    Matrix t(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        t(i, i) = 2.0 * k;
        t(i, (i + 1) % m) += -k;
        t((i + 1) % m, i) += -k;
    }
    return HermitianOperator(std::move(t));
}

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

struct CountResult {
    std::size_t count = 0;
    /// lambda sits within round-off of an eigenvalue; the count is still
    /// returned but should be read as ambiguous by one multiplicity.
    bool boundary_warning = false;
};

/// Number of eigenvalues of the tridiagonal matrix strictly below lambda,
/// from the signs of the LDL^T pivots of (T - lambda).
inline std::size_t sturm_count(std::span<const double> diag, std::span<const double> off, double lambda) {
    const std::size_t n = diag.size();
    if (n == 0) return 0;
    double scale = std::abs(lambda);
    for (double d : diag) scale = std::max(scale, std::abs(d));
    const double tiny = std::numeric_limits<double>::epsilon() * std::max(scale, 1.0) * 1e-3;
    std::size_t count = 0;
    double q = diag[0] - lambda;
    for (std::size_t i = 0;;) {
        // A zero pivot means lambda is an eigenvalue of the leading block;
        // read it as lambda - 0 so the count stays strict.
        if (q == 0.0) q = tiny;
        if (q < 0.0) ++count;
        if (++i == n) break;
        q = diag[i] - lambda - off[i - 1] * off[i - 1] / q;
    }
    return count;
}

namespace detail {

/// Streaming LDL^T of (A - lambda) without pivoting, keeping only a window
/// of bandwidth + 1 rows. Returns nullopt when a pivot falls below
/// `pivot_tol` in magnitude.
inline std::optional<std::size_t> banded_inertia(const SymmetricBandMatrix& a, double lambda, double pivot_tol) {
    const std::size_t n = a.size();
    const std::size_t b = a.bandwidth();
    const std::size_t w = b + 1;
    // Row r lives in slot r % w; entry (r, r - o) at offset o in [0, b].
    std::vector<double> win(w * w, 0.0);
    std::vector<double> colrev(w, 0.0);

    auto load_row = [&](std::size_t r) {
        double* row = &win[(r % w) * w];
        std::fill(row, row + w, 0.0);
        for (const auto& band : a.bands()) {
            if (band.offset > r) break;
            row[band.offset] = band.values[r - band.offset];
        }
        row[0] -= lambda;
    };
    for (std::size_t r = 0; r < std::min(n, w); ++r) load_row(r);

    std::size_t negatives = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = win[(j % w) * w];
        if (!(std::abs(d) >= pivot_tol)) return std::nullopt;
        if (d < 0.0) ++negatives;
        const std::size_t last = std::min(n - 1, j + b);
        const std::size_t depth = last - j;
        // colrev[b - k] = A(j + k, j)
        for (std::size_t k = 1; k <= depth; ++k) colrev[b - k] = win[((j + k) % w) * w + k];
        for (std::size_t k = 1; k <= depth; ++k) {
            const double f = colrev[b - k] / d;
            if (f == 0.0) continue;
            double* row = &win[((j + k) % w) * w];
            const double* c = &colrev[b - k];
            // row offsets o = 0 .. k-1 pair with column j + k - o.
            for (std::size_t o = 0; o < k; ++o) row[o] -= f * c[o];
        }
        if (j + w < n) load_row(j + w);
    }
    return negatives;
}

} // namespace detail

/// Largest matrix size handed to the dense fallback of inertia counting.
inline constexpr std::size_t kDenseFallbackLimit = 3000;

/// Number of eigenvalues strictly below lambda. Tridiagonal matrices use a
/// Sturm count; wider bands use the inertia of a banded LDL^T of (A - lambda).
/// A near-zero pivot triggers one perturbed retry at lambda - 1e-9(1+|lambda|),
/// then a dense eigendecomposition.
inline CountResult counting_function(const SymmetricBandMatrix& a, double lambda) {
    const std::size_t n = a.size();
    if (a.is_tridiagonal()) {
        const auto off = a.off_diagonal();
        const auto& diag = a.diagonal();
        CountResult r{sturm_count(diag, off, lambda), false};
        const double delta = 1e-12 * (1.0 + std::abs(lambda));
        r.boundary_warning = sturm_count(diag, off, lambda - delta) != sturm_count(diag, off, lambda + delta);
        return r;
    }
    const auto [lo, hi] = a.gershgorin();
    const double scale = std::max({std::abs(lo), std::abs(hi), std::abs(lambda), 1.0});
    const double pivot_tol = 1e-12 * scale;
    if (auto c = detail::banded_inertia(a, lambda, pivot_tol)) return {*c, false};
    const double shifted = lambda - 1e-9 * (1.0 + std::abs(lambda));
    if (auto c = detail::banded_inertia(a, shifted, pivot_tol)) return {*c, true};
    if (n > kDenseFallbackLimit) {
        throw ConvergenceError("inertia count hit repeated near-zero pivots and the matrix is too large for the dense "
                               "fallback",
                               pivot_tol);
    }
    const auto sd = eig_hermitian(a.to_dense());
    const auto count = static_cast<std::size_t>(
        std::lower_bound(sd.eigenvalues.begin(), sd.eigenvalues.end(), lambda) - sd.eigenvalues.begin());
    return {count, true};
}

inline CountResult counting_function(const GridOperator& op, double lambda) {
    return counting_function(op.matrix(), lambda);
}

// ---------------------------------------------------------------------------
// Spectra, heat and zeta traces
// ---------------------------------------------------------------------------

/// All eigenvalues, ascending (QL for tridiagonal, dense otherwise).
inline std::vector<double> all_eigenvalues(const SymmetricBandMatrix& a) {
    if (a.is_tridiagonal()) return tridiagonal_eigenvalues(a.diagonal(), a.off_diagonal());
    return eig_hermitian(a.to_dense()).eigenvalues;
}

/// Eigenvalues in [lo, hi) by spectrum slicing: bisection on counts, each
/// eigenvalue located to rel_tol * (1 + |mu|).
inline std::vector<double> eigenvalues_in(const SymmetricBandMatrix& a, double lo, double hi, double rel_tol = 1e-11) {
    std::vector<double> out;
    if (!(hi > lo)) return out;
    struct Interval {
        double a, b;
        std::size_t ca, cb;
    };
    std::vector<Interval> stack;
    const std::size_t c_lo = counting_function(a, lo).count;
    const std::size_t c_hi = counting_function(a, hi).count;
    if (c_hi > c_lo) stack.push_back({lo, hi, c_lo, c_hi});
    // Depth-first, upper half pushed first so eigenvalues come out ascending.
    while (!stack.empty()) {
        const Interval iv = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (iv.a + iv.b);
        if (iv.b - iv.a <= rel_tol * (1.0 + std::abs(mid)) || mid <= iv.a || mid >= iv.b) {
            out.insert(out.end(), iv.cb - iv.ca, mid);
            continue;
        }
        const std::size_t cm = counting_function(a, mid).count;
        if (iv.cb > cm) stack.push_back({mid, iv.b, cm, iv.cb});
        if (cm > iv.ca) stack.push_back({iv.a, mid, iv.ca, cm});
    }
    return out;
}

/// Eigenvalues below e_max, ascending.
inline std::vector<double> eigenvalues_below(const SymmetricBandMatrix& a, double e_max, double rel_tol = 1e-11) {
    const double lo = a.gershgorin().first - 1.0;
    return eigenvalues_in(a, lo, e_max, rel_tol);
}

/// Lowest k eigenvalues (k <= size), ascending.
inline std::vector<double> lowest_eigenvalues(const SymmetricBandMatrix& a, std::size_t k) {
    k = std::min(k, a.size());
    if (k == 0) return {};
    auto [lo, hi] = a.gershgorin();
    lo -= 1.0;
    hi += 1.0;
    // Smallest upper bound that contains k eigenvalues.
    double left = lo, right = hi;
    for (int it = 0; it < 200 && right - left > 1e-12 * (1.0 + std::abs(right)); ++it) {
        const double mid = 0.5 * (left + right);
        if (counting_function(a, mid).count >= k) right = mid;
        else left = mid;
    }
    auto values = eigenvalues_in(a, lo, right + 1e-10 * (1.0 + std::abs(right)));
    if (values.size() > k) values.resize(k);
    return values;
}

enum class HeatMethod { Dense, Truncated };

struct HeatTrace {
    double value = 0.0;
    /// Upper bound on the omitted part of the sum (zero for the dense method).
    double error_bound = 0.0;
    std::size_t eigenvalues_used = 0;
};

/// Truncated heat traces keep eigenvalues below this multiple of 1/t.
inline constexpr double kHeatCutoffFactor = 40.0;

/// Tr e^{-tA}. Dense sums over the whole spectrum; truncated sums eigenvalues
/// below E = 40/t and bounds the rest by (n - K) e^{-tE}.
inline HeatTrace heat_trace(const SymmetricBandMatrix& a, double t, HeatMethod method = HeatMethod::Dense) {
    if (!(t > 0.0)) throw DomainError("heat_trace requires t > 0");
    HeatTrace out;
    std::vector<double> spectrum;
    if (method == HeatMethod::Dense) {
        spectrum = all_eigenvalues(a);
    } else {
        const double e_max = kHeatCutoffFactor / t;
        spectrum = eigenvalues_below(a, e_max, 1e-10);
        out.error_bound = static_cast<double>(a.size() - spectrum.size()) * std::exp(-t * e_max);
    }
    for (double mu : spectrum) out.value += std::exp(-t * mu);
    out.eigenvalues_used = spectrum.size();
    return out;
}

inline HeatTrace heat_trace(const GridOperator& op, double t, HeatMethod method = HeatMethod::Dense) {
    return heat_trace(op.matrix(), t, method);
}

struct ZetaTrace {
    double value = 0.0;
    double partial_sum = 0.0;
    double tail = 0.0;
    std::size_t eigenvalues_used = 0;
    /// False when p * growth_exponent <= 1, i.e. the infinite sum diverges.
    bool converged = true;
};

/// Tr A^{-p} = sum mu_k^{-p}. Eigenvalues up to e_cut are summed exactly;
/// if e_cut is finite and a growth exponent s is supplied, the remainder is
/// extrapolated from mu_k ~ c k^s with c fitted on the upper half of the
/// computed eigenvalues.
inline ZetaTrace zeta_trace(const SymmetricBandMatrix& a, double p, double e_cut,
                            std::optional<double> growth_exponent = std::nullopt) {
    if (!(p > 0.0)) throw DomainError("zeta_trace requires p > 0");
    const std::vector<double> spectrum =
        std::isfinite(e_cut) ? eigenvalues_below(a, std::nextafter(e_cut, INFINITY)) : all_eigenvalues(a);
    if (spectrum.empty()) throw DomainError("zeta_trace: no eigenvalues below the cutoff");
    if (!(spectrum.front() > 0.0)) {
        throw DomainError("zeta_trace: nonpositive eigenvalue " + std::to_string(spectrum.front()));
    }
    ZetaTrace out;
    for (double mu : spectrum) out.partial_sum += std::pow(mu, -p);
    out.eigenvalues_used = spectrum.size();
    if (growth_exponent) {
        const double s = *growth_exponent;
        out.converged = s * p > 1.0;
        const std::size_t k = spectrum.size();
        if (out.converged && std::isfinite(e_cut) && k >= 4) {
            double num = 0.0, den = 0.0;
            for (std::size_t i = k / 2; i < k; ++i) {
                const double ks = std::pow(static_cast<double>(i + 1), s);
                num += spectrum[i] * ks;
                den += ks * ks;
            }
            const double c = num / den;
            out.tail = std::pow(c, -p) * std::pow(static_cast<double>(k) + 0.5, 1.0 - s * p) / (s * p - 1.0);
        }
    }
    out.value = out.partial_sum + out.tail;
    return out;
}

inline ZetaTrace zeta_trace(const GridOperator& op, double p, double e_cut,
                            std::optional<double> growth_exponent = std::nullopt) {
    return zeta_trace(op.matrix(), p, e_cut, growth_exponent);
}

/// K_omega = -d^2/dy'^2 + r^alpha |y'|^beta F(omega, sign y') on a 1D grid,
/// omega = +1 or -1. r = 1 gives the operator of the partially semiclassical
/// limit; other r exercise the scaling law.
inline GridOperator effective_operator(int omega, const SeparatelyHomogeneous& v, const GridSpec& line, double r = 1.0) {
    if (line.dimension() != 1) throw DimensionError("effective operator lives on a 1D grid");
    if (omega != 1 && omega != -1) throw DomainError("omega must be +1 or -1 for m = 1");
    v.validate();
    std::vector<double> samples(line.size());
    const double radial = std::pow(r, v.alpha);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double y = line.node(0, i);
        samples[i] = y == 0.0 ? 0.0 : radial * std::pow(std::abs(y), v.beta) * v.profile_at(omega, y);
    }
    return GridOperator(line, std::move(samples));
}

// ---------------------------------------------------------------------------
// Box self-audit
// ---------------------------------------------------------------------------

/// Smallest half-width L with min over the box boundary of V >= level.
inline double box_for_level(const HomogeneousPotential& v, double level) {
    double fmin = std::numeric_limits<double>::infinity();
    if (v.dim == 1) {
        fmin = std::min(v.profile_1d[0], v.profile_1d[1]);
    } else {
        for (int i = 0; i < 2048; ++i) fmin = std::min(fmin, v.profile_2d(2.0 * std::numbers::pi * i / 2048.0));
    }
    if (!(fmin > 0.0)) throw DomainError("potential vanishes on a ray; no box confines the sublevel set");
    return std::pow(level / fmin, 1.0 / v.gamma);
}

/// Box rule for counting up to lambda_max: boundary potential >= 4 lambda_max.
inline double box_for_counting(const HomogeneousPotential& v, double lambda_max) {
    return box_for_level(v, 4.0 * lambda_max);
}

/// Box rule for heat traces at time t: boundary potential >= 80 / t.
inline double box_for_heat(const HomogeneousPotential& v, double t) { return box_for_level(v, 80.0 / t); }

/// Relative change of N(lambda) when the 1D box is doubled at fixed spacing.
inline double box_doubling_change(const HomogeneousPotential& v, double half_width, double h, double lambda) {
    const auto small = build_hamiltonian(GridSpec::line_with_spacing(half_width, h), v);
    const auto big = build_hamiltonian(GridSpec::line_with_spacing(2.0 * half_width, h), v);
    const double n1 = static_cast<double>(counting_function(small, lambda).count);
    const double n2 = static_cast<double>(counting_function(big, lambda).count);
    return n2 == 0.0 ? std::abs(n2 - n1) : std::abs(n2 - n1) / n2;
}

// ---------------------------------------------------------------------------
// Coherent states on a discrete torus
// ---------------------------------------------------------------------------

/// Window g on Z_M: real, nonnegative, g(x) = g(-x), nonincreasing in the
/// torus distance |x|, sum g^2 = 1.
class CoherentWindow {
public:
    explicit CoherentWindow(std::vector<double> values) : g_(std::move(values)) {
        const std::size_t m = g_.size();
        if (m == 0) throw DomainError("coherent window must be non-empty");
        double s = 0.0;
        for (double v : g_) {
            if (!(v >= 0.0)) throw DomainError("coherent window must be nonnegative");
            s += v * v;
        }
        if (std::abs(s - 1.0) > 1e-12) throw DomainError("coherent window must satisfy sum g^2 = 1");
        for (std::size_t x = 1; x < m; ++x) {
            if (g_[x] != g_[m - x]) throw DomainError("coherent window must be symmetric");
        }
        for (std::size_t x = 1; x <= m / 2; ++x) {
            if (g_[x] > g_[x - 1]) throw DomainError("coherent window must be decreasing away from 0");
        }
    }

    static CoherentWindow delta(std::size_t m) {
        std::vector<double> g(m, 0.0);
        g[0] = 1.0;
        return CoherentWindow(std::move(g));
    }

    static CoherentWindow flat(std::size_t m) {
        return CoherentWindow(std::vector<double>(m, 1.0 / std::sqrt(static_cast<double>(m))));
    }

    /// exp(-d^2 / (2 width^2)) in the torus distance d, normalized.
    static CoherentWindow gaussian(std::size_t m, double width) {
        return from_profile(m, [width](double d) { return std::exp(-d * d / (2.0 * width * width)); });
    }

    /// max(0, 1 - d / half_width), normalized.
    static CoherentWindow tent(std::size_t m, double half_width) {
        return from_profile(m, [half_width](double d) { return std::max(0.0, 1.0 - d / half_width); });
    }

    std::size_t size() const noexcept { return g_.size(); }
    const std::vector<double>& values() const noexcept { return g_; }

    /// g at a torus offset (any integer, reduced mod M).
    double operator()(long offset) const {
        const long m = static_cast<long>(g_.size());
        return g_[static_cast<std::size_t>(((offset % m) + m) % m)];
    }

private:
    template <class Profile>
    static CoherentWindow from_profile(std::size_t m, Profile profile) {
        std::vector<double> g(m);
        for (std::size_t x = 0; x < m; ++x) {
            const double d = static_cast<double>(std::min(x, m - x));
            g[x] = profile(d);
        }
        double s = 0.0;
        for (double v : g) s += v * v;
        const double inv = 1.0 / std::sqrt(s);
        for (double& v : g) v *= inv;
        return CoherentWindow(std::move(g));
    }

    std::vector<double> g_;
};

/// psi_{xi,x}(x') = e^{i xi x'} g(x' - x) with xi = 2 pi j / M.
inline Vector coherent_state(const CoherentWindow& g, std::size_t x, std::size_t j) {
    const std::size_t m = g.size();
    Vector psi(m);
    for (std::size_t a = 0; a < m; ++a) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>((j * a) % m) / static_cast<double>(m);
        psi[a] = std::polar(g(static_cast<long>(a) - static_cast<long>(x)), phase);
    }
    return psi;
}

/// || (1/M) sum_{x, xi} |psi_{xi,x}><psi_{xi,x}| - I ||_F.
///
/// Uses the factorization of the (a, b) entry into a momentum phase sum
/// times a position overlap sum; both sums are evaluated numerically.
inline double coherent_frame_defect(std::size_t m, const CoherentWindow& g) {
    if (g.size() != m) throw DimensionError("coherent window size differs from torus size");
    std::vector<Complex> phase_sum(m);
    for (std::size_t diff = 0; diff < m; ++diff) {
        Complex s{};
        for (std::size_t j = 0; j < m; ++j) {
            s += std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>((j * diff) % m) / static_cast<double>(m));
        }
        phase_sum[diff] = s;
    }
    double defect2 = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            double overlap = 0.0;
            for (std::size_t x = 0; x < m; ++x) {
                overlap += g(static_cast<long>(a) - static_cast<long>(x)) * g(static_cast<long>(b) - static_cast<long>(x));
            }
            const Complex entry = phase_sum[(a + m - b) % m] * overlap / static_cast<double>(m);
            defect2 += std::norm(entry - (a == b ? Complex{1.0} : Complex{}));
        }
    }
    return std::sqrt(defect2);
}

/// (1/M) sum_{x, xi} exp(-t <psi_{xi,x}|H|psi_{xi,x}>), a lower bound for Tr e^{-tH}.
inline double coherent_lower_bound(const HermitianOperator& h, double t, const CoherentWindow& g) {
    if (!(t > 0.0)) throw DomainError("coherent_lower_bound requires t > 0");
    const std::size_t m = h.dim();
    if (g.size() != m) throw DimensionError("coherent window size differs from operator dimension");
    double sum = 0.0;
    for (std::size_t x = 0; x < m; ++x)
        for (std::size_t j = 0; j < m; ++j) sum += std::exp(-t * expectation(h, coherent_state(g, x, j)));
    return sum / static_cast<double>(m);
}

inline double coherent_lower_bound(const GridOperator& op, double t, const CoherentWindow& g) {
    if (op.spec().dimension() != 1 || op.spec().boundary != Boundary::Periodic) {
        throw DomainError("coherent_lower_bound needs a periodic 1D grid operator");
    }
    return coherent_lower_bound(op.matrix().to_dense(), t, g);
}

/// (1/M) sum_{x, xi} Tr_2 exp(-t K_{x,xi}), K_{x,xi} = compress(H, |psi_{xi,x}><psi_{xi,x}|),
/// with H = T (x) 1 + sum_m |e_m><e_m| (x) W[m]. A lower bound for Tr e^{-tH}.
inline double coherent_partial_lower_bound(const HermitianOperator& t_op, std::span<const HermitianOperator> w,
                                           double t, const CoherentWindow& g) {
    if (!(t > 0.0)) throw DomainError("coherent_partial_lower_bound requires t > 0");
    const std::size_t m = t_op.dim();
    if (g.size() != m) throw DimensionError("coherent window size differs from first-factor dimension");
    const HermitianOperator h = block_coupled(t_op, w);
    const BipartiteDims dims{m, w.front().dim()};
    const auto heat = ScalarFunction::exp_neg(t);
    double sum = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
        for (std::size_t j = 0; j < m; ++j) {
            const auto rho = DensityMatrix::pure(coherent_state(g, x, j));
            sum += trace(apply_function(compress(h, rho, dims), heat));
        }
    }
    return sum / static_cast<double>(m);
}

// ---------------------------------------------------------------------------
// Spectrum dump
// ---------------------------------------------------------------------------

/// CSV "k,eigenvalue" with k starting at 1.
inline void write_spectrum_csv(std::ostream& os, std::span<const double> eigenvalues) {
    const auto old_precision = os.precision(17);
    os << "k,eigenvalue\n";
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) os << (k + 1) << ',' << eigenvalues[k] << '\n';
    os.precision(old_precision);
}

} // namespace pj
