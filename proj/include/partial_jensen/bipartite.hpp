#pragma once

// Operators on a bipartite space H1 (x) H2.
//
// Index convention: basis vector i = m * N + n of H1 (x) H2 is e_m (x) v_n,
// where M = dim H1 and N = dim H2 (first factor major). Every formula below
// is stated in this convention.

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "random.hpp"

namespace pj {

/// Default cap on M * N for dense bipartite operators.
inline constexpr std::size_t kMaxBipartiteDim = 4096;

struct BipartiteDims {
    std::size_t dim1 = 1;
    std::size_t dim2 = 1;

    std::size_t total() const noexcept { return dim1 * dim2; }

    void require_matches(std::size_t n, const char* what) const {
        if (dim1 == 0 || dim2 == 0) throw DimensionError("bipartite dimensions must be positive");
        if (n != total()) {
            throw DimensionError(std::string(what) + ": operator dimension " + std::to_string(n) +
                                 " does not equal M*N = " + std::to_string(total()));
        }
    }

    friend bool operator==(const BipartiteDims&, const BipartiteDims&) = default;
};

inline constexpr double kDensityTolerance = 1e-10;

/// Positive semidefinite operator of unit trace.
class DensityMatrix {
public:
    explicit DensityMatrix(HermitianOperator op) : op_(std::move(op)) {
        const auto sd = eig_hermitian(op_);
        if (sd.eigenvalues.front() < -kDensityTolerance) {
            throw DomainError("density matrix has negative eigenvalue " + std::to_string(sd.eigenvalues.front()));
        }
        const double tr = trace(op_);
        if (std::abs(tr - 1.0) > kDensityTolerance) {
            throw DomainError("density matrix trace is " + std::to_string(tr) + ", expected 1");
        }
    }

    /// |phi><phi| for a unit vector phi.
    static DensityMatrix pure(std::span<const Complex> phi) {
        if (std::abs(norm(phi) - 1.0) > kDensityTolerance) throw DomainError("pure state vector is not normalized");
        return DensityMatrix(HermitianOperator(outer(phi, phi)));
    }

    static DensityMatrix maximally_mixed(std::size_t m) {
        return DensityMatrix(HermitianOperator(Matrix::identity(m) * Complex(1.0 / static_cast<double>(m))));
    }

    const HermitianOperator& op() const noexcept { return op_; }
    std::size_t dim() const noexcept { return op_.dim(); }

private:
    HermitianOperator op_;
};

/// Spectral square root of a positive semidefinite operator. Eigenvalues in
/// [-1e-10, 0) are clamped to zero; anything below is a domain error.
inline HermitianOperator psd_sqrt(const HermitianOperator& a) {
    auto sd = eig_hermitian(a);
    for (double& mu : sd.eigenvalues) {
        if (mu < -kDensityTolerance) {
            throw DomainError("square root of operator with negative eigenvalue " + std::to_string(mu));
        }
        if (mu < 0.0) mu = 0.0;
    }
    return apply_function(sd, ScalarFunction::custom([](double x) { return std::sqrt(x); }, false, "sqrt"));
}

/// (A (x) B)[(m N + n), (m' N + n')] = A[m, m'] B[n, n'].
inline Matrix kron(const Matrix& a, const Matrix& b, std::size_t max_dim = kMaxBipartiteDim) {
    const std::size_t rows = a.rows() * b.rows();
    const std::size_t cols = a.cols() * b.cols();
    if (rows > max_dim || cols > max_dim) {
        throw DimensionError("kron: product dimension " + std::to_string(std::max(rows, cols)) + " exceeds cap " +
                             std::to_string(max_dim));
    }
    Matrix out(rows, cols);
    for (std::size_t m = 0; m < a.rows(); ++m)
        for (std::size_t mp = 0; mp < a.cols(); ++mp) {
            const Complex amm = a(m, mp);
            if (amm == Complex{}) continue;
            for (std::size_t n = 0; n < b.rows(); ++n)
                for (std::size_t np = 0; np < b.cols(); ++np)
                    out(m * b.rows() + n, mp * b.cols() + np) = amm * b(n, np);
        }
    return out;
}

inline HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b,
                              std::size_t max_dim = kMaxBipartiteDim) {
    return HermitianOperator(kron(a.matrix(), b.matrix(), max_dim));
}

/// Tr_1: result[n, n'] = sum_m H[(m N + n), (m N + n')].
inline Matrix partial_trace_1(const Matrix& h, const BipartiteDims& dims) {
    if (!h.square()) throw DimensionError("partial_trace_1: operator is not square");
    dims.require_matches(h.rows(), "partial_trace_1");
    const std::size_t big_m = dims.dim1, big_n = dims.dim2;
    Matrix out(big_n, big_n);
    for (std::size_t m = 0; m < big_m; ++m)
        for (std::size_t n = 0; n < big_n; ++n)
            for (std::size_t np = 0; np < big_n; ++np) out(n, np) += h(m * big_n + n, m * big_n + np);
    return out;
}

/// Tr_2: result[m, m'] = sum_n H[(m N + n), (m' N + n)].
inline Matrix partial_trace_2(const Matrix& h, const BipartiteDims& dims) {
    if (!h.square()) throw DimensionError("partial_trace_2: operator is not square");
    dims.require_matches(h.rows(), "partial_trace_2");
    const std::size_t big_m = dims.dim1, big_n = dims.dim2;
    Matrix out(big_m, big_m);
    for (std::size_t m = 0; m < big_m; ++m)
        for (std::size_t mp = 0; mp < big_m; ++mp)
            for (std::size_t n = 0; n < big_n; ++n) out(m, mp) += h(m * big_n + n, mp * big_n + n);
    return out;
}

inline HermitianOperator partial_trace_1(const HermitianOperator& h, const BipartiteDims& dims) {
    return HermitianOperator(partial_trace_1(h.matrix(), dims));
}

inline HermitianOperator partial_trace_2(const HermitianOperator& h, const BipartiteDims& dims) {
    return HermitianOperator(partial_trace_2(h.matrix(), dims));
}

/// K = Tr_1 [(rho (x) 1)^{1/2} H (rho (x) 1)^{1/2}], an operator on H2.
inline HermitianOperator compress(const HermitianOperator& h, const DensityMatrix& rho, const BipartiteDims& dims) {
    dims.require_matches(h.dim(), "compress");
    if (rho.dim() != dims.dim1) throw DimensionError("compress: density matrix does not live on the first factor");
    const Matrix root = kron(psd_sqrt(rho.op()).matrix(), Matrix::identity(dims.dim2));
    return HermitianOperator(partial_trace_1(root * h.matrix() * root, dims));
}

/// Normalized Gram matrix of `rank` complex Gaussian vectors in C^M.
inline DensityMatrix random_density(std::size_t big_m, std::size_t rank, std::uint64_t seed) {
    if (big_m == 0 || rank == 0 || rank > big_m) throw DomainError("random_density requires 1 <= rank <= M");
    Rng rng(seed);
    Matrix g(big_m, big_m);
    for (std::size_t r = 0; r < rank; ++r) {
        Vector v(big_m);
        for (auto& z : v) z = complex_gaussian(rng);
        g += outer(v, v);
    }
    g *= Complex(1.0 / g.trace().real());
    return DensityMatrix(HermitianOperator(std::move(g)));
}

/// H = T (x) 1_N + sum_m |e_m><e_m| (x) W[m].
inline HermitianOperator block_coupled(const HermitianOperator& t, std::span<const HermitianOperator> w) {
    const std::size_t big_m = t.dim();
    if (w.size() != big_m) throw DimensionError("block_coupled: need one W per basis vector of the first factor");
    const std::size_t big_n = w.front().dim();
    for (const auto& wm : w)
        if (wm.dim() != big_n) throw DimensionError("block_coupled: W family has mixed dimensions");
    Matrix h = kron(t.matrix(), Matrix::identity(big_n));
    for (std::size_t m = 0; m < big_m; ++m)
        for (std::size_t n = 0; n < big_n; ++n)
            for (std::size_t np = 0; np < big_n; ++np) h(m * big_n + n, m * big_n + np) += w[m](n, np);
    return HermitianOperator(std::move(h));
}

/// "dims M N" followed by the operator dump.
inline void write_bipartite(std::ostream& os, const HermitianOperator& h, const BipartiteDims& dims) {
    dims.require_matches(h.dim(), "write_bipartite");
    os << "dims " << dims.dim1 << ' ' << dims.dim2 << '\n';
    write_operator(os, h);
}

inline std::pair<HermitianOperator, BipartiteDims> read_bipartite(std::istream& is) {
    std::string tag;
    BipartiteDims dims;
    if (!(is >> tag >> dims.dim1 >> dims.dim2) || tag != "dims") throw Error("bipartite dump: expected 'dims M N'");
    auto h = read_operator(is);
    dims.require_matches(h.dim(), "read_bipartite");
    return {std::move(h), dims};
}

} // namespace pj
