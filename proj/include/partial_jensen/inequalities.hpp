#pragma once

// Trace inequalities as executable gaps. Every function returns both sides so
// that callers can tell round-off from a genuine violation; `Gap::value()` is
// right side minus left side and is nonnegative whenever the inequality holds.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "bipartite.hpp"
#include "linalg.hpp"

namespace pj {

/// Uniform tolerance for "nonnegative", scaled by (1 + |rhs|).
inline constexpr double kGapTolerance = 1e-10;

struct Gap {
    double lhs = 0.0;
    double rhs = 0.0;

    double value() const noexcept { return rhs - lhs; }
    double threshold(double tol = kGapTolerance) const noexcept { return -tol * (1.0 + std::abs(rhs)); }
    bool holds(double tol = kGapTolerance) const noexcept { return value() >= threshold(tol); }
};

namespace detail {

inline void require_convex(const ScalarFunction& f, const std::vector<double>& spectrum) {
    if (!f.convex()) throw DomainError("inequality requires a convex function, got '" + f.name() + "'");
    check_declared_convexity(f, spectrum.front(), spectrum.back());
}

inline HermitianOperator exp_scaled(const SpectralDecomposition& sd, double s) {
    return apply_function(sd, ScalarFunction::custom([s](double x) { return std::exp(s * x); }, true, "exp"));
}

/// ln Tr e^{-H}, shifted by the ground-state energy to avoid overflow.
inline double log_partition(const std::vector<double>& spectrum) {
    const double mu0 = spectrum.front();
    double z = 0.0;
    for (double mu : spectrum) z += std::exp(-(mu - mu0));
    return -mu0 + std::log(z);
}

} // namespace detail

/// Scalar Jensen: f(<psi|H|psi>) <= <psi|f(H)|psi>.
inline Gap jensen_scalar_gap(const HermitianOperator& h, std::span<const Complex> psi, const ScalarFunction& f) {
    if (psi.size() != h.dim()) throw DimensionError("jensen_scalar_gap: vector length differs from operator dimension");
    if (std::abs(norm(psi) - 1.0) > 1e-10) throw DomainError("jensen_scalar_gap: psi is not normalized");
    const auto sd = eig_hermitian(h);
    detail::require_convex(f, sd.eigenvalues);
    const HermitianOperator fh = apply_function(sd, f);
    const double mean = expectation(h, psi);
    if (!f.in_domain(mean)) throw DomainError("jensen_scalar_gap: expectation outside the domain of f");
    return {f(mean), expectation(fh, psi)};
}

/// Partial-trace Jensen:
///   Tr_2 f(K) <= Tr_1 rho^{1/2} (Tr_2 f(H)) rho^{1/2},
/// with K = Tr_1 (rho (x) 1)^{1/2} H (rho (x) 1)^{1/2}.
inline Gap jensen_partial_trace_gap(const HermitianOperator& h, const DensityMatrix& rho, const BipartiteDims& dims,
                                    const ScalarFunction& f) {
    dims.require_matches(h.dim(), "jensen_partial_trace_gap");
    if (rho.dim() != dims.dim1) throw DimensionError("jensen_partial_trace_gap: rho must act on the first factor");
    const auto sd = eig_hermitian(h);
    detail::require_convex(f, sd.eigenvalues);

    const HermitianOperator reduced = partial_trace_2(apply_function(sd, f), dims);
    const HermitianOperator root = psd_sqrt(rho.op());
    const double rhs = (root.matrix() * reduced.matrix() * root.matrix()).trace().real();

    const HermitianOperator k = compress(h, rho, dims);
    const double lhs = trace(apply_function(k, f));
    return {lhs, rhs};
}

/// Golden-Thompson: Tr e^{A+B} <= Tr e^{A/2} e^{B} e^{A/2}.
inline Gap golden_thompson_gap(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) throw DimensionError("golden_thompson_gap: dimensions differ");
    const Matrix half_a = detail::exp_scaled(eig_hermitian(a), 0.5).matrix();
    const Matrix exp_b = detail::exp_scaled(eig_hermitian(b), 1.0).matrix();
    const double rhs = (half_a * exp_b * half_a).trace().real();
    const double lhs = trace(detail::exp_scaled(eig_hermitian(a + b), 1.0));
    return {lhs, rhs};
}

/// Upper side of the sliced Golden-Thompson inequality:
///   sum_m (e^{-tT})[m,m] Tr e^{-t W[m]}.
inline double sliced_gt_upper(const HermitianOperator& t_op, std::span<const HermitianOperator> w, double t) {
    if (w.size() != t_op.dim()) throw DimensionError("sliced_gt_upper: need one W per basis vector of the first factor");
    const HermitianOperator heat_t = apply_function(t_op, ScalarFunction::exp_neg(t));
    double sum = 0.0;
    for (std::size_t m = 0; m < w.size(); ++m) {
        sum += heat_t(m, m).real() * trace(apply_function(w[m], ScalarFunction::exp_neg(t)));
    }
    return sum;
}

/// Sliced Golden-Thompson: with H = T (x) 1 + sum_m |e_m><e_m| (x) W[m],
///   Tr e^{-tH} <= sum_m (e^{-tT})[m,m] Tr e^{-t W[m]}.
inline Gap sliced_gt_gap(const HermitianOperator& t_op, std::span<const HermitianOperator> w, double t) {
    if (!(t > 0.0)) throw DomainError("sliced_gt_gap requires t > 0");
    const HermitianOperator h = block_coupled(t_op, w);
    const double lhs = trace(apply_function(h, ScalarFunction::exp_neg(t)));
    return {lhs, sliced_gt_upper(t_op, w, t)};
}

/// Tr rho ln rho, with 0 ln 0 = 0.
inline double negative_entropy(const DensityMatrix& rho) {
    const auto sd = eig_hermitian(rho.op());
    double s = 0.0;
    for (double mu : sd.eigenvalues)
        if (mu > 0.0) s += mu * std::log(mu);
    return s;
}

/// e^{-H} / Tr e^{-H}
inline DensityMatrix gibbs_state(const HermitianOperator& h, double beta = 1.0) {
    const auto sd = eig_hermitian(h);
    const double mu0 = sd.eigenvalues.front();
    double z = 0.0;
    for (double mu : sd.eigenvalues) z += std::exp(-beta * (mu - mu0));
    // Ground-state shift keeps entries finite.
    const ScalarFunction normalized = ScalarFunction::custom(
        [beta, mu0, z](double x) { return std::exp(-beta * (x - mu0)) / z; }, true, "gibbs");
    return DensityMatrix(apply_function(sd, normalized));
}

/// Gibbs variational principle:
///   -ln Tr e^{-H} <= Tr rho^{1/2} H rho^{1/2} + Tr rho ln rho.
inline Gap gibbs_gap(const DensityMatrix& rho, const HermitianOperator& h) {
    if (rho.dim() != h.dim()) throw DimensionError("gibbs_gap: dimensions differ");
    const HermitianOperator root = psd_sqrt(rho.op());
    const double energy = (root.matrix() * h.matrix() * root.matrix()).trace().real();
    const double lhs = -detail::log_partition(eig_hermitian(h).eigenvalues);
    return {lhs, energy + negative_entropy(rho)};
}

} // namespace pj
