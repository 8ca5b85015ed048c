#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include <partial_jensen/linalg.hpp>
#include <partial_jensen/random.hpp>
#include <partial_jensen/special.hpp>

#include "support/oracles.hpp"

namespace {

using namespace pj;

double reconstruction_error(const HermitianOperator& h, const SpectralDecomposition& sd) {
    const Matrix lambda = Matrix::diagonal(sd.eigenvalues);
    return (sd.eigenvectors * lambda * sd.eigenvectors.adjoint() - h.matrix()).frobenius_norm();
}

double orthonormality_error(const SpectralDecomposition& sd) {
    const std::size_t n = sd.eigenvalues.size();
    return (sd.eigenvectors.adjoint() * sd.eigenvectors - Matrix::identity(n)).frobenius_norm();
}

TEST(EigHermitian, IdentityHasUnitSpectrum) {
    const auto sd = eig_hermitian(HermitianOperator::identity(3));
    ASSERT_EQ(sd.eigenvalues.size(), 3u);
    for (double mu : sd.eigenvalues) EXPECT_NEAR(mu, 1.0, 1e-14);
}

TEST(EigHermitian, PauliX) {
    Matrix x(2, 2);
    x(0, 1) = 1.0;
    x(1, 0) = 1.0;
    const auto sd = eig_hermitian(HermitianOperator(x));
    EXPECT_NEAR(sd.eigenvalues[0], -1.0, 1e-14);
    EXPECT_NEAR(sd.eigenvalues[1], 1.0, 1e-14);
}

TEST(EigHermitian, MatchesCharacteristicPolynomialRoots) {
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        Rng rng = trial_rng(2024, trial);
        const auto h = random_hermitian(8, rng);
        const auto sd = eig_hermitian(h);
        const auto roots = oracle::charpoly_roots(h.matrix());
        for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(sd.eigenvalues[k], roots[k], 1e-8) << "trial " << trial;
    }
}

TEST(EigHermitian, ReconstructionAndOrthonormality) {
    for (std::size_t n : {1u, 2u, 3u, 7u, 16u, 40u}) {
        Rng rng = trial_rng(11, n);
        const auto h = random_hermitian(n, rng, 3.0);
        const auto sd = eig_hermitian(h);
        EXPECT_LE(reconstruction_error(h, sd), 1e-10 * (1.0 + h.matrix().frobenius_norm())) << "n=" << n;
        EXPECT_LE(orthonormality_error(sd), 1e-10) << "n=" << n;
        EXPECT_TRUE(std::is_sorted(sd.eigenvalues.begin(), sd.eigenvalues.end()));
    }
}

TEST(EigHermitian, DegenerateSpectrum) {
    Rng rng(5);
    // U diag(1,1,1,2,2) U* for a random unitary U.
    const auto q = eig_hermitian(random_hermitian(5, rng)).eigenvectors;
    const std::vector<double> d{1, 1, 1, 2, 2};
    const HermitianOperator h(q * Matrix::diagonal(d) * q.adjoint());
    const auto sd = eig_hermitian(h);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(sd.eigenvalues[k], d[k], 1e-12);
    EXPECT_LE(reconstruction_error(h, sd), 1e-12 * 10);
    EXPECT_LE(orthonormality_error(sd), 1e-10);
}

TEST(EigHermitian, Deterministic) {
    Rng rng(99);
    const auto h = random_hermitian(12, rng);
    const auto a = eig_hermitian(h);
    const auto b = eig_hermitian(h);
    EXPECT_EQ(a.eigenvalues, b.eigenvalues);
    for (std::size_t i = 0; i < a.eigenvectors.data().size(); ++i)
        EXPECT_EQ(a.eigenvectors.data()[i], b.eigenvectors.data()[i]);
}

TEST(EigHermitian, TridiagonalEigenvaluesMatchDense) {
    const std::vector<double> diag{2, -1, 0.5, 3, 1};
    const std::vector<double> off{1, 0.25, -2, 0.75};
    const auto fast = tridiagonal_eigenvalues(diag, off);
    Matrix m(5, 5);
    for (std::size_t i = 0; i < 5; ++i) m(i, i) = diag[i];
    for (std::size_t i = 0; i < 4; ++i) m(i, i + 1) = m(i + 1, i) = off[i];
    const auto roots = oracle::charpoly_roots(m);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(fast[k], roots[k], 1e-10);
}

TEST(HermitianOperator, SymmetrizesSmallAsymmetry) {
    Matrix m(2, 2);
    m(0, 0) = 1.0;
    m(0, 1) = Complex(0.5, 1e-10);
    m(1, 0) = Complex(0.5, 0.0);
    m(1, 1) = Complex(2.0, 1e-11);
    const HermitianOperator h(m);
    EXPECT_EQ(h(0, 1), std::conj(h(1, 0)));
    EXPECT_EQ(h(1, 1).imag(), 0.0);
}

TEST(HermitianOperator, RejectsLargeAsymmetry) {
    Matrix m(2, 2);
    m(0, 1) = 1.0;
    EXPECT_THROW(HermitianOperator{m}, DomainError);
    EXPECT_THROW(HermitianOperator{Matrix(2, 3)}, DimensionError);
    EXPECT_THROW(HermitianOperator{Matrix(0, 0)}, DimensionError);
}

TEST(ApplyFunction, DiagonalExponential) {
    const auto e = apply_function(HermitianOperator::diagonal({0.0, std::log(2.0)}), ScalarFunction::exp_neg(1.0));
    EXPECT_NEAR(e(0, 0).real(), 1.0, 1e-15);
    EXPECT_NEAR(e(1, 1).real(), 0.5, 1e-15);
    EXPECT_NEAR(std::abs(e(0, 1)), 0.0, 1e-15);
}

TEST(ApplyFunction, SquareEqualsProduct) {
    Rng rng(3);
    const auto h = random_hermitian(5, rng);
    const auto sq = apply_function(h, ScalarFunction::square());
    EXPECT_LE((sq.matrix() - h.matrix() * h.matrix()).frobenius_norm(), 1e-10);
}

TEST(ApplyFunction, ZeroMatrixExponentialIsIdentity) {
    const auto e = apply_function(HermitianOperator::zero(4), ScalarFunction::exp_neg(2.5));
    EXPECT_LE((e.matrix() - Matrix::identity(4)).frobenius_norm(), 1e-14);
}

TEST(ApplyFunction, CommutesWithArgument) {
    Rng rng(8);
    const auto h = random_hermitian(9, rng);
    for (const auto& f : {ScalarFunction::exp_neg(0.7), ScalarFunction::positive_part(), ScalarFunction::square()}) {
        const auto fh = apply_function(h, f);
        EXPECT_LE((fh.matrix() * h.matrix() - h.matrix() * fh.matrix()).frobenius_norm(), 1e-10) << f.name();
    }
}

TEST(ApplyFunction, NegativePowerDomainErrorNamesEigenvalue) {
    const auto h = HermitianOperator::diagonal({-0.5, 1.0});
    try {
        (void)apply_function(h, ScalarFunction::power_neg(2.0));
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("-0.5"), std::string::npos) << e.what();
    }
}

TEST(ApplyFunction, NegativePowerOnPositiveSpectrum) {
    const auto r = apply_function(HermitianOperator::diagonal({1.0, 2.0, 4.0}), ScalarFunction::power_neg(1.0));
    EXPECT_NEAR(trace(r), 1.75, 1e-14);
}

TEST(ApplyFunction, AffineThenExponentialComposes) {
    Rng rng(21);
    const auto h = random_hermitian(6, rng);
    const auto affine = ScalarFunction::affine(0.5, -1.0);
    const auto heat = ScalarFunction::exp_neg(1.3);
    const auto stepwise = apply_function(apply_function(h, affine), heat);
    const auto composed = apply_function(h, ScalarFunction::compose(heat, affine, true));
    EXPECT_LE((stepwise.matrix() - composed.matrix()).frobenius_norm(), 1e-10);
}

TEST(ScalarFunction, ScaledFunctionKeepsConvexityForPositiveFactor) {
    EXPECT_TRUE(ScalarFunction::square().scaled(2.0).convex());
    EXPECT_FALSE(ScalarFunction::square().scaled(-1.0).convex());
    EXPECT_DOUBLE_EQ(ScalarFunction::square().scaled(3.0)(2.0), 12.0);
}

TEST(ScalarFunction, BuiltinsAreMidpointConvex) {
    for (const auto& f : {ScalarFunction::exp_neg(3.0), ScalarFunction::affine(-2.0, 1.0),
                          ScalarFunction::positive_part(), ScalarFunction::square()})
        EXPECT_TRUE(midpoint_convex_on(f, -4.0, 4.0)) << f.name();
    EXPECT_TRUE(midpoint_convex_on(ScalarFunction::power_neg(1.5), 0.1, 4.0));
    EXPECT_FALSE(midpoint_convex_on(ScalarFunction::custom([](double x) { return std::sin(x); }, false), -3.0, 3.0));
}

TEST(Trace, SimpleCases) {
    EXPECT_DOUBLE_EQ(trace(HermitianOperator::identity(7)), 7.0);
    EXPECT_DOUBLE_EQ(trace(HermitianOperator::diagonal({1.0, 2.0, 3.0})), 6.0);
}

TEST(Trace, EqualsEigenvalueSum) {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        Rng rng = trial_rng(77, trial);
        const auto h = random_hermitian(1 + trial % 10, rng);
        double s = 0.0;
        for (double mu : eig_hermitian(h).eigenvalues) s += mu;
        EXPECT_NEAR(trace(h), s, 1e-10);
    }
}

TEST(ScalarJensen, HoldsOnRandomInputs) {
    const std::vector<ScalarFunction> functions{ScalarFunction::exp_neg(0.5), ScalarFunction::square(),
                                                ScalarFunction::positive_part(), ScalarFunction::affine(2.0, 1.0)};
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        Rng rng = trial_rng(4, trial);
        const std::size_t n = 1 + trial % 8;
        const auto h = random_hermitian(n, rng);
        const auto psi = random_unit_vector(n, rng);
        const auto fh = apply_function(h, functions[trial % 4]);
        const double gap = expectation(fh, psi) - functions[trial % 4](expectation(h, psi));
        EXPECT_GE(gap, -1e-10);
    }
}

TEST(OperatorDump, RoundTrip) {
    Rng rng(1);
    const auto h = random_hermitian(4, rng);
    std::stringstream ss;
    write_operator(ss, h);
    EXPECT_EQ(ss.str().substr(0, 6), "dim 4\n");
    const auto back = read_operator(ss);
    EXPECT_EQ((back.matrix() - h.matrix()).max_abs(), 0.0);
}

TEST(OperatorDump, RejectsMalformedInput) {
    std::stringstream ss("dim 2\n1 0\n0 0\n");
    EXPECT_THROW((void)read_operator(ss), Error);
}

TEST(LogGamma, KnownValues) {
    EXPECT_NEAR(log_gamma(5.0), std::log(24.0), 1e-13);
    EXPECT_NEAR(log_gamma(0.5), std::log(std::sqrt(std::numbers::pi)), 1e-13);
    EXPECT_NEAR(log_gamma(3.5), std::log(15.0 * std::sqrt(std::numbers::pi) / 8.0), 1e-13);
    EXPECT_NEAR(log_gamma(1.0), 0.0, 1e-14);
    EXPECT_NEAR(log_gamma(2.0), 0.0, 1e-14);
}

TEST(LogGamma, RelativeAccuracyOverRange) {
    // Factorials and half-integers: exact references by recurrence.
    double fact = 0.0;
    for (int k = 1; k <= 170; ++k) {
        if (k > 1) fact += std::log(static_cast<double>(k - 1));
        EXPECT_NEAR(std::exp(log_gamma(k) - fact), 1.0, 1e-12) << k;
    }
    double half = std::log(std::sqrt(std::numbers::pi));
    for (int k = 0; k < 160; ++k) {
        const double x = 0.5 + k;
        EXPECT_NEAR(std::exp(log_gamma(x) - half), 1.0, 1e-12) << x;
        half += std::log(x);
    }
    // Reflection-free check near the lower end: Gamma(x+1) = x Gamma(x).
    for (double x = 0.05; x < 1.0; x += 0.05) EXPECT_NEAR(log_gamma(x + 1.0) - log_gamma(x), std::log(x), 1e-12);
}

TEST(LogGamma, RejectsNonPositive) {
    EXPECT_THROW((void)log_gamma(0.0), DomainError);
    EXPECT_THROW((void)log_gamma(-1.5), DomainError);
}

} // namespace
