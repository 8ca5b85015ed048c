#include <cmath>

#include <gtest/gtest.h>

#include <partial_jensen/inequalities.hpp>
#include <partial_jensen/schrodinger.hpp>

#include "support/oracles.hpp"

namespace {

using namespace pj;

HermitianOperator pauli(char which) {
    Matrix m(2, 2);
    if (which == 'x') {
        m(0, 1) = m(1, 0) = 1.0;
    } else {
        m(0, 0) = 1.0;
        m(1, 1) = -1.0;
    }
    return HermitianOperator(m);
}

std::vector<ScalarFunction> convex_family() {
    return {ScalarFunction::exp_neg(0.1), ScalarFunction::exp_neg(1.0), ScalarFunction::exp_neg(10.0),
            ScalarFunction::square(), ScalarFunction::positive_part()};
}

TEST(ScalarJensenGap, AffineIsExact) {
    Rng rng(1);
    const auto h = random_hermitian(5, rng);
    const auto psi = random_unit_vector(5, rng);
    EXPECT_NEAR(jensen_scalar_gap(h, psi, ScalarFunction::affine(-1.5, 0.25)).value(), 0.0, 1e-12);
}

TEST(ScalarJensenGap, EigenvectorIsExact) {
    Rng rng(2);
    const auto h = random_hermitian(5, rng);
    const auto v = eig_hermitian(h).eigenvector(2);
    EXPECT_NEAR(jensen_scalar_gap(h, v, ScalarFunction::exp_neg(1.0)).value(), 0.0, 1e-12);
}

TEST(ScalarJensenGap, TwoLevelExample) {
    const Vector psi{Complex(1.0 / std::sqrt(2.0)), Complex(1.0 / std::sqrt(2.0))};
    const double gap = jensen_scalar_gap(HermitianOperator::diagonal({0.0, 2.0}), psi, ScalarFunction::exp_neg(1.0)).value();
    EXPECT_NEAR(gap, (1.0 + std::exp(-2.0)) / 2.0 - std::exp(-1.0), 1e-14);
    EXPECT_NEAR(gap, 0.19979, 1e-5);
}

TEST(ScalarJensenGap, RejectsBadInputs) {
    const auto h = HermitianOperator::identity(2);
    const Vector unnormalized{Complex(1.0), Complex(1.0)};
    EXPECT_THROW((void)jensen_scalar_gap(h, unnormalized, ScalarFunction::square()), DomainError);
    const Vector e0{Complex(1.0), Complex(0.0)};
    EXPECT_THROW((void)jensen_scalar_gap(h, e0, ScalarFunction::custom([](double x) { return -x * x; }, false)),
                 DomainError);
}

TEST(PartialJensenGap, AffineIsExact) {
    Rng rng(3);
    const BipartiteDims dims{3, 4};
    const auto h = random_hermitian(12, rng);
    const auto rho = random_density(3, 2, 30);
    EXPECT_NEAR(jensen_partial_trace_gap(h, rho, dims, ScalarFunction::affine(2.0, -0.5)).value(), 0.0, 1e-10);
}

TEST(PartialJensenGap, ReducesToScalarJensen) {
    for (std::uint64_t trial = 0; trial < 30; ++trial) {
        Rng rng = trial_rng(31, trial);
        const std::size_t m = 2 + trial % 5;
        const auto h = random_hermitian(m, rng);
        const auto phi = random_unit_vector(m, rng);
        const auto f = convex_family()[trial % 5];
        const double partial = jensen_partial_trace_gap(h, DensityMatrix::pure(phi), BipartiteDims{m, 1}, f).value();
        const double scalar = jensen_scalar_gap(h, phi, f).value();
        EXPECT_NEAR(partial, scalar, 1e-12 * (1.0 + std::abs(jensen_scalar_gap(h, phi, f).rhs))) << "trial " << trial;
    }
}

TEST(PartialJensenGap, NonnegativeAndMatchesProofChain) {
    for (std::uint64_t trial = 0; trial < 150; ++trial) {
        Rng rng = trial_rng(32, trial);
        const BipartiteDims dims{1 + trial % 5, 1 + (trial / 5) % 5};
        const auto h = random_hermitian(dims.total(), rng, 2.0);
        const auto rho = random_density(dims.dim1, 1 + trial % dims.dim1, derive_seed(33, trial));
        const auto f = convex_family()[trial % 5];
        const Gap gap = jensen_partial_trace_gap(h, rho, dims, f);
        ASSERT_TRUE(gap.holds()) << "trial " << trial << " gap " << gap.value();

        const auto chain = oracle::proof_chain(h, rho.op(), dims.dim1, dims.dim2, [&](double x) { return f(x); });
        const double tol = 1e-10 * (1.0 + std::abs(gap.rhs));
        for (std::size_t n = 0; n < dims.dim2; ++n) {
            EXPECT_LE(chain.first[n], chain.middle[n] + tol);
            EXPECT_LE(chain.middle[n], chain.last[n] + tol);
        }
        EXPECT_NEAR(chain.lhs(), gap.lhs, tol);
        EXPECT_NEAR(chain.rhs(), gap.rhs, tol);
    }
}

TEST(PartialJensenGap, ScalesWithFunction) {
    Rng rng(34);
    const BipartiteDims dims{3, 3};
    const auto h = random_hermitian(9, rng);
    const auto rho = random_density(3, 3, 35);
    for (const auto& f : convex_family()) {
        const double base = jensen_partial_trace_gap(h, rho, dims, f).value();
        for (double c : {0.5, 3.0}) EXPECT_NEAR(jensen_partial_trace_gap(h, rho, dims, f.scaled(c)).value(), c * base, 1e-10);
    }
}

TEST(PartialJensenGap, BlockDiagonalWithEigenprojection) {
    Rng rng(36);
    std::vector<HermitianOperator> blocks;
    for (int m = 0; m < 3; ++m) blocks.push_back(random_hermitian(3, rng));
    const auto h = block_coupled(HermitianOperator::diagonal({0.3, -1.0, 2.0}), blocks);
    const auto rho = DensityMatrix(HermitianOperator::diagonal({0.0, 1.0, 0.0}));
    for (const auto& f : convex_family()) {
        const Gap g = jensen_partial_trace_gap(h, rho, BipartiteDims{3, 3}, f);
        EXPECT_NEAR(g.value(), 0.0, 1e-10 * (1.0 + std::abs(g.rhs))) << f.name();
    }
}

TEST(PartialJensenGap, Errors) {
    const auto h = HermitianOperator::identity(6);
    EXPECT_THROW((void)jensen_partial_trace_gap(h, DensityMatrix::maximally_mixed(2), BipartiteDims{2, 2},
                                                ScalarFunction::square()),
                 DimensionError);
    EXPECT_THROW((void)jensen_partial_trace_gap(h, DensityMatrix::maximally_mixed(3), BipartiteDims{2, 3},
                                                ScalarFunction::square()),
                 DimensionError);
    EXPECT_THROW((void)jensen_partial_trace_gap(HermitianOperator::diagonal({-1.0, 1.0}), DensityMatrix::maximally_mixed(2),
                                                BipartiteDims{2, 1}, ScalarFunction::power_neg(1.0)),
                 DomainError);
}

TEST(GoldenThompson, CommutingAndEqual) {
    const auto a = HermitianOperator::diagonal({0.1, -2.0, 1.5});
    const auto b = HermitianOperator::diagonal({3.0, 0.5, -0.7});
    EXPECT_NEAR(golden_thompson_gap(a, b).value(), 0.0, 1e-10);
    Rng rng(40);
    const auto c = random_hermitian(4, rng);
    EXPECT_NEAR(golden_thompson_gap(c, c).value(), 0.0, 1e-10);
}

TEST(GoldenThompson, PauliClosedForm) {
    // Tr e^{X+Z} = 2 cosh(sqrt 2); Tr e^{X/2} e^{Z} e^{X/2} = Tr e^X e^Z = 2 cosh^2(1).
    const Gap g = golden_thompson_gap(pauli('x'), pauli('z'));
    EXPECT_NEAR(g.lhs, 2.0 * std::cosh(std::sqrt(2.0)), 1e-12);
    EXPECT_NEAR(g.rhs, 2.0 * std::cosh(1.0) * std::cosh(1.0), 1e-12);
    EXPECT_GT(g.value(), 0.0);
}

TEST(GoldenThompson, RandomTrials) {
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        Rng rng = trial_rng(41, trial);
        const std::size_t n = 1 + trial % 6;
        EXPECT_TRUE(golden_thompson_gap(random_hermitian(n, rng), random_hermitian(n, rng)).holds());
    }
    EXPECT_THROW((void)golden_thompson_gap(HermitianOperator::identity(2), HermitianOperator::identity(3)), DimensionError);
}

TEST(SlicedGoldenThompson, DiagonalTIsExact) {
    Rng rng(42);
    std::vector<HermitianOperator> w;
    for (int m = 0; m < 4; ++m) w.push_back(random_psd(3, rng));
    EXPECT_NEAR(sliced_gt_gap(HermitianOperator::diagonal({0.0, 1.0, 2.0, 0.5}), w, 0.7).value(), 0.0, 1e-10);
}

TEST(SlicedGoldenThompson, IdenticalFamilyIsExact) {
    Rng rng(43);
    const auto wm = random_psd(3, rng);
    const std::vector<HermitianOperator> w(8, wm);
    const auto t = periodic_laplacian(8);
    EXPECT_NEAR(sliced_gt_gap(t, w, 1.0).value(), 0.0, 1e-10);
}

TEST(SlicedGoldenThompson, TorusLaplacianTrials) {
    const auto t = periodic_laplacian(8);
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        Rng rng = trial_rng(44, trial);
        std::vector<HermitianOperator> w;
        for (int m = 0; m < 8; ++m) w.push_back(random_psd(3, rng));
        const Gap g = sliced_gt_gap(t, w, trial % 2 ? 0.1 : 1.0);
        EXPECT_TRUE(g.holds()) << g.value();
    }
}

TEST(SlicedGoldenThompson, Errors) {
    const std::vector<HermitianOperator> w(2, HermitianOperator::identity(2));
    EXPECT_THROW((void)sliced_gt_gap(HermitianOperator::identity(3), w, 1.0), DimensionError);
    EXPECT_THROW((void)sliced_gt_gap(HermitianOperator::identity(2), w, 0.0), DomainError);
}

TEST(GibbsGap, GibbsStateIsExact) {
    Rng rng(50);
    for (std::size_t n : {1u, 3u, 8u}) {
        const auto h = random_hermitian(n, rng, 2.0);
        EXPECT_NEAR(gibbs_gap(gibbs_state(h), h).value(), 0.0, 1e-10);
    }
}

TEST(GibbsGap, MaximallyMixedWithZeroHamiltonian) {
    const Gap g = gibbs_gap(DensityMatrix::maximally_mixed(5), HermitianOperator::zero(5));
    EXPECT_NEAR(g.lhs, -std::log(5.0), 1e-14);
    EXPECT_NEAR(g.rhs, -std::log(5.0), 1e-14);
}

TEST(GibbsGap, RandomStatesAndTemperatureScan) {
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        Rng rng = trial_rng(51, trial);
        const std::size_t n = 1 + trial % 8;
        const auto h = random_hermitian(n, rng);
        EXPECT_TRUE(gibbs_gap(random_density(n, 1 + trial % n, derive_seed(52, trial)), h).holds());
    }
    Rng rng(53);
    const auto h = random_hermitian(6, rng, 2.0);
    double best_s = 0.0, best_gap = 1e300;
    for (int i = 0; i <= 200; ++i) {
        const double s = 0.5 + 0.005 * i;
        const double g = gibbs_gap(gibbs_state(h, s), h).value();
        if (g < best_gap) {
            best_gap = g;
            best_s = s;
        }
    }
    EXPECT_NEAR(best_s, 1.0, 0.005);
}

TEST(NegativeEntropy, PureAndMixed) {
    EXPECT_NEAR(negative_entropy(random_density(4, 1, 3)), 0.0, 1e-9);
    EXPECT_NEAR(negative_entropy(DensityMatrix::maximally_mixed(4)), -std::log(4.0), 1e-14);
}

} // namespace
