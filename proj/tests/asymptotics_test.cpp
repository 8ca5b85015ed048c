#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <partial_jensen/asymptotics.hpp>

namespace {

using namespace pj;
constexpr double kPi = std::numbers::pi;

TEST(Constants, ClosedForms) {
    EXPECT_NEAR(constant_C(2.0, 1), 0.25, 1e-12);
    EXPECT_NEAR(constant_Cprime(2.0, 1), 0.25, 1e-12);
    EXPECT_NEAR(constant_C(0.5, 1), 8.0 / (15.0 * kPi), 1e-12);
    EXPECT_NEAR(constant_Cprime(0.5, 1), 1.0 / std::sqrt(kPi), 1e-12);
    // d = 2, gamma = 2: (4 pi)^{-1} (1/2) Gamma(1) / Gamma(3) = 1/(16 pi).
    EXPECT_NEAR(constant_C(2.0, 2), 1.0 / (16.0 * kPi), 1e-14);
}

TEST(Constants, RatioIsGammaOfExponentPlusOne) {
    for (double gamma : {0.3, 0.5, 1.0, 1.7, 2.0, 4.0, 9.0})
        for (int d : {1, 2, 3}) {
            const double ratio = constant_Cprime(gamma, d) / constant_C(gamma, d);
            EXPECT_NEAR(ratio / std::exp(log_gamma(weyl_exponent(gamma, d) + 1.0)), 1.0, 1e-10) << gamma << "," << d;
        }
}

TEST(Constants, PositiveAndContinuousInGamma) {
    for (int d : {1, 2}) {
        double previous = constant_C(0.2, d);
        for (double gamma = 0.21; gamma < 10.0; gamma += 0.01) {
            const double c = constant_C(gamma, d);
            EXPECT_GT(c, 0.0);
            EXPECT_GT(constant_Cprime(gamma, d), 0.0);
            EXPECT_LT(std::abs(c - previous) / c, 0.05) << gamma;
            previous = c;
        }
    }
}

TEST(Constants, Errors) {
    EXPECT_THROW((void)constant_C(0.0, 1), DomainError);
    EXPECT_THROW((void)constant_C(1.0, 0), DomainError);
    EXPECT_THROW((void)constant_Cprime(-2.0, 1), DomainError);
    EXPECT_THROW((void)constant_Cprime(1e-3, 1), DomainError);
    EXPECT_THROW((void)constant_C(2.0, 2000), DomainError);
}

TEST(WeylPrediction, Oscillator) {
    const auto v = HomogeneousPotential::line(2.0);
    EXPECT_NEAR(weyl_prediction(v, 100.0), 50.0, 1e-10);
    EXPECT_NEAR(heat_weyl_prediction(v, 0.1), 5.0, 1e-12);
    const auto law = weyl_law(v);
    EXPECT_DOUBLE_EQ(law.exponent, 1.0);
    EXPECT_EQ(law.kind, PredictionKind::Counting);
    EXPECT_EQ(heat_weyl_law(v).kind, PredictionKind::Heat);
}

TEST(WeylPrediction, ConstantProfile) {
    const double c = 3.0;
    const auto line = HomogeneousPotential::line(1.5, c, c);
    EXPECT_NEAR(angular_integral(line), 2.0 * std::pow(c, -1.0 / 1.5), 1e-14);
    const auto plane = HomogeneousPotential::plane(2.0, [c](double) { return c; });
    EXPECT_NEAR(angular_integral(plane), 2.0 * kPi / c, 1e-10);
}

TEST(WeylPrediction, AnisotropicPlaneProfile) {
    // F = 1 + cos^2: integral of F^{-1} is 2 pi / sqrt(2).
    const auto plane = HomogeneousPotential::plane(2.0, [](double th) { return 1.0 + std::cos(th) * std::cos(th); });
    EXPECT_NEAR(angular_integral(plane), 2.0 * kPi / std::sqrt(2.0), 1e-8);
}

TEST(WeylPrediction, VanishingProfileIsInfinite) {
    const auto arc = HomogeneousPotential::plane(2.0, [](double th) { return std::max(0.0, std::sin(th)); });
    EXPECT_TRUE(std::isinf(weyl_prediction(arc, 10.0)));
    EXPECT_TRUE(std::isinf(heat_weyl_prediction(arc, 0.1)));
    EXPECT_TRUE(std::isinf(weyl_prediction(HomogeneousPotential::line(2.0, 1.0, 0.0), 10.0)));
}

TEST(PartialPrediction, SimonCase) {
    const auto v = SeparatelyHomogeneous::make(1.0, 2.0);
    const double z = kPi * kPi / 8.0;
    const std::vector<double> zeta{z, z};
    for (double lambda : {1.0, 10.0, 100.0})
        EXPECT_NEAR(partial_weyl_prediction(v, lambda, zeta) / (2.0 * kPi / 15.0 * std::pow(lambda, 2.5)), 1.0, 1e-12);
    for (double t : {0.01, 0.1, 1.0})
        EXPECT_NEAR(partial_heat_prediction(v, t, zeta) / (std::pow(kPi, 1.5) / 4.0 * std::pow(t, -2.5)), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(partial_weyl_law(v, zeta).exponent, 2.5);
    EXPECT_DOUBLE_EQ(partial_zeta_power(v), 2.0);
}

TEST(PartialPrediction, ZeroZeta) {
    const auto v = SeparatelyHomogeneous::make(1.0, 2.0);
    const std::vector<double> zeta{0.0, 0.0};
    EXPECT_EQ(partial_weyl_prediction(v, 50.0, zeta), 0.0);
}

TEST(PartialPrediction, WrongRegime) {
    const std::vector<double> zeta{1.0, 1.0};
    EXPECT_THROW((void)partial_weyl_prediction(SeparatelyHomogeneous::make(2.0, 1.0), 5.0, zeta), DomainError);
    EXPECT_THROW((void)partial_heat_prediction(SeparatelyHomogeneous::make(1.0, 1.0), 5.0, zeta), DomainError);
    try {
        (void)partial_weyl_law(SeparatelyHomogeneous::make(2.0, 1.0), zeta);
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("symmetric"), std::string::npos);
    }
}

TEST(PartialPrediction, EffectiveZetasForSimonCase) {
    const auto [plus, minus] = effective_zetas(SeparatelyHomogeneous::make(1.0, 2.0), 16.0, 0.01, 150.0);
    const double z = kPi * kPi / 8.0;
    EXPECT_NEAR(plus.value, z, 0.01 * z);
    EXPECT_NEAR(minus.value, z, 0.01 * z);
}

TEST(DivergenceClassifier, ListedExamples) {
    EXPECT_EQ(divergence_classifier(1, 1, 1.0, 2.0), Divergence::AtHalfPi);
    EXPECT_EQ(divergence_classifier(1, 1, 1.0, 1.0), Divergence::Both);
    EXPECT_EQ(divergence_classifier(2, 1, 1.0, 3.0), Divergence::AtHalfPi);
    EXPECT_EQ(divergence_classifier(1, 1, 2.0, 1.0), Divergence::AtZero);
    EXPECT_EQ(to_string(Divergence::AtHalfPi), "half_pi");
}

TEST(DivergenceClassifier, ScaleInvariant) {
    for (double alpha : {0.3, 1.0, 2.5})
        for (double beta : {0.7, 1.0, 4.0})
            for (int m : {1, 2, 3})
                for (int n : {1, 2})
                    for (double c : {0.1, 7.0})
                        EXPECT_EQ(divergence_classifier(m, n, alpha, beta), divergence_classifier(m, n, c * alpha, c * beta));
}

TEST(DivergenceClassifier, Errors) {
    EXPECT_THROW((void)divergence_classifier(0, 1, 1.0, 1.0), DomainError);
    EXPECT_THROW((void)divergence_classifier(1, 1, 0.0, 1.0), DomainError);
}

TEST(PhaseSpace, OscillatorCounting) {
    const auto check = phase_space_counting_check(HomogeneousPotential::line(2.0), 10.0);
    EXPECT_NEAR(check.closed_form, 5.0, 1e-12);
    EXPECT_LT(check.relative_error, 0.005);
    EXPECT_LE(check.relative_error, check.convergence_estimate);
}

TEST(PhaseSpace, OscillatorHeat) {
    const auto check = phase_space_heat_check(HomogeneousPotential::line(2.0), 0.1);
    EXPECT_NEAR(check.closed_form, 5.0, 1e-12);
    EXPECT_LT(check.relative_error, 0.005);
    EXPECT_LE(check.relative_error, check.convergence_estimate);
}

TEST(PhaseSpace, AsymmetricProfiles) {
    const auto v = HomogeneousPotential::line(1.0, 1.0, 4.0);
    const auto counting = phase_space_counting_check(v, 7.0);
    EXPECT_LE(counting.relative_error, counting.convergence_estimate);
    EXPECT_LT(counting.relative_error, 0.005);
    const auto heat = phase_space_heat_check(HomogeneousPotential::line(0.5, 2.0, 1.0), 0.5);
    EXPECT_LE(heat.relative_error, heat.convergence_estimate);
}

TEST(PhaseSpace, PlaneCounting) {
    const auto v = HomogeneousPotential::plane(2.0, [](double th) { return 1.0 + 0.5 * std::cos(th); });
    const auto check = phase_space_counting_check(v, 10.0, 800);
    EXPECT_LT(check.relative_error, 0.005);
}

TEST(PhaseSpace, EmptySublevelSet) {
    const double inf = std::numeric_limits<double>::infinity();
    const auto v = HomogeneousPotential::line(2.0, inf, inf);
    const auto check = phase_space_counting_check(v, 10.0);
    EXPECT_EQ(check.closed_form, 0.0);
    EXPECT_EQ(check.quadrature, 0.0);
    EXPECT_EQ(check.relative_error, 0.0);
}

TEST(ExponentFit, ExactPowerLaw) {
    std::vector<std::pair<double, double>> samples;
    for (double s : {1.0, 2.0, 5.0, 10.0}) samples.emplace_back(s, 3.0 * s * s);
    const auto fit = exponent_fit(samples);
    EXPECT_NEAR(fit.slope, 2.0, 1e-12);
    EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-12);
    EXPECT_NEAR(fit.residual, 0.0, 1e-12);
}

TEST(ExponentFit, OscillatorCountingData) {
    const auto v = HomogeneousPotential::line(2.0);
    std::vector<std::pair<double, double>> samples;
    const double l = box_for_counting(v, 400.0);
    const auto op = build_hamiltonian(GridSpec::line_with_spacing(l, 0.01), v);
    for (double lambda = 40.0; lambda <= 400.0; lambda += 40.0)
        samples.emplace_back(lambda, static_cast<double>(counting_function(op, lambda).count));
    EXPECT_NEAR(exponent_fit(samples).slope, 1.0, 0.02);
}

TEST(ExponentFit, TauberianConsistency) {
    // Counting and heat fits for an asymmetric quartic share the exponent 3/4.
    const auto v = HomogeneousPotential::line(4.0, 1.0, 2.0);
    const double target = weyl_exponent(4.0, 1);
    std::vector<std::pair<double, double>> counts, heats;
    const auto op = build_hamiltonian(GridSpec::line_with_spacing(box_for_counting(v, 400.0), 0.005), v);
    for (double lambda : {100.0, 160.0, 250.0, 320.0, 400.0})
        counts.emplace_back(lambda, static_cast<double>(counting_function(op, lambda).count));
    const auto heat_op = build_hamiltonian(GridSpec::line_with_spacing(box_for_heat(v, 0.01), 0.005), v);
    for (double t : {0.01, 0.02, 0.04, 0.08}) heats.emplace_back(t, heat_trace(heat_op, t, HeatMethod::Truncated).value);
    EXPECT_NEAR(exponent_fit(counts).slope, target, 0.03);
    EXPECT_NEAR(-exponent_fit(heats).slope, target, 0.03);
}

TEST(ExponentFit, Errors) {
    const std::vector<std::pair<double, double>> two{{1.0, 1.0}, {2.0, 2.0}};
    EXPECT_THROW((void)exponent_fit(two), DomainError);
    const std::vector<std::pair<double, double>> nonpositive{{1.0, 1.0}, {2.0, 0.0}, {3.0, 3.0}};
    EXPECT_THROW((void)exponent_fit(nonpositive), DomainError);
}

} // namespace
