#pragma once

// Closed-form leading terms for eigenvalue counting functions and heat traces
// of -Delta + V with homogeneous V, plus the tools used to compare them
// against discretized spectra.

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "schrodinger.hpp"
#include "special.hpp"

namespace pj {

/// (4 pi)^{-d/2} gamma^{-1} Gamma(d/gamma) / Gamma(d/gamma + d/2 + 1)
inline double constant_C(double gamma, int d) {
    if (!(gamma > 0.0) || d < 1) throw DomainError("constant_C requires gamma > 0 and d >= 1");
    const double dd = static_cast<double>(d);
    const double q = dd / gamma;
    const double log_c = -0.5 * dd * std::log(4.0 * std::numbers::pi) - std::log(gamma) + log_gamma(q) -
                         log_gamma(q + 0.5 * dd + 1.0);
    if (std::abs(log_c) > 700.0) throw DomainError("constant_C overflows for these arguments");
    return std::exp(log_c);
}

/// Gamma(d/gamma + d/2 + 1) C = (4 pi)^{-d/2} gamma^{-1} Gamma(d/gamma)
inline double constant_Cprime(double gamma, int d) {
    if (!(gamma > 0.0) || d < 1) throw DomainError("constant_Cprime requires gamma > 0 and d >= 1");
    const double dd = static_cast<double>(d);
    const double log_c = -0.5 * dd * std::log(4.0 * std::numbers::pi) - std::log(gamma) + log_gamma(dd / gamma);
    if (std::abs(log_c) > 700.0) throw DomainError("constant_Cprime overflows for these arguments");
    return std::exp(log_c);
}

/// d (gamma + 2) / (2 gamma)
inline double weyl_exponent(double gamma, int d) { return static_cast<double>(d) * (gamma + 2.0) / (2.0 * gamma); }

enum class PredictionKind { Counting, Heat, PartialCounting, PartialHeat };

/// constant * scale^exponent for counting kinds (scale = lambda) and
/// constant * scale^{-exponent} for heat kinds (scale = t).
struct Prediction {
    double exponent = 0.0;
    double constant = 0.0;
    PredictionKind kind = PredictionKind::Counting;

    bool is_heat() const noexcept { return kind == PredictionKind::Heat || kind == PredictionKind::PartialHeat; }
    bool finite() const noexcept { return std::isfinite(constant); }

    double at(double scale) const {
        if (constant == 0.0) return 0.0;
        return constant * std::pow(scale, is_heat() ? -exponent : exponent);
    }
};

/// Angular integrals in 2D stop refining at this relative change.
inline constexpr double kAngularTolerance = 1e-8;
/// An integrand value above this at any node declares the integral divergent.
inline constexpr double kDivergenceGuard = 1e12;

/// Integral over the unit sphere of F(omega)^{-d/gamma}; +infinity when F
/// vanishes where it matters.
inline double angular_integral(const HomogeneousPotential& v) {
    v.validate();
    const double power = -static_cast<double>(v.dim) / v.gamma;
    auto integrand = [&](double f) {
        if (f == 0.0) return std::numeric_limits<double>::infinity();
        return std::pow(f, power);
    };
    if (v.dim == 1) return integrand(v.profile_1d[0]) + integrand(v.profile_1d[1]);

    // Periodic trapezoid on [0, 2 pi), doubling until converged.
    auto trapezoid = [&](std::size_t nodes) {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) {
            const double value = integrand(v.profile_2d(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                        static_cast<double>(nodes)));
            if (!(value <= kDivergenceGuard)) return std::numeric_limits<double>::infinity();
            s += value;
        }
        return s * 2.0 * std::numbers::pi / static_cast<double>(nodes);
    };
    std::size_t nodes = 2048;
    double previous = trapezoid(nodes);
    while (std::isfinite(previous) && nodes < (std::size_t{1} << 22)) {
        nodes *= 2;
        const double current = trapezoid(nodes);
        if (!std::isfinite(current)) return current;
        if (std::abs(current - previous) <= kAngularTolerance * std::abs(current)) return current;
        previous = current;
    }
    return previous;
}

/// N(lambda) ~ C_{gamma,d} lambda^{d(gamma+2)/(2 gamma)} int F^{-d/gamma}
inline Prediction weyl_law(const HomogeneousPotential& v) {
    return {weyl_exponent(v.gamma, v.dim), constant_C(v.gamma, v.dim) * angular_integral(v), PredictionKind::Counting};
}

/// Tr e^{-tH} ~ C'_{gamma,d} t^{-d(gamma+2)/(2 gamma)} int F^{-d/gamma}
inline Prediction heat_weyl_law(const HomogeneousPotential& v) {
    return {weyl_exponent(v.gamma, v.dim), constant_Cprime(v.gamma, v.dim) * angular_integral(v), PredictionKind::Heat};
}

inline double weyl_prediction(const HomogeneousPotential& v, double lambda) { return weyl_law(v).at(lambda); }
inline double heat_weyl_prediction(const HomogeneousPotential& v, double t) { return heat_weyl_law(v).at(t); }

// ---------------------------------------------------------------------------
// Partially semiclassical regime, m = n = 1
// ---------------------------------------------------------------------------

inline void require_partial_regime(const SeparatelyHomogeneous& v) {
    v.validate();
    // m / alpha > n / beta with m = n = 1.
    if (!(1.0 / v.alpha > 1.0 / v.beta)) {
        throw DomainError("partially semiclassical limit needs 1/alpha > 1/beta (beta > alpha); for beta < alpha "
                          "exchange the roles of x and y and use the symmetric statement");
    }
}

/// Power p = m(beta+2)/(2 alpha) of the effective operator in the limit.
inline double partial_zeta_power(const SeparatelyHomogeneous& v) { return (v.beta + 2.0) / (2.0 * v.alpha); }

/// Eigenvalue growth mu_k ~ c k^s of the effective operator, s = 2 beta / (n (beta + 2)).
inline double effective_growth_exponent(const SeparatelyHomogeneous& v) { return 2.0 * v.beta / (v.beta + 2.0); }

/// m(alpha+beta+2)/(2 alpha)
inline double partial_exponent(const SeparatelyHomogeneous& v) { return (v.alpha + v.beta + 2.0) / (2.0 * v.alpha); }

inline double sum_zeta(std::span<const double> zeta_per_omega) {
    double s = 0.0;
    for (double z : zeta_per_omega) s += z;
    return s;
}

/// N(lambda) ~ C_{2 alpha/(beta+2), 1} lambda^{(alpha+beta+2)/(2 alpha)} sum_omega Tr K_omega^{-p}
inline Prediction partial_weyl_law(const SeparatelyHomogeneous& v, std::span<const double> zeta_per_omega) {
    require_partial_regime(v);
    return {partial_exponent(v), constant_C(2.0 * v.alpha / (v.beta + 2.0), 1) * sum_zeta(zeta_per_omega),
            PredictionKind::PartialCounting};
}

/// Tr e^{-tH} ~ C'_{2 alpha/(beta+2), 1} t^{-(alpha+beta+2)/(2 alpha)} sum_omega Tr K_omega^{-p}
inline Prediction partial_heat_law(const SeparatelyHomogeneous& v, std::span<const double> zeta_per_omega) {
    require_partial_regime(v);
    return {partial_exponent(v), constant_Cprime(2.0 * v.alpha / (v.beta + 2.0), 1) * sum_zeta(zeta_per_omega),
            PredictionKind::PartialHeat};
}

inline double partial_weyl_prediction(const SeparatelyHomogeneous& v, double lambda, std::span<const double> zeta) {
    return partial_weyl_law(v, zeta).at(lambda);
}

inline double partial_heat_prediction(const SeparatelyHomogeneous& v, double t, std::span<const double> zeta) {
    return partial_heat_law(v, zeta).at(t);
}

/// Tr K_omega^{-p} for omega = +1 and -1 on a Dirichlet line of half-width
/// `half_width` and spacing `h`, summing eigenvalues up to e_cut plus the
/// extrapolated tail.
inline std::pair<ZetaTrace, ZetaTrace> effective_zetas(const SeparatelyHomogeneous& v, double half_width, double h,
                                                       double e_cut) {
    const auto line = GridSpec::line_with_spacing(half_width, h);
    const double p = partial_zeta_power(v);
    const double s = effective_growth_exponent(v);
    return {zeta_trace(effective_operator(+1, v, line), p, e_cut, s),
            zeta_trace(effective_operator(-1, v, line), p, e_cut, s)};
}

/// Dirichlet box for counting eigenvalues below lambda_max of
/// -Delta + |x|^alpha |y|^beta F. The potential vanishes on both axes, so the
/// boundary rule for homogeneous V does not apply. Instead each axis is sized
/// from the effective operator of the other variable: states below lambda
/// reach |x| <= (lambda/mu0)^{(beta+2)/(2 alpha)}, where mu0 is the smallest
/// ground energy of K_omega, and symmetrically in y with nu0.
struct PartialCountingGrid {
    double half_width_x = 0.0;
    double half_width_y = 0.0;
    double spacing = 0.0;
    double mu0 = 0.0;
    double nu0 = 0.0;

    GridSpec spec() const {
        auto points = [&](double l) { return static_cast<std::size_t>(std::llround(2.0 * l / spacing)) - 1; };
        return GridSpec::plane(half_width_x, points(half_width_x), half_width_y, points(half_width_y));
    }
};

namespace detail {

inline double effective_ground_energy(const SeparatelyHomogeneous& v) {
    const auto line = GridSpec::line_with_spacing(10.0, 0.01);
    double e = std::numeric_limits<double>::infinity();
    for (int omega : {1, -1}) e = std::min(e, lowest_eigenvalues(effective_operator(omega, v, line).matrix(), 1)[0]);
    return e;
}

} // namespace detail

inline PartialCountingGrid partial_counting_grid(const SeparatelyHomogeneous& v, double lambda_max) {
    require_partial_regime(v);
    if (!(lambda_max > 0.0)) throw DomainError("partial_counting_grid needs lambda_max > 0");
    // Same potential with the roles of x and y exchanged.
    const auto& f = v.profile;
    const auto swapped = SeparatelyHomogeneous::make(v.beta, v.alpha, {f[0], f[2], f[1], f[3]});
    PartialCountingGrid g;
    g.mu0 = detail::effective_ground_energy(v);
    g.nu0 = detail::effective_ground_energy(swapped);
    g.half_width_x = 1.05 * std::pow(lambda_max / g.mu0, (v.beta + 2.0) / (2.0 * v.alpha));
    g.half_width_y = std::max(8.0, 1.6 * std::pow(lambda_max / g.nu0, (v.alpha + 2.0) / (2.0 * v.beta)));
    g.spacing = std::min(0.12, 0.42 / std::sqrt(lambda_max));
    g.spec().validate();
    return g;
}

// ---------------------------------------------------------------------------
// Divergence of the naive Weyl integral for separately homogeneous V
// ---------------------------------------------------------------------------

enum class Divergence { AtZero, AtHalfPi, Both };

inline std::string to_string(Divergence d) {
    switch (d) {
    case Divergence::AtZero: return "zero";
    case Divergence::AtHalfPi: return "half_pi";
    case Divergence::Both: return "both";
    }
    return "both";
}

/// Endpoints of [0, pi/2] where
///   int (sin phi)^p (cos phi)^q dphi,
///   p = m - 1 - (m+n) alpha/(alpha+beta),  q = n - 1 - (m+n) beta/(alpha+beta),
/// diverges (exponent <= -1). Since (p+1) = -(q+1) one endpoint always does.
inline Divergence divergence_classifier(int m, int n, double alpha, double beta) {
    if (m < 1 || n < 1 || !(alpha > 0.0) || !(beta > 0.0)) {
        throw DomainError("divergence_classifier requires positive m, n, alpha, beta");
    }
    const double dm = m, dn = n;
    const double p = dm - 1.0 - (dm + dn) * alpha / (alpha + beta);
    const double q = dn - 1.0 - (dm + dn) * beta / (alpha + beta);
    constexpr double slack = 1e-12;
    const bool at_zero = p <= -1.0 + slack;
    const bool at_half_pi = q <= -1.0 + slack;
    if (at_zero && at_half_pi) return Divergence::Both;
    return at_zero ? Divergence::AtZero : Divergence::AtHalfPi;
}

// ---------------------------------------------------------------------------
// Phase-space quadrature
// ---------------------------------------------------------------------------

struct PhaseSpaceCheck {
    double closed_form = 0.0;
    double quadrature = 0.0;
    double relative_error = 0.0;
    /// Size of the quadrature's own error estimate, relative to its value.
    double convergence_estimate = 0.0;
};

namespace detail {

inline double relative_difference(double a, double b) {
    if (a == 0.0 && b == 0.0) return 0.0;
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

/// Half-widths of {V(x) < level} on the negative and positive half-lines.
inline std::pair<double, double> sublevel_extent(const HomogeneousPotential& v, double level) {
    auto reach = [&](double f) {
        if (!std::isfinite(f)) return 0.0;
        if (f == 0.0) throw DomainError("phase-space quadrature needs a confining potential");
        return std::pow(level / f, 1.0 / v.gamma);
    };
    return {reach(v.profile_1d[1]), reach(v.profile_1d[0])};
}

} // namespace detail

/// Compares the closed-form counting prediction with
///   iint 1(|xi|^2 + V(x) < lambda) dx dxi / (2 pi)^d.
/// d = 1: midpoint rule on an n x n phase-space grid; the error estimate is
/// the measure of cells the sublevel boundary passes through.
/// d = 2: the xi-integral is the ball volume pi (lambda - V)_+, and the x
/// integral uses an n x n midpoint grid with a Richardson error estimate.
inline PhaseSpaceCheck phase_space_counting_check(const HomogeneousPotential& v, double lambda,
                                                  std::size_t n = 1000) {
    PhaseSpaceCheck out;
    out.closed_form = weyl_prediction(v, lambda);
    if (!std::isfinite(out.closed_form)) throw DomainError("phase-space check needs a finite prediction");

    if (v.dim == 1) {
        auto [left, right] = detail::sublevel_extent(v, lambda);
        if (left + right == 0.0) {
            left = right = 1.0;
        }
        const double xi_max = std::sqrt(lambda);
        const double dx = (left + right) / static_cast<double>(n);
        const double dxi = 2.0 * xi_max / static_cast<double>(n);
        auto inside = [&](double x, double xi) { return xi * xi + v(x) < lambda; };
        std::size_t count = 0, boundary = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x0 = -left + dx * static_cast<double>(i);
            const double x = x0 + 0.5 * dx;
            for (std::size_t j = 0; j < n; ++j) {
                const double xi0 = -xi_max + dxi * static_cast<double>(j);
                if (inside(x, xi0 + 0.5 * dxi)) ++count;
                const bool c00 = inside(x0, xi0), c10 = inside(x0 + dx, xi0);
                const bool c01 = inside(x0, xi0 + dxi), c11 = inside(x0 + dx, xi0 + dxi);
                if (!(c00 == c10 && c10 == c01 && c01 == c11)) ++boundary;
            }
        }
        const double cell = dx * dxi / (2.0 * std::numbers::pi);
        out.quadrature = static_cast<double>(count) * cell;
        out.convergence_estimate =
            out.quadrature == 0.0 ? 0.0 : static_cast<double>(boundary) * cell / out.quadrature;
    } else {
        const double reach = box_for_level(v, lambda);
        auto integrate = [&](std::size_t nodes) {
            const double h = 2.0 * reach / static_cast<double>(nodes);
            double s = 0.0;
            for (std::size_t i = 0; i < nodes; ++i) {
                const double x = -reach + h * (static_cast<double>(i) + 0.5);
                for (std::size_t j = 0; j < nodes; ++j) {
                    const double y = -reach + h * (static_cast<double>(j) + 0.5);
                    s += std::max(0.0, lambda - v(x, y));
                }
            }
            return s * std::numbers::pi * h * h / (4.0 * std::numbers::pi * std::numbers::pi);
        };
        out.quadrature = integrate(n);
        const double coarse = integrate(n / 2);
        out.convergence_estimate = detail::relative_difference(out.quadrature, coarse);
    }
    out.relative_error = detail::relative_difference(out.closed_form, out.quadrature);
    return out;
}

/// Compares the closed-form heat prediction with
///   iint exp(-t(|xi|^2 + V(x))) dx dxi / (2 pi)^d
/// on a box where the integrand has decayed below e^{-40}; d = 1 only.
/// The error estimate is the Richardson difference against half resolution,
/// floored at 1e-12.
inline PhaseSpaceCheck phase_space_heat_check(const HomogeneousPotential& v, double t, std::size_t n = 1000) {
    if (v.dim != 1) throw DomainError("phase_space_heat_check supports d = 1");
    PhaseSpaceCheck out;
    out.closed_form = heat_weyl_prediction(v, t);
    if (!std::isfinite(out.closed_form)) throw DomainError("phase-space check needs a finite prediction");
    const double level = 40.0 / t;
    auto [left, right] = detail::sublevel_extent(v, level);
    if (left + right == 0.0) {
        left = right = 1.0;
    }
    const double xi_max = std::sqrt(level);
    auto integrate = [&](std::size_t nodes) {
        const double dx = (left + right) / static_cast<double>(nodes);
        const double dxi = 2.0 * xi_max / static_cast<double>(nodes);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) {
            const double x = -left + dx * (static_cast<double>(i) + 0.5);
            const double vx = v(x);
            for (std::size_t j = 0; j < nodes; ++j) {
                const double xi = -xi_max + dxi * (static_cast<double>(j) + 0.5);
                s += std::exp(-t * (xi * xi + vx));
            }
        }
        return s * dx * dxi / (2.0 * std::numbers::pi);
    };
    out.quadrature = integrate(n);
    out.convergence_estimate = std::max(detail::relative_difference(out.quadrature, integrate(n / 2)), 1e-12);
    out.relative_error = detail::relative_difference(out.closed_form, out.quadrature);
    return out;
}

// ---------------------------------------------------------------------------
// Exponent fitting
// ---------------------------------------------------------------------------

struct PowerFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// RMS of ln(value) - (slope ln(scale) + intercept).
    double residual = 0.0;
};

/// Least-squares line through (ln scale, ln value).
inline PowerFit exponent_fit(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 3) throw DomainError("exponent_fit needs at least 3 samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::vector<std::pair<double, double>> logs;
    logs.reserve(samples.size());
    for (const auto& [scale, value] : samples) {
        if (!(scale > 0.0) || !(value > 0.0)) throw DomainError("exponent_fit needs positive scales and values");
        logs.emplace_back(std::log(scale), std::log(value));
    }
    const double n = static_cast<double>(logs.size());
    for (const auto& [x, y] : logs) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0)) throw DomainError("exponent_fit needs at least two distinct scales");
    PowerFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double r2 = 0.0;
    for (const auto& [x, y] : logs) {
        const double r = y - (fit.slope * x + fit.intercept);
        r2 += r * r;
    }
    fit.residual = std::sqrt(r2 / n);
    return fit;
}

} // namespace pj
