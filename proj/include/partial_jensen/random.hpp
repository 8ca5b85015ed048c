#pragma once

// Seeded generators for property trials. Every trial gets its own engine,
// seeded from (master seed, trial index), so results never depend on how
// trials are scheduled.

#include <cstdint>
#include <random>

#include "linalg.hpp"

namespace pj {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng trial_rng(std::uint64_t master, std::uint64_t index) { return Rng(derive_seed(master, index)); }

inline Complex complex_gaussian(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

/// GUE-like sample (G + G*)/2 with complex Gaussian G, times `scale`.
inline HermitianOperator random_hermitian(std::size_t n, Rng& rng, double scale = 1.0) {
    Matrix g(n, n);
    for (auto& z : g.data()) z = complex_gaussian(rng);
    Matrix h = g + g.adjoint();
    h *= 0.5 * scale;
    return HermitianOperator(std::move(h));
}

/// Real symmetric sample, useful where the test wants real matrices.
inline HermitianOperator random_real_symmetric(std::size_t n, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix h(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double x = scale * normal(rng);
            h(i, j) = x;
            h(j, i) = x;
        }
    return HermitianOperator(std::move(h));
}

/// G G* / n: positive semidefinite.
inline HermitianOperator random_psd(std::size_t n, Rng& rng, double scale = 1.0) {
    Matrix g(n, n);
    for (auto& z : g.data()) z = complex_gaussian(rng);
    Matrix h = g * g.adjoint();
    h *= scale / static_cast<double>(n);
    return HermitianOperator(std::move(h));
}

inline Vector random_unit_vector(std::size_t n, Rng& rng) {
    Vector v(n);
    for (auto& z : v) z = complex_gaussian(rng);
    const double nv = norm(v);
    for (auto& z : v) z /= nv;
    return v;
}

} // namespace pj
