#pragma once

// Shared helpers for the test suite: a portable uniform draw (the standard
// distributions are implementation-defined, which would tie frozen
// expectations to one libstdc++ version) and random matrix factories.

#include <cstdint>
#include <random>

#include "bullwhip/matrix.hpp"

namespace testutil {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline bullwhip::Matrix random_symmetric(std::mt19937_64& rng, std::size_t n,
                                         double scale = 1.0) {
    bullwhip::Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = scale * uniform(rng, -1.0, 1.0);
            a(i, j) = v;
            a(j, i) = v;
        }
    return a;
}

// M^T M + I is comfortably positive definite.
inline bullwhip::Matrix random_pd(std::mt19937_64& rng, std::size_t n) {
    bullwhip::Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = uniform(rng, -1.0, 1.0);
    return m.transpose() * m + bullwhip::Matrix::identity(n);
}

}  // namespace testutil
