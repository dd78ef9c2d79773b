#pragma once

#include "certilip/linalg.hpp"

namespace certilip {

struct SpectralNormResult {
    double value = 0.0;
    bool converged = true;
    int iterations = 0;
};

// Largest singular value via power iteration on M^T M. Deterministic seeded
// start vector; stops on relative change < 1e-9 or after max_iterations, in
// which case the best iterate is returned with converged = false.
SpectralNormResult spectral_norm_detailed(const Matrix& m, int max_iterations = 1000,
                                          double tolerance = 1e-9);

inline double spectral_norm(const Matrix& m) {
    return spectral_norm_detailed(m).value;
}

} // namespace certilip
