#pragma once

#include <cmath>

namespace certilip {

// Softplus family: smooth ReLU surrogate with adjustable steepness.
// softplus(z) = (1/steepness) * log(1 + exp(steepness * z)); its derivative is
// the logistic sigmoid of steepness * z. Both are evaluated in a shifted form
// so that |steepness * z| up to ~700 neither overflows nor loses the linear tail.

inline double softplus(double z, double steepness) {
    const double t = steepness * z;
    if (t > 0.0)
        return (t + std::log1p(std::exp(-t))) / steepness;
    return std::log1p(std::exp(t)) / steepness;
}

inline double softplus_prime(double z, double steepness) {
    const double t = steepness * z;
    if (t >= 0.0)
        return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// d/dz of softplus_prime; used by the regularizer's parameter gradient.
inline double softplus_second(double z, double steepness) {
    const double s = softplus_prime(z, steepness);
    return steepness * s * (1.0 - s);
}

} // namespace certilip
