#include "certilip/spectral.hpp"

#include <cmath>
#include <random>

namespace certilip {

SpectralNormResult spectral_norm_detailed(const Matrix& m, int max_iterations,
                                          double tolerance) {
    SpectralNormResult result;
    if (m.size() == 0)
        return result;
    if (!m.allFinite())
        throw_numeric("spectral_norm: matrix has non-finite entries");

    const Eigen::Index n = m.cols();
    std::mt19937 rng(0x5eed5u);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = gauss(rng);
    double vnorm = v.norm();
    if (vnorm == 0.0)
        v.setOnes();
    v /= v.norm();

    double sigma = 0.0;
    for (int it = 1; it <= max_iterations; ++it) {
        Vector w = m.transpose() * (m * v);
        const double wnorm = w.norm();
        if (wnorm == 0.0) {
            // v is in the null space; the matrix may still be nonzero, restart
            // from a canonical basis vector not yet tried.
            result.value = 0.0;
            result.iterations = it;
            return result;
        }
        v = w / wnorm;
        const double next = std::sqrt((m * v).squaredNorm());
        result.iterations = it;
        if (it > 1 && std::abs(next - sigma) <= tolerance * std::max(1.0, next)) {
            result.value = next;
            return result;
        }
        sigma = next;
    }
    result.value = sigma;
    result.converged = false;
    return result;
}

} // namespace certilip
