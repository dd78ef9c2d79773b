#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "certilip/box_problem.hpp"
#include "certilip/linalg.hpp"
#include "certilip/model.hpp"

namespace certilip {
namespace oracle {

// Brute-force reference results. The certificate is enough to reproduce the
// value independently (a clamp pattern, or the sample attaining a maximum).
// These deliberately share no solver code with the attack/certify modules.

struct BoxOracleResult {
    bool feasible = false;
    double norm_value = 0.0;
    Vector delta;
    // Per-coordinate state: 0 free/fractional, -1 at the lower face (-x_r),
    // +1 at the upper face (1-x_r), 2 pinned at zero (l1 oracle only).
    std::vector<int> pattern;
    std::string method;
};

// Exact minimal-|.|_2 solution by enumerating all 3^d clamp patterns and
// solving the equality-constrained least-norm problem on each free set.
// Requires d <= 8.
BoxOracleResult box_l2(const BoxLinearProblem& problem);

// Exact minimal-|.|_1 solution: one coordinate may sit strictly inside its
// box range (LP basic-solution structure); the rest are at a face or zero.
// Requires d <= 8.
BoxOracleResult box_l1(const BoxLinearProblem& problem);

// Minimal-|.|_inf width t by bisection on the closed-form saturated value;
// 60 iterations give ~1e-12 on t in [0,1]. Any d.
BoxOracleResult box_linf(const BoxLinearProblem& problem, int iterations = 60);

// Re-evaluates <v, delta> and the box residual of a certificate.
double certificate_constraint_value(const BoxLinearProblem& problem, const BoxOracleResult& r);

struct BallMaxResult {
    double value = 0.0;
    Vector argmax;
};

// Sampled maximum of |grad f_j(y) - grad f_c(y)|_2 over the Euclidean ball
// B_2(x, R): uniform-in-ball samples plus half the budget pinned to the
// boundary sphere. Deterministic for a fixed seed; monotone in the budget.
BallMaxResult ball_max_gradient_difference(const Model& model, const Vector& x, int j, int c,
                                           double radius, int samples, unsigned seed = 1234);

// Central finite differences, one coordinate at a time.
Vector finite_diff_gradient(const std::function<double(const Vector&)>& fn, const Vector& x,
                            double step = 1e-5);

// Largest singular value through explicit eigenvalues of M^T M computed with
// cyclic Jacobi rotations; independent from the power-iteration path.
double jacobi_spectral_norm(const Matrix& m);

} // namespace oracle
} // namespace certilip
