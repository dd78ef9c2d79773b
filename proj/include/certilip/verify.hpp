#pragma once

#include <string>
#include <vector>

namespace certilip {

struct VerificationCheck {
    std::string name;
    int trials = 0;
    int failures = 0;
    double worst = 0.0; // largest discrepancy (or violation) observed
};

struct VerificationResult {
    std::vector<VerificationCheck> checks;
    bool all_passed() const {
        for (const auto& c : checks)
            if (c.failures != 0)
                return false;
        return true;
    }
};

// Randomized spot checks of the fast paths against the independent oracles:
// box solvers vs enumeration/bisection, ball bounds vs sampled maxima,
// power iteration vs Jacobi eigenvalues, analytic vs numeric gradients.
VerificationResult run_verification(unsigned seed, int trials);

std::string verification_to_json(const VerificationResult& result);

} // namespace certilip
