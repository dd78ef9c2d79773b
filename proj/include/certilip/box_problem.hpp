#pragma once

#include "certilip/linalg.hpp"

namespace certilip {

// Linearized decision-boundary crossing problem under box constraints:
//   minimize |delta|_p  subject to  <direction, delta> <= gap,
//   0 <= base_point + delta <= 1 (component-wise).
// direction is grad f_c(x) - grad f_j(x); gap is f_j(x) - f_c(x), which is
// negative whenever the pair is posed from a genuine prediction.
struct BoxLinearProblem {
    Vector direction;
    double gap = 0.0;
    Vector base_point;

    void validate() const {
        if (direction.size() != base_point.size())
            throw_dimension("direction and base point lengths differ");
        if (direction.size() == 0)
            throw_invalid("problem dimension must be >= 1");
        if (!direction.allFinite() || !std::isfinite(gap))
            throw_invalid("problem data must be finite");
    }
};

struct BoxSolution {
    bool feasible = false;
    Vector delta; // empty when infeasible
};

} // namespace certilip
