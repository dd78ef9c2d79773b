#pragma once

#include <vector>

#include "certilip/box_problem.hpp"
#include "certilip/dataset.hpp"
#include "certilip/model.hpp"

namespace certilip {

// Exact solvers for the linearized box-constrained problem, one per norm.
// All run in O(d log d): a sort over saturation thresholds followed by a
// linear scan. Coordinates with direction 0 never move. A problem is
// infeasible exactly when even the box-extreme point leaves <v, delta>
// above the gap.
BoxSolution solve_box_l2(const BoxLinearProblem& problem);
BoxSolution solve_box_l1(const BoxLinearProblem& problem);
BoxSolution solve_box_linf(const BoxLinearProblem& problem);

BoxSolution solve_box(const BoxLinearProblem& problem, Norm p);

struct MultiplierProbe {
    double multiplier;
    bool flipped;
};

struct AdversarialSample {
    Vector delta;
    double norm_value = 0.0;
    Norm p = Norm::l2;
    int target_class = -1;
    int achieved_class = -1;
    bool feasible = false;
    std::vector<MultiplierProbe> gap_multiplier_trace;
};

// One-shot linearization at x: per target j solve with direction
// grad f_c(x) - grad f_j(x) and gap f_j(x) - f_c(x); keep the feasible
// solution of minimal norm. Exact for linear models.
AdversarialSample attack_linearized(const Model& model, const Vector& x, Norm p);

struct BoundarySearchOptions {
    double multiplier_lo = 0.25;
    double multiplier_hi = 16.0;
    int bisection_iterations = 40;
    int expansion_limit = 24; // doublings/halvings allowed past the initial range
};

// Scales the linearized gap by a multiplier and binary-searches for the
// smallest multiplier whose solver output flips the true model prediction.
// The linearization stays frozen at x; every probe is recorded in the trace.
AdversarialSample attack_boundary_search(const Model& model, const Vector& x, Norm p,
                                         const BoundarySearchOptions& options = {});

struct ResistanceSummary {
    Eigen::Index evaluated = 0;     // correctly classified instances attacked
    Eigen::Index misclassified = 0; // skipped
    Eigen::Index flipped = 0;
    Eigen::Index flip_failures = 0;
    double mean = 0.0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
};

// Boundary-search attack over every correctly classified instance,
// aggregated. Work fans out over `workers` threads; results are reduced in
// input order, so the summary is independent of the thread count.
ResistanceSummary adversarial_resistance(const Model& model, const LabeledDataset& data, Norm p,
                                         int workers = 1,
                                         std::vector<AdversarialSample>* per_instance = nullptr,
                                         const BoundarySearchOptions& options = {});

} // namespace certilip
