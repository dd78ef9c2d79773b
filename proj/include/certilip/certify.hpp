#pragma once

#include <string>
#include <vector>

#include "certilip/dataset.hpp"
#include "certilip/model.hpp"

namespace certilip {

// Backend used to bound the local cross-Lipschitz constant
// max_{y in B(x,R)} |grad f_c(y) - grad f_j(y)| in the guarantee denominator.
enum class BallBoundKind { linear_exact, kernel_ball, nn_ball, nn_global };

std::string backend_name(BallBoundKind kind);
BallBoundKind parse_backend(const std::string& name);
// Picks the natural local backend for a model family.
BallBoundKind default_backend(const Model& model);

// Closed-form extrema over the Euclidean ball B_2(x, R) of the two factors
// appearing in the Gaussian-kernel gradient inner product: the polynomial
// part <y - xr, y - xs> and the exponential product
// exp(-g|xr - y|^2) * exp(-g|xs - y|^2).
struct KernelBallExtrema {
    double inner_max = 0.0;
    double inner_min = 0.0;
    double exp_max = 0.0;
    double exp_min = 0.0;
};
KernelBallExtrema kernel_ball_extrema(const Vector& x, const Vector& xr, const Vector& xs,
                                      double width, double radius);

// Upper bounds on the local cross-Lipschitz constant for the two nonlinear
// families (Euclidean norm). Exact at radius 0. The square-root argument is
// clamped at zero before the root: the element-wise bound provably dominates
// the true squared norm, but cancellation can leave a tiny negative.
double cross_lip_bound_kernel(const GaussianKernelModel& model, const Vector& x, int j, int c,
                              double radius);
double cross_lip_bound_nn(const OneHiddenLayerModel& model, const Vector& x, int j, int c,
                          double radius);

// Radius-independent global bound |w_c - w_j|_2 * |U|_{2,2}.
double cross_lip_global_nn(const OneHiddenLayerModel& model, int j, int c);

struct TargetBoundReport {
    int target = 0;
    double gap = 0.0;   // f_c(x) - f_j(x), nonnegative at the predicted class
    double bound = 0.0; // denominator bound evaluated at r_star
    double ratio = 0.0; // gap / bound; +inf when the bound is exactly zero
};

struct GuaranteeReport {
    long long instance_id = 0;
    int predicted = 0;
    double guarantee_radius = 0.0;
    double r_star = 0.0;
    std::vector<TargetBoundReport> per_target;
    BallBoundKind backend = BallBoundKind::linear_exact;
    Norm p = Norm::l2;
};

struct GuaranteeOptions {
    double initial_radius = 1e-3;
    double relative_tolerance = 1e-4;
    int max_bisection_iterations = 60;
};

// Certified radius per Theorem-style two-sided construction: the bound
// ratio g(R) = min_j gap_j / bound_j(R) is non-increasing, so the optimum of
// min{g(R), R} sits at the crossing g(R) = R. The crossing is bracketed by
// doubling from initial_radius up to sqrt(d) and then bisected; backends with
// radius-independent bounds are evaluated in closed form instead.
GuaranteeReport guarantee(const Model& model, const Vector& x, BallBoundKind backend, Norm p,
                          const GuaranteeOptions& options = {});

// Exact minimal decision-changing distance for unconstrained linear models:
// min over j of gap_j / |w_c - w_j|_q with q dual to p.
double linear_guarantee(const LinearModel& model, const Vector& x, Norm p);

std::vector<GuaranteeReport> certify_dataset(const Model& model, const LabeledDataset& data,
                                             BallBoundKind backend, Norm p, int workers = 1,
                                             const GuaranteeOptions& options = {});

struct RatioEntry {
    Eigen::Index instance = 0;
    double local = 0.0;
    double global = 0.0;
    double ratio = 1.0; // global/local, clamped into (0, 1]; 1 when both are 0
};

struct RatioSummary {
    std::vector<RatioEntry> entries; // correctly classified instances only
    double mean_ratio = 0.0;
    Eigen::Index evaluated = 0;
    Eigen::Index misclassified = 0;
};

// Per-instance comparison of the ball-local and global guarantees for a
// one-hidden-layer model, averaged over correctly classified points.
RatioSummary local_global_ratio(const Model& model, const LabeledDataset& data, int workers = 1,
                                const GuaranteeOptions& options = {});

} // namespace certilip
