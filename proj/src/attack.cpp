#include "certilip/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "certilip/parallel.hpp"

namespace certilip {
namespace {

// Most negative achievable <v, delta> inside the box; the feasibility limit.
double box_extreme_value(const BoxLinearProblem& p) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < p.direction.size(); ++r) {
        const double v = p.direction[r];
        if (v > 0.0)
            total += v * (-p.base_point[r]);
        else if (v < 0.0)
            total += v * (1.0 - p.base_point[r]);
    }
    return total;
}

double saturated_delta(double v, double x) { return v > 0.0 ? -x : 1.0 - x; }

} // namespace

BoxSolution solve_box_l2(const BoxLinearProblem& problem) {
    problem.validate();
    const Eigen::Index d = problem.direction.size();
    const Vector& v = problem.direction;
    const Vector& x = problem.base_point;

    BoxSolution result;
    if (problem.gap >= 0.0) {
        result.feasible = true;
        result.delta = Vector::Zero(d);
        return result;
    }
    if (box_extreme_value(problem) > problem.gap)
        return result;

    // Saturation thresholds: coordinate r leaves the free set -lambda*v once
    // lambda passes gamma_r = max{(x_r-1)/v_r, x_r/v_r}. Ties break by index.
    std::vector<Eigen::Index> order;
    order.reserve(static_cast<std::size_t>(d));
    double free_sumsq = 0.0;
    for (Eigen::Index r = 0; r < d; ++r) {
        if (v[r] != 0.0) {
            order.push_back(r);
            free_sumsq += v[r] * v[r];
        }
    }
    auto threshold = [&](Eigen::Index r) {
        return std::max((x[r] - 1.0) / v[r], x[r] / v[r]);
    };
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double ta = threshold(a), tb = threshold(b);
        return ta < tb || (ta == tb && a < b);
    });

    double saturated = 0.0; // sum over saturated coordinates of v_r * delta_r
    double lambda = -1.0;
    for (std::size_t k = 0; k <= order.size(); ++k) {
        const double segment_end =
            k < order.size() ? threshold(order[k]) : std::numeric_limits<double>::infinity();
        if (free_sumsq > 0.0) {
            const double candidate = (saturated - problem.gap) / free_sumsq;
            if (candidate <= segment_end) {
                lambda = candidate;
                break;
            }
        }
        if (k == order.size())
            break;
        const Eigen::Index r = order[k];
        free_sumsq -= v[r] * v[r];
        saturated += v[r] * saturated_delta(v[r], x[r]);
    }

    result.feasible = true;
    result.delta.resize(d);
    if (lambda < 0.0) {
        // Rounding pushed the crossing past the last threshold; the fully
        // saturated point is the solution (gap equals the box extreme).
        for (Eigen::Index r = 0; r < d; ++r)
            result.delta[r] = v[r] == 0.0 ? 0.0 : saturated_delta(v[r], x[r]);
        return result;
    }
    for (Eigen::Index r = 0; r < d; ++r)
        result.delta[r] = std::max(-x[r], std::min(-lambda * v[r], 1.0 - x[r]));
    return result;
}

BoxSolution solve_box_l1(const BoxLinearProblem& problem) {
    problem.validate();
    const Eigen::Index d = problem.direction.size();
    const Vector& v = problem.direction;
    const Vector& x = problem.base_point;

    BoxSolution result;
    if (problem.gap >= 0.0) {
        result.feasible = true;
        result.delta = Vector::Zero(d);
        return result;
    }
    if (box_extreme_value(problem) > problem.gap)
        return result;

    // Spend the coordinates with the largest |v_r| first; each contributes
    // the most constraint progress per unit of |delta_r|.
    std::vector<Eigen::Index> order;
    order.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index r = 0; r < d; ++r)
        if (v[r] != 0.0)
            order.push_back(r);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double ma = std::abs(v[a]), mb = std::abs(v[b]);
        return ma > mb || (ma == mb && a < b);
    });

    result.feasible = true;
    result.delta = Vector::Zero(d);
    double reached = 0.0;
    for (const Eigen::Index r : order) {
        const double full = saturated_delta(v[r], x[r]);
        const double contribution = v[r] * full;
        if (reached + contribution <= problem.gap) {
            result.delta[r] = (problem.gap - reached) / v[r];
            return result;
        }
        result.delta[r] = full;
        reached += contribution;
    }
    // Loop exits only when gap == box extreme up to rounding.
    return result;
}

BoxSolution solve_box_linf(const BoxLinearProblem& problem) {
    problem.validate();
    const Eigen::Index d = problem.direction.size();
    const Vector& v = problem.direction;
    const Vector& x = problem.base_point;

    BoxSolution result;
    if (problem.gap >= 0.0) {
        result.feasible = true;
        result.delta = Vector::Zero(d);
        return result;
    }
    if (box_extreme_value(problem) > problem.gap)
        return result;

    // Breakpoints where a coordinate hits its box face as t grows.
    std::vector<Eigen::Index> order;
    order.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index r = 0; r < d; ++r)
        if (v[r] != 0.0)
            order.push_back(r);
    auto breakpoint = [&](Eigen::Index r) { return v[r] > 0.0 ? x[r] : 1.0 - x[r]; };
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double ba = breakpoint(a), bb = breakpoint(b);
        return ba < bb || (ba == bb && a < b);
    });

    double slope = 0.0; // d/dt of <v, delta(t)> while all listed coords move
    for (const Eigen::Index r : order)
        slope -= std::abs(v[r]);
    double value = 0.0;  // <v, delta(t_prev)>
    double t_prev = 0.0;
    double t = -1.0;
    for (std::size_t k = 0; k <= order.size(); ++k) {
        const double segment_end =
            k < order.size() ? breakpoint(order[k]) : std::numeric_limits<double>::infinity();
        if (slope < 0.0) {
            const double candidate = t_prev + (problem.gap - value) / slope;
            if (candidate <= segment_end) {
                t = candidate;
                break;
            }
        }
        if (k == order.size())
            break;
        const Eigen::Index r = order[k];
        value += slope * (segment_end - t_prev);
        slope += std::abs(v[r]);
        t_prev = segment_end;
    }
    if (t < 0.0)
        t = t_prev; // gap equals the saturated extreme up to rounding

    result.feasible = true;
    result.delta.resize(d);
    for (Eigen::Index r = 0; r < d; ++r) {
        if (v[r] > 0.0)
            result.delta[r] = std::max(-t, -x[r]);
        else if (v[r] < 0.0)
            result.delta[r] = std::min(t, 1.0 - x[r]);
        else
            result.delta[r] = 0.0;
    }
    return result;
}

BoxSolution solve_box(const BoxLinearProblem& problem, Norm p) {
    switch (p) {
    case Norm::l1:
        return solve_box_l1(problem);
    case Norm::l2:
        return solve_box_l2(problem);
    case Norm::linf:
        return solve_box_linf(problem);
    }
    throw_invalid("unknown norm order");
}

AdversarialSample attack_linearized(const Model& model, const Vector& x, Norm p) {
    const Prediction pred = model.predict(x);
    const int c = pred.predicted;
    const Vector grad_c = model.input_gradient(x, c);

    AdversarialSample best;
    best.p = p;
    best.norm_value = std::numeric_limits<double>::infinity();
    for (int j = 0; j < model.num_classes(); ++j) {
        if (j == c)
            continue;
        BoxLinearProblem problem;
        problem.direction = grad_c - model.input_gradient(x, j);
        problem.gap = pred.margins[j] - pred.margins[c];
        problem.base_point = x;
        const BoxSolution sol = solve_box(problem, p);
        if (!sol.feasible)
            continue;
        const double norm = lp_norm(sol.delta, p);
        if (norm < best.norm_value) {
            best.feasible = true;
            best.delta = sol.delta;
            best.norm_value = norm;
            best.target_class = j;
        }
    }
    if (best.feasible)
        best.achieved_class = model.predict(x + best.delta).predicted;
    else
        best.norm_value = 0.0;
    return best;
}

namespace {

struct TargetSearch {
    bool found = false;
    Vector delta;
    double norm = std::numeric_limits<double>::infinity();
    std::vector<MultiplierProbe> trace;
};

// Binary search over the gap multiplier for one fixed target. The bracket
// keeps lo non-flipping and hi flipping before bisection starts.
TargetSearch search_target(const Model& model, const Vector& x, int original, Norm p,
                           const BoxLinearProblem& base, const BoundarySearchOptions& opt) {
    TargetSearch out;
    Vector best_delta;
    auto probe = [&](double m) -> bool {
        BoxLinearProblem scaled = base;
        scaled.gap = base.gap * m;
        const BoxSolution sol = solve_box(scaled, p);
        bool flipped = false;
        if (sol.feasible)
            flipped = model.predict(x + sol.delta).predicted != original;
        out.trace.push_back({m, flipped});
        if (flipped)
            best_delta = sol.delta;
        return flipped;
    };

    double lo = opt.multiplier_lo;
    double hi = opt.multiplier_hi;
    bool hi_flips = false;
    if (probe(lo)) {
        // Flips already at the range bottom: push lo down until it stops.
        hi = lo;
        hi_flips = true;
        for (int i = 0; i < opt.expansion_limit; ++i) {
            lo *= 0.5;
            if (!probe(lo))
                break;
            hi = lo;
        }
        if (hi == lo) {
            // Never stopped flipping; accept the smallest probed multiplier.
            out.found = true;
            out.delta = best_delta;
            out.norm = lp_norm(out.delta, p);
            return out;
        }
    } else {
        hi_flips = probe(hi);
        for (int i = 0; !hi_flips && i < opt.expansion_limit; ++i) {
            lo = hi;
            hi *= 2.0;
            // Once the scaled gap is beyond the box extreme the solver stays
            // infeasible for every larger multiplier; expanding is pointless.
            BoxLinearProblem scaled = base;
            scaled.gap = base.gap * hi;
            if (!solve_box(scaled, p).feasible) {
                out.trace.push_back({hi, false});
                return out;
            }
            hi_flips = probe(hi);
        }
        if (!hi_flips)
            return out;
    }

    for (int it = 0; it < opt.bisection_iterations; ++it) {
        if (hi - lo <= 1e-12 * hi)
            break;
        const double mid = 0.5 * (lo + hi);
        if (probe(mid))
            hi = mid;
        else
            lo = mid;
    }
    out.found = true;
    out.delta = best_delta;
    out.norm = lp_norm(out.delta, p);
    return out;
}

} // namespace

AdversarialSample attack_boundary_search(const Model& model, const Vector& x, Norm p,
                                         const BoundarySearchOptions& options) {
    const Prediction pred = model.predict(x);
    const int c = pred.predicted;
    const Vector grad_c = model.input_gradient(x, c);

    AdversarialSample best;
    best.p = p;
    best.norm_value = std::numeric_limits<double>::infinity();
    for (int j = 0; j < model.num_classes(); ++j) {
        if (j == c)
            continue;
        BoxLinearProblem base;
        base.direction = grad_c - model.input_gradient(x, j);
        base.gap = pred.margins[j] - pred.margins[c];
        base.base_point = x;
        if (base.gap >= 0.0)
            continue; // tied output pair; scaling a zero gap cannot move it
        TargetSearch search = search_target(model, x, c, p, base, options);
        if (search.found && search.norm < best.norm_value) {
            best.feasible = true;
            best.delta = search.delta;
            best.norm_value = search.norm;
            best.target_class = j;
            best.gap_multiplier_trace = std::move(search.trace);
        }
    }
    if (best.feasible)
        best.achieved_class = model.predict(x + best.delta).predicted;
    else
        best.norm_value = 0.0;
    return best;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty())
        return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace

ResistanceSummary adversarial_resistance(const Model& model, const LabeledDataset& data, Norm p,
                                         int workers, std::vector<AdversarialSample>* per_instance,
                                         const BoundarySearchOptions& options) {
    data.validate();
    const std::size_t n = static_cast<std::size_t>(data.size());
    std::vector<AdversarialSample> samples(n);
    std::vector<char> correct(n, 0);

    parallel_for_indexed(n, workers, [&](std::size_t i) {
        const Vector x = data.points.row(static_cast<Eigen::Index>(i)).transpose();
        if (model.predict(x).predicted == data.labels[i])
            correct[i] = 1;
        // Misclassified instances are still attacked (their reports are
        // useful downstream) but stay out of the aggregates below.
        samples[i] = attack_boundary_search(model, x, p, options);
    });

    ResistanceSummary summary;
    std::vector<double> norms;
    for (std::size_t i = 0; i < n; ++i) {
        if (!correct[i]) {
            ++summary.misclassified;
            continue;
        }
        ++summary.evaluated;
        if (samples[i].feasible) {
            ++summary.flipped;
            norms.push_back(samples[i].norm_value);
        } else {
            ++summary.flip_failures;
        }
    }
    if (!norms.empty()) {
        summary.mean = std::accumulate(norms.begin(), norms.end(), 0.0) /
                       static_cast<double>(norms.size());
        std::sort(norms.begin(), norms.end());
        summary.median = quantile_sorted(norms, 0.5);
        summary.q25 = quantile_sorted(norms, 0.25);
        summary.q75 = quantile_sorted(norms, 0.75);
    }
    if (per_instance)
        *per_instance = std::move(samples);
    return summary;
}

} // namespace certilip
