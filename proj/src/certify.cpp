#include "certilip/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "certilip/activation.hpp"
#include "certilip/parallel.hpp"
#include "certilip/spectral.hpp"

namespace certilip {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string backend_name(BallBoundKind kind) {
    switch (kind) {
    case BallBoundKind::linear_exact:
        return "linear_exact";
    case BallBoundKind::kernel_ball:
        return "kernel_ball";
    case BallBoundKind::nn_ball:
        return "nn_ball";
    case BallBoundKind::nn_global:
        return "nn_global";
    }
    return "?";
}

BallBoundKind parse_backend(const std::string& name) {
    if (name == "linear_exact" || name == "linear")
        return BallBoundKind::linear_exact;
    if (name == "kernel_ball")
        return BallBoundKind::kernel_ball;
    if (name == "nn_ball")
        return BallBoundKind::nn_ball;
    if (name == "nn_global" || name == "global")
        return BallBoundKind::nn_global;
    throw_invalid("unknown bound backend '" + name + "'");
}

BallBoundKind default_backend(const Model& model) {
    switch (model.kind()) {
    case ModelKind::linear:
        return BallBoundKind::linear_exact;
    case ModelKind::kernel:
        return BallBoundKind::kernel_ball;
    case ModelKind::one_hidden_layer:
        return BallBoundKind::nn_ball;
    }
    throw_invalid("unknown model kind");
}

KernelBallExtrema kernel_ball_extrema(const Vector& x, const Vector& xr, const Vector& xs,
                                      double width, double radius) {
    if (radius < 0.0)
        throw_invalid("ball radius must be >= 0");
    const Vector dr = x - xr;
    const Vector ds = x - xs;
    const double ip = dr.dot(ds);
    const double s = (dr + ds).norm(); // |2x - xr - xs|
    const double m = std::min(0.5 * s, radius);
    const double dd = dr.squaredNorm() + ds.squaredNorm();

    KernelBallExtrema out;
    out.inner_max = ip + radius * s + radius * radius;
    out.inner_min = ip - m * s + m * m;
    out.exp_max = std::exp(-width * (dd - 2.0 * m * s + 2.0 * m * m));
    out.exp_min = std::exp(-width * (dd + 2.0 * radius * s + 2.0 * radius * radius));
    return out;
}

namespace {

// Per-instance tables for the kernel bound: everything except the radius.
struct KernelInstanceContext {
    Matrix inner;    // (r,s) -> <x - xr, x - xs>
    Matrix span;     // (r,s) -> |2x - xr - xs|
    Vector diff_sq;  // r -> |x - xr|^2
    double width = 1.0;

    KernelInstanceContext(const GaussianKernelModel& model, const Vector& x) {
        width = model.width;
        Matrix centered = (-model.anchors).rowwise() + x.transpose(); // row r = x - xr
        inner.noalias() = centered * centered.transpose();
        diff_sq = inner.diagonal();
        const Eigen::Index n = inner.rows();
        span.resize(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            span.row(r) = (diff_sq.array()[r] + diff_sq.array().transpose() +
                           2.0 * inner.row(r).array())
                              .max(0.0)
                              .sqrt();
    }

    // Squared-bound accumulation with the sign split over beta_r * beta_s.
    double bound(const Vector& beta, double radius) const {
        const Eigen::Index n = inner.rows();
        const double r2 = radius * radius;
        double total = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (beta[r] == 0.0)
                continue;
            const auto srow = span.row(r).array();
            const auto iprow = inner.row(r).array();
            const auto dd = diff_sq[r] + diff_sq.array().transpose();
            const auto m = (0.5 * srow).min(radius);
            const auto ip_max = iprow + radius * srow + r2;
            const auto ip_min = iprow - m * srow + m.square();
            const auto exp_max = (-width * (dd - 2.0 * m * srow + 2.0 * m.square())).exp();
            const auto exp_min = (-width * (dd + 2.0 * radius * srow + 2.0 * r2)).exp();
            const auto bb = beta[r] * beta.array().transpose();
            const auto same_sign = bb * (ip_max.max(0.0) * exp_max + ip_max.min(0.0) * exp_min);
            const auto mixed_sign = bb * (ip_min.max(0.0) * exp_min + ip_min.min(0.0) * exp_max);
            total += (bb >= 0.0).select(same_sign, mixed_sign).sum();
        }
        return 2.0 * width * std::sqrt(std::max(total, 0.0));
    }
};

// Per-instance tables for the network bound.
struct NetworkInstanceContext {
    Matrix beta_pos;  // positive part of dw_r * dw_m * <u_r, u_m>
    Matrix beta_neg;  // negative part
    Vector z;         // <u_r, x> (+ hidden bias)
    Vector row_norms; // |u_r|
    double steepness = 10.0;

    NetworkInstanceContext(const OneHiddenLayerModel& model, const Vector& x, int j, int c) {
        steepness = model.steepness;
        z = model.hidden_weights * x;
        if (model.hidden_bias.size() != 0)
            z += model.hidden_bias;
        row_norms = model.hidden_weights.rowwise().norm();
        const Vector dw =
            (model.output_weights.row(j) - model.output_weights.row(c)).transpose();
        Matrix beta = (dw * dw.transpose()).cwiseProduct(model.hidden_weights *
                                                         model.hidden_weights.transpose());
        beta_pos = beta.cwiseMax(0.0);
        beta_neg = beta.cwiseMin(0.0);
    }

    double bound(double radius) const {
        const Eigen::Index units = z.size();
        Vector upper(units), lower(units);
        for (Eigen::Index r = 0; r < units; ++r) {
            upper[r] = softplus_prime(z[r] + radius * row_norms[r], steepness);
            lower[r] = softplus_prime(z[r] - radius * row_norms[r], steepness);
        }
        const double total =
            upper.dot(beta_pos * upper) + lower.dot(beta_neg * lower);
        return std::sqrt(std::max(total, 0.0));
    }
};

} // namespace

double cross_lip_bound_kernel(const GaussianKernelModel& model, const Vector& x, int j, int c,
                              double radius) {
    if (j == c)
        throw_invalid("target class must differ from the predicted class");
    if (radius < 0.0)
        throw_invalid("ball radius must be >= 0");
    KernelInstanceContext ctx(model, x);
    const Vector beta =
        (model.coefficients.row(j) - model.coefficients.row(c)).transpose();
    return ctx.bound(beta, radius);
}

double cross_lip_bound_nn(const OneHiddenLayerModel& model, const Vector& x, int j, int c,
                          double radius) {
    if (j == c)
        throw_invalid("target class must differ from the predicted class");
    if (radius < 0.0)
        throw_invalid("ball radius must be >= 0");
    NetworkInstanceContext ctx(model, x, j, c);
    return ctx.bound(radius);
}

double cross_lip_global_nn(const OneHiddenLayerModel& model, int j, int c) {
    if (j == c)
        throw_invalid("target class must differ from the predicted class");
    const double dw_norm = (model.output_weights.row(j) - model.output_weights.row(c)).norm();
    return dw_norm * spectral_norm(model.hidden_weights);
}

namespace {

// Uniform interface over the four backends; slot i refers to targets[i].
class BoundEvaluator {
public:
    virtual ~BoundEvaluator() = default;
    virtual double bound(std::size_t slot, double radius) const = 0;
    virtual bool radius_independent() const { return false; }
};

class LinearEvaluator final : public BoundEvaluator {
public:
    LinearEvaluator(const LinearModel& model, int c, const std::vector<int>& targets, Norm p) {
        const Norm q = dual_norm(p);
        values_.reserve(targets.size());
        for (int j : targets)
            values_.push_back(
                lp_norm((model.weights.row(c) - model.weights.row(j)).transpose(), q));
    }
    double bound(std::size_t slot, double) const override { return values_[slot]; }
    bool radius_independent() const override { return true; }

private:
    std::vector<double> values_;
};

class GlobalNnEvaluator final : public BoundEvaluator {
public:
    GlobalNnEvaluator(const OneHiddenLayerModel& model, int c, const std::vector<int>& targets) {
        const double sigma = spectral_norm(model.hidden_weights);
        values_.reserve(targets.size());
        for (int j : targets)
            values_.push_back(
                (model.output_weights.row(c) - model.output_weights.row(j)).norm() * sigma);
    }
    double bound(std::size_t slot, double) const override { return values_[slot]; }
    bool radius_independent() const override { return true; }

private:
    std::vector<double> values_;
};

class KernelEvaluator final : public BoundEvaluator {
public:
    KernelEvaluator(const GaussianKernelModel& model, const Vector& x, int c,
                    const std::vector<int>& targets)
        : ctx_(model, x) {
        betas_.reserve(targets.size());
        for (int j : targets)
            betas_.push_back((model.coefficients.row(j) - model.coefficients.row(c)).transpose());
    }
    double bound(std::size_t slot, double radius) const override {
        return ctx_.bound(betas_[slot], radius);
    }

private:
    KernelInstanceContext ctx_;
    std::vector<Vector> betas_;
};

class NetworkEvaluator final : public BoundEvaluator {
public:
    NetworkEvaluator(const OneHiddenLayerModel& model, const Vector& x, int c,
                     const std::vector<int>& targets) {
        contexts_.reserve(targets.size());
        for (int j : targets)
            contexts_.emplace_back(model, x, j, c);
    }
    double bound(std::size_t slot, double radius) const override {
        return contexts_[slot].bound(radius);
    }

private:
    std::vector<NetworkInstanceContext> contexts_;
};

std::unique_ptr<BoundEvaluator> make_evaluator(const Model& model, const Vector& x,
                                               BallBoundKind backend, Norm p, int c,
                                               const std::vector<int>& targets) {
    switch (backend) {
    case BallBoundKind::linear_exact:
        if (!model.as_linear())
            throw_invalid("linear_exact backend requires a linear model");
        return std::make_unique<LinearEvaluator>(*model.as_linear(), c, targets, p);
    case BallBoundKind::kernel_ball:
        if (!model.as_kernel())
            throw_invalid("kernel_ball backend requires a kernel model");
        return std::make_unique<KernelEvaluator>(*model.as_kernel(), x, c, targets);
    case BallBoundKind::nn_ball:
        if (!model.as_network())
            throw_invalid("nn_ball backend requires a one-hidden-layer model");
        return std::make_unique<NetworkEvaluator>(*model.as_network(), x, c, targets);
    case BallBoundKind::nn_global:
        if (!model.as_network())
            throw_invalid("nn_global backend requires a one-hidden-layer model");
        return std::make_unique<GlobalNnEvaluator>(*model.as_network(), c, targets);
    }
    throw_invalid("unknown bound backend");
}

} // namespace

GuaranteeReport guarantee(const Model& model, const Vector& x, BallBoundKind backend, Norm p,
                          const GuaranteeOptions& options) {
    if (p != Norm::l2 && backend != BallBoundKind::linear_exact)
        throw_invalid("nonlinear backends support only the 2-norm");

    const Prediction pred = model.predict(x);
    if (!pred.margins.allFinite())
        throw_numeric("model produced non-finite outputs");
    const int c = pred.predicted;

    std::vector<int> targets;
    std::vector<double> gaps;
    for (int j = 0; j < model.num_classes(); ++j) {
        if (j == c)
            continue;
        targets.push_back(j);
        gaps.push_back(pred.margins[c] - pred.margins[j]);
    }

    GuaranteeReport report;
    report.instance_id = 0;
    report.predicted = c;
    report.backend = backend;
    report.p = p;

    const auto evaluator = make_evaluator(model, x, backend, p, c, targets);
    auto fill_targets = [&](double at_radius) {
        report.per_target.clear();
        for (std::size_t s = 0; s < targets.size(); ++s) {
            TargetBoundReport t;
            t.target = targets[s];
            t.gap = gaps[s];
            t.bound = evaluator->bound(s, at_radius);
            t.ratio = t.bound > 0.0 ? t.gap / t.bound : kInf;
            report.per_target.push_back(t);
        }
    };

    // Tied prediction: no certified ball at all.
    const double min_gap = *std::min_element(gaps.begin(), gaps.end());
    if (min_gap <= 0.0) {
        report.guarantee_radius = 0.0;
        report.r_star = 0.0;
        fill_targets(0.0);
        return report;
    }

    const double r_max = std::sqrt(static_cast<double>(x.size()));
    auto ratio_at = [&](double radius) {
        double g = kInf;
        for (std::size_t s = 0; s < targets.size(); ++s) {
            const double b = evaluator->bound(s, radius);
            if (b > 0.0)
                g = std::min(g, gaps[s] / b);
        }
        return g; // +inf when no target is reachable under the bound
    };

    if (evaluator->radius_independent()) {
        const double g = ratio_at(0.0);
        report.guarantee_radius = std::min(g, r_max);
        report.r_star = report.guarantee_radius;
        fill_targets(report.r_star);
        return report;
    }

    // Bracket the crossing of g(R) = R, then bisect. g is non-increasing in R
    // because every bound is non-decreasing, so min{g(R), R} peaks there.
    double lo = 0.0, hi = 0.0;
    double g_hi = 0.0;
    double radius = options.initial_radius;
    double g_here = ratio_at(radius);
    if (g_here < radius) {
        lo = 0.0;
        hi = radius;
        g_hi = g_here;
    } else {
        for (;;) {
            if (radius >= r_max) {
                report.guarantee_radius = std::min(g_here, r_max);
                report.r_star = radius;
                fill_targets(report.r_star);
                return report;
            }
            const double next = std::min(2.0 * radius, r_max);
            const double g_next = ratio_at(next);
            if (g_next < next) {
                lo = radius;
                hi = next;
                g_hi = g_next;
                break;
            }
            radius = next;
            g_here = g_next;
        }
    }

    for (int it = 0; it < options.max_bisection_iterations; ++it) {
        if (hi - lo <= options.relative_tolerance * hi)
            break;
        const double mid = 0.5 * (lo + hi);
        const double g_mid = ratio_at(mid);
        if (g_mid < mid) {
            hi = mid;
            g_hi = g_mid;
        } else {
            lo = mid;
        }
    }

    // Both lo (= min{g(lo), lo}) and g(hi) (= min{g(hi), hi}) are valid radii;
    // keep the larger. r_star reports where the bounds were last evaluated.
    report.guarantee_radius = std::max(lo, g_hi);
    report.r_star = hi;
    fill_targets(report.r_star);
    return report;
}

double linear_guarantee(const LinearModel& model, const Vector& x, Norm p) {
    const Model wrapped(model);
    const Prediction pred = wrapped.predict(x);
    const int c = pred.predicted;
    const Norm q = dual_norm(p);
    double best = kInf;
    for (int j = 0; j < wrapped.num_classes(); ++j) {
        if (j == c)
            continue;
        const double gap = pred.margins[c] - pred.margins[j];
        const double denom = lp_norm((model.weights.row(c) - model.weights.row(j)).transpose(), q);
        if (denom > 0.0)
            best = std::min(best, gap / denom);
        else if (gap <= 0.0)
            best = 0.0;
    }
    return best;
}

std::vector<GuaranteeReport> certify_dataset(const Model& model, const LabeledDataset& data,
                                             BallBoundKind backend, Norm p, int workers,
                                             const GuaranteeOptions& options) {
    data.validate();
    std::vector<GuaranteeReport> reports(static_cast<std::size_t>(data.size()));
    parallel_for_indexed(reports.size(), workers, [&](std::size_t i) {
        const Vector x = data.points.row(static_cast<Eigen::Index>(i)).transpose();
        reports[i] = guarantee(model, x, backend, p, options);
        reports[i].instance_id = static_cast<long long>(i);
    });
    return reports;
}

RatioSummary local_global_ratio(const Model& model, const LabeledDataset& data, int workers,
                                const GuaranteeOptions& options) {
    if (!model.as_network())
        throw_invalid("local/global comparison requires a one-hidden-layer model");
    data.validate();

    const std::size_t n = static_cast<std::size_t>(data.size());
    std::vector<RatioEntry> entries(n);
    std::vector<char> keep(n, 0);
    parallel_for_indexed(n, workers, [&](std::size_t i) {
        const Vector x = data.points.row(static_cast<Eigen::Index>(i)).transpose();
        if (model.predict(x).predicted != data.labels[i])
            return;
        keep[i] = 1;
        RatioEntry e;
        e.instance = static_cast<Eigen::Index>(i);
        e.local = guarantee(model, x, BallBoundKind::nn_ball, Norm::l2, options).guarantee_radius;
        e.global =
            guarantee(model, x, BallBoundKind::nn_global, Norm::l2, options).guarantee_radius;
        if (e.local <= 0.0 && e.global <= 0.0)
            e.ratio = 1.0; // degenerate instance, both guarantees empty
        else if (e.local <= 0.0)
            e.ratio = 1.0;
        else
            e.ratio = std::min(1.0, e.global / e.local);
        entries[i] = e;
    });

    RatioSummary summary;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!keep[i]) {
            ++summary.misclassified;
            continue;
        }
        summary.entries.push_back(entries[i]);
        total += entries[i].ratio;
        ++summary.evaluated;
    }
    summary.mean_ratio = summary.evaluated > 0 ? total / static_cast<double>(summary.evaluated) : 0.0;
    return summary;
}

} // namespace certilip
