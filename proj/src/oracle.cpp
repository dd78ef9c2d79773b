#include "certilip/oracle.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace certilip {
namespace oracle {
namespace {

constexpr double kTol = 1e-11;

// Most negative achievable <v, delta> inside the box.
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

void check_dim_cap(const BoxLinearProblem& p, Eigen::Index cap) {
    if (p.direction.size() > cap)
        throw_invalid("enumeration oracle supports d <= " + std::to_string(cap));
}

} // namespace

BoxOracleResult box_l2(const BoxLinearProblem& problem) {
    problem.validate();
    check_dim_cap(problem, 8);
    const Eigen::Index d = problem.direction.size();
    const Vector& v = problem.direction;
    const Vector& x = problem.base_point;

    BoxOracleResult best;
    best.method = "clamp-pattern enumeration";
    best.pattern.assign(static_cast<std::size_t>(d), 0);

    if (problem.gap >= 0.0) {
        best.feasible = true;
        best.delta = Vector::Zero(d);
        best.norm_value = 0.0;
        return best;
    }
    if (box_extreme_value(problem) > problem.gap + kTol)
        return best; // infeasible

    best.feasible = true;
    best.norm_value = std::numeric_limits<double>::infinity();

    std::vector<int> pattern(static_cast<std::size_t>(d), 0);
    long total = 1;
    for (Eigen::Index i = 0; i < d; ++i)
        total *= 3;

    for (long code = 0; code < total; ++code) {
        long rem = code;
        for (Eigen::Index r = 0; r < d; ++r) {
            pattern[static_cast<std::size_t>(r)] = static_cast<int>(rem % 3) - 1; // -1, 0, +1
            rem /= 3;
        }
        double fixed = 0.0;
        double free_sumsq = 0.0;
        for (Eigen::Index r = 0; r < d; ++r) {
            if (pattern[static_cast<std::size_t>(r)] == -1)
                fixed += v[r] * (-x[r]);
            else if (pattern[static_cast<std::size_t>(r)] == +1)
                fixed += v[r] * (1.0 - x[r]);
            else
                free_sumsq += v[r] * v[r];
        }

        Vector delta(d);
        if (free_sumsq > 0.0) {
            const double mu = (problem.gap - fixed) / free_sumsq;
            if (mu > kTol)
                continue; // multiplier sign: lambda = -mu must be >= 0
            bool ok = true;
            for (Eigen::Index r = 0; r < d && ok; ++r) {
                switch (pattern[static_cast<std::size_t>(r)]) {
                case -1:
                    delta[r] = -x[r];
                    break;
                case +1:
                    delta[r] = 1.0 - x[r];
                    break;
                default:
                    delta[r] = mu * v[r];
                    ok = delta[r] >= -x[r] - kTol && delta[r] <= 1.0 - x[r] + kTol;
                }
            }
            if (!ok)
                continue;
        } else {
            if (std::abs(fixed - problem.gap) > kTol)
                continue; // no free capacity to meet the constraint exactly
            for (Eigen::Index r = 0; r < d; ++r)
                delta[r] = pattern[static_cast<std::size_t>(r)] == -1  ? -x[r]
                           : pattern[static_cast<std::size_t>(r)] == 1 ? 1.0 - x[r]
                                                                       : 0.0;
        }
        const double norm = delta.norm();
        if (norm < best.norm_value) {
            best.norm_value = norm;
            best.delta = delta;
            best.pattern = pattern;
        }
    }
    return best;
}

BoxOracleResult box_l1(const BoxLinearProblem& problem) {
    problem.validate();
    check_dim_cap(problem, 8);
    const Eigen::Index d = problem.direction.size();
    const Vector& v = problem.direction;
    const Vector& x = problem.base_point;

    BoxOracleResult best;
    best.method = "one-fractional-coordinate enumeration";
    best.pattern.assign(static_cast<std::size_t>(d), 2);

    if (problem.gap >= 0.0) {
        best.feasible = true;
        best.delta = Vector::Zero(d);
        best.norm_value = 0.0;
        return best;
    }
    if (box_extreme_value(problem) > problem.gap + kTol)
        return best;

    best.feasible = true;
    best.norm_value = std::numeric_limits<double>::infinity();

    long total = 1;
    for (Eigen::Index i = 0; i + 1 < d; ++i)
        total *= 3;

    // States for the non-fractional coordinates: 2 pinned at zero, -1 lower
    // face, +1 upper face. frac == d means no fractional coordinate at all.
    std::vector<int> pattern(static_cast<std::size_t>(d), 2);
    for (Eigen::Index frac = 0; frac <= d; ++frac) {
        const bool has_frac = frac < d;
        if (has_frac && v[frac] == 0.0)
            continue;
        const long combos = has_frac ? total : total * 3;
        for (long code = 0; code < combos; ++code) {
            long rem = code;
            for (Eigen::Index r = 0; r < d; ++r) {
                if (r == frac) {
                    pattern[static_cast<std::size_t>(r)] = 0;
                    continue;
                }
                const int state = static_cast<int>(rem % 3);
                rem /= 3;
                pattern[static_cast<std::size_t>(r)] = state == 0 ? 2 : (state == 1 ? -1 : +1);
            }
            double fixed = 0.0;
            Vector delta = Vector::Zero(d);
            for (Eigen::Index r = 0; r < d; ++r) {
                if (r == frac)
                    continue;
                if (pattern[static_cast<std::size_t>(r)] == -1)
                    delta[r] = -x[r];
                else if (pattern[static_cast<std::size_t>(r)] == +1)
                    delta[r] = 1.0 - x[r];
                fixed += v[r] * delta[r];
            }
            if (has_frac) {
                const double df = (problem.gap - fixed) / v[frac];
                if (df < -x[frac] - kTol || df > 1.0 - x[frac] + kTol)
                    continue;
                delta[frac] = df;
            } else if (std::abs(fixed - problem.gap) > kTol) {
                continue;
            }
            const double norm = delta.lpNorm<1>();
            if (norm < best.norm_value) {
                best.norm_value = norm;
                best.delta = delta;
                best.pattern = pattern;
                if (has_frac)
                    best.pattern[static_cast<std::size_t>(frac)] = 0;
            }
        }
    }
    return best;
}

BoxOracleResult box_linf(const BoxLinearProblem& problem, int iterations) {
    problem.validate();
    const Eigen::Index d = problem.direction.size();
    const Vector& v = problem.direction;
    const Vector& x = problem.base_point;

    // Closed-form most-negative <v, delta> when |delta|_inf <= t.
    auto saturated = [&](double t) {
        double total = 0.0;
        for (Eigen::Index r = 0; r < d; ++r) {
            if (v[r] > 0.0)
                total += v[r] * std::max(-t, -x[r]);
            else if (v[r] < 0.0)
                total += v[r] * std::min(t, 1.0 - x[r]);
        }
        return total;
    };
    auto delta_at = [&](double t) {
        Vector delta = Vector::Zero(d);
        for (Eigen::Index r = 0; r < d; ++r) {
            if (v[r] > 0.0)
                delta[r] = std::max(-t, -x[r]);
            else if (v[r] < 0.0)
                delta[r] = std::min(t, 1.0 - x[r]);
        }
        return delta;
    };

    BoxOracleResult result;
    result.method = "bisection";
    result.pattern.assign(static_cast<std::size_t>(d), 0);
    if (problem.gap >= 0.0) {
        result.feasible = true;
        result.delta = Vector::Zero(d);
        result.norm_value = 0.0;
        return result;
    }
    if (saturated(1.0) > problem.gap + kTol)
        return result;

    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (saturated(mid) <= problem.gap)
            hi = mid;
        else
            lo = mid;
    }
    result.feasible = true;
    result.delta = delta_at(hi);
    result.norm_value = hi;
    return result;
}

double certificate_constraint_value(const BoxLinearProblem& problem, const BoxOracleResult& r) {
    if (!r.feasible)
        throw_invalid("no certificate on an infeasible result");
    return problem.direction.dot(r.delta);
}

BallMaxResult ball_max_gradient_difference(const Model& model, const Vector& x, int j, int c,
                                           double radius, int samples, unsigned seed) {
    if (samples < 1)
        throw_invalid("sample budget must be >= 1");
    if (radius < 0.0)
        throw_invalid("radius must be >= 0");
    const Eigen::Index d = x.size();
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    BallMaxResult best;
    best.argmax = x;
    best.value = (model.input_gradient(x, j) - model.input_gradient(x, c)).norm();

    for (int i = 1; i < samples; ++i) {
        Vector dir(d);
        for (Eigen::Index k = 0; k < d; ++k)
            dir[k] = gauss(rng);
        const double u = unif(rng);
        const double dn = dir.norm();
        if (dn == 0.0)
            continue;
        // Alternate boundary / interior so a larger budget extends the stream.
        const double r = (i % 2 == 1) ? radius
                                      : radius * std::pow(u, 1.0 / static_cast<double>(d));
        const Vector y = x + (r / dn) * dir;
        const double val = (model.input_gradient(y, j) - model.input_gradient(y, c)).norm();
        if (val > best.value) {
            best.value = val;
            best.argmax = y;
        }
    }
    return best;
}

Vector finite_diff_gradient(const std::function<double(const Vector&)>& fn, const Vector& x,
                            double step) {
    if (step <= 0.0)
        throw_invalid("finite-difference step must be positive");
    Vector grad(x.size());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + step;
        const double up = fn(probe);
        probe[i] = x[i] - step;
        const double down = fn(probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

double jacobi_spectral_norm(const Matrix& m) {
    Matrix a = m.transpose() * m; // symmetric PSD
    const Eigen::Index n = a.rows();
    if (n == 0)
        return 0.0;
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return 0.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (std::sqrt(off) < 1e-14 * scale)
            break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double cos = 1.0 / std::sqrt(t * t + 1.0);
                const double sin = t * cos;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = cos * akp - sin * akq;
                    a(k, q) = sin * akp + cos * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = cos * apk - sin * aqk;
                    a(q, k) = sin * apk + cos * aqk;
                }
            }
        }
    }
    double largest = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        largest = std::max(largest, a(i, i));
    return std::sqrt(std::max(0.0, largest));
}

} // namespace oracle
} // namespace certilip
