#include "certilip/verify.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

#include "certilip/attack.hpp"
#include "certilip/certify.hpp"
#include "certilip/oracle.hpp"
#include "certilip/random_instances.hpp"
#include "certilip/spectral.hpp"
#include "certilip/train.hpp"

namespace certilip {
namespace {

VerificationCheck check_solver(const std::string& name, Norm p, unsigned seed, int trials) {
    VerificationCheck check;
    check.name = name;
    check.trials = trials;
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dim(2, 6);
    for (int t = 0; t < trials; ++t) {
        const BoxLinearProblem problem = random_box_problem(rng, dim(rng));
        const BoxSolution fast = solve_box(problem, p);
        oracle::BoxOracleResult slow;
        switch (p) {
        case Norm::l1:
            slow = oracle::box_l1(problem);
            break;
        case Norm::l2:
            slow = oracle::box_l2(problem);
            break;
        case Norm::linf:
            slow = oracle::box_linf(problem);
            break;
        }
        if (fast.feasible != slow.feasible) {
            ++check.failures;
            continue;
        }
        if (!fast.feasible)
            continue;
        const double diff = std::abs(lp_norm(fast.delta, p) - slow.norm_value);
        check.worst = std::max(check.worst, diff);
        if (diff > 1e-8)
            ++check.failures;
    }
    return check;
}

VerificationCheck check_kernel_bound(unsigned seed, int trials, int samples) {
    VerificationCheck check;
    check.name = "kernel_bound_vs_sampling";
    check.trials = trials;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> radius_dist(0.0, 2.0);
    for (int t = 0; t < trials; ++t) {
        const GaussianKernelModel kernel = random_kernel_model(rng, 5, 3, 3, 1.0);
        const Model model(kernel);
        const Vector x = random_unit_box_point(rng, 3);
        const double radius = radius_dist(rng);
        const double bound = cross_lip_bound_kernel(kernel, x, 1, 0, radius);
        const double sampled =
            oracle::ball_max_gradient_difference(model, x, 1, 0, radius, samples, seed + t).value;
        const double violation = sampled - bound;
        check.worst = std::max(check.worst, violation);
        if (violation > 1e-9)
            ++check.failures;
    }
    return check;
}

VerificationCheck check_network_bound(unsigned seed, int trials, int samples) {
    VerificationCheck check;
    check.name = "network_bound_vs_sampling";
    check.trials = trials;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> radius_dist(0.0, 2.0);
    for (int t = 0; t < trials; ++t) {
        const OneHiddenLayerModel net = random_network_model(rng, 8, 4, 3, 10.0);
        const Model model(net);
        const Vector x = random_unit_box_point(rng, 4);
        const double radius = radius_dist(rng);
        const double bound = cross_lip_bound_nn(net, x, 2, 0, radius);
        const double sampled =
            oracle::ball_max_gradient_difference(model, x, 2, 0, radius, samples, seed + t).value;
        const double violation = sampled - bound;
        check.worst = std::max(check.worst, violation);
        if (violation > 1e-9)
            ++check.failures;
    }
    return check;
}

VerificationCheck check_spectral(unsigned seed, int trials) {
    VerificationCheck check;
    check.name = "spectral_norm_vs_jacobi";
    check.trials = trials;
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        Matrix m(12, 9);
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                m(r, c) = gauss(rng);
        const double fast = spectral_norm(m);
        const double slow = oracle::jacobi_spectral_norm(m);
        const double diff = std::abs(fast - slow);
        check.worst = std::max(check.worst, diff);
        if (diff > 1e-7)
            ++check.failures;
    }
    return check;
}

VerificationCheck check_gradients(unsigned seed, int trials) {
    VerificationCheck check;
    check.name = "analytic_vs_numeric_gradients";
    check.trials = trials;
    std::mt19937 rng(seed);
    for (int t = 0; t < trials; ++t) {
        Model model = [&]() -> Model {
            switch (t % 3) {
            case 0:
                return Model(random_linear_model(rng, 3, 5));
            case 1:
                return Model(random_kernel_model(rng, 4, 5, 3, 0.8));
            default:
                return Model(random_network_model(rng, 6, 5, 3, 10.0));
            }
        }();
        const Vector x = random_unit_box_point(rng, 5);
        const int target = t % 3;
        const Vector analytic = model.input_gradient(x, target);
        const Vector numeric = oracle::finite_diff_gradient(
            [&](const Vector& y) { return model.outputs(y)[target]; }, x, 1e-5);
        const double rel = (analytic - numeric).norm() / std::max(1e-12, analytic.norm());
        check.worst = std::max(check.worst, rel);
        if (rel > 1e-5)
            ++check.failures;
    }
    return check;
}

} // namespace

VerificationResult run_verification(unsigned seed, int trials) {
    if (trials < 1)
        throw_invalid("verification needs at least one trial");
    VerificationResult result;
    result.checks.push_back(check_solver("box_solver_l1_vs_oracle", Norm::l1, seed + 1, trials));
    result.checks.push_back(check_solver("box_solver_l2_vs_oracle", Norm::l2, seed + 2, trials));
    result.checks.push_back(
        check_solver("box_solver_linf_vs_oracle", Norm::linf, seed + 3, trials));
    const int bound_trials = std::max(1, trials / 10);
    result.checks.push_back(check_kernel_bound(seed + 4, bound_trials, 2000));
    result.checks.push_back(check_network_bound(seed + 5, bound_trials, 2000));
    result.checks.push_back(check_spectral(seed + 6, std::max(1, trials / 10)));
    result.checks.push_back(check_gradients(seed + 7, std::max(1, trials / 10)));
    return result;
}

std::string verification_to_json(const VerificationResult& result) {
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const VerificationCheck& c : result.checks)
        checks.push_back({{"name", c.name},
                          {"trials", c.trials},
                          {"failures", c.failures},
                          {"worst", c.worst}});
    nlohmann::ordered_json j{{"all_passed", result.all_passed()}, {"checks", checks}};
    return j.dump(2) + "\n";
}

} // namespace certilip
