#include <cmath>
#include <doctest.h>
#include <random>

#include "certilip/linalg.hpp"
#include "certilip/oracle.hpp"
#include "certilip/random_instances.hpp"

using namespace certilip;

namespace {

BoxLinearProblem make_problem(std::initializer_list<double> v, double gap,
                              std::initializer_list<double> x) {
    BoxLinearProblem p;
    p.direction.resize(static_cast<Eigen::Index>(v.size()));
    p.base_point.resize(static_cast<Eigen::Index>(x.size()));
    Eigen::Index i = 0;
    for (double value : v)
        p.direction[i++] = value;
    i = 0;
    for (double value : x)
        p.base_point[i++] = value;
    p.gap = gap;
    return p;
}

} // namespace

TEST_CASE("l2 oracle solves the single-coordinate case in closed form") {
    const auto result = oracle::box_l2(make_problem({2.0}, -1.0, {0.9}));
    REQUIRE(result.feasible);
    CHECK(result.delta[0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(result.norm_value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("l2 oracle finds the clamped optimum") {
    const auto result = oracle::box_l2(make_problem({3.0, 1.0}, -2.0, {0.5, 0.5}));
    REQUIRE(result.feasible);
    CHECK(result.delta[0] == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(result.delta[1] == doctest::Approx(-0.5).epsilon(1e-10));
}

TEST_CASE("oracle certificates re-evaluate to the reported value") {
    std::mt19937 rng(41);
    for (int t = 0; t < 200; ++t) {
        const BoxLinearProblem problem = random_box_problem(rng, 4);
        const auto l2 = oracle::box_l2(problem);
        if (l2.feasible) {
            CHECK(std::abs(lp_norm(l2.delta, Norm::l2) - l2.norm_value) <= 1e-12);
            CHECK(oracle::certificate_constraint_value(problem, l2) <= problem.gap + 1e-9);
            for (Eigen::Index r = 0; r < 4; ++r) {
                CHECK(l2.delta[r] >= -problem.base_point[r] - 1e-9);
                CHECK(l2.delta[r] <= 1.0 - problem.base_point[r] + 1e-9);
            }
        }
        const auto l1 = oracle::box_l1(problem);
        if (l1.feasible)
            CHECK(std::abs(lp_norm(l1.delta, Norm::l1) - l1.norm_value) <= 1e-12);
        const auto linf = oracle::box_linf(problem);
        if (linf.feasible)
            CHECK(lp_norm(linf.delta, Norm::linf) <= linf.norm_value + 1e-12);
    }
}

TEST_CASE("oracles refuse dimensions beyond the enumeration cap") {
    std::mt19937 rng(43);
    const BoxLinearProblem big = random_box_problem(rng, 9);
    CHECK_THROWS(oracle::box_l2(big));
    CHECK_THROWS(oracle::box_l1(big));
    CHECK_NOTHROW(oracle::box_linf(big)); // bisection scales to any d
}

TEST_CASE("linf oracle reaches 1e-12 resolution on t") {
    const auto result = oracle::box_linf(make_problem({3.0, 1.0}, -1.0, {0.5, 0.5}));
    REQUIRE(result.feasible);
    CHECK(result.norm_value == doctest::Approx(0.25).epsilon(1e-11));
}

TEST_CASE("ball sampling at radius zero returns the exact gradient difference") {
    std::mt19937 rng(47);
    const Model model(random_kernel_model(rng, 5, 3, 3, 1.0));
    const Vector x = random_unit_box_point(rng, 3);
    const auto r = oracle::ball_max_gradient_difference(model, x, 1, 0, 0.0, 50, 9);
    const double exact = (model.input_gradient(x, 1) - model.input_gradient(x, 0)).norm();
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-12));
    CHECK((r.argmax - x).norm() == 0.0);
}

TEST_CASE("ball sampling is monotone in the budget under a shared seed") {
    std::mt19937 rng(53);
    const Model model(random_network_model(rng, 6, 4, 3, 10.0));
    const Vector x = random_unit_box_point(rng, 4);
    double prev = 0.0;
    for (int budget : {10, 100, 1000}) {
        const double value =
            oracle::ball_max_gradient_difference(model, x, 1, 2, 0.7, budget, 99).value;
        CHECK(value >= prev);
        prev = value;
    }
}

TEST_CASE("ball samples stay inside the ball") {
    std::mt19937 rng(59);
    const Model model(random_network_model(rng, 4, 3, 2, 10.0));
    const Vector x = random_unit_box_point(rng, 3);
    const auto r = oracle::ball_max_gradient_difference(model, x, 1, 0, 0.4, 500, 5);
    CHECK((r.argmax - x).norm() <= 0.4 + 1e-12);
}

TEST_CASE("central differences are exact on quadratics") {
    Matrix a(3, 3);
    a << 2, 1, 0, 1, 3, 1, 0, 1, 4;
    Vector x(3);
    x << 0.3, -0.2, 0.9;
    const Vector numeric = oracle::finite_diff_gradient(
        [&](const Vector& y) { return 0.5 * y.dot(a * y); }, x, 1e-3);
    const Vector exact = a * x; // a is symmetric
    CHECK((numeric - exact).norm() < 1e-9);
}

TEST_CASE("jacobi spectral oracle handles rank-deficient and diagonal cases") {
    Matrix zero = Matrix::Zero(3, 3);
    CHECK(oracle::jacobi_spectral_norm(zero) == 0.0);
    Matrix diag = Matrix::Zero(3, 2);
    diag(0, 0) = 5.0;
    diag(1, 1) = 2.0;
    CHECK(oracle::jacobi_spectral_norm(diag) == doctest::Approx(5.0).epsilon(1e-12));
}
