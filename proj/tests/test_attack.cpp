#include <cmath>
#include <doctest.h>
#include <random>

#include "certilip/attack.hpp"
#include "certilip/certify.hpp"
#include "certilip/oracle.hpp"
#include "certilip/random_instances.hpp"
#include "certilip/reports.hpp"

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

bool inside_box(const BoxLinearProblem& p, const Vector& delta, double tol = 1e-12) {
    for (Eigen::Index r = 0; r < delta.size(); ++r) {
        if (delta[r] < -p.base_point[r] - tol || delta[r] > 1.0 - p.base_point[r] + tol)
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("l2 solver: interior, clamped and infeasible cases") {
    SUBCASE("interior solution, no clamping") {
        const auto s = solve_box_l2(make_problem({1.0, 0.0}, -0.5, {0.5, 0.5}));
        REQUIRE(s.feasible);
        CHECK(s.delta[0] == doctest::Approx(-0.5).epsilon(1e-12));
        CHECK(s.delta[1] == 0.0);
        CHECK(lp_norm(s.delta, Norm::l2) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("first coordinate clamps at the lower face") {
        const auto s = solve_box_l2(make_problem({3.0, 1.0}, -2.0, {0.5, 0.5}));
        REQUIRE(s.feasible);
        CHECK(s.delta[0] == doctest::Approx(-0.5).epsilon(1e-10));
        CHECK(s.delta[1] == doctest::Approx(-0.5).epsilon(1e-10));
    }
    SUBCASE("gap beyond the box extreme is infeasible") {
        const auto s = solve_box_l2(make_problem({1.0, 0.0}, -2.0, {0.5, 0.5}));
        CHECK(!s.feasible);
    }
}

TEST_CASE("l1 solver examples") {
    SUBCASE("single fractional coordinate on the strongest direction") {
        const auto s = solve_box_l1(make_problem({3.0, 1.0}, -1.0, {0.5, 0.5}));
        REQUIRE(s.feasible);
        CHECK(s.delta[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
        CHECK(s.delta[1] == 0.0);
    }
    SUBCASE("gap already satisfied gives the zero perturbation") {
        const auto s = solve_box_l1(make_problem({1.0, 1.0}, 0.0, {0.5, 0.5}));
        REQUIRE(s.feasible);
        CHECK(s.delta.norm() == 0.0);
    }
    SUBCASE("saturation then fractional fill, checked against the oracle") {
        const auto problem = make_problem({1.0, -1.0}, -1.2, {0.9, 0.9});
        const auto s = solve_box_l1(problem);
        const auto o = oracle::box_l1(problem);
        REQUIRE(s.feasible);
        REQUIRE(o.feasible);
        CHECK(lp_norm(s.delta, Norm::l1) == doctest::Approx(o.norm_value).epsilon(1e-12));
        CHECK(lp_norm(s.delta, Norm::l1) == doctest::Approx(1.2).epsilon(1e-12));
    }
}

TEST_CASE("linf solver examples") {
    SUBCASE("uniform width across both coordinates") {
        const auto s = solve_box_linf(make_problem({3.0, 1.0}, -1.0, {0.5, 0.5}));
        REQUIRE(s.feasible);
        CHECK(s.delta[0] == doctest::Approx(-0.25).epsilon(1e-12));
        CHECK(s.delta[1] == doctest::Approx(-0.25).epsilon(1e-12));
    }
    SUBCASE("single coordinate ending exactly on the box face") {
        const auto s = solve_box_linf(make_problem({1.0}, -0.5, {0.5}));
        REQUIRE(s.feasible);
        CHECK(s.delta[0] == doctest::Approx(-0.5).epsilon(1e-12));
    }
    SUBCASE("zero gap gives zero width") {
        const auto s = solve_box_linf(make_problem({2.0, -1.0}, 0.0, {0.3, 0.3}));
        REQUIRE(s.feasible);
        CHECK(s.delta.norm() == 0.0);
    }
}

TEST_CASE("solvers agree with their oracles on random problems") {
    std::mt19937 rng(61);
    std::uniform_int_distribution<int> dim(2, 6);
    int feasible_seen = 0, infeasible_seen = 0;
    for (int t = 0; t < 400; ++t) {
        const BoxLinearProblem problem = random_box_problem(rng, dim(rng));

        const auto fast2 = solve_box_l2(problem);
        const auto slow2 = oracle::box_l2(problem);
        REQUIRE(fast2.feasible == slow2.feasible);
        if (fast2.feasible)
            CHECK(std::abs(lp_norm(fast2.delta, Norm::l2) - slow2.norm_value) <= 1e-8);

        const auto fast1 = solve_box_l1(problem);
        const auto slow1 = oracle::box_l1(problem);
        REQUIRE(fast1.feasible == slow1.feasible);
        if (fast1.feasible)
            CHECK(std::abs(lp_norm(fast1.delta, Norm::l1) - slow1.norm_value) <= 1e-8);

        const auto fastInf = solve_box_linf(problem);
        const auto slowInf = oracle::box_linf(problem);
        REQUIRE(fastInf.feasible == slowInf.feasible);
        if (fastInf.feasible)
            CHECK(std::abs(lp_norm(fastInf.delta, Norm::linf) - slowInf.norm_value) <= 1e-8);

        fast2.feasible ? ++feasible_seen : ++infeasible_seen;
    }
    // The generator must exercise both verdicts.
    CHECK(feasible_seen > 50);
    CHECK(infeasible_seen > 50);
}

TEST_CASE("every returned delta satisfies the box and the gap constraint") {
    std::mt19937 rng(67);
    for (int t = 0; t < 300; ++t) {
        const BoxLinearProblem problem = random_box_problem(rng, 5);
        for (Norm p : {Norm::l1, Norm::l2, Norm::linf}) {
            const auto s = solve_box(problem, p);
            if (!s.feasible)
                continue;
            CHECK(inside_box(problem, s.delta));
            CHECK(problem.direction.dot(s.delta) <= problem.gap + 1e-9);
        }
    }
}

TEST_CASE("solver verdict matches the box-extreme feasibility rule") {
    std::mt19937 rng(71);
    for (int t = 0; t < 300; ++t) {
        const BoxLinearProblem problem = random_box_problem(rng, 4);
        double extreme = 0.0;
        for (Eigen::Index r = 0; r < 4; ++r) {
            if (problem.direction[r] > 0.0)
                extreme -= problem.direction[r] * problem.base_point[r];
            else
                extreme += problem.direction[r] * (1.0 - problem.base_point[r]);
        }
        const bool should_be_feasible = problem.gap >= 0.0 || extreme <= problem.gap;
        for (Norm p : {Norm::l1, Norm::l2, Norm::linf})
            CHECK(solve_box(problem, p).feasible == should_be_feasible);
    }
}

TEST_CASE("scaling direction and gap together leaves the solution unchanged") {
    std::mt19937 rng(73);
    for (int t = 0; t < 50; ++t) {
        const BoxLinearProblem problem = random_box_problem(rng, 5);
        BoxLinearProblem scaled = problem;
        scaled.direction *= 37.5;
        scaled.gap *= 37.5;
        for (Norm p : {Norm::l1, Norm::l2, Norm::linf}) {
            const auto a = solve_box(problem, p);
            const auto b = solve_box(scaled, p);
            REQUIRE(a.feasible == b.feasible);
            if (a.feasible)
                CHECK((a.delta - b.delta).lpNorm<Eigen::Infinity>() <= 1e-9);
        }
    }
}

TEST_CASE("no solver beats another inside that solver's own norm") {
    std::mt19937 rng(79);
    for (int t = 0; t < 100; ++t) {
        const BoxLinearProblem problem = random_box_problem(rng, 5);
        const auto s1 = solve_box_l1(problem);
        const auto s2 = solve_box_l2(problem);
        const auto sInf = solve_box_linf(problem);
        if (!s1.feasible)
            continue;
        for (Norm own : {Norm::l1, Norm::l2, Norm::linf}) {
            const Vector& owner = own == Norm::l1   ? s1.delta
                                  : own == Norm::l2 ? s2.delta
                                                    : sInf.delta;
            for (const auto* other : {&s1, &s2, &sInf})
                CHECK(lp_norm(owner, own) <= lp_norm(other->delta, own) + 1e-9);
        }
    }
}

TEST_CASE("linearized attack on a linear 2-class model is the exact boundary projection") {
    LinearModel lin;
    lin.weights.resize(2, 2);
    lin.weights << 1, 0, 0, 1;
    Model model(lin);
    Vector x(2);
    x << 0.75, 0.25;

    const AdversarialSample sample = attack_linearized(model, x, Norm::l2);
    REQUIRE(sample.feasible);
    CHECK(sample.target_class == 1);
    CHECK(sample.norm_value == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(sample.delta[0] == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(sample.delta[1] == doctest::Approx(0.25).epsilon(1e-12));

    // Nudging past the boundary flips the decision.
    Vector dir(2);
    dir << -1, 1;
    const Vector beyond = x + sample.delta + 1e-9 * dir;
    CHECK(model.predict(beyond).predicted == 1);
}

TEST_CASE("linearized attack norm equals the exact linear guarantee at interior optima") {
    std::mt19937 rng(83);
    int interior_cases = 0;
    for (int t = 0; t < 200 && interior_cases < 60; ++t) {
        LinearModel lin = random_linear_model(rng, 3, 4);
        lin.weights *= 4.0; // keep boundary distances small
        Model model(lin);
        const Vector x = 0.5 * Vector::Ones(4) + 0.2 * (random_unit_box_point(rng, 4) -
                                                        0.5 * Vector::Ones(4));
        for (Norm p : {Norm::l1, Norm::l2, Norm::linf}) {
            const AdversarialSample sample = attack_linearized(model, x, p);
            if (!sample.feasible)
                continue;
            if (lp_norm(sample.delta, Norm::linf) > 0.2)
                continue; // a box face may be active; skip non-interior cases
            const double exact = linear_guarantee(lin, x, p);
            CHECK(sample.norm_value == doctest::Approx(exact).epsilon(1e-9));
            ++interior_cases;
        }
    }
    CHECK(interior_cases >= 60);
}

TEST_CASE("identical class rows with a bias gap make that target infeasible") {
    LinearModel lin;
    lin.weights.resize(2, 2);
    lin.weights << 0.5, 0.5, 0.5, 0.5;
    lin.bias.resize(2);
    lin.bias << 1.0, 0.0;
    Model model(lin);
    const AdversarialSample sample = attack_linearized(model, Vector::Constant(2, 0.5), Norm::l2);
    CHECK(!sample.feasible);
}

TEST_CASE("boundary search on a linear model converges to the linearized attack") {
    std::mt19937 rng(89);
    for (int t = 0; t < 20; ++t) {
        LinearModel lin = random_linear_model(rng, 3, 4);
        lin.weights *= 3.0;
        Model model(lin);
        const Vector x = random_unit_box_point(rng, 4);
        const AdversarialSample direct = attack_linearized(model, x, Norm::l2);
        const AdversarialSample searched = attack_boundary_search(model, x, Norm::l2);
        if (!direct.feasible) {
            // Without a feasible linear crossing there is nothing to flip.
            continue;
        }
        REQUIRE(searched.feasible);
        CHECK(searched.norm_value == doctest::Approx(direct.norm_value).epsilon(1e-6));
        REQUIRE(!searched.gap_multiplier_trace.empty());
        // The smallest flipping multiplier for an exact linearization is 1.
        double smallest_flip = 1e30;
        for (const MultiplierProbe& probe : searched.gap_multiplier_trace)
            if (probe.flipped)
                smallest_flip = std::min(smallest_flip, probe.multiplier);
        CHECK(smallest_flip == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("boundary-search traces are upward-closed in the multiplier") {
    std::mt19937 rng(97);
    int inspected = 0;
    for (int t = 0; t < 100; ++t) {
        const Model model(random_network_model(rng, 8, 4, 3, 10.0));
        const Vector x = random_unit_box_point(rng, 4);
        const AdversarialSample sample = attack_boundary_search(model, x, Norm::l2);
        if (sample.gap_multiplier_trace.empty())
            continue;
        double max_nonflip = 0.0;
        double min_flip = 1e300;
        for (const MultiplierProbe& probe : sample.gap_multiplier_trace) {
            if (probe.flipped)
                min_flip = std::min(min_flip, probe.multiplier);
            else
                max_nonflip = std::max(max_nonflip, probe.multiplier);
        }
        if (min_flip < 1e300)
            CHECK(max_nonflip < min_flip);
        ++inspected;
    }
    CHECK(inspected >= 80);
}

TEST_CASE("boundary-search samples always remain in the unit box and flip the model") {
    std::mt19937 rng(101);
    for (int t = 0; t < 30; ++t) {
        const Model model(random_network_model(rng, 8, 4, 3, 10.0));
        const Vector x = random_unit_box_point(rng, 4);
        const AdversarialSample sample = attack_boundary_search(model, x, Norm::l2);
        if (!sample.feasible)
            continue;
        const Vector moved = x + sample.delta;
        for (Eigen::Index r = 0; r < moved.size(); ++r) {
            CHECK(moved[r] >= -1e-12);
            CHECK(moved[r] <= 1.0 + 1e-12);
        }
        CHECK(model.predict(moved).predicted != model.predict(x).predicted);
        CHECK(sample.achieved_class != model.predict(x).predicted);
    }
}

TEST_CASE("adversarial resistance aggregates only correctly classified instances") {
    std::mt19937 rng(103);
    const Model model(random_network_model(rng, 6, 3, 2, 10.0));
    LabeledDataset data;
    data.points.resize(12, 3);
    data.labels.resize(12);
    data.num_classes = 2;
    for (Eigen::Index i = 0; i < 12; ++i) {
        const Vector x = random_unit_box_point(rng, 3);
        data.points.row(i) = x.transpose();
        // Half the labels are forced wrong.
        const int predicted = model.predict(x).predicted;
        data.labels[static_cast<std::size_t>(i)] = (i % 2 == 0) ? predicted : 1 - predicted;
    }
    std::vector<AdversarialSample> samples;
    const ResistanceSummary summary = adversarial_resistance(model, data, Norm::l2, 2, &samples);
    CHECK(summary.evaluated == 6);
    CHECK(summary.misclassified == 6);
    CHECK(summary.evaluated == summary.flipped + summary.flip_failures);
    CHECK(samples.size() == 12);

    // Duplicate rows produce identical reports.
    LabeledDataset dup;
    dup.points.resize(2, 3);
    dup.points.row(0) = data.points.row(0);
    dup.points.row(1) = data.points.row(0);
    dup.labels = {data.labels[0], data.labels[0]};
    dup.num_classes = 2;
    std::vector<AdversarialSample> dup_samples;
    adversarial_resistance(model, dup, Norm::l2, 2, &dup_samples);
    CHECK(attack_to_json(0, dup_samples[0]) == attack_to_json(0, dup_samples[1]));
}

TEST_CASE("resistance summary on an always-wrong model reports an empty aggregation") {
    LinearModel lin;
    lin.weights.resize(2, 2);
    lin.weights << 1, 0, 0, 1;
    Model model(lin);
    LabeledDataset data;
    data.points.resize(3, 2);
    data.points << 0.9, 0.1, 0.8, 0.2, 0.7, 0.3; // all predicted class 0
    data.labels = {1, 1, 1};
    data.num_classes = 2;
    const ResistanceSummary summary = adversarial_resistance(model, data, Norm::l2);
    CHECK(summary.evaluated == 0);
    CHECK(summary.misclassified == 3);
    CHECK(summary.mean == 0.0);
}
