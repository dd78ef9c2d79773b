#include <cmath>
#include <doctest.h>
#include <random>

#include "certilip/attack.hpp"
#include "certilip/certify.hpp"
#include "certilip/oracle.hpp"
#include "certilip/random_instances.hpp"
#include "certilip/spectral.hpp"

using namespace certilip;

TEST_CASE("ball extrema collapse at radius zero") {
    std::mt19937 rng(7);
    const Vector x = random_unit_box_point(rng, 3);
    const Vector xr = random_unit_box_point(rng, 3);
    const Vector xs = random_unit_box_point(rng, 3);
    const auto e = kernel_ball_extrema(x, xr, xs, 1.7, 0.0);
    const double ip = (x - xr).dot(x - xs);
    const double expv = std::exp(-1.7 * ((x - xr).squaredNorm() + (x - xs).squaredNorm()));
    CHECK(e.inner_max == doctest::Approx(ip).epsilon(1e-14));
    CHECK(e.inner_min == doctest::Approx(ip).epsilon(1e-14));
    CHECK(e.exp_max == doctest::Approx(expv).epsilon(1e-14));
    CHECK(e.exp_min == doctest::Approx(expv).epsilon(1e-14));
}

TEST_CASE("ball extrema with both anchors at x: max R^2, min 0") {
    Vector x(2);
    x << 0.5, 0.5;
    const auto e = kernel_ball_extrema(x, x, x, 1.0, 1.0);
    CHECK(e.inner_max == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e.inner_min == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("sampled ball values never escape the closed-form extrema") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> radius_dist(0.05, 1.5);
    for (int t = 0; t < 20; ++t) {
        const Eigen::Index d = 3;
        const Vector x = random_unit_box_point(rng, d);
        const Vector xr = random_unit_box_point(rng, d);
        const Vector xs = random_unit_box_point(rng, d);
        const double width = 0.9;
        const double radius = radius_dist(rng);
        const auto e = kernel_ball_extrema(x, xr, xs, width, radius);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int s = 0; s < 500; ++s) {
            Vector dir(d);
            for (Eigen::Index k = 0; k < d; ++k)
                dir[k] = gauss(rng);
            dir *= radius * std::pow(unif(rng), 1.0 / 3.0) / dir.norm();
            const Vector y = x + dir;
            const double ip = (y - xr).dot(y - xs);
            const double ev =
                std::exp(-width * ((y - xr).squaredNorm() + (y - xs).squaredNorm()));
            CHECK(ip <= e.inner_max + 1e-10);
            CHECK(ip >= e.inner_min - 1e-10);
            CHECK(ev <= e.exp_max + 1e-12);
            CHECK(ev >= e.exp_min - 1e-12);
        }
    }
}

TEST_CASE("kernel bound at radius zero equals the exact gradient difference norm") {
    std::mt19937 rng(17);
    for (int t = 0; t < 25; ++t) {
        const GaussianKernelModel kernel = random_kernel_model(rng, 6, 4, 3, 1.2);
        const Model model(kernel);
        const Vector x = random_unit_box_point(rng, 4);
        const double exact = (model.input_gradient(x, 1) - model.input_gradient(x, 0)).norm();
        const double bound = cross_lip_bound_kernel(kernel, x, 1, 0, 0.0);
        CHECK(bound == doctest::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("identical coefficient rows give a zero kernel bound for every radius") {
    std::mt19937 rng(19);
    GaussianKernelModel kernel = random_kernel_model(rng, 5, 3, 3, 1.0);
    kernel.coefficients.row(1) = kernel.coefficients.row(0);
    const Vector x = random_unit_box_point(rng, 3);
    for (double radius : {0.0, 0.3, 2.0})
        CHECK(cross_lip_bound_kernel(kernel, x, 1, 0, radius) == 0.0);
}

TEST_CASE("vectorized kernel bound equals the per-pair assembly from the ball extrema") {
    std::mt19937 rng(23);
    for (int t = 0; t < 15; ++t) {
        const GaussianKernelModel kernel = random_kernel_model(rng, 5, 3, 3, 0.8);
        const Vector x = random_unit_box_point(rng, 3);
        const double radius = 0.1 + 0.5 * t / 15.0;
        const int j = 1, c = 0;
        const Vector beta =
            (kernel.coefficients.row(j) - kernel.coefficients.row(c)).transpose();
        double total = 0.0;
        for (Eigen::Index r = 0; r < 5; ++r) {
            for (Eigen::Index s = 0; s < 5; ++s) {
                const auto e = kernel_ball_extrema(x, kernel.anchors.row(r).transpose(),
                                                   kernel.anchors.row(s).transpose(),
                                                   kernel.width, radius);
                const double bb = beta[r] * beta[s];
                if (bb >= 0.0)
                    total += bb * (std::max(e.inner_max, 0.0) * e.exp_max +
                                   std::min(e.inner_max, 0.0) * e.exp_min);
                else
                    total += bb * (std::max(e.inner_min, 0.0) * e.exp_min +
                                   std::min(e.inner_min, 0.0) * e.exp_max);
            }
        }
        const double reference = 2.0 * kernel.width * std::sqrt(std::max(total, 0.0));
        CHECK(cross_lip_bound_kernel(kernel, x, j, c, radius) ==
              doctest::Approx(reference).epsilon(1e-12));
    }
}

TEST_CASE("kernel bound dominates sampled ball maxima") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> radius_dist(0.0, 2.0);
    for (int t = 0; t < 25; ++t) {
        const GaussianKernelModel kernel = random_kernel_model(rng, 5, 3, 3, 1.0);
        const Model model(kernel);
        const Vector x = random_unit_box_point(rng, 3);
        const double radius = radius_dist(rng);
        const double bound = cross_lip_bound_kernel(kernel, x, 1, 0, radius);
        const double sampled =
            oracle::ball_max_gradient_difference(model, x, 1, 0, radius, 10000, 500 + t).value;
        CHECK(sampled <= bound + 1e-9);
    }
}

TEST_CASE("network bound at radius zero equals the exact gradient difference norm") {
    std::mt19937 rng(31);
    for (bool with_bias : {false, true}) {
        for (int t = 0; t < 20; ++t) {
            const OneHiddenLayerModel net = random_network_model(rng, 8, 4, 3, 10.0, with_bias);
            const Model model(net);
            const Vector x = random_unit_box_point(rng, 4);
            const double exact =
                (model.input_gradient(x, 2) - model.input_gradient(x, 0)).norm();
            CHECK(cross_lip_bound_nn(net, x, 2, 0, 0.0) ==
                  doctest::Approx(exact).epsilon(1e-9));
        }
    }
}

TEST_CASE("single hidden unit network bound has a closed form") {
    OneHiddenLayerModel net;
    net.steepness = 10.0;
    net.hidden_weights.resize(1, 3);
    net.hidden_weights << 0.6, -0.2, 0.9;
    net.output_weights.resize(2, 1);
    net.output_weights << 1.4, 0.3;
    Vector x(3);
    x << 0.2, 0.8, 0.4;
    const double radius = 0.7;
    const double dw = net.output_weights(0, 0) - net.output_weights(1, 0);
    const double unorm = net.hidden_weights.row(0).norm();
    const double z = net.hidden_weights.row(0).dot(x);
    const double expected =
        std::abs(dw) * unorm * softplus_prime_reference(z + radius * unorm);
    CHECK(cross_lip_bound_nn(net, x, 0, 1, radius) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("network bound dominates sampled ball maxima") {
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> radius_dist(0.0, 2.0);
    for (int t = 0; t < 25; ++t) {
        const OneHiddenLayerModel net = random_network_model(rng, 8, 4, 3, 10.0);
        const Model model(net);
        const Vector x = random_unit_box_point(rng, 4);
        const double radius = radius_dist(rng);
        const double bound = cross_lip_bound_nn(net, x, 1, 2, radius);
        const double sampled =
            oracle::ball_max_gradient_difference(model, x, 1, 2, radius, 10000, 900 + t).value;
        CHECK(sampled <= bound + 1e-9);
    }
}

TEST_CASE("both local bounds are non-decreasing in the radius") {
    std::mt19937 rng(41);
    const GaussianKernelModel kernel = random_kernel_model(rng, 6, 3, 3, 1.1);
    const OneHiddenLayerModel net = random_network_model(rng, 8, 3, 3, 10.0);
    const Vector x = random_unit_box_point(rng, 3);
    double prev_k = -1.0, prev_n = -1.0;
    for (double radius = 0.0; radius <= 3.0; radius += 0.1) {
        const double bk = cross_lip_bound_kernel(kernel, x, 1, 0, radius);
        const double bn = cross_lip_bound_nn(net, x, 1, 0, radius);
        CHECK(bk >= prev_k - 1e-12);
        CHECK(bn >= prev_n - 1e-12);
        prev_k = bk;
        prev_n = bn;
    }
}

TEST_CASE("global network bound basics") {
    SUBCASE("identity hidden layer and unit output difference") {
        OneHiddenLayerModel net;
        net.steepness = 10.0;
        net.hidden_weights = Matrix::Identity(3, 3);
        net.output_weights = Matrix::Zero(2, 3);
        net.output_weights(0, 0) = 1.0; // w_0 - w_1 = (1,0,0)
        CHECK(cross_lip_global_nn(net, 0, 1) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("scaling the hidden weights scales the bound") {
        std::mt19937 rng(43);
        OneHiddenLayerModel net = random_network_model(rng, 5, 4, 3, 10.0);
        const double base = cross_lip_global_nn(net, 0, 1);
        net.hidden_weights *= 2.5;
        CHECK(cross_lip_global_nn(net, 0, 1) == doctest::Approx(2.5 * base).epsilon(1e-9));
    }
    SUBCASE("local bound never exceeds the global bound across radii") {
        std::mt19937 rng(47);
        for (int t = 0; t < 10; ++t) {
            const OneHiddenLayerModel net = random_network_model(rng, 8, 4, 3, 10.0);
            const Vector x = random_unit_box_point(rng, 4);
            const double global = cross_lip_global_nn(net, 1, 0);
            for (double radius : {0.1, 0.5, 1.0, 5.0, 20.0, 100.0})
                CHECK(cross_lip_bound_nn(net, x, 1, 0, radius) <= global + 1e-9 * global);
        }
    }
}

TEST_CASE("guarantee on the closed-form linear example") {
    LinearModel lin;
    lin.weights.resize(2, 2);
    lin.weights << 1, 0, 0, 1;
    Model model(lin);
    Vector x(2);
    x << 2, 0;

    const GuaranteeReport r2 = guarantee(model, x, BallBoundKind::linear_exact, Norm::l2);
    CHECK(r2.guarantee_radius == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r2.predicted == 0);
    REQUIRE(r2.per_target.size() == 1);
    CHECK(r2.per_target[0].gap == doctest::Approx(2.0));

    CHECK(linear_guarantee(lin, x, Norm::linf) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(linear_guarantee(lin, x, Norm::l1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("tied top-2 outputs give a zero guarantee") {
    LinearModel lin;
    lin.weights.resize(2, 2);
    lin.weights << 1, 0, 1, 0;
    Model model(lin);
    Vector x(2);
    x << 0.5, 0.5;
    const GuaranteeReport r = guarantee(model, x, BallBoundKind::linear_exact, Norm::l2);
    CHECK(r.guarantee_radius == 0.0);
    CHECK(r.r_star == 0.0);
}

TEST_CASE("generic guarantee with the linear backend matches the closed form") {
    std::mt19937 rng(53);
    for (int t = 0; t < 60; ++t) {
        LinearModel lin = random_linear_model(rng, 4, 5);
        lin.weights *= 2.0;
        Model model(lin);
        const Vector x = random_unit_box_point(rng, 5);
        for (Norm p : {Norm::l1, Norm::l2, Norm::linf}) {
            const double closed = linear_guarantee(lin, x, p);
            const double capped = std::min(closed, std::sqrt(5.0));
            const GuaranteeReport r = guarantee(model, x, BallBoundKind::linear_exact, p);
            CHECK(r.guarantee_radius == doctest::Approx(capped).epsilon(1e-12));
        }
    }
}

TEST_CASE("guarantee respects its structural invariants on nonlinear models") {
    std::mt19937 rng(59);
    for (int t = 0; t < 20; ++t) {
        const Model model(random_network_model(rng, 8, 4, 3, 10.0));
        const Vector x = random_unit_box_point(rng, 4);
        const GuaranteeReport r = guarantee(model, x, BallBoundKind::nn_ball, Norm::l2);
        CHECK(r.guarantee_radius >= 0.0);
        CHECK(r.guarantee_radius <= r.r_star + 1e-12);
        CHECK(r.guarantee_radius <= std::sqrt(4.0) + 1e-12);
        for (const TargetBoundReport& tb : r.per_target)
            CHECK(tb.gap >= 0.0);
    }
}

TEST_CASE("sandwich: certified radius never exceeds the attack norm") {
    std::mt19937 rng(61);
    for (int t = 0; t < 25; ++t) {
        const Model model(random_network_model(rng, 8, 4, 3, 10.0));
        const Vector x = random_unit_box_point(rng, 4);
        const GuaranteeReport cert = guarantee(model, x, BallBoundKind::nn_ball, Norm::l2);
        const AdversarialSample attack = attack_boundary_search(model, x, Norm::l2);
        if (!attack.feasible)
            continue;
        CHECK(cert.guarantee_radius <= attack.norm_value + 1e-9);
    }
}

TEST_CASE("nonlinear backends reject p != 2 and mismatched models") {
    std::mt19937 rng(67);
    const Model net(random_network_model(rng, 4, 3, 2, 10.0));
    const Vector x = random_unit_box_point(rng, 3);
    CHECK_THROWS(guarantee(net, x, BallBoundKind::nn_ball, Norm::l1));
    CHECK_THROWS(guarantee(net, x, BallBoundKind::kernel_ball, Norm::l2));
    CHECK_THROWS(guarantee(net, x, BallBoundKind::linear_exact, Norm::l2));
}

TEST_CASE("local-global ratio lies in (0,1] and degenerate instances count as 1") {
    std::mt19937 rng(71);
    const Model model(random_network_model(rng, 6, 3, 3, 10.0));
    LabeledDataset data;
    data.points.resize(10, 3);
    data.labels.resize(10);
    data.num_classes = 3;
    for (Eigen::Index i = 0; i < 10; ++i) {
        const Vector x = random_unit_box_point(rng, 3);
        data.points.row(i) = x.transpose();
        data.labels[static_cast<std::size_t>(i)] = model.predict(x).predicted;
    }
    const RatioSummary summary = local_global_ratio(model, data, 2);
    CHECK(summary.evaluated == 10);
    for (const RatioEntry& e : summary.entries) {
        CHECK(e.ratio > 0.0);
        CHECK(e.ratio <= 1.0);
        CHECK(e.local >= e.global - 1e-9); // bound dominance in guarantee form
    }
    CHECK(summary.mean_ratio > 0.0);
    CHECK(summary.mean_ratio <= 1.0);

    // All-equal output rows: both guarantees vanish, ratio is 1 by convention.
    OneHiddenLayerModel flat = random_network_model(rng, 5, 3, 3, 10.0);
    flat.output_weights.row(1) = flat.output_weights.row(0);
    flat.output_weights.row(2) = flat.output_weights.row(0);
    const Model flat_model(flat);
    LabeledDataset one;
    one.points.resize(1, 3);
    one.points.row(0) = random_unit_box_point(rng, 3).transpose();
    one.labels = {flat_model.predict(one.points.row(0).transpose()).predicted};
    one.num_classes = 3;
    const RatioSummary degenerate = local_global_ratio(flat_model, one);
    REQUIRE(degenerate.entries.size() == 1);
    CHECK(degenerate.entries[0].ratio == 1.0);
}
