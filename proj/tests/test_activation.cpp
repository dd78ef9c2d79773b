#include <cmath>
#include <doctest.h>
#include <random>

#include "certilip/activation.hpp"

using namespace certilip;

TEST_CASE("softplus derivative is 1/2 at the origin for any steepness") {
    for (double steepness : {0.1, 1.0, 10.0, 100.0})
        CHECK(softplus_prime(0.0, steepness) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("softplus at zero equals log(2)/steepness") {
    CHECK(softplus(0.0, 10.0) == doctest::Approx(std::log(2.0) / 10.0).epsilon(1e-15));
    CHECK(softplus(0.0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("softplus stays within log(2)/steepness of the ReLU hinge") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> z_dist(-80.0, 80.0);
    for (double steepness : {1.0, 10.0}) {
        for (int i = 0; i < 50; ++i) {
            const double z = z_dist(rng);
            const double gap = softplus(z, steepness) - std::max(0.0, z);
            CHECK(gap >= 0.0);
            CHECK(gap <= std::log(2.0) / steepness + 1e-15);
        }
    }
}

TEST_CASE("softplus matches a high-precision evaluation at moderate arguments") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> z_dist(-30.0, 30.0);
    for (int i = 0; i < 50; ++i) {
        const double z = z_dist(rng);
        const double steepness = 10.0;
        const long double exact =
            std::log1p(std::exp(static_cast<long double>(steepness) * z)) / steepness;
        CHECK(softplus(z, steepness) ==
              doctest::Approx(static_cast<double>(exact)).epsilon(1e-14));
    }
}

TEST_CASE("softplus is numerically stable far into both tails") {
    // steepness * z = +-700: the naive exp would overflow.
    CHECK(std::isfinite(softplus(70.0, 10.0)));
    CHECK(softplus(70.0, 10.0) == doctest::Approx(70.0).epsilon(1e-12));
    CHECK(softplus(-70.0, 10.0) >= 0.0);
    CHECK(softplus(-70.0, 10.0) <= 1e-300);
    CHECK(softplus_prime(70.0, 10.0) == doctest::Approx(1.0));
    CHECK(softplus_prime(-70.0, 10.0) >= 0.0);
}

TEST_CASE("softplus and its derivative are monotone increasing") {
    double prev = -1.0, prev_prime = -1.0;
    for (double z = -20.0; z <= 20.0; z += 0.25) {
        const double v = softplus(z, 10.0);
        const double s = softplus_prime(z, 10.0);
        CHECK(v >= prev);
        CHECK(s >= prev_prime);
        CHECK(s > 0.0);
        CHECK(s < 1.0);
        prev = v;
        prev_prime = s;
    }
}

TEST_CASE("softplus second derivative matches finite differences of the first") {
    for (double z : {-2.0, -0.3, 0.0, 0.4, 1.7}) {
        const double h = 1e-6;
        const double fd = (softplus_prime(z + h, 10.0) - softplus_prime(z - h, 10.0)) / (2 * h);
        CHECK(softplus_second(z, 10.0) == doctest::Approx(fd).epsilon(1e-6));
    }
}
