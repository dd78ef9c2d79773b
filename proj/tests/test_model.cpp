#include <doctest.h>
#include <random>

#include "certilip/dataset.hpp"
#include "certilip/errors.hpp"
#include "certilip/model.hpp"
#include "certilip/oracle.hpp"
#include "certilip/random_instances.hpp"
#include "certilip/spectral.hpp"

using namespace certilip;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

} // namespace

TEST_CASE("linear prediction returns the argmax with its margins") {
    LinearModel lin;
    lin.weights.resize(2, 2);
    lin.weights << 1, 0, 0, 1;
    Model model(lin);
    const Prediction pred = model.predict(vec2(2, 0));
    CHECK(pred.predicted == 0);
    CHECK(pred.margins[0] == doctest::Approx(2.0));
    CHECK(pred.margins[1] == doctest::Approx(0.0));
}

TEST_CASE("ties at the argmax break toward the lowest class index") {
    LinearModel lin;
    lin.weights = Matrix::Zero(3, 2);
    Model model(lin);
    CHECK(model.predict(vec2(0.3, 0.7)).predicted == 0);

    Vector tied(4);
    tied << 1.0, 5.0, 5.0, 2.0;
    CHECK(argmax_lowest(tied) == 1);
}

TEST_CASE("kernel prediction with the anchor at x uses k(x,x)=1") {
    GaussianKernelModel ker;
    ker.width = 2.0;
    ker.anchors.resize(1, 2);
    ker.anchors << 0.4, 0.6;
    ker.coefficients.resize(2, 1);
    ker.coefficients << 1, -1;
    Model model(ker);
    const Prediction pred = model.predict(vec2(0.4, 0.6));
    CHECK(pred.predicted == 0);
    CHECK(pred.margins[0] == doctest::Approx(1.0));
    CHECK(pred.margins[1] == doctest::Approx(-1.0));
}

TEST_CASE("linear input gradient is exactly the class row") {
    std::mt19937 rng(3);
    const LinearModel lin = random_linear_model(rng, 4, 6);
    Model model(lin);
    const Vector x = random_unit_box_point(rng, 6);
    for (int j = 0; j < 4; ++j)
        CHECK((model.input_gradient(x, j) - lin.weights.row(j).transpose()).norm() == 0.0);
}

TEST_CASE("a kernel anchor sitting at x contributes nothing to the gradient") {
    GaussianKernelModel ker;
    ker.width = 1.5;
    ker.anchors.resize(1, 3);
    ker.anchors << 0.2, 0.5, 0.8;
    ker.coefficients.resize(2, 1);
    ker.coefficients << 3.0, -2.0;
    Model model(ker);
    Vector x(3);
    x << 0.2, 0.5, 0.8;
    CHECK(model.input_gradient(x, 0).norm() == 0.0);
    CHECK(model.input_gradient(x, 1).norm() == 0.0);
}

TEST_CASE("analytic input gradients match central finite differences") {
    std::mt19937 rng(17);
    int checked = 0;
    for (int t = 0; t < 100; ++t) {
        Model model = [&]() -> Model {
            switch (t % 4) {
            case 0:
                return Model(random_linear_model(rng, 3, 5));
            case 1:
                return Model(random_kernel_model(rng, 6, 5, 3, 1.3));
            case 2:
                return Model(random_network_model(rng, 7, 5, 3, 10.0));
            default:
                return Model(random_network_model(rng, 7, 5, 3, 10.0, /*with_bias=*/true));
            }
        }();
        const Vector x = random_unit_box_point(rng, 5);
        const int target = t % 3;
        const Vector analytic = model.input_gradient(x, target);
        const Vector numeric = oracle::finite_diff_gradient(
            [&](const Vector& y) { return model.outputs(y)[target]; }, x, 1e-5);
        const double scale = std::max(analytic.norm(), 1e-10);
        CHECK((analytic - numeric).norm() / scale < 1e-5);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("prediction is invariant under adding a common constant to all outputs") {
    std::mt19937 rng(23);
    for (int t = 0; t < 20; ++t) {
        LinearModel lin = random_linear_model(rng, 4, 3);
        LinearModel shifted = lin;
        shifted.bias = Vector::Constant(4, 2.7);
        Model a(lin), b(shifted);
        const Vector x = random_unit_box_point(rng, 3);
        CHECK(a.predict(x).predicted == b.predict(x).predicted);
    }
}

TEST_CASE("dimension mismatches are rejected") {
    LinearModel lin;
    lin.weights = Matrix::Identity(2, 3);
    Model model(lin);
    Vector short_x(2);
    short_x << 0.1, 0.2;
    CHECK_THROWS_AS(model.predict(short_x), Error);
    CHECK_THROWS_AS(model.input_gradient(short_x, 0), Error);
    Vector ok(3);
    ok << 0.1, 0.2, 0.3;
    CHECK_THROWS_AS(model.input_gradient(ok, 5), Error);
}

TEST_CASE("spectral norm on simple matrices") {
    CHECK(spectral_norm(Matrix::Identity(4, 4)) == doctest::Approx(1.0).epsilon(1e-9));
    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 3.0;
    diag(1, 1) = 1.0;
    CHECK(spectral_norm(diag) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("spectral norm agrees with the Jacobi eigenvalue oracle") {
    std::mt19937 rng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        Matrix m(20, 20);
        for (Eigen::Index r = 0; r < 20; ++r)
            for (Eigen::Index c = 0; c < 20; ++c)
                m(r, c) = gauss(rng);
        CHECK(spectral_norm(m) ==
              doctest::Approx(oracle::jacobi_spectral_norm(m)).epsilon(1e-7));
    }
}

TEST_CASE("spectral norm is positively homogeneous") {
    std::mt19937 rng(37);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(6, 9);
    for (Eigen::Index r = 0; r < 6; ++r)
        for (Eigen::Index c = 0; c < 9; ++c)
            m(r, c) = gauss(rng);
    const double base = spectral_norm(m);
    CHECK(spectral_norm(3.5 * m) == doctest::Approx(3.5 * base).epsilon(1e-8));
}

TEST_CASE("dataset validation and class selection") {
    LabeledDataset data;
    data.points.resize(4, 2);
    data.points << 0.1, 0.2, 0.6, 0.9, 0.3, 0.3, 0.7, 0.1;
    data.labels = {0, 1, 2, 1};
    data.num_classes = 3;
    data.validate();

    const LabeledDataset selected = data.select_classes({2, 0});
    CHECK(selected.size() == 2);
    CHECK(selected.num_classes == 2);
    CHECK(selected.labels[0] == 1); // class 0 remapped to slot 1
    CHECK(selected.labels[1] == 0); // class 2 remapped to slot 0

    LabeledDataset bad = data;
    bad.labels[0] = 7;
    CHECK_THROWS_AS(bad.validate(), Error);
}
