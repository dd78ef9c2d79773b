#include "certilip/model.hpp"

#include <cmath>
#include <utility>

#include "certilip/activation.hpp"
#include "certilip/dataset.hpp"

namespace certilip {

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
    case ModelKind::linear:
        return "linear";
    case ModelKind::kernel:
        return "kernel";
    case ModelKind::one_hidden_layer:
        return "one_hidden_layer";
    }
    return "?";
}

int argmax_lowest(const Vector& values) {
    int best = 0;
    for (int j = 1; j < values.size(); ++j)
        if (values[j] > values[best])
            best = j;
    return best;
}

Model::Model(LinearModel m) : storage_(std::move(m)) { validate(); }
Model::Model(GaussianKernelModel m) : storage_(std::move(m)) { validate(); }
Model::Model(OneHiddenLayerModel m) : storage_(std::move(m)) { validate(); }

void Model::validate() const {
    if (const auto* lin = as_linear()) {
        if (lin->weights.rows() < 2)
            throw_invalid("linear model needs at least two classes");
        if (!lin->weights.allFinite())
            throw_invalid("linear model weights must be finite");
        if (lin->bias.size() != 0 && lin->bias.size() != lin->weights.rows())
            throw_dimension("linear bias length must equal the class count");
    } else if (const auto* ker = as_kernel()) {
        if (ker->width <= 0.0)
            throw_invalid("kernel width must be positive");
        if (ker->anchors.rows() != ker->coefficients.cols())
            throw_dimension("kernel anchor count must equal the coefficient column count");
        if (ker->coefficients.rows() < 2)
            throw_invalid("kernel model needs at least two classes");
        if (!ker->anchors.allFinite() || !ker->coefficients.allFinite())
            throw_invalid("kernel model parameters must be finite");
    } else if (const auto* net = as_network()) {
        if (net->steepness <= 0.0)
            throw_invalid("softplus steepness must be positive");
        if (net->output_weights.cols() != net->hidden_weights.rows())
            throw_dimension("output weight columns must equal the hidden unit count");
        if (net->output_weights.rows() < 2)
            throw_invalid("network needs at least two classes");
        if (net->hidden_bias.size() != 0 && net->hidden_bias.size() != net->hidden_weights.rows())
            throw_dimension("hidden bias length must equal the hidden unit count");
        if (net->output_bias.size() != 0 && net->output_bias.size() != net->output_weights.rows())
            throw_dimension("output bias length must equal the class count");
        if (!net->hidden_weights.allFinite() || !net->output_weights.allFinite())
            throw_invalid("network weights must be finite");
    }
}

ModelKind Model::kind() const {
    if (as_linear())
        return ModelKind::linear;
    if (as_kernel())
        return ModelKind::kernel;
    return ModelKind::one_hidden_layer;
}

Eigen::Index Model::dim() const {
    if (const auto* lin = as_linear())
        return lin->weights.cols();
    if (const auto* ker = as_kernel())
        return ker->anchors.cols();
    return as_network()->hidden_weights.cols();
}

int Model::num_classes() const {
    if (const auto* lin = as_linear())
        return static_cast<int>(lin->weights.rows());
    if (const auto* ker = as_kernel())
        return static_cast<int>(ker->coefficients.rows());
    return static_cast<int>(as_network()->output_weights.rows());
}

Vector Model::outputs(const Vector& x) const {
    if (x.size() != dim())
        throw_dimension("input has dimension " + std::to_string(x.size()) + ", model expects " +
                        std::to_string(dim()));
    if (const auto* lin = as_linear()) {
        Vector out = lin->weights * x;
        if (lin->bias.size() != 0)
            out += lin->bias;
        return out;
    }
    if (const auto* ker = as_kernel()) {
        Vector k(ker->anchors.rows());
        for (Eigen::Index r = 0; r < ker->anchors.rows(); ++r)
            k[r] = std::exp(-ker->width * (ker->anchors.row(r).transpose() - x).squaredNorm());
        return ker->coefficients * k;
    }
    const auto* net = as_network();
    Vector z = net->hidden_weights * x;
    if (net->hidden_bias.size() != 0)
        z += net->hidden_bias;
    Vector h(z.size());
    for (Eigen::Index r = 0; r < z.size(); ++r)
        h[r] = softplus(z[r], net->steepness);
    Vector out = net->output_weights * h;
    if (net->output_bias.size() != 0)
        out += net->output_bias;
    return out;
}

Prediction Model::predict(const Vector& x) const {
    Prediction p;
    p.margins = outputs(x);
    p.predicted = argmax_lowest(p.margins);
    return p;
}

Vector Model::input_gradient(const Vector& x, int target) const {
    if (target < 0 || target >= num_classes())
        throw_invalid("class index " + std::to_string(target) + " is outside [0, " +
                      std::to_string(num_classes()) + ")");
    if (x.size() != dim())
        throw_dimension("input has dimension " + std::to_string(x.size()) + ", model expects " +
                        std::to_string(dim()));
    if (const auto* lin = as_linear())
        return lin->weights.row(target).transpose();
    if (const auto* ker = as_kernel()) {
        Vector grad = Vector::Zero(ker->anchors.cols());
        for (Eigen::Index r = 0; r < ker->anchors.rows(); ++r) {
            const Vector diff = ker->anchors.row(r).transpose() - x;
            const double k = std::exp(-ker->width * diff.squaredNorm());
            grad += ker->coefficients(target, r) * 2.0 * ker->width * k * diff;
        }
        return grad;
    }
    const auto* net = as_network();
    Vector z = net->hidden_weights * x;
    if (net->hidden_bias.size() != 0)
        z += net->hidden_bias;
    Vector grad = Vector::Zero(net->hidden_weights.cols());
    for (Eigen::Index r = 0; r < z.size(); ++r)
        grad += net->output_weights(target, r) * softplus_prime(z[r], net->steepness) *
                net->hidden_weights.row(r).transpose();
    return grad;
}

double classification_error(const Model& model, const LabeledDataset& data) {
    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < data.size(); ++i)
        if (model.predict(data.points.row(i).transpose()).predicted != data.labels[static_cast<std::size_t>(i)])
            ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

} // namespace certilip
