#pragma once

#include <string>
#include <variant>

#include "certilip/linalg.hpp"

namespace certilip {

// Multi-class linear classifier f_j(x) = <w_j, x> (+ b_j). weights is K x d,
// one row per class. bias is empty or length K.
struct LinearModel {
    Matrix weights;
    Vector bias;
};

// Gaussian-kernel expansion f_j(x) = sum_r coefficients(j,r) * exp(-width * |x - anchor_r|^2).
struct GaussianKernelModel {
    Matrix anchors;      // n x d
    Matrix coefficients; // K x n
    double width = 1.0;  // > 0
};

// One-hidden-layer network f_j(x) = sum_r output_weights(j,r) * softplus(<u_r, x> + hb_r) + ob_j
// with the softplus steepness parameter shared by all units. Biases are
// optional (empty vectors disable them).
struct OneHiddenLayerModel {
    Matrix hidden_weights; // U x d
    Matrix output_weights; // K x U
    double steepness = 10.0;
    Vector hidden_bias; // empty or U
    Vector output_bias; // empty or K
};

enum class ModelKind { linear, kernel, one_hidden_layer };

std::string model_kind_name(ModelKind kind);

struct Prediction {
    int predicted = 0; // argmax class, ties broken toward the lowest index
    Vector margins;    // the K raw outputs f(x)
};

class Model {
public:
    Model(LinearModel m);
    Model(GaussianKernelModel m);
    Model(OneHiddenLayerModel m);

    ModelKind kind() const;
    Eigen::Index dim() const;
    int num_classes() const;

    // Raw outputs f(x) as a K-vector.
    Vector outputs(const Vector& x) const;
    Prediction predict(const Vector& x) const;
    // Analytic gradient of output j with respect to the input.
    Vector input_gradient(const Vector& x, int target) const;

    const LinearModel* as_linear() const { return std::get_if<LinearModel>(&storage_); }
    const GaussianKernelModel* as_kernel() const { return std::get_if<GaussianKernelModel>(&storage_); }
    const OneHiddenLayerModel* as_network() const { return std::get_if<OneHiddenLayerModel>(&storage_); }

private:
    void validate() const;

    std::variant<LinearModel, GaussianKernelModel, OneHiddenLayerModel> storage_;
};

// Argmax with the lowest-index tie rule shared by every decision in the library.
int argmax_lowest(const Vector& values);

// Test error (fraction misclassified) of the model on a dataset.
double classification_error(const Model& model, const struct LabeledDataset& data);

} // namespace certilip
