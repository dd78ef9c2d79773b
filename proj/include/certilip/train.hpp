#pragma once

#include <string>
#include <utility>
#include <vector>

#include "certilip/dataset.hpp"
#include "certilip/model.hpp"

namespace certilip {

enum class RegularizerKind { none, weight_decay, cross_lipschitz };
enum class OptimizerKind { lbfgs, gradient_descent };

std::string regularizer_name(RegularizerKind kind);
RegularizerKind parse_regularizer(const std::string& name);

struct TrainConfig {
    ModelKind model = ModelKind::kernel; // kernel or one_hidden_layer
    RegularizerKind regularizer = RegularizerKind::none;
    double lambda = 0.0;

    // Kernel width rule: width = width_scale / rho^2 where rho is the mean
    // distance to the knn_neighbors nearest neighbors on the training set.
    double width_scale = 1.0;
    int knn_neighbors = 40;
    OptimizerKind optimizer = OptimizerKind::lbfgs;
    int lbfgs_history = 10;
    // Anchor budget for the kernel regularizer tables; larger training sets
    // are subsampled to keep the quadratic tables affordable.
    Eigen::Index omega_anchor_cap = 1000;

    // Network settings.
    int hidden_units = 64;
    double steepness = 10.0;
    bool use_bias = false;
    double learning_rate = 0.2;
    int batch_size = 64;

    int epochs = 100;
    unsigned seed = 0;
    double grad_tolerance = -1.0; // < 0 means the default 1e-5 * n

    // Adversarial training: fraction of each batch replaced by inf-norm
    // adversarial samples of the current model (0 disables).
    double adv_fraction = 0.0;

    void validate() const;
};

// key=value per line; '#' starts a comment. Unknown keys are an error.
TrainConfig parse_train_config(const std::string& text);
std::string train_config_echo(const TrainConfig& config);

struct TrainReport {
    std::vector<double> objective_per_epoch;
    std::vector<double> loss_per_epoch;
    std::vector<double> omega_per_epoch;
    double final_objective = 0.0;
    double gradient_norm_at_exit = 0.0;
    double test_error = -1.0; // -1 when no test set was supplied
    double train_error = -1.0;
    int epochs_run = 0;
    bool diverged = false;
    bool converged = false; // hit the gradient tolerance (kernel path)
    double wall_time_seconds = 0.0;
    std::string config_echo;
};

// Stable multiclass cross-entropy on raw outputs; gradient is softmax minus
// the one-hot label.
double cross_entropy(const Vector& outputs, int label);
Vector cross_entropy_gradient(const Vector& outputs, int label);

// Mean squared norm of pairwise output-gradient differences at the anchor
// points, assembled directly from per-anchor input gradients. This is the
// defining route; the closed forms below must agree with it and are what
// training evaluates.
double omega_via_gradients(const Model& model, const Matrix& anchor_points);

double omega_closed_form_kernel(const GaussianKernelModel& model, const Matrix& anchor_points);
double omega_closed_form_nn(const OneHiddenLayerModel& model, const Matrix& anchor_points);

// Analytic parameter gradient of the kernel closed form with respect to the
// coefficient matrix.
Matrix omega_gradient_kernel(const GaussianKernelModel& model, const Matrix& anchor_points);

struct NetworkOmegaGradient {
    Matrix hidden_weights;
    Matrix output_weights;
    Vector hidden_bias; // empty when the model has no hidden bias
};
NetworkOmegaGradient omega_gradient_nn(const OneHiddenLayerModel& model,
                                       const Matrix& anchor_points);

// Mean 40-nearest-neighbor distance rule for the kernel width.
double kernel_width_from_knn(const Matrix& points, int neighbors, double scale);

std::pair<Model, TrainReport> train_kernel(const LabeledDataset& train_set,
                                           const TrainConfig& config,
                                           const LabeledDataset* test_set = nullptr);
std::pair<Model, TrainReport> train_network(const LabeledDataset& train_set,
                                            const TrainConfig& config,
                                            const LabeledDataset* test_set = nullptr);
std::pair<Model, TrainReport> train(const LabeledDataset& train_set, const TrainConfig& config,
                                    const LabeledDataset* test_set = nullptr);

} // namespace certilip
