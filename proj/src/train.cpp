#include "certilip/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "certilip/activation.hpp"
#include "certilip/attack.hpp"

namespace certilip {

std::string regularizer_name(RegularizerKind kind) {
    switch (kind) {
    case RegularizerKind::none:
        return "none";
    case RegularizerKind::weight_decay:
        return "weight_decay";
    case RegularizerKind::cross_lipschitz:
        return "cross_lipschitz";
    }
    return "?";
}

RegularizerKind parse_regularizer(const std::string& name) {
    if (name == "none")
        return RegularizerKind::none;
    if (name == "weight_decay")
        return RegularizerKind::weight_decay;
    if (name == "cross_lipschitz")
        return RegularizerKind::cross_lipschitz;
    throw_invalid("unknown regularizer '" + name + "'");
}

void TrainConfig::validate() const {
    if (model != ModelKind::kernel && model != ModelKind::one_hidden_layer)
        throw_invalid("training supports kernel and one_hidden_layer models");
    if (lambda < 0.0)
        throw_invalid("lambda must be >= 0");
    if (width_scale <= 0.0)
        throw_invalid("width_scale must be positive");
    if (knn_neighbors < 1)
        throw_invalid("knn_neighbors must be >= 1");
    if (hidden_units < 1)
        throw_invalid("hidden_units must be >= 1");
    if (steepness <= 0.0)
        throw_invalid("steepness must be positive");
    if (learning_rate <= 0.0)
        throw_invalid("learning_rate must be positive");
    if (batch_size < 1)
        throw_invalid("batch_size must be >= 1");
    if (epochs < 1)
        throw_invalid("epochs must be >= 1");
    if (adv_fraction < 0.0 || adv_fraction > 1.0)
        throw_invalid("adv_fraction must lie in [0,1]");
    if (omega_anchor_cap < 1)
        throw_invalid("omega_anchor_cap must be >= 1");
}

TrainConfig parse_train_config(const std::string& text) {
    TrainConfig config;
    std::istringstream in(text);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw_parse("config line " + std::to_string(line_number) + " is not key=value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty())
            throw_parse("config key '" + key + "' has no value");

        auto as_double = [&] {
            try {
                return std::stod(value);
            } catch (const std::exception&) {
                throw_parse("config key '" + key + "' needs a number, got '" + value + "'");
            }
        };
        auto as_int = [&] { return static_cast<int>(as_double()); };

        if (key == "model") {
            if (value == "kernel")
                config.model = ModelKind::kernel;
            else if (value == "nn" || value == "one_hidden_layer")
                config.model = ModelKind::one_hidden_layer;
            else
                throw_parse("model must be 'kernel' or 'nn'");
        } else if (key == "regularizer") {
            config.regularizer = parse_regularizer(value);
        } else if (key == "lambda") {
            config.lambda = as_double();
        } else if (key == "width_scale") {
            config.width_scale = as_double();
        } else if (key == "knn_neighbors") {
            config.knn_neighbors = as_int();
        } else if (key == "optimizer") {
            if (value == "lbfgs")
                config.optimizer = OptimizerKind::lbfgs;
            else if (value == "gd" || value == "gradient_descent")
                config.optimizer = OptimizerKind::gradient_descent;
            else
                throw_parse("optimizer must be 'lbfgs' or 'gd'");
        } else if (key == "lbfgs_history") {
            config.lbfgs_history = as_int();
        } else if (key == "omega_anchor_cap") {
            config.omega_anchor_cap = as_int();
        } else if (key == "hidden_units") {
            config.hidden_units = as_int();
        } else if (key == "steepness") {
            config.steepness = as_double();
        } else if (key == "use_bias") {
            config.use_bias = as_int() != 0;
        } else if (key == "learning_rate") {
            config.learning_rate = as_double();
        } else if (key == "batch_size") {
            config.batch_size = as_int();
        } else if (key == "epochs") {
            config.epochs = as_int();
        } else if (key == "seed") {
            config.seed = static_cast<unsigned>(as_double());
        } else if (key == "grad_tolerance") {
            config.grad_tolerance = as_double();
        } else if (key == "adv_fraction") {
            config.adv_fraction = as_double();
        } else {
            throw_parse("unknown config key '" + key + "'");
        }
    }
    config.validate();
    return config;
}

std::string train_config_echo(const TrainConfig& c) {
    std::ostringstream out;
    out << "model=" << (c.model == ModelKind::kernel ? "kernel" : "nn") << '\n'
        << "regularizer=" << regularizer_name(c.regularizer) << '\n'
        << "lambda=" << c.lambda << '\n'
        << "width_scale=" << c.width_scale << '\n'
        << "knn_neighbors=" << c.knn_neighbors << '\n'
        << "optimizer=" << (c.optimizer == OptimizerKind::lbfgs ? "lbfgs" : "gd") << '\n'
        << "lbfgs_history=" << c.lbfgs_history << '\n'
        << "omega_anchor_cap=" << c.omega_anchor_cap << '\n'
        << "hidden_units=" << c.hidden_units << '\n'
        << "steepness=" << c.steepness << '\n'
        << "use_bias=" << (c.use_bias ? 1 : 0) << '\n'
        << "learning_rate=" << c.learning_rate << '\n'
        << "batch_size=" << c.batch_size << '\n'
        << "epochs=" << c.epochs << '\n'
        << "seed=" << c.seed << '\n'
        << "grad_tolerance=" << c.grad_tolerance << '\n'
        << "adv_fraction=" << c.adv_fraction << '\n';
    return out.str();
}

double cross_entropy(const Vector& outputs, int label) {
    if (label < 0 || label >= outputs.size())
        throw_invalid("label outside the output range");
    const double shift = outputs.maxCoeff();
    double total = 0.0;
    for (Eigen::Index k = 0; k < outputs.size(); ++k)
        total += std::exp(outputs[k] - shift);
    return std::log(total) + shift - outputs[label];
}

Vector cross_entropy_gradient(const Vector& outputs, int label) {
    if (label < 0 || label >= outputs.size())
        throw_invalid("label outside the output range");
    const double shift = outputs.maxCoeff();
    Vector grad = (outputs.array() - shift).exp();
    grad /= grad.sum();
    grad[label] -= 1.0;
    return grad;
}

double omega_via_gradients(const Model& model, const Matrix& anchor_points) {
    if (anchor_points.rows() < 1)
        throw_invalid("anchor set must not be empty");
    const int classes = model.num_classes();
    const auto n = anchor_points.rows();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector x = anchor_points.row(i).transpose();
        std::vector<Vector> grads(static_cast<std::size_t>(classes));
        for (int l = 0; l < classes; ++l)
            grads[static_cast<std::size_t>(l)] = model.input_gradient(x, l);
        for (int l = 0; l < classes; ++l)
            for (int m = 0; m < classes; ++m)
                total += (grads[static_cast<std::size_t>(l)] - grads[static_cast<std::size_t>(m)])
                             .squaredNorm();
    }
    return total / (static_cast<double>(n) * classes * classes);
}

namespace {

// Data-only tables for the kernel regularizer: the coefficient-independent
// pairwise sums over the anchor evaluation points. With these in hand each
// evaluation and gradient is a couple of small matrix products.
struct KernelOmegaTables {
    Matrix t; // n x n

    KernelOmegaTables(const Matrix& anchors, const Matrix& eval_points, double width) {
        const Eigen::Index n = anchors.rows();
        const Eigen::Index m = eval_points.rows();
        const Vector anchor_sq = anchors.rowwise().squaredNorm();
        const Vector eval_sq = eval_points.rowwise().squaredNorm();
        Matrix cross = eval_points * anchors.transpose(); // m x n
        Matrix gram = anchors * anchors.transpose();      // n x n

        // e(i,r) = exp(-width * |x_i - a_r|^2)
        Matrix e(m, n);
        for (Eigen::Index i = 0; i < m; ++i)
            e.row(i) =
                (-width * (eval_sq[i] + anchor_sq.transpose().array() - 2.0 * cross.row(i).array()))
                    .exp();

        const Matrix ge = cross.cwiseProduct(e); // m x n
        Matrix weighted = e;
        for (Eigen::Index i = 0; i < m; ++i)
            weighted.row(i) *= eval_sq[i];

        t.noalias() = e.transpose() * weighted; // sum_i |x_i|^2 e_ir e_is
        t.noalias() -= ge.transpose() * e;      // sum_i <x_i, a_r> e_ir e_is
        t.noalias() -= e.transpose() * ge;      // sum_i <x_i, a_s> e_ir e_is
        t += gram.cwiseProduct(e.transpose() * e);
        t *= 4.0 * width * width;
    }

    double value(const Matrix& coefficients, Eigen::Index m) const {
        const int classes = static_cast<int>(coefficients.rows());
        const Matrix inner = coefficients.transpose() * coefficients; // n x n
        const Vector sums = coefficients.colwise().sum().transpose();
        const double quad = (static_cast<double>(classes) * inner - sums * sums.transpose())
                                .cwiseProduct(t)
                                .sum();
        return 2.0 * quad / (static_cast<double>(m) * classes * classes);
    }

    Matrix gradient(const Matrix& coefficients, Eigen::Index m) const {
        const int classes = static_cast<int>(coefficients.rows());
        const Matrix ct = coefficients * t; // K x n
        const Vector st = t * coefficients.colwise().sum().transpose();
        Matrix grad = static_cast<double>(classes) * ct;
        grad.rowwise() -= st.transpose();
        grad *= 4.0 / (static_cast<double>(m) * classes * classes);
        return grad;
    }
};

} // namespace

double omega_closed_form_kernel(const GaussianKernelModel& model, const Matrix& anchor_points) {
    if (anchor_points.rows() < 1)
        throw_invalid("anchor set must not be empty");
    KernelOmegaTables tables(model.anchors, anchor_points, model.width);
    return tables.value(model.coefficients, anchor_points.rows());
}

Matrix omega_gradient_kernel(const GaussianKernelModel& model, const Matrix& anchor_points) {
    if (anchor_points.rows() < 1)
        throw_invalid("anchor set must not be empty");
    KernelOmegaTables tables(model.anchors, anchor_points, model.width);
    return tables.gradient(model.coefficients, anchor_points.rows());
}

namespace {

struct NetworkOmegaWork {
    double value = 0.0;
    Matrix grad_hidden;
    Matrix grad_output;
    Vector grad_hidden_bias;
};

NetworkOmegaWork network_omega(const OneHiddenLayerModel& model, const Matrix& anchors,
                               bool with_gradients) {
    const Eigen::Index m = anchors.rows();
    const Eigen::Index units = model.hidden_weights.rows();
    const int classes = static_cast<int>(model.output_weights.rows());
    const double scale = 2.0 / (static_cast<double>(m) * classes * classes);

    Matrix z = anchors * model.hidden_weights.transpose(); // m x U
    if (model.hidden_bias.size() != 0)
        z.rowwise() += model.hidden_bias.transpose();
    Matrix sp(m, units), spp(m, units);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index r = 0; r < units; ++r) {
            sp(i, r) = softplus_prime(z(i, r), model.steepness);
            spp(i, r) = softplus_second(z(i, r), model.steepness);
        }
    }

    const Matrix gram = model.hidden_weights * model.hidden_weights.transpose(); // U x U
    const Matrix d = sp.transpose() * sp;                                        // U x U
    const Vector t = model.output_weights.colwise().sum().transpose();           // U
    const Matrix c = static_cast<double>(classes) *
                         (model.output_weights.transpose() * model.output_weights) -
                     t * t.transpose(); // U x U

    NetworkOmegaWork out;
    out.value = scale * c.cwiseProduct(gram).cwiseProduct(d).sum();
    if (!with_gradients)
        return out;

    const Matrix gd = gram.cwiseProduct(d);
    out.grad_output = 2.0 * scale * (static_cast<double>(classes) * model.output_weights * gd);
    out.grad_output.rowwise() -= 2.0 * scale * (gd * t).transpose();

    const Matrix cg = c.cwiseProduct(gram);
    const Matrix mixed = spp.cwiseProduct(sp * cg); // m x U
    out.grad_hidden = 2.0 * scale *
                      (c.cwiseProduct(d) * model.hidden_weights + mixed.transpose() * anchors);
    if (model.hidden_bias.size() != 0)
        out.grad_hidden_bias = 2.0 * scale * mixed.colwise().sum().transpose();
    return out;
}

} // namespace

double omega_closed_form_nn(const OneHiddenLayerModel& model, const Matrix& anchor_points) {
    if (anchor_points.rows() < 1)
        throw_invalid("anchor set must not be empty");
    return network_omega(model, anchor_points, false).value;
}

NetworkOmegaGradient omega_gradient_nn(const OneHiddenLayerModel& model,
                                       const Matrix& anchor_points) {
    if (anchor_points.rows() < 1)
        throw_invalid("anchor set must not be empty");
    NetworkOmegaWork work = network_omega(model, anchor_points, true);
    NetworkOmegaGradient grad;
    grad.hidden_weights = std::move(work.grad_hidden);
    grad.output_weights = std::move(work.grad_output);
    grad.hidden_bias = std::move(work.grad_hidden_bias);
    return grad;
}

double kernel_width_from_knn(const Matrix& points, int neighbors, double scale) {
    const Eigen::Index n = points.rows();
    if (n < 2)
        throw_invalid("need at least two points for the neighbor width rule");
    const int k = std::min<int>(neighbors, static_cast<int>(n - 1));
    const Vector sq = points.rowwise().squaredNorm();
    double total = 0.0;
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector cross = points * points.row(i).transpose();
        for (Eigen::Index j = 0; j < n; ++j)
            dist[static_cast<std::size_t>(j)] =
                std::sqrt(std::max(0.0, sq[i] + sq[j] - 2.0 * cross[j]));
        dist[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
        std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
        total = std::accumulate(dist.begin(), dist.begin() + k, total);
    }
    const double rho = total / (static_cast<double>(n) * k);
    if (rho <= 0.0)
        throw_numeric("degenerate dataset: mean neighbor distance is zero");
    return scale / (rho * rho);
}

namespace {

// Generic first-order minimization of fn: R^m -> (value, gradient into g).
// Either plain backtracking descent or two-loop L-BFGS, both with an Armijo
// line search. Records the per-iteration objective for the report.
struct SmoothProblem {
    std::function<double(const Vector&, Vector&)> eval;
    Eigen::Index size = 0;
    // Invoked at the start point and after every accepted step; lets callers
    // record split loss/regularizer trajectories alongside the objective.
    std::function<void()> on_accept;
};

struct MinimizeResult {
    Vector point;
    std::vector<double> objective_trace;
    double final_value = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    bool diverged = false;
};

MinimizeResult minimize(const SmoothProblem& problem, Vector start, OptimizerKind optimizer,
                        int max_iterations, double tolerance, int history_size) {
    MinimizeResult result;
    Vector x = std::move(start);
    Vector grad(problem.size);
    double value = problem.eval(x, grad);
    if (!std::isfinite(value)) {
        result.diverged = true;
        result.point = x;
        result.final_value = value;
        return result;
    }
    result.objective_trace.push_back(value);
    if (problem.on_accept)
        problem.on_accept();

    std::deque<Vector> s_hist, y_hist;
    Vector prev_x, prev_grad;

    for (int it = 0; it < max_iterations; ++it) {
        result.grad_norm = grad.norm();
        if (result.grad_norm < tolerance) {
            result.converged = true;
            break;
        }

        Vector direction;
        if (optimizer == OptimizerKind::lbfgs && !s_hist.empty()) {
            // Two-loop recursion.
            Vector q = grad;
            const std::size_t h = s_hist.size();
            std::vector<double> alpha(h), rho(h);
            for (std::size_t i = h; i-- > 0;) {
                rho[i] = 1.0 / y_hist[i].dot(s_hist[i]);
                alpha[i] = rho[i] * s_hist[i].dot(q);
                q -= alpha[i] * y_hist[i];
            }
            const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
            for (std::size_t i = 0; i < h; ++i) {
                const double beta = rho[i] * y_hist[i].dot(q);
                q += (alpha[i] - beta) * s_hist[i];
            }
            direction = -q;
            if (direction.dot(grad) > -1e-12 * direction.norm() * result.grad_norm) {
                direction = -grad; // not a descent direction, restart
                s_hist.clear();
                y_hist.clear();
            }
        } else {
            direction = -grad;
        }

        // Armijo backtracking with halving.
        const double slope = direction.dot(grad);
        double step = optimizer == OptimizerKind::lbfgs && !s_hist.empty()
                          ? 1.0
                          : 1.0 / std::max(1.0, result.grad_norm);
        bool accepted = false;
        Vector trial;
        Vector trial_grad(problem.size);
        double trial_value = 0.0;
        for (int half = 0; half < 60; ++half) {
            trial = x + step * direction;
            trial_value = problem.eval(trial, trial_grad);
            if (std::isfinite(trial_value) && trial_value <= value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            break; // flat to machine precision along this direction

        prev_x = x;
        prev_grad = grad;
        x = trial;
        value = trial_value;
        grad = trial_grad;
        result.iterations = it + 1;
        result.objective_trace.push_back(value);
        if (problem.on_accept)
            problem.on_accept();

        if (optimizer == OptimizerKind::lbfgs) {
            Vector s = x - prev_x;
            Vector y = grad - prev_grad;
            if (y.dot(s) > 1e-12 * s.norm() * y.norm()) {
                s_hist.push_back(std::move(s));
                y_hist.push_back(std::move(y));
                if (static_cast<int>(s_hist.size()) > history_size) {
                    s_hist.pop_front();
                    y_hist.pop_front();
                }
            }
        }
    }

    result.point = std::move(x);
    result.final_value = value;
    result.grad_norm = grad.norm();
    if (!std::isfinite(value))
        result.diverged = true;
    return result;
}

Matrix compute_kernel_matrix(const Matrix& anchors, const Matrix& points, double width) {
    const Vector anchor_sq = anchors.rowwise().squaredNorm();
    const Vector point_sq = points.rowwise().squaredNorm();
    Matrix cross = anchors * points.transpose(); // n x m
    Matrix k(anchors.rows(), points.rows());
    for (Eigen::Index r = 0; r < anchors.rows(); ++r)
        k.row(r) =
            (-width * (anchor_sq[r] + point_sq.transpose().array() - 2.0 * cross.row(r).array()))
                .exp();
    return k;
}

} // namespace

std::pair<Model, TrainReport> train_kernel(const LabeledDataset& train_set,
                                           const TrainConfig& config,
                                           const LabeledDataset* test_set) {
    const auto started = std::chrono::steady_clock::now();
    config.validate();
    train_set.validate();
    const Eigen::Index n = train_set.size();
    const int classes = train_set.num_classes;
    const double width =
        kernel_width_from_knn(train_set.points, config.knn_neighbors, config.width_scale);

    const Matrix gram = compute_kernel_matrix(train_set.points, train_set.points, width);

    // Anchor subsample for the regularizer tables when the set is large.
    Matrix omega_anchors = train_set.points;
    if (config.regularizer == RegularizerKind::cross_lipschitz && n > config.omega_anchor_cap) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        std::mt19937 rng(config.seed + 17u);
        std::shuffle(idx.begin(), idx.end(), rng);
        omega_anchors.resize(config.omega_anchor_cap, train_set.dim());
        for (Eigen::Index i = 0; i < config.omega_anchor_cap; ++i)
            omega_anchors.row(i) = train_set.points.row(idx[static_cast<std::size_t>(i)]);
    }
    std::unique_ptr<KernelOmegaTables> tables;
    if (config.regularizer == RegularizerKind::cross_lipschitz)
        tables = std::make_unique<KernelOmegaTables>(train_set.points, omega_anchors, width);

    double last_loss = 0.0, last_omega = 0.0;
    SmoothProblem problem;
    problem.size = static_cast<Eigen::Index>(classes) * n;
    problem.eval = [&](const Vector& theta, Vector& grad_out) {
        const Eigen::Map<const Matrix> coeff(theta.data(), classes, n);
        const Matrix outputs = coeff * gram; // K x n (gram is symmetric)
        double loss = 0.0;
        Matrix p(classes, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Vector column = outputs.col(i);
            loss += cross_entropy(column, train_set.labels[static_cast<std::size_t>(i)]);
            p.col(i) = cross_entropy_gradient(column, train_set.labels[static_cast<std::size_t>(i)]);
        }
        loss /= static_cast<double>(n);
        Matrix grad = (p * gram) / static_cast<double>(n);

        double omega = 0.0;
        if (config.regularizer == RegularizerKind::weight_decay) {
            omega = (coeff * gram).cwiseProduct(coeff).sum();
            grad += config.lambda * 2.0 * coeff * gram;
        } else if (config.regularizer == RegularizerKind::cross_lipschitz) {
            omega = tables->value(coeff, omega_anchors.rows());
            grad += config.lambda * tables->gradient(coeff, omega_anchors.rows());
        }
        last_loss = loss;
        last_omega = omega;
        grad_out = Eigen::Map<Vector>(grad.data(), grad.size());
        return loss + config.lambda * omega;
    };
    TrainReport report;
    problem.on_accept = [&] {
        report.loss_per_epoch.push_back(last_loss);
        report.omega_per_epoch.push_back(last_omega);
    };

    const double tolerance =
        config.grad_tolerance >= 0.0 ? config.grad_tolerance : 1e-5 * static_cast<double>(n);
    MinimizeResult opt = minimize(problem, Vector::Zero(problem.size), config.optimizer,
                                  config.epochs, tolerance, config.lbfgs_history);

    report.objective_per_epoch = opt.objective_trace;
    report.final_objective = opt.final_value;
    report.gradient_norm_at_exit = opt.grad_norm;
    report.epochs_run = opt.iterations;
    report.converged = opt.converged;
    report.diverged = opt.diverged;
    report.config_echo = train_config_echo(config);
    if (opt.diverged)
        throw_numeric("kernel training diverged: objective became non-finite");

    GaussianKernelModel fitted;
    fitted.anchors = train_set.points;
    fitted.width = width;
    fitted.coefficients = Eigen::Map<const Matrix>(opt.point.data(), classes, n);
    Model model(std::move(fitted));

    report.train_error = classification_error(model, train_set);
    if (test_set)
        report.test_error = classification_error(model, *test_set);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(model), std::move(report)};
}

std::pair<Model, TrainReport> train_network(const LabeledDataset& train_set,
                                            const TrainConfig& config,
                                            const LabeledDataset* test_set) {
    const auto started = std::chrono::steady_clock::now();
    config.validate();
    train_set.validate();
    const Eigen::Index n = train_set.size();
    const Eigen::Index d = train_set.dim();
    const int classes = train_set.num_classes;
    const Eigen::Index units = config.hidden_units;

    // Scaled-uniform init, draws in a fixed order for reproducibility.
    std::mt19937 rng(config.seed);
    auto uniform_init = [&rng](Matrix& m, double limit) {
        std::uniform_real_distribution<double> u(-limit, limit);
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                m(r, c) = u(rng);
    };
    OneHiddenLayerModel net;
    net.steepness = config.steepness;
    net.hidden_weights.resize(units, d);
    uniform_init(net.hidden_weights, std::sqrt(6.0 / static_cast<double>(d + units)));
    net.output_weights.resize(classes, units);
    uniform_init(net.output_weights, std::sqrt(6.0 / static_cast<double>(units + classes)));
    if (config.use_bias) {
        net.hidden_bias = Vector::Zero(units);
        net.output_bias = Vector::Zero(classes);
    }

    TrainReport report;
    report.config_echo = train_config_echo(config);

    const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, n);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});

    BoundarySearchOptions adv_options;
    adv_options.bisection_iterations = 12; // cheap inner attack during training
    adv_options.expansion_limit = 8;

    auto epoch_metrics = [&](const OneHiddenLayerModel& m) {
        Model wrapped(m);
        double loss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            loss += cross_entropy(wrapped.outputs(train_set.points.row(i).transpose()),
                                  train_set.labels[static_cast<std::size_t>(i)]);
        loss /= static_cast<double>(n);
        double omega = 0.0;
        if (config.regularizer == RegularizerKind::cross_lipschitz)
            omega = omega_closed_form_nn(m, train_set.points);
        else if (config.regularizer == RegularizerKind::weight_decay)
            omega = m.hidden_weights.squaredNorm() + m.output_weights.squaredNorm();
        return std::make_pair(loss, omega);
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(perm.begin(), perm.end(), rng);
        for (Eigen::Index offset = 0; offset + batch <= n; offset += batch) {
            Matrix xb(batch, d);
            std::vector<int> yb(static_cast<std::size_t>(batch));
            for (Eigen::Index b = 0; b < batch; ++b) {
                xb.row(b) = train_set.points.row(perm[static_cast<std::size_t>(offset + b)]);
                yb[static_cast<std::size_t>(b)] =
                    train_set.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(offset + b)])];
            }
            if (config.adv_fraction > 0.0) {
                const Eigen::Index replace =
                    static_cast<Eigen::Index>(std::ceil(config.adv_fraction * batch));
                Model current(net);
                for (Eigen::Index b = 0; b < replace; ++b) {
                    const Vector x = xb.row(b).transpose();
                    const AdversarialSample sample =
                        attack_boundary_search(current, x, Norm::linf, adv_options);
                    if (sample.feasible)
                        xb.row(b) = (x + sample.delta).transpose();
                }
            }

            // Forward pass.
            Matrix z = xb * net.hidden_weights.transpose();
            if (config.use_bias)
                z.rowwise() += net.hidden_bias.transpose();
            Matrix h(batch, units), sp(batch, units);
            for (Eigen::Index b = 0; b < batch; ++b) {
                for (Eigen::Index r = 0; r < units; ++r) {
                    h(b, r) = softplus(z(b, r), net.steepness);
                    sp(b, r) = softplus_prime(z(b, r), net.steepness);
                }
            }
            Matrix outputs = h * net.output_weights.transpose();
            if (config.use_bias)
                outputs.rowwise() += net.output_bias.transpose();

            Matrix p(batch, classes);
            for (Eigen::Index b = 0; b < batch; ++b)
                p.row(b) =
                    cross_entropy_gradient(outputs.row(b).transpose(), yb[static_cast<std::size_t>(b)])
                        .transpose();
            p /= static_cast<double>(batch);

            Matrix grad_w = p.transpose() * h;                      // K x U
            Matrix hidden_back = (p * net.output_weights).cwiseProduct(sp); // B x U
            Matrix grad_u = hidden_back.transpose() * xb;           // U x d
            Vector grad_hb, grad_ob;
            if (config.use_bias) {
                grad_ob = p.colwise().sum().transpose();
                grad_hb = hidden_back.colwise().sum().transpose();
            }

            if (config.regularizer == RegularizerKind::weight_decay) {
                grad_w += config.lambda * 2.0 * net.output_weights;
                grad_u += config.lambda * 2.0 * net.hidden_weights;
            } else if (config.regularizer == RegularizerKind::cross_lipschitz) {
                const NetworkOmegaGradient og = omega_gradient_nn(net, xb);
                grad_w += config.lambda * og.output_weights;
                grad_u += config.lambda * og.hidden_weights;
                if (config.use_bias && og.hidden_bias.size() != 0)
                    grad_hb += config.lambda * og.hidden_bias;
            }

            net.output_weights -= config.learning_rate * grad_w;
            net.hidden_weights -= config.learning_rate * grad_u;
            if (config.use_bias) {
                net.output_bias -= config.learning_rate * grad_ob;
                net.hidden_bias -= config.learning_rate * grad_hb;
            }
        }

        const auto [loss, omega] = epoch_metrics(net);
        report.loss_per_epoch.push_back(loss);
        report.omega_per_epoch.push_back(omega);
        report.objective_per_epoch.push_back(loss + config.lambda * omega);
        report.epochs_run = epoch + 1;
        if (!std::isfinite(loss)) {
            report.diverged = true;
            throw_numeric("network training diverged at epoch " + std::to_string(epoch));
        }
    }

    report.final_objective = report.objective_per_epoch.back();

    // Full-batch gradient norm at exit, for the report.
    {
        Matrix z = train_set.points * net.hidden_weights.transpose();
        if (config.use_bias)
            z.rowwise() += net.hidden_bias.transpose();
        Matrix h(n, units), sp(n, units);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index r = 0; r < units; ++r) {
                h(i, r) = softplus(z(i, r), net.steepness);
                sp(i, r) = softplus_prime(z(i, r), net.steepness);
            }
        }
        Matrix outputs = h * net.output_weights.transpose();
        if (config.use_bias)
            outputs.rowwise() += net.output_bias.transpose();
        Matrix p(n, classes);
        for (Eigen::Index i = 0; i < n; ++i)
            p.row(i) = cross_entropy_gradient(outputs.row(i).transpose(),
                                              train_set.labels[static_cast<std::size_t>(i)])
                           .transpose();
        p /= static_cast<double>(n);
        Matrix grad_w = p.transpose() * h;
        Matrix hidden_back = (p * net.output_weights).cwiseProduct(sp);
        Matrix grad_u = hidden_back.transpose() * train_set.points;
        if (config.regularizer == RegularizerKind::weight_decay) {
            grad_w += config.lambda * 2.0 * net.output_weights;
            grad_u += config.lambda * 2.0 * net.hidden_weights;
        } else if (config.regularizer == RegularizerKind::cross_lipschitz) {
            const NetworkOmegaGradient og = omega_gradient_nn(net, train_set.points);
            grad_w += config.lambda * og.output_weights;
            grad_u += config.lambda * og.hidden_weights;
        }
        report.gradient_norm_at_exit =
            std::sqrt(grad_w.squaredNorm() + grad_u.squaredNorm());
    }

    Model model(std::move(net));
    report.train_error = classification_error(model, train_set);
    if (test_set)
        report.test_error = classification_error(model, *test_set);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(model), std::move(report)};
}

std::pair<Model, TrainReport> train(const LabeledDataset& train_set, const TrainConfig& config,
                                    const LabeledDataset* test_set) {
    if (config.model == ModelKind::kernel)
        return train_kernel(train_set, config, test_set);
    return train_network(train_set, config, test_set);
}

} // namespace certilip
