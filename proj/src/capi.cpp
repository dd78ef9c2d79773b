#include "certilip/certilip.h"

#include <cstring>
#include <new>
#include <string>

#include "certilip/attack.hpp"
#include "certilip/certify.hpp"
#include "certilip/dataset.hpp"
#include "certilip/dataset_io.hpp"
#include "certilip/errors.hpp"
#include "certilip/model.hpp"
#include "certilip/model_io.hpp"
#include "certilip/parallel.hpp"
#include "certilip/reports.hpp"
#include "certilip/train.hpp"
#include "certilip/verify.hpp"

using namespace certilip;

struct certilip_dataset {
    LabeledDataset data;
};

struct certilip_model {
    Model model;
};

namespace {

thread_local std::string g_last_error;

certilip_status status_of(const Error& e) {
    switch (e.code()) {
    case ErrorCode::invalid_argument:
        return CERTILIP_ERR_INVALID_ARGUMENT;
    case ErrorCode::dimension_mismatch:
        return CERTILIP_ERR_DIMENSION;
    case ErrorCode::io:
        return CERTILIP_ERR_IO;
    case ErrorCode::parse:
        return CERTILIP_ERR_PARSE;
    case ErrorCode::numeric:
        return CERTILIP_ERR_NUMERIC;
    case ErrorCode::unsupported:
        return CERTILIP_ERR_UNSUPPORTED;
    }
    return CERTILIP_ERR_INTERNAL;
}

template <typename Fn> certilip_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return CERTILIP_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return CERTILIP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CERTILIP_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return CERTILIP_ERR_INTERNAL;
    }
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool condition, const char* message) {
    if (!condition)
        throw_invalid(message);
}

Norm norm_from(const char* p) {
    require(p != nullptr, "norm order must not be null");
    return parse_norm(p);
}

BallBoundKind backend_from(const char* name, const Model& model) {
    require(name != nullptr, "backend must not be null");
    const std::string s(name);
    if (s == "local")
        return default_backend(model);
    return parse_backend(s);
}

} // namespace

extern "C" {

const char* certilip_version(void) { return "1.0.0"; }

const char* certilip_last_error(void) { return g_last_error.c_str(); }

void certilip_string_free(char* s) { delete[] s; }

void certilip_dataset_free(certilip_dataset* dataset) { delete dataset; }

void certilip_model_free(certilip_model* model) { delete model; }

certilip_status certilip_dataset_load_csv(const char* path, certilip_dataset** out) {
    return guarded([&] {
        require(path && out, "path and out must not be null");
        *out = new certilip_dataset{load_dataset_csv(path)};
    });
}

certilip_status certilip_dataset_load_idx(const char* images_path, const char* labels_path,
                                          certilip_dataset** out) {
    return guarded([&] {
        require(images_path && labels_path && out, "paths and out must not be null");
        *out = new certilip_dataset{load_dataset_idx(images_path, labels_path)};
    });
}

certilip_status certilip_dataset_generate(const char* kind, long n, long d, int classes,
                                          unsigned seed, double noise, certilip_dataset** out) {
    return guarded([&] {
        require(kind && out, "kind and out must not be null");
        *out = new certilip_dataset{
            generate_synthetic(parse_synthetic_kind(kind), n, d, classes, seed, noise)};
    });
}

certilip_status certilip_dataset_save_csv(const certilip_dataset* dataset, const char* path) {
    return guarded([&] {
        require(dataset && path, "dataset and path must not be null");
        save_dataset_csv(dataset->data, path);
    });
}

certilip_status certilip_dataset_info(const certilip_dataset* dataset, long* n, long* d,
                                      int* classes) {
    return guarded([&] {
        require(dataset != nullptr, "dataset must not be null");
        if (n)
            *n = static_cast<long>(dataset->data.size());
        if (d)
            *d = static_cast<long>(dataset->data.dim());
        if (classes)
            *classes = dataset->data.num_classes;
    });
}

certilip_status certilip_dataset_subsample(const certilip_dataset* dataset, long count,
                                           unsigned seed, certilip_dataset** out) {
    return guarded([&] {
        require(dataset && out, "dataset and out must not be null");
        *out = new certilip_dataset{dataset->data.subsample(count, seed)};
    });
}

certilip_status certilip_dataset_select_classes(const certilip_dataset* dataset,
                                                const int* classes, int count,
                                                certilip_dataset** out) {
    return guarded([&] {
        require(dataset && classes && out, "dataset, classes and out must not be null");
        require(count > 0, "class count must be positive");
        *out = new certilip_dataset{
            dataset->data.select_classes(std::vector<int>(classes, classes + count))};
    });
}

certilip_status certilip_dataset_row(const certilip_dataset* dataset, long index,
                                     double* features, long features_len, int* label) {
    return guarded([&] {
        require(dataset && features, "dataset and features must not be null");
        require(index >= 0 && index < dataset->data.size(), "row index out of range");
        require(features_len == dataset->data.dim(), "features buffer length must equal d");
        Eigen::Map<Vector>(features, features_len) =
            dataset->data.points.row(index).transpose();
        if (label)
            *label = dataset->data.labels[static_cast<std::size_t>(index)];
    });
}

certilip_status certilip_model_load(const char* path, certilip_model** out) {
    return guarded([&] {
        require(path && out, "path and out must not be null");
        *out = new certilip_model{load_model_file(path)};
    });
}

certilip_status certilip_model_save(const certilip_model* model, const char* path) {
    return guarded([&] {
        require(model && path, "model and path must not be null");
        save_model_file(model->model, path);
    });
}

certilip_status certilip_model_info(const certilip_model* model, char* kind_buf,
                                    size_t kind_buf_len, long* dim, int* classes) {
    return guarded([&] {
        require(model != nullptr, "model must not be null");
        if (kind_buf) {
            const std::string kind = model_kind_name(model->model.kind());
            require(kind_buf_len > kind.size(), "kind buffer too small");
            std::memcpy(kind_buf, kind.c_str(), kind.size() + 1);
        }
        if (dim)
            *dim = static_cast<long>(model->model.dim());
        if (classes)
            *classes = model->model.num_classes();
    });
}

certilip_status certilip_model_predict(const certilip_model* model, const double* x, long d,
                                       int* predicted, double* margins) {
    return guarded([&] {
        require(model && x && predicted, "model, x and predicted must not be null");
        const Prediction pred =
            model->model.predict(Eigen::Map<const Vector>(x, d));
        *predicted = pred.predicted;
        if (margins)
            Eigen::Map<Vector>(margins, pred.margins.size()) = pred.margins;
    });
}

certilip_status certilip_model_input_gradient(const certilip_model* model, const double* x,
                                              long d, int target, double* gradient) {
    return guarded([&] {
        require(model && x && gradient, "model, x and gradient must not be null");
        const Vector grad =
            model->model.input_gradient(Eigen::Map<const Vector>(x, d), target);
        Eigen::Map<Vector>(gradient, grad.size()) = grad;
    });
}

certilip_status certilip_model_create_linear(int classes, long dim,
                                             const double* weights_row_major,
                                             const double* bias_or_null, certilip_model** out) {
    return guarded([&] {
        require(weights_row_major && out, "weights and out must not be null");
        LinearModel m;
        m.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                   Eigen::RowMajor>>(weights_row_major, classes,
                                                                     dim);
        if (bias_or_null)
            m.bias = Eigen::Map<const Vector>(bias_or_null, classes);
        *out = new certilip_model{Model(std::move(m))};
    });
}

certilip_status certilip_model_create_kernel(int classes, long dim, long anchors,
                                             const double* anchors_row_major,
                                             const double* coefficients_row_major, double width,
                                             certilip_model** out) {
    return guarded([&] {
        require(anchors_row_major && coefficients_row_major && out,
                "anchors, coefficients and out must not be null");
        GaussianKernelModel m;
        m.width = width;
        m.anchors = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                   Eigen::RowMajor>>(anchors_row_major, anchors,
                                                                     dim);
        m.coefficients =
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>(coefficients_row_major, classes,
                                                             anchors);
        *out = new certilip_model{Model(std::move(m))};
    });
}

certilip_status certilip_model_create_network(int classes, long dim, long hidden_units,
                                              const double* hidden_row_major,
                                              const double* output_row_major, double steepness,
                                              const double* hidden_bias_or_null,
                                              const double* output_bias_or_null,
                                              certilip_model** out) {
    return guarded([&] {
        require(hidden_row_major && output_row_major && out,
                "weight blocks and out must not be null");
        OneHiddenLayerModel m;
        m.steepness = steepness;
        m.hidden_weights =
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>(hidden_row_major, hidden_units, dim);
        m.output_weights =
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>(output_row_major, classes,
                                                             hidden_units);
        if (hidden_bias_or_null)
            m.hidden_bias = Eigen::Map<const Vector>(hidden_bias_or_null, hidden_units);
        if (output_bias_or_null)
            m.output_bias = Eigen::Map<const Vector>(output_bias_or_null, classes);
        *out = new certilip_model{Model(std::move(m))};
    });
}

certilip_status certilip_model_error_rate(const certilip_model* model,
                                          const certilip_dataset* dataset, double* error) {
    return guarded([&] {
        require(model && dataset && error, "model, dataset and error must not be null");
        *error = classification_error(model->model, dataset->data);
    });
}

certilip_status certilip_train(const certilip_dataset* train_set,
                               const certilip_dataset* test_or_null, const char* config_text,
                               certilip_model** model_out, char** report_json_out) {
    return guarded([&] {
        require(train_set && config_text && model_out,
                "train_set, config_text and model_out must not be null");
        const TrainConfig config = parse_train_config(config_text);
        auto [model, report] =
            train(train_set->data, config, test_or_null ? &test_or_null->data : nullptr);
        *model_out = new certilip_model{std::move(model)};
        if (report_json_out)
            *report_json_out = copy_string(train_report_to_json(report));
    });
}

certilip_status certilip_certify(const certilip_model* model, const certilip_dataset* dataset,
                                 const char* backend, const char* p, int workers,
                                 char** jsonl_out, char** summary_json_out) {
    return guarded([&] {
        require(model && dataset, "model and dataset must not be null");
        const Norm norm = norm_from(p);
        const BallBoundKind kind = backend_from(backend, model->model);
        const auto reports = certify_dataset(model->model, dataset->data, kind, norm, workers);
        if (jsonl_out)
            *jsonl_out = copy_string(guarantees_to_jsonl(reports));
        if (summary_json_out)
            *summary_json_out = copy_string(certify_summary_to_json(summarize_guarantees(reports)));
    });
}

certilip_status certilip_guarantee(const certilip_model* model, const double* x, long d,
                                   const char* backend, const char* p, char** json_out) {
    return guarded([&] {
        require(model && x && json_out, "model, x and json_out must not be null");
        const GuaranteeReport report =
            guarantee(model->model, Eigen::Map<const Vector>(x, d),
                      backend_from(backend, model->model), norm_from(p));
        *json_out = copy_string(guarantee_to_json(report));
    });
}

certilip_status certilip_attack(const certilip_model* model, const certilip_dataset* dataset,
                                const char* p, const char* mode, int workers, char** jsonl_out,
                                char** summary_json_out) {
    return guarded([&] {
        require(model && dataset && mode, "model, dataset and mode must not be null");
        const Norm norm = norm_from(p);
        const std::string mode_name(mode);
        std::vector<AdversarialSample> samples;
        if (mode_name == "boundary") {
            const ResistanceSummary summary =
                adversarial_resistance(model->model, dataset->data, norm, workers, &samples);
            if (summary_json_out)
                *summary_json_out = copy_string(resistance_summary_to_json(summary));
        } else if (mode_name == "linearized") {
            samples.resize(static_cast<std::size_t>(dataset->data.size()));
            parallel_for_indexed(samples.size(), workers, [&](std::size_t i) {
                const Vector x =
                    dataset->data.points.row(static_cast<Eigen::Index>(i)).transpose();
                samples[i] = attack_linearized(model->model, x, norm);
            });
            if (summary_json_out)
                *summary_json_out = copy_string("{}");
        } else {
            throw_invalid("mode must be 'boundary' or 'linearized'");
        }
        if (jsonl_out)
            *jsonl_out = copy_string(attacks_to_jsonl(samples));
    });
}

certilip_status certilip_local_global_ratio(const certilip_model* model,
                                            const certilip_dataset* dataset, int workers,
                                            char** json_out) {
    return guarded([&] {
        require(model && dataset && json_out, "model, dataset and json_out must not be null");
        const RatioSummary summary = local_global_ratio(model->model, dataset->data, workers);
        *json_out = copy_string(ratio_summary_to_json(summary));
    });
}

certilip_status certilip_verify(unsigned seed, int trials, char** json_out) {
    return guarded([&] {
        require(json_out != nullptr, "json_out must not be null");
        const VerificationResult result = run_verification(seed, trials);
        *json_out = copy_string(verification_to_json(result));
        if (!result.all_passed())
            throw_numeric("verification found disagreements; see the JSON report");
    });
}

} // extern "C"
