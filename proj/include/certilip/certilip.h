/*
 * certilip - robustness guarantees and box-constrained adversarial samples
 * for linear, Gaussian-kernel and one-hidden-layer softplus classifiers.
 *
 * C interface of the shared library. All objects are opaque handles owned by
 * the library; every function returns a status code and leaves a descriptive
 * message retrievable through certilip_last_error() (thread-local). Strings
 * returned through char** are heap-allocated and must be released with
 * certilip_string_free().
 */
#ifndef CERTILIP_H
#define CERTILIP_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CERTILIP_API __declspec(dllexport)
#else
#define CERTILIP_API __attribute__((visibility("default")))
#endif

typedef enum certilip_status {
    CERTILIP_OK = 0,
    CERTILIP_ERR_INVALID_ARGUMENT = 1,
    CERTILIP_ERR_DIMENSION = 2,
    CERTILIP_ERR_IO = 3,
    CERTILIP_ERR_PARSE = 4,
    CERTILIP_ERR_NUMERIC = 5,
    CERTILIP_ERR_UNSUPPORTED = 6,
    CERTILIP_ERR_INTERNAL = 7
} certilip_status;

typedef struct certilip_dataset certilip_dataset;
typedef struct certilip_model certilip_model;

CERTILIP_API const char* certilip_version(void);

/* Message describing the most recent failure on this thread. */
CERTILIP_API const char* certilip_last_error(void);

CERTILIP_API void certilip_string_free(char* s);
CERTILIP_API void certilip_dataset_free(certilip_dataset* dataset);
CERTILIP_API void certilip_model_free(certilip_model* model);

/* ---- datasets ------------------------------------------------------- */

/* CSV rows are "label,f1,...,fd"; features must lie in [0,1]. */
CERTILIP_API certilip_status certilip_dataset_load_csv(const char* path, certilip_dataset** out);

/* IDX image/label pair; pixels are scaled into [0,1]. */
CERTILIP_API certilip_status certilip_dataset_load_idx(const char* images_path,
                                                       const char* labels_path,
                                                       certilip_dataset** out);

/* kind is "blobs", "moons" or "xor"; classes is ignored for the 2-class
 * layouts. Deterministic in the seed. */
CERTILIP_API certilip_status certilip_dataset_generate(const char* kind, long n, long d,
                                                       int classes, unsigned seed, double noise,
                                                       certilip_dataset** out);

CERTILIP_API certilip_status certilip_dataset_save_csv(const certilip_dataset* dataset,
                                                       const char* path);

CERTILIP_API certilip_status certilip_dataset_info(const certilip_dataset* dataset, long* n,
                                                   long* d, int* classes);

CERTILIP_API certilip_status certilip_dataset_subsample(const certilip_dataset* dataset,
                                                        long count, unsigned seed,
                                                        certilip_dataset** out);

/* Keeps the listed classes and relabels them 0..count-1. */
CERTILIP_API certilip_status certilip_dataset_select_classes(const certilip_dataset* dataset,
                                                             const int* classes, int count,
                                                             certilip_dataset** out);

/* Copies row `index` into features (length features_len == d). */
CERTILIP_API certilip_status certilip_dataset_row(const certilip_dataset* dataset, long index,
                                                  double* features, long features_len,
                                                  int* label);

/* ---- models --------------------------------------------------------- */

CERTILIP_API certilip_status certilip_model_load(const char* path, certilip_model** out);
CERTILIP_API certilip_status certilip_model_save(const certilip_model* model, const char* path);

/* kind_buf receives "linear", "kernel" or "one_hidden_layer". */
CERTILIP_API certilip_status certilip_model_info(const certilip_model* model, char* kind_buf,
                                                 size_t kind_buf_len, long* dim, int* classes);

/* margins may be NULL; otherwise it must hold `classes` doubles. */
CERTILIP_API certilip_status certilip_model_predict(const certilip_model* model, const double* x,
                                                    long d, int* predicted, double* margins);

CERTILIP_API certilip_status certilip_model_input_gradient(const certilip_model* model,
                                                           const double* x, long d, int target,
                                                           double* gradient);

CERTILIP_API certilip_status certilip_model_create_linear(int classes, long dim,
                                                          const double* weights_row_major,
                                                          const double* bias_or_null,
                                                          certilip_model** out);

CERTILIP_API certilip_status certilip_model_create_kernel(int classes, long dim, long anchors,
                                                          const double* anchors_row_major,
                                                          const double* coefficients_row_major,
                                                          double width, certilip_model** out);

CERTILIP_API certilip_status certilip_model_create_network(
    int classes, long dim, long hidden_units, const double* hidden_row_major,
    const double* output_row_major, double steepness, const double* hidden_bias_or_null,
    const double* output_bias_or_null, certilip_model** out);

CERTILIP_API certilip_status certilip_model_error_rate(const certilip_model* model,
                                                       const certilip_dataset* dataset,
                                                       double* error);

/* ---- training ------------------------------------------------------- */

/* config_text is key=value lines (see the README for the key list).
 * report_json_out may be NULL. */
CERTILIP_API certilip_status certilip_train(const certilip_dataset* train_set,
                                            const certilip_dataset* test_or_null,
                                            const char* config_text, certilip_model** model_out,
                                            char** report_json_out);

/* ---- certification -------------------------------------------------- */

/* backend: "local" (family default ball bound), "global", "linear", or an
 * exact backend name. p: "1", "2" or "inf" (nonlinear backends need "2").
 * jsonl_out gets one guarantee report per line, in dataset order. */
CERTILIP_API certilip_status certilip_certify(const certilip_model* model,
                                              const certilip_dataset* dataset,
                                              const char* backend, const char* p, int workers,
                                              char** jsonl_out, char** summary_json_out);

/* Single-instance guarantee, reported as one JSON object. */
CERTILIP_API certilip_status certilip_guarantee(const certilip_model* model, const double* x,
                                                long d, const char* backend, const char* p,
                                                char** json_out);

/* ---- attacks --------------------------------------------------------- */

/* mode: "boundary" (gap-scaling search on the true model) or "linearized"
 * (single solve of the linearized problem). jsonl_out gets one record per
 * instance; the summary aggregates correctly classified instances only. */
CERTILIP_API certilip_status certilip_attack(const certilip_model* model,
                                             const certilip_dataset* dataset, const char* p,
                                             const char* mode, int workers, char** jsonl_out,
                                             char** summary_json_out);

/* ---- analysis -------------------------------------------------------- */

/* Ball-local vs global guarantee ratios for a one-hidden-layer model. */
CERTILIP_API certilip_status certilip_local_global_ratio(const certilip_model* model,
                                                         const certilip_dataset* dataset,
                                                         int workers, char** json_out);

/* Randomized spot checks of the fast solvers against the shipped
 * brute-force oracles; returns a JSON summary with per-check counts. */
CERTILIP_API certilip_status certilip_verify(unsigned seed, int trials, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* CERTILIP_H */
