#ifndef NOISESCOPE_NOISESCOPE_H
#define NOISESCOPE_NOISESCOPE_H

/* C interface to the noisescope library.
 *
 * Conventions:
 *   - Every function returns an ns_status (NS_OK on success); on failure
 *     ns_last_error() describes the problem for the calling thread.
 *   - Objects are opaque handles created into an out-parameter and released
 *     with the matching *_free function.  Handles are never shared between
 *     calls that run concurrently on different threads unless stated.
 *   - Returned char* strings are owned by the caller; release them with
 *     ns_string_free.  ns_version/ns_last_error return static storage.
 *   - Structured inputs and outputs (noise models, training options, metric
 *     reports, experiment configs) travel as JSON documents; schemas are
 *     documented in the README.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#if defined(NOISESCOPE_BUILD)
#define NS_API __declspec(dllexport)
#else
#define NS_API __declspec(dllimport)
#endif
#else
#define NS_API __attribute__((visibility("default")))
#endif

typedef int32_t ns_status;

#define NS_OK 0
#define NS_ERR_INVALID_ARGUMENT 1
#define NS_ERR_DOMAIN 2
#define NS_ERR_CONFIG 3
#define NS_ERR_EVALUATION 4
#define NS_ERR_CAPABILITY 5
#define NS_ERR_REJECTION_LIMIT 6
#define NS_ERR_IO 7
#define NS_ERR_PARSE 8
#define NS_ERR_INTERNAL 9

#define NS_LABELS_CLEAN 0
#define NS_LABELS_NOISY 1

#define NS_METHOD_IGNORE 0
#define NS_METHOD_HEDGE 1

#define NS_DRAW_TRUE 0
#define NS_DRAW_SAMPLED 1
#define NS_DRAW_MLE 2

#define NS_CONFIDENCE_AMBIGUITY 0
#define NS_CONFIDENCE_DISAGREEMENT 1
#define NS_CONFIDENCE_PROBABILITY 2

typedef struct ns_dataset ns_dataset;
typedef struct ns_noise_model ns_noise_model;
typedef struct ns_posterior ns_posterior;
typedef struct ns_draw ns_draw;
typedef struct ns_model ns_model;
typedef struct ns_ensemble ns_ensemble;

NS_API const char* ns_version(void);
NS_API const char* ns_last_error(void);
NS_API void ns_string_free(char* text);

/* ---- datasets ---- */

/* features: n x d row-major; labels: n bytes of 0/1; groups: n ids or NULL. */
NS_API ns_status ns_dataset_create(const double* features, int64_t n, int64_t d,
                                   const int8_t* labels, const int32_t* groups,
                                   int32_t label_kind, ns_dataset** out);
NS_API ns_status ns_dataset_read_csv(const char* path, int32_t label_kind, ns_dataset** out);
NS_API ns_status ns_dataset_write_csv(const ns_dataset* data, const char* path);
NS_API ns_status ns_dataset_rows(const ns_dataset* data, int64_t* out);
NS_API ns_status ns_dataset_cols(const ns_dataset* data, int64_t* out);
NS_API ns_status ns_dataset_label_kind(const ns_dataset* data, int32_t* out);
NS_API ns_status ns_dataset_copy_labels(const ns_dataset* data, int8_t* out);
NS_API ns_status ns_dataset_copy_features(const ns_dataset* data, double* out);
NS_API ns_status ns_dataset_with_labels(const ns_dataset* data, const int8_t* labels,
                                        int32_t label_kind, ns_dataset** out);
NS_API ns_status ns_dataset_split(const ns_dataset* data, double train_fraction, uint64_t seed,
                                  ns_dataset** train, ns_dataset** test);
NS_API void ns_dataset_free(ns_dataset* data);

/* spec_json: synthetic generator spec; bayes_error may be NULL. */
NS_API ns_status ns_synthetic_generate(const char* spec_json, uint64_t seed, ns_dataset** out,
                                       double* bayes_error);

/* ---- noise models and posteriors ---- */

NS_API ns_status ns_noise_model_from_json(const char* json_text, ns_noise_model** out);
NS_API ns_status ns_noise_model_to_json(const ns_noise_model* model, char** out_json);
NS_API void ns_noise_model_free(ns_noise_model* model);

/* XOR on {0,1}. */
NS_API ns_status ns_xor(int32_t a, int32_t b, int32_t* out);

NS_API ns_status ns_inject_noise(const ns_dataset* clean, const ns_noise_model* model,
                                 uint64_t seed, ns_dataset** noisy, ns_draw** draw);

NS_API ns_status ns_posterior_compute(const ns_noise_model* model, ns_posterior** out);
NS_API ns_status ns_posterior_from_rates(const double* rates, int64_t n, ns_posterior** out);
/* Posterior flip probability for row `index` of `noisy`. */
NS_API ns_status ns_posterior_rate(const ns_posterior* table, const ns_dataset* noisy,
                                   int64_t index, double* out);
NS_API void ns_posterior_free(ns_posterior* table);

/* Pr(Y-tilde = noisy_label); `group` applies to the group family and
 * `instance` to the instance family, either is ignored otherwise. */
NS_API ns_status ns_noisy_marginal(const ns_noise_model* model, int32_t noisy_label,
                                   int32_t group, int64_t instance, double* out);

/* ---- noise draws ---- */

NS_API ns_status ns_draw_create(const uint8_t* bits, int64_t n, int32_t provenance,
                                ns_draw** out);
NS_API ns_status ns_draw_length(const ns_draw* draw, int64_t* out);
NS_API ns_status ns_draw_provenance(const ns_draw* draw, int32_t* out);
NS_API ns_status ns_draw_flip_count(const ns_draw* draw, int64_t* out);
NS_API ns_status ns_draw_copy_bits(const ns_draw* draw, uint8_t* out);
NS_API ns_status ns_draw_write_text(const ns_draw* draw, const char* path);
NS_API ns_status ns_draw_write_binary(const ns_draw* draw, const char* path);
NS_API ns_status ns_draw_read(const char* path, ns_draw** out);
NS_API void ns_draw_free(ns_draw* draw);

/* labels XOR bits; flips the dataset's label kind. */
NS_API ns_status ns_apply_draw(const ns_dataset* data, const ns_draw* draw, ns_dataset** out);

/* Most likely flip per row (1{q > 0.5}, ties to 0); ties may be NULL. */
NS_API ns_status ns_implicit_mle_draw(const ns_posterior* table, const ns_dataset* noisy,
                                      ns_draw** out, int64_t* ties);

/* ---- plausible-dataset sampling ---- */

NS_API ns_status ns_sample_draw(const ns_posterior* table, const ns_dataset* noisy,
                                uint64_t seed, ns_draw** out);
NS_API ns_status ns_is_plausible(const ns_draw* draw, const ns_posterior* table,
                                 const ns_dataset* noisy, double epsilon, int32_t* out);
/* Smallest workable tolerance for a stratum of n_p rows with forward rate p
 * and posterior q at failure probability delta. */
NS_API ns_status ns_min_epsilon(int64_t n_p, double p, double q, double delta, double* out);

/* ---- learners ---- */

/* train_json: optional training options (NULL or "{}" for defaults). */
NS_API ns_status ns_train_erm(const ns_dataset* data, const char* train_json, ns_model** out);
NS_API ns_status ns_train_hedged(const ns_dataset* noisy, const ns_noise_model* model,
                                 const char* train_json, ns_model** out);
NS_API ns_status ns_unbiased_loss(double loss_observed, double loss_flipped,
                                  int32_t noisy_label, double rho0, double rho1, double* out);

/* Either out-parameter may be NULL. */
NS_API ns_status ns_model_predict(const ns_model* model, const double* x, int64_t d,
                                  int32_t* label, double* proba);
NS_API ns_status ns_model_predict_dataset(const ns_model* model, const ns_dataset* data,
                                          int8_t* labels, double* probas);
NS_API ns_status ns_model_to_json(const ns_model* model, char** out_json);
NS_API ns_status ns_model_from_json(const char* json_text, ns_model** out);
NS_API ns_status ns_model_save(const ns_model* model, const char* path);
NS_API ns_status ns_model_load(const char* path, ns_model** out);
NS_API void ns_model_free(ns_model* model);

/* ---- plausible-model ensembles ---- */

NS_API ns_status ns_ensemble_build(const ns_dataset* noisy, const ns_posterior* table,
                                   double epsilon, int64_t max_rejections, uint64_t seed,
                                   int64_t m, const char* train_json, ns_ensemble** out);
NS_API ns_status ns_ensemble_size(const ns_ensemble* ensemble, int64_t* out);
NS_API ns_status ns_ensemble_member_model(const ns_ensemble* ensemble, int64_t index,
                                          ns_model** out);
/* out: one value per row of the dataset. */
NS_API ns_status ns_ensemble_ambiguity(const ns_ensemble* ensemble, const ns_dataset* train,
                                       double* out);
NS_API ns_status ns_ensemble_test_ambiguity(const ns_ensemble* ensemble,
                                            const ns_posterior* table,
                                            const ns_dataset* noisy_test, uint64_t seed,
                                            double* out);
NS_API ns_status ns_ensemble_disagreement(const ns_ensemble* ensemble, const ns_model* base,
                                          const ns_dataset* data, double* out);
/* kind: NS_CONFIDENCE_*; ensemble/base/table may be NULL when the kind does
 * not need them. */
NS_API ns_status ns_ensemble_confidence(const ns_ensemble* ensemble, const ns_model* base,
                                        const ns_dataset* data, const ns_posterior* table,
                                        int32_t kind, uint64_t seed, double* out);
NS_API ns_status ns_ensemble_save(const ns_ensemble* ensemble, const char* dir);
NS_API ns_status ns_ensemble_load(const char* dir, ns_ensemble** out);
NS_API void ns_ensemble_free(ns_ensemble* ensemble);

/* ---- metrics ---- */

/* Optional inputs may be NULL; the report leaves the quantities they unlock
 * null.  noise_model enables the unbiased clean-error estimate. */
NS_API ns_status ns_metrics_compute(const ns_model* model, const ns_dataset* noisy,
                                    int32_t method, const ns_posterior* table,
                                    const ns_draw* true_draw, const ns_noise_model* noise_model,
                                    char** out_json);
NS_API ns_status ns_susceptibility(const ns_posterior* table, const ns_dataset* noisy,
                                   double* out);
NS_API ns_status ns_expected_regret(const ns_noise_model* model, int32_t method, double* out);
NS_API ns_status ns_expected_regret_on(const ns_posterior* table, const ns_dataset* noisy,
                                       int32_t method, double* out);

/* ---- experiment harness ---- */

/* config_json: experiment config ("{}" for defaults); outputs land in
 * out_dir with fixed file names. */
NS_API ns_status ns_run_grid(const char* config_json, const char* out_dir);
NS_API ns_status ns_run_clean(const char* config_json, const char* out_dir);
NS_API ns_status ns_run_select(const char* config_json, const char* out_dir);
NS_API ns_status ns_run_discover(const char* config_json, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* NOISESCOPE_NOISESCOPE_H */
