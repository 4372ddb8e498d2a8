#include "noisescope/noisescope.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "harness.hpp"
#include "json.hpp"

using noisescope::Error;
using noisescope::ErrorCode;

struct ns_dataset {
  noisescope::Dataset value;
};
struct ns_noise_model {
  noisescope::NoiseModel value;
};
struct ns_posterior {
  noisescope::PosteriorTable value;
};
struct ns_draw {
  noisescope::NoiseDraw value;
};
struct ns_model {
  noisescope::LinearModel value;
};
struct ns_ensemble {
  noisescope::PlausibleEnsemble value;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
ns_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return NS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<ns_status>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return NS_ERR_INTERNAL;
  }
}

template <typename T>
const T& deref(const T* ptr, const char* name) {
  noisescope::require(ptr != nullptr, ErrorCode::InvalidArgument,
                      std::string(name) + " must not be null");
  return *ptr;
}

template <typename T>
T& deref(T* ptr, const char* name) {
  noisescope::require(ptr != nullptr, ErrorCode::InvalidArgument,
                      std::string(name) + " must not be null");
  return *ptr;
}

template <typename T>
void out_slot(T** out) {
  noisescope::require(out != nullptr, ErrorCode::InvalidArgument,
                      "output pointer must not be null");
  *out = nullptr;
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  noisescope::require(out != nullptr, ErrorCode::Internal, "allocation failed");
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

noisescope::LabelKind label_kind_from(int32_t kind) {
  noisescope::require(kind == NS_LABELS_CLEAN || kind == NS_LABELS_NOISY,
                      ErrorCode::InvalidArgument, "label_kind must be 0 (clean) or 1 (noisy)");
  return kind == NS_LABELS_CLEAN ? noisescope::LabelKind::Clean : noisescope::LabelKind::Noisy;
}

noisescope::Method method_from(int32_t method) {
  noisescope::require(method == NS_METHOD_IGNORE || method == NS_METHOD_HEDGE,
                      ErrorCode::InvalidArgument, "method must be 0 (ignore) or 1 (hedge)");
  return method == NS_METHOD_IGNORE ? noisescope::Method::Ignore : noisescope::Method::Hedge;
}

noisescope::TrainConfig train_config_from(const char* train_json) {
  noisescope::TrainConfig config;
  if (train_json == nullptr || train_json[0] == '\0') return config;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(train_json);
  } catch (const nlohmann::json::exception& e) {
    noisescope::fail(ErrorCode::Parse, std::string("invalid training options: ") + e.what());
  }
  noisescope::require(j.is_object(), ErrorCode::Parse, "training options must be a JSON object");
  try {
    config.l2_penalty = j.value("l2_penalty", config.l2_penalty);
    config.max_iterations = j.value("max_iterations", config.max_iterations);
    config.gradient_tolerance = j.value("gradient_tolerance", config.gradient_tolerance);
    config.standardize_features = j.value("standardize_features", config.standardize_features);
    config.seed = j.value("seed", config.seed);
  } catch (const nlohmann::json::exception& e) {
    noisescope::fail(ErrorCode::Parse, std::string("invalid training options: ") + e.what());
  }
  config.validate();
  return config;
}

const char* required_c_str(const char* text, const char* name) {
  noisescope::require(text != nullptr, ErrorCode::InvalidArgument,
                      std::string(name) + " must not be null");
  return text;
}

}  // namespace

extern "C" {

const char* ns_version(void) { return "0.1.0"; }

const char* ns_last_error(void) { return g_last_error.c_str(); }

void ns_string_free(char* text) { std::free(text); }

/* ---- datasets ---- */

ns_status ns_dataset_create(const double* features, int64_t n, int64_t d, const int8_t* labels,
                            const int32_t* groups, int32_t label_kind, ns_dataset** out) {
  return guarded([&] {
    out_slot(out);
    deref(features, "features");
    deref(labels, "labels");
    noisescope::require(n >= 1 && d >= 1, ErrorCode::InvalidArgument,
                        "dataset needs n >= 1 and d >= 1");
    noisescope::Matrix m(n, d);
    std::memcpy(m.values.data(), features, static_cast<size_t>(n * d) * sizeof(double));
    std::vector<int8_t> label_vec(labels, labels + n);
    std::vector<int32_t> group_vec;
    if (groups != nullptr) group_vec.assign(groups, groups + n);
    noisescope::Dataset data = noisescope::make_dataset(
        std::move(m), std::move(label_vec), std::move(group_vec), label_kind_from(label_kind));
    data.validate();
    *out = new ns_dataset{std::move(data)};
  });
}

ns_status ns_dataset_read_csv(const char* path, int32_t label_kind, ns_dataset** out) {
  return guarded([&] {
    out_slot(out);
    noisescope::Dataset data =
        noisescope::read_csv(required_c_str(path, "path"), label_kind_from(label_kind));
    *out = new ns_dataset{std::move(data)};
  });
}

ns_status ns_dataset_write_csv(const ns_dataset* data, const char* path) {
  return guarded(
      [&] { noisescope::write_csv(deref(data, "dataset").value, required_c_str(path, "path")); });
}

ns_status ns_dataset_rows(const ns_dataset* data, int64_t* out) {
  return guarded([&] { deref(out, "out") = deref(data, "dataset").value.size(); });
}

ns_status ns_dataset_cols(const ns_dataset* data, int64_t* out) {
  return guarded([&] { deref(out, "out") = deref(data, "dataset").value.dim(); });
}

ns_status ns_dataset_label_kind(const ns_dataset* data, int32_t* out) {
  return guarded([&] {
    deref(out, "out") = deref(data, "dataset").value.label_kind == noisescope::LabelKind::Clean
                            ? NS_LABELS_CLEAN
                            : NS_LABELS_NOISY;
  });
}

ns_status ns_dataset_copy_labels(const ns_dataset* data, int8_t* out) {
  return guarded([&] {
    const noisescope::Dataset& d = deref(data, "dataset").value;
    deref(out, "out");
    std::memcpy(out, d.labels.data(), d.labels.size() * sizeof(int8_t));
  });
}

ns_status ns_dataset_copy_features(const ns_dataset* data, double* out) {
  return guarded([&] {
    const noisescope::Dataset& d = deref(data, "dataset").value;
    deref(out, "out");
    std::memcpy(out, d.features->values.data(), d.features->values.size() * sizeof(double));
  });
}

ns_status ns_dataset_with_labels(const ns_dataset* data, const int8_t* labels,
                                 int32_t label_kind, ns_dataset** out) {
  return guarded([&] {
    out_slot(out);
    const noisescope::Dataset& d = deref(data, "dataset").value;
    deref(labels, "labels");
    std::vector<int8_t> label_vec(labels, labels + d.size());
    *out = new ns_dataset{
        noisescope::with_labels(d, std::move(label_vec), label_kind_from(label_kind))};
  });
}

ns_status ns_dataset_split(const ns_dataset* data, double train_fraction, uint64_t seed,
                           ns_dataset** train, ns_dataset** test) {
  return guarded([&] {
    out_slot(train);
    out_slot(test);
    auto [train_set, test_set] =
        noisescope::split_dataset(deref(data, "dataset").value, train_fraction, seed);
    *train = new ns_dataset{std::move(train_set)};
    *test = new ns_dataset{std::move(test_set)};
  });
}

void ns_dataset_free(ns_dataset* data) { delete data; }

ns_status ns_synthetic_generate(const char* spec_json, uint64_t seed, ns_dataset** out,
                                double* bayes_error) {
  return guarded([&] {
    out_slot(out);
    noisescope::SynthSpec spec =
        noisescope::synth_spec_from_json(required_c_str(spec_json, "spec_json"));
    noisescope::SyntheticData synth = noisescope::generate_synthetic(spec, seed);
    if (bayes_error != nullptr) *bayes_error = synth.bayes_error;
    *out = new ns_dataset{std::move(synth.data)};
  });
}

/* ---- noise models and posteriors ---- */

ns_status ns_noise_model_from_json(const char* json_text, ns_noise_model** out) {
  return guarded([&] {
    out_slot(out);
    *out = new ns_noise_model{
        noisescope::noise_model_from_json(required_c_str(json_text, "json_text"))};
  });
}

ns_status ns_noise_model_to_json(const ns_noise_model* model, char** out_json) {
  return guarded([&] {
    out_slot(out_json);
    *out_json = copy_string(noisescope::noise_model_to_json(deref(model, "noise model").value));
  });
}

void ns_noise_model_free(ns_noise_model* model) { delete model; }

ns_status ns_xor(int32_t a, int32_t b, int32_t* out) {
  return guarded([&] { deref(out, "out") = noisescope::xor_bit(a, b); });
}

ns_status ns_inject_noise(const ns_dataset* clean, const ns_noise_model* model, uint64_t seed,
                          ns_dataset** noisy, ns_draw** draw) {
  return guarded([&] {
    out_slot(noisy);
    out_slot(draw);
    noisescope::InjectResult result = noisescope::inject_noise(
        deref(clean, "dataset").value, deref(model, "noise model").value.spec, seed);
    *noisy = new ns_dataset{std::move(result.noisy)};
    *draw = new ns_draw{std::move(result.draw)};
  });
}

ns_status ns_posterior_compute(const ns_noise_model* model, ns_posterior** out) {
  return guarded([&] {
    out_slot(out);
    const noisescope::NoiseModel& m = deref(model, "noise model").value;
    *out = new ns_posterior{noisescope::posterior(m.spec, m.priors)};
  });
}

ns_status ns_posterior_from_rates(const double* rates, int64_t n, ns_posterior** out) {
  return guarded([&] {
    out_slot(out);
    deref(rates, "rates");
    noisescope::require(n >= 1, ErrorCode::InvalidArgument, "need at least one rate");
    *out = new ns_posterior{noisescope::posterior_from_rates(std::vector<double>(rates, rates + n))};
  });
}

ns_status ns_posterior_rate(const ns_posterior* table, const ns_dataset* noisy, int64_t index,
                            double* out) {
  return guarded([&] {
    deref(out, "out") =
        deref(table, "posterior").value.rate_for(deref(noisy, "dataset").value, index);
  });
}

void ns_posterior_free(ns_posterior* table) { delete table; }

ns_status ns_noisy_marginal(const ns_noise_model* model, int32_t noisy_label, int32_t group,
                            int64_t instance, double* out) {
  return guarded([&] {
    deref(out, "out");
    noisescope::require(noisy_label == 0 || noisy_label == 1, ErrorCode::InvalidArgument,
                        "noisy_label must be 0 or 1");
    const noisescope::NoiseModel& m = deref(model, "noise model").value;
    noisescope::NoisyMarginal marginal = noisescope::noisy_label_marginal(m.spec, m.priors);
    size_t yt = static_cast<size_t>(noisy_label);
    switch (marginal.family) {
      case noisescope::NoiseFamily::Uniform:
      case noisescope::NoiseFamily::ClassLevel:
        *out = marginal.class_m[yt];
        break;
      case noisescope::NoiseFamily::GroupLevel: {
        auto it = marginal.group_m.find(group);
        noisescope::require(it != marginal.group_m.end(), ErrorCode::Config,
                            "no marginal for group " + std::to_string(group));
        *out = it->second[yt];
        break;
      }
      case noisescope::NoiseFamily::InstanceLevel:
        noisescope::require(
            instance >= 0 && instance < static_cast<int64_t>(marginal.instance_m.size()),
            ErrorCode::InvalidArgument, "instance index out of range");
        *out = marginal.instance_m[static_cast<size_t>(instance)][yt];
        break;
    }
  });
}

/* ---- noise draws ---- */

ns_status ns_draw_create(const uint8_t* bits, int64_t n, int32_t provenance, ns_draw** out) {
  return guarded([&] {
    out_slot(out);
    deref(bits, "bits");
    noisescope::require(n >= 1, ErrorCode::InvalidArgument, "draw needs at least one bit");
    noisescope::require(provenance >= NS_DRAW_TRUE && provenance <= NS_DRAW_MLE,
                        ErrorCode::InvalidArgument, "unknown draw provenance");
    noisescope::NoiseDraw draw;
    draw.bits.assign(bits, bits + n);
    for (uint8_t b : draw.bits) {
      noisescope::require(b == 0 || b == 1, ErrorCode::InvalidArgument,
                          "draw bits must be 0 or 1");
    }
    draw.provenance = static_cast<noisescope::DrawProvenance>(provenance);
    *out = new ns_draw{std::move(draw)};
  });
}

ns_status ns_draw_length(const ns_draw* draw, int64_t* out) {
  return guarded([&] { deref(out, "out") = deref(draw, "draw").value.size(); });
}

ns_status ns_draw_provenance(const ns_draw* draw, int32_t* out) {
  return guarded([&] {
    deref(out, "out") = static_cast<int32_t>(deref(draw, "draw").value.provenance);
  });
}

ns_status ns_draw_flip_count(const ns_draw* draw, int64_t* out) {
  return guarded([&] { deref(out, "out") = deref(draw, "draw").value.flip_count(); });
}

ns_status ns_draw_copy_bits(const ns_draw* draw, uint8_t* out) {
  return guarded([&] {
    const noisescope::NoiseDraw& d = deref(draw, "draw").value;
    deref(out, "out");
    std::memcpy(out, d.bits.data(), d.bits.size());
  });
}

ns_status ns_draw_write_text(const ns_draw* draw, const char* path) {
  return guarded([&] {
    noisescope::write_draw_text(deref(draw, "draw").value, required_c_str(path, "path"));
  });
}

ns_status ns_draw_write_binary(const ns_draw* draw, const char* path) {
  return guarded([&] {
    noisescope::write_draw_binary(deref(draw, "draw").value, required_c_str(path, "path"));
  });
}

ns_status ns_draw_read(const char* path, ns_draw** out) {
  return guarded([&] {
    out_slot(out);
    *out = new ns_draw{noisescope::read_draw(required_c_str(path, "path"))};
  });
}

void ns_draw_free(ns_draw* draw) { delete draw; }

ns_status ns_apply_draw(const ns_dataset* data, const ns_draw* draw, ns_dataset** out) {
  return guarded([&] {
    out_slot(out);
    *out = new ns_dataset{
        noisescope::apply_draw(deref(data, "dataset").value, deref(draw, "draw").value)};
  });
}

ns_status ns_implicit_mle_draw(const ns_posterior* table, const ns_dataset* noisy, ns_draw** out,
                               int64_t* ties) {
  return guarded([&] {
    out_slot(out);
    noisescope::NoiseDraw draw = noisescope::implicit_mle_draw(deref(table, "posterior").value,
                                                               deref(noisy, "dataset").value);
    if (ties != nullptr) *ties = draw.mle_ties;
    *out = new ns_draw{std::move(draw)};
  });
}

/* ---- plausible-dataset sampling ---- */

ns_status ns_sample_draw(const ns_posterior* table, const ns_dataset* noisy, uint64_t seed,
                         ns_draw** out) {
  return guarded([&] {
    out_slot(out);
    *out = new ns_draw{noisescope::sample_draw(deref(table, "posterior").value,
                                               deref(noisy, "dataset").value, seed)};
  });
}

ns_status ns_is_plausible(const ns_draw* draw, const ns_posterior* table, const ns_dataset* noisy,
                          double epsilon, int32_t* out) {
  return guarded([&] {
    deref(out, "out") =
        noisescope::is_plausible(deref(draw, "draw").value, deref(table, "posterior").value,
                                 deref(noisy, "dataset").value, epsilon)
            ? 1
            : 0;
  });
}

ns_status ns_min_epsilon(int64_t n_p, double p, double q, double delta, double* out) {
  return guarded([&] { deref(out, "out") = noisescope::min_epsilon(n_p, p, q, delta); });
}

/* ---- learners ---- */

ns_status ns_train_erm(const ns_dataset* data, const char* train_json, ns_model** out) {
  return guarded([&] {
    out_slot(out);
    *out = new ns_model{
        noisescope::fit_erm(deref(data, "dataset").value, train_config_from(train_json))};
  });
}

ns_status ns_train_hedged(const ns_dataset* noisy, const ns_noise_model* model,
                          const char* train_json, ns_model** out) {
  return guarded([&] {
    out_slot(out);
    noisescope::HedgeSpec hedge =
        noisescope::HedgeSpec::from_noise(deref(model, "noise model").value.spec);
    *out = new ns_model{noisescope::fit_hedged(deref(noisy, "dataset").value, hedge,
                                               train_config_from(train_json))};
  });
}

ns_status ns_unbiased_loss(double loss_observed, double loss_flipped, int32_t noisy_label,
                           double rho0, double rho1, double* out) {
  return guarded([&] {
    deref(out, "out") =
        noisescope::unbiased_loss(loss_observed, loss_flipped, noisy_label, rho0, rho1);
  });
}

ns_status ns_model_predict(const ns_model* model, const double* x, int64_t d, int32_t* label,
                           double* proba) {
  return guarded([&] {
    const noisescope::LinearModel& m = deref(model, "model").value;
    deref(x, "x");
    double p = m.predict_proba(x, d);
    if (label != nullptr) *label = m.predict(x, d);
    if (proba != nullptr) *proba = p;
  });
}

ns_status ns_model_predict_dataset(const ns_model* model, const ns_dataset* data, int8_t* labels,
                                   double* probas) {
  return guarded([&] {
    const noisescope::LinearModel& m = deref(model, "model").value;
    const noisescope::Dataset& d = deref(data, "dataset").value;
    if (labels != nullptr) {
      std::vector<int8_t> preds = m.predict(d);
      std::memcpy(labels, preds.data(), preds.size() * sizeof(int8_t));
    }
    if (probas != nullptr) {
      std::vector<double> p = m.predict_proba(d);
      std::memcpy(probas, p.data(), p.size() * sizeof(double));
    }
  });
}

ns_status ns_model_to_json(const ns_model* model, char** out_json) {
  return guarded([&] {
    out_slot(out_json);
    *out_json = copy_string(noisescope::model_to_json(deref(model, "model").value));
  });
}

ns_status ns_model_from_json(const char* json_text, ns_model** out) {
  return guarded([&] {
    out_slot(out);
    *out = new ns_model{noisescope::model_from_json(required_c_str(json_text, "json_text"))};
  });
}

ns_status ns_model_save(const ns_model* model, const char* path) {
  return guarded([&] {
    noisescope::save_model(deref(model, "model").value, required_c_str(path, "path"));
  });
}

ns_status ns_model_load(const char* path, ns_model** out) {
  return guarded([&] {
    out_slot(out);
    *out = new ns_model{noisescope::load_model(required_c_str(path, "path"))};
  });
}

void ns_model_free(ns_model* model) { delete model; }

/* ---- plausible-model ensembles ---- */

ns_status ns_ensemble_build(const ns_dataset* noisy, const ns_posterior* table, double epsilon,
                            int64_t max_rejections, uint64_t seed, int64_t m,
                            const char* train_json, ns_ensemble** out) {
  return guarded([&] {
    out_slot(out);
    noisescope::PlausibilityConfig sampling;
    sampling.epsilon = epsilon;
    sampling.max_rejections = max_rejections;
    sampling.seed = seed;
    *out = new ns_ensemble{noisescope::build_ensemble(deref(noisy, "dataset").value,
                                                      deref(table, "posterior").value, sampling,
                                                      m, train_config_from(train_json))};
  });
}

ns_status ns_ensemble_size(const ns_ensemble* ensemble, int64_t* out) {
  return guarded([&] { deref(out, "out") = deref(ensemble, "ensemble").value.m(); });
}

ns_status ns_ensemble_member_model(const ns_ensemble* ensemble, int64_t index, ns_model** out) {
  return guarded([&] {
    out_slot(out);
    const noisescope::PlausibleEnsemble& e = deref(ensemble, "ensemble").value;
    noisescope::require(index >= 0 && index < e.m(), ErrorCode::InvalidArgument,
                        "member index out of range");
    *out = new ns_model{e.members[static_cast<size_t>(index)].model};
  });
}

ns_status ns_ensemble_ambiguity(const ns_ensemble* ensemble, const ns_dataset* train,
                                double* out) {
  return guarded([&] {
    deref(out, "out");
    std::vector<double> values = noisescope::ambiguity_all(deref(ensemble, "ensemble").value,
                                                           deref(train, "dataset").value);
    std::memcpy(out, values.data(), values.size() * sizeof(double));
  });
}

ns_status ns_ensemble_test_ambiguity(const ns_ensemble* ensemble, const ns_posterior* table,
                                     const ns_dataset* noisy_test, uint64_t seed, double* out) {
  return guarded([&] {
    deref(out, "out");
    std::vector<double> values =
        noisescope::test_ambiguity(deref(ensemble, "ensemble").value,
                                   deref(table, "posterior").value,
                                   deref(noisy_test, "dataset").value, seed);
    std::memcpy(out, values.data(), values.size() * sizeof(double));
  });
}

ns_status ns_ensemble_disagreement(const ns_ensemble* ensemble, const ns_model* base,
                                   const ns_dataset* data, double* out) {
  return guarded([&] {
    deref(out, "out");
    std::vector<double> values =
        noisescope::disagreement_all(deref(ensemble, "ensemble").value,
                                     deref(base, "model").value, deref(data, "dataset").value);
    std::memcpy(out, values.data(), values.size() * sizeof(double));
  });
}

ns_status ns_ensemble_confidence(const ns_ensemble* ensemble, const ns_model* base,
                                 const ns_dataset* data, const ns_posterior* table, int32_t kind,
                                 uint64_t seed, double* out) {
  return guarded([&] {
    deref(out, "out");
    noisescope::require(kind >= NS_CONFIDENCE_AMBIGUITY && kind <= NS_CONFIDENCE_PROBABILITY,
                        ErrorCode::InvalidArgument, "unknown confidence kind");
    std::vector<double> values = noisescope::confidence_scores(
        ensemble != nullptr ? &ensemble->value : nullptr,
        base != nullptr ? &base->value : nullptr, deref(data, "dataset").value,
        table != nullptr ? &table->value : nullptr,
        static_cast<noisescope::ConfidenceKind>(kind), seed);
    std::memcpy(out, values.data(), values.size() * sizeof(double));
  });
}

ns_status ns_ensemble_save(const ns_ensemble* ensemble, const char* dir) {
  return guarded([&] {
    noisescope::save_ensemble(deref(ensemble, "ensemble").value, required_c_str(dir, "dir"));
  });
}

ns_status ns_ensemble_load(const char* dir, ns_ensemble** out) {
  return guarded([&] {
    out_slot(out);
    *out = new ns_ensemble{noisescope::load_ensemble(required_c_str(dir, "dir"))};
  });
}

void ns_ensemble_free(ns_ensemble* ensemble) { delete ensemble; }

/* ---- metrics ---- */

ns_status ns_metrics_compute(const ns_model* model, const ns_dataset* noisy, int32_t method,
                             const ns_posterior* table, const ns_draw* true_draw,
                             const ns_noise_model* noise_model, char** out_json) {
  return guarded([&] {
    out_slot(out_json);
    noisescope::MetricsInputs inputs;
    inputs.model = &deref(model, "model").value;
    inputs.noisy = &deref(noisy, "dataset").value;
    inputs.method = method_from(method);
    inputs.table = table != nullptr ? &table->value : nullptr;
    inputs.true_draw = true_draw != nullptr ? &true_draw->value : nullptr;
    std::optional<noisescope::HedgeSpec> hedge;
    if (noise_model != nullptr &&
        noise_model->value.spec.family != noisescope::NoiseFamily::InstanceLevel) {
      hedge = noisescope::HedgeSpec::from_noise(noise_model->value.spec);
      inputs.hedge = &*hedge;
    }
    inputs.keep_per_instance = false;
    *out_json = copy_string(noisescope::report_to_json(noisescope::compute_metrics(inputs)));
  });
}

ns_status ns_susceptibility(const ns_posterior* table, const ns_dataset* noisy, double* out) {
  return guarded([&] {
    deref(out, "out") = noisescope::susceptibility(deref(table, "posterior").value,
                                                   deref(noisy, "dataset").value);
  });
}

ns_status ns_expected_regret(const ns_noise_model* model, int32_t method, double* out) {
  return guarded([&] {
    deref(out, "out") =
        noisescope::expected_regret(deref(model, "noise model").value, method_from(method));
  });
}

ns_status ns_expected_regret_on(const ns_posterior* table, const ns_dataset* noisy,
                                int32_t method, double* out) {
  return guarded([&] {
    deref(out, "out") = noisescope::expected_regret_on(
        deref(table, "posterior").value, deref(noisy, "dataset").value, method_from(method));
  });
}

/* ---- experiment harness ---- */

ns_status ns_run_grid(const char* config_json, const char* out_dir) {
  return guarded([&] {
    noisescope::run_grid(
        noisescope::ExperimentConfig::from_json(required_c_str(config_json, "config_json")),
        required_c_str(out_dir, "out_dir"));
  });
}

ns_status ns_run_clean(const char* config_json, const char* out_dir) {
  return guarded([&] {
    noisescope::run_clean(
        noisescope::ExperimentConfig::from_json(required_c_str(config_json, "config_json")),
        required_c_str(out_dir, "out_dir"));
  });
}

ns_status ns_run_select(const char* config_json, const char* out_dir) {
  return guarded([&] {
    noisescope::run_select(
        noisescope::ExperimentConfig::from_json(required_c_str(config_json, "config_json")),
        required_c_str(out_dir, "out_dir"));
  });
}

ns_status ns_run_discover(const char* config_json, const char* out_dir) {
  return guarded([&] {
    noisescope::run_discover(
        noisescope::ExperimentConfig::from_json(required_c_str(config_json, "config_json")),
        required_c_str(out_dir, "out_dir"));
  });
}

}  // extern "C"
