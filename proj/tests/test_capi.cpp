#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "noisescope/noisescope.h"

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string temp_dir(const char* name) {
  std::filesystem::path path = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(path);
  std::filesystem::create_directories(path);
  return path.string();
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

/* Single feature x_i = i - (n-1)/2, label = 1{x > 0}. */
ns_dataset* line_dataset(int64_t n, int32_t kind) {
  std::vector<double> features(static_cast<size_t>(n));
  std::vector<int8_t> labels(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    double x = static_cast<double>(i) - 0.5 * static_cast<double>(n - 1);
    features[static_cast<size_t>(i)] = x;
    labels[static_cast<size_t>(i)] = x > 0.0 ? 1 : 0;
  }
  ns_dataset* out = nullptr;
  REQUIRE(ns_dataset_create(features.data(), n, 1, labels.data(), nullptr, kind, &out) == NS_OK);
  return out;
}

/* Single feature x_i = i, labels given. */
ns_dataset* labeled_dataset(const std::vector<int8_t>& labels, int32_t kind) {
  int64_t n = static_cast<int64_t>(labels.size());
  std::vector<double> features(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) features[static_cast<size_t>(i)] = static_cast<double>(i);
  ns_dataset* out = nullptr;
  REQUIRE(ns_dataset_create(features.data(), n, 1, labels.data(), nullptr, kind, &out) == NS_OK);
  return out;
}

const char* kClassModel = R"({
  "family": "class",
  "params": {"p_u_y0": 0.0, "p_u_y1": 0.4},
  "priors": {"pi_y0": 0.8, "pi_y1": 0.2}
})";

}  // namespace

TEST_CASE("version, error reporting, and xor") {
  const char* version = ns_version();
  REQUIRE(version != nullptr);
  CHECK(std::string(version).find('.') != std::string::npos);

  int32_t v = -1;
  CHECK(ns_xor(0, 0, &v) == NS_OK);
  CHECK(v == 0);
  CHECK(ns_xor(0, 1, &v) == NS_OK);
  CHECK(v == 1);
  CHECK(ns_xor(1, 0, &v) == NS_OK);
  CHECK(v == 1);
  CHECK(ns_xor(1, 1, &v) == NS_OK);
  CHECK(v == 0);

  CHECK(ns_xor(2, 0, &v) == NS_ERR_DOMAIN);
  CHECK(std::string(ns_last_error()).size() > 0);
  CHECK(ns_xor(0, 0, nullptr) == NS_ERR_INVALID_ARGUMENT);

  // Success clears the thread's error text.
  CHECK(ns_xor(1, 1, &v) == NS_OK);
  CHECK(std::string(ns_last_error()).empty());

  ns_string_free(nullptr);  // no-op
}

TEST_CASE("dataset lifecycle and accessors") {
  const double features[] = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
  const int8_t labels[] = {0, 1, 1, 0};
  const int32_t groups[] = {0, 0, 1, 1};
  ns_dataset* data = nullptr;
  REQUIRE(ns_dataset_create(features, 4, 2, labels, groups, NS_LABELS_CLEAN, &data) == NS_OK);

  int64_t rows = 0, cols = 0;
  int32_t kind = -1;
  CHECK(ns_dataset_rows(data, &rows) == NS_OK);
  CHECK(rows == 4);
  CHECK(ns_dataset_cols(data, &cols) == NS_OK);
  CHECK(cols == 2);
  CHECK(ns_dataset_label_kind(data, &kind) == NS_OK);
  CHECK(kind == NS_LABELS_CLEAN);

  int8_t labels_out[4] = {9, 9, 9, 9};
  double features_out[8] = {0};
  CHECK(ns_dataset_copy_labels(data, labels_out) == NS_OK);
  CHECK(std::memcmp(labels_out, labels, sizeof(labels)) == 0);
  CHECK(ns_dataset_copy_features(data, features_out) == NS_OK);
  CHECK(std::memcmp(features_out, features, sizeof(features)) == 0);

  const int8_t relabel[] = {1, 0, 0, 1};
  ns_dataset* noisy = nullptr;
  REQUIRE(ns_dataset_with_labels(data, relabel, NS_LABELS_NOISY, &noisy) == NS_OK);
  CHECK(ns_dataset_label_kind(noisy, &kind) == NS_OK);
  CHECK(kind == NS_LABELS_NOISY);
  ns_dataset_free(noisy);

  // Error paths.
  ns_dataset* bad = nullptr;
  const int8_t bad_labels[] = {0, 2, 1, 0};
  CHECK(ns_dataset_create(features, 4, 2, bad_labels, nullptr, NS_LABELS_CLEAN, &bad) ==
        NS_ERR_INVALID_ARGUMENT);
  CHECK(ns_dataset_create(nullptr, 4, 2, labels, nullptr, NS_LABELS_CLEAN, &bad) ==
        NS_ERR_INVALID_ARGUMENT);
  CHECK(ns_dataset_create(features, 4, 2, labels, nullptr, 7, &bad) == NS_ERR_INVALID_ARGUMENT);
  CHECK(ns_dataset_create(features, 4, 2, labels, nullptr, NS_LABELS_CLEAN, nullptr) ==
        NS_ERR_INVALID_ARGUMENT);
  CHECK(ns_dataset_rows(nullptr, &rows) == NS_ERR_INVALID_ARGUMENT);

  ns_dataset_free(data);
  ns_dataset_free(nullptr);  // no-op
}

TEST_CASE("dataset split and csv round trip") {
  ns_dataset* data = line_dataset(10, NS_LABELS_CLEAN);
  ns_dataset* train = nullptr;
  ns_dataset* test = nullptr;
  REQUIRE(ns_dataset_split(data, 0.5, 11, &train, &test) == NS_OK);
  int64_t n_train = 0, n_test = 0;
  CHECK(ns_dataset_rows(train, &n_train) == NS_OK);
  CHECK(ns_dataset_rows(test, &n_test) == NS_OK);
  CHECK(n_train == 5);
  CHECK(n_test == 5);
  ns_dataset_free(train);
  ns_dataset_free(test);

  std::string path = temp_path("noisescope_capi.csv");
  REQUIRE(ns_dataset_write_csv(data, path.c_str()) == NS_OK);
  ns_dataset* back = nullptr;
  REQUIRE(ns_dataset_read_csv(path.c_str(), NS_LABELS_CLEAN, &back) == NS_OK);
  int64_t rows = 0;
  CHECK(ns_dataset_rows(back, &rows) == NS_OK);
  CHECK(rows == 10);
  int8_t a[10], b[10];
  CHECK(ns_dataset_copy_labels(data, a) == NS_OK);
  CHECK(ns_dataset_copy_labels(back, b) == NS_OK);
  CHECK(std::memcmp(a, b, sizeof(a)) == 0);
  ns_dataset_free(back);
  ns_dataset_free(data);

  ns_dataset* missing = nullptr;
  CHECK(ns_dataset_read_csv("/nonexistent/rows.csv", NS_LABELS_CLEAN, &missing) == NS_ERR_IO);
}

TEST_CASE("synthetic generation through the C surface") {
  ns_dataset* data = nullptr;
  double bayes = -1.0;
  REQUIRE(ns_synthetic_generate(R"({"n": 300, "d": 2})", 7, &data, &bayes) == NS_OK);
  int64_t rows = 0, cols = 0;
  CHECK(ns_dataset_rows(data, &rows) == NS_OK);
  CHECK(ns_dataset_cols(data, &cols) == NS_OK);
  CHECK(rows == 300);
  CHECK(cols == 2);
  double phi_m1 = 0.5 * std::erfc(1.0 / std::sqrt(2.0));
  CHECK(bayes == doctest::Approx(phi_m1).epsilon(1e-9));
  ns_dataset_free(data);

  data = nullptr;
  REQUIRE(ns_synthetic_generate(R"({"n": 50})", 7, &data, nullptr) == NS_OK);  // bayes optional
  ns_dataset_free(data);

  CHECK(ns_synthetic_generate("nope", 7, &data, nullptr) == NS_ERR_PARSE);
  CHECK(ns_synthetic_generate(R"({"n": 0})", 7, &data, nullptr) == NS_ERR_INVALID_ARGUMENT);
  CHECK(ns_synthetic_generate(nullptr, 7, &data, nullptr) == NS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("noise model json, injection, and marginals") {
  ns_noise_model* model = nullptr;
  REQUIRE(ns_noise_model_from_json(kClassModel, &model) == NS_OK);

  char* json = nullptr;
  REQUIRE(ns_noise_model_to_json(model, &json) == NS_OK);
  REQUIRE(json != nullptr);
  CHECK(std::string(json).find("class") != std::string::npos);
  ns_noise_model* back = nullptr;
  CHECK(ns_noise_model_from_json(json, &back) == NS_OK);
  ns_noise_model_free(back);
  ns_string_free(json);

  ns_noise_model* bad = nullptr;
  CHECK(ns_noise_model_from_json("not json", &bad) == NS_ERR_PARSE);

  ns_dataset* clean = line_dataset(2000, NS_LABELS_CLEAN);
  ns_dataset* noisy = nullptr;
  ns_draw* draw = nullptr;
  REQUIRE(ns_inject_noise(clean, model, 41, &noisy, &draw) == NS_OK);

  int32_t kind = -1, provenance = -1;
  CHECK(ns_dataset_label_kind(noisy, &kind) == NS_OK);
  CHECK(kind == NS_LABELS_NOISY);
  CHECK(ns_draw_provenance(draw, &provenance) == NS_OK);
  CHECK(provenance == NS_DRAW_TRUE);
  int64_t flips = 0;
  CHECK(ns_draw_flip_count(draw, &flips) == NS_OK);
  CHECK(flips > 0);     // 1000 positives at 40%
  CHECK(flips < 1000);

  // XOR-ing the draw back recovers the clean labels.
  ns_dataset* recovered = nullptr;
  REQUIRE(ns_apply_draw(noisy, draw, &recovered) == NS_OK);
  std::vector<int8_t> original(2000), roundtrip(2000);
  CHECK(ns_dataset_copy_labels(clean, original.data()) == NS_OK);
  CHECK(ns_dataset_copy_labels(recovered, roundtrip.data()) == NS_OK);
  CHECK(original == roundtrip);
  CHECK(ns_dataset_label_kind(recovered, &kind) == NS_OK);
  CHECK(kind == NS_LABELS_CLEAN);

  double marginal = -1.0;
  CHECK(ns_noisy_marginal(model, 1, 0, 0, &marginal) == NS_OK);
  CHECK(marginal == doctest::Approx(0.2 * 0.6).epsilon(1e-15));  // pi1 (1 - p1)
  CHECK(ns_noisy_marginal(model, 0, 0, 0, &marginal) == NS_OK);
  CHECK(marginal == doctest::Approx(1.0 - 0.2 * 0.6).epsilon(1e-15));
  CHECK(ns_noisy_marginal(model, 2, 0, 0, &marginal) == NS_ERR_INVALID_ARGUMENT);

  ns_dataset_free(recovered);
  ns_draw_free(draw);
  ns_dataset_free(noisy);
  ns_dataset_free(clean);
  ns_noise_model_free(model);
}

TEST_CASE("posterior tables and rates") {
  ns_noise_model* model = nullptr;
  REQUIRE(ns_noise_model_from_json(kClassModel, &model) == NS_OK);
  ns_posterior* table = nullptr;
  REQUIRE(ns_posterior_compute(model, &table) == NS_OK);

  ns_dataset* noisy = labeled_dataset({0, 1}, NS_LABELS_NOISY);
  double rate = -1.0;
  CHECK(ns_posterior_rate(table, noisy, 0, &rate) == NS_OK);
  CHECK(rate == doctest::Approx(0.08 / 0.88).epsilon(1e-12));  // flip mass over noisy-0 mass
  CHECK(ns_posterior_rate(table, noisy, 1, &rate) == NS_OK);
  CHECK(rate == 0.0);  // noisy positives are never flipped positives here

  const double rates[] = {0.25, 0.1};
  ns_posterior* direct = nullptr;
  REQUIRE(ns_posterior_from_rates(rates, 2, &direct) == NS_OK);
  CHECK(ns_posterior_rate(direct, noisy, 0, &rate) == NS_OK);
  CHECK(rate == 0.25);
  CHECK(ns_posterior_rate(direct, noisy, 1, &rate) == NS_OK);
  CHECK(rate == 0.1);
  ns_posterior_free(direct);

  CHECK(ns_posterior_from_rates(nullptr, 2, &direct) == NS_ERR_INVALID_ARGUMENT);
  CHECK(ns_posterior_from_rates(rates, 0, &direct) == NS_ERR_INVALID_ARGUMENT);

  ns_dataset_free(noisy);
  ns_posterior_free(table);
  ns_noise_model_free(model);
}

TEST_CASE("draw lifecycle and file round trips") {
  const uint8_t bits[] = {1, 0, 1};
  ns_draw* draw = nullptr;
  REQUIRE(ns_draw_create(bits, 3, NS_DRAW_SAMPLED, &draw) == NS_OK);

  int64_t length = 0, flips = 0;
  int32_t provenance = -1;
  CHECK(ns_draw_length(draw, &length) == NS_OK);
  CHECK(length == 3);
  CHECK(ns_draw_flip_count(draw, &flips) == NS_OK);
  CHECK(flips == 2);
  CHECK(ns_draw_provenance(draw, &provenance) == NS_OK);
  CHECK(provenance == NS_DRAW_SAMPLED);

  uint8_t copied[3] = {9, 9, 9};
  CHECK(ns_draw_copy_bits(draw, copied) == NS_OK);
  CHECK(std::memcmp(copied, bits, sizeof(bits)) == 0);

  for (bool binary : {false, true}) {
    std::string path = temp_path(binary ? "noisescope_capi_draw.bits" : "noisescope_capi_draw.txt");
    REQUIRE((binary ? ns_draw_write_binary(draw, path.c_str())
                    : ns_draw_write_text(draw, path.c_str())) == NS_OK);
    ns_draw* loaded = nullptr;
    REQUIRE(ns_draw_read(path.c_str(), &loaded) == NS_OK);
    uint8_t loaded_bits[3] = {9, 9, 9};
    CHECK(ns_draw_copy_bits(loaded, loaded_bits) == NS_OK);
    CHECK(std::memcmp(loaded_bits, bits, sizeof(bits)) == 0);
    ns_draw_free(loaded);
  }

  const uint8_t bad_bits[] = {1, 2};
  ns_draw* bad = nullptr;
  CHECK(ns_draw_create(bad_bits, 2, NS_DRAW_TRUE, &bad) == NS_ERR_INVALID_ARGUMENT);
  CHECK(ns_draw_create(bits, 3, 9, &bad) == NS_ERR_INVALID_ARGUMENT);
  CHECK(ns_draw_read("/nonexistent/draw.bits", &bad) == NS_ERR_IO);

  ns_draw_free(draw);
  ns_draw_free(nullptr);  // no-op
}

TEST_CASE("implicit mle draw") {
  const double rates[] = {0.6, 0.4};
  ns_posterior* table = nullptr;
  REQUIRE(ns_posterior_from_rates(rates, 2, &table) == NS_OK);
  ns_dataset* noisy = labeled_dataset({1, 1}, NS_LABELS_NOISY);

  ns_draw* draw = nullptr;
  int64_t ties = -1;
  REQUIRE(ns_implicit_mle_draw(table, noisy, &draw, &ties) == NS_OK);
  CHECK(ties == 0);
  uint8_t bits[2] = {9, 9};
  CHECK(ns_draw_copy_bits(draw, bits) == NS_OK);
  CHECK(bits[0] == 1);
  CHECK(bits[1] == 0);
  int32_t provenance = -1;
  CHECK(ns_draw_provenance(draw, &provenance) == NS_OK);
  CHECK(provenance == NS_DRAW_MLE);
  ns_draw_free(draw);

  draw = nullptr;
  CHECK(ns_implicit_mle_draw(table, noisy, &draw, nullptr) == NS_OK);  // ties optional
  ns_draw_free(draw);
  ns_dataset_free(noisy);
  ns_posterior_free(table);
}

TEST_CASE("plausible sampling through the C surface") {
  ns_noise_model* model = nullptr;
  REQUIRE(ns_noise_model_from_json(
              R"({"family": "uniform", "params": {"p": 0.25},
                  "priors": {"pi_y0": 0.5, "pi_y1": 0.5}})",
              &model) == NS_OK);
  ns_posterior* table = nullptr;
  REQUIRE(ns_posterior_compute(model, &table) == NS_OK);

  std::vector<int8_t> labels(64);
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int8_t>(i % 2);
  ns_dataset* noisy = labeled_dataset(labels, NS_LABELS_NOISY);

  ns_draw* a = nullptr;
  ns_draw* b = nullptr;
  REQUIRE(ns_sample_draw(table, noisy, 19, &a) == NS_OK);
  REQUIRE(ns_sample_draw(table, noisy, 19, &b) == NS_OK);
  uint8_t bits_a[64], bits_b[64];
  CHECK(ns_draw_copy_bits(a, bits_a) == NS_OK);
  CHECK(ns_draw_copy_bits(b, bits_b) == NS_OK);
  CHECK(std::memcmp(bits_a, bits_b, sizeof(bits_a)) == 0);

  int32_t plausible = -1;
  CHECK(ns_is_plausible(a, table, noisy, 1e6, &plausible) == NS_OK);
  CHECK(plausible == 1);
  CHECK(ns_is_plausible(a, table, noisy, -0.5, &plausible) == NS_ERR_INVALID_ARGUMENT);

  double eps = 0.0;
  CHECK(ns_min_epsilon(10000, 0.2, 0.2, 0.1, &eps) == NS_OK);
  CHECK(std::abs(eps - 0.0612) < 0.0005);
  CHECK(ns_min_epsilon(10000, 0.2, 0.0, 0.1, &eps) == NS_ERR_DOMAIN);

  ns_draw_free(a);
  ns_draw_free(b);
  ns_dataset_free(noisy);
  ns_posterior_free(table);
  ns_noise_model_free(model);
}

TEST_CASE("training, prediction, and model persistence") {
  ns_dataset* data = line_dataset(40, NS_LABELS_NOISY);
  ns_model* model = nullptr;
  REQUIRE(ns_train_erm(data, R"({"max_iterations": 2000})", &model) == NS_OK);

  std::vector<int8_t> preds(40);
  std::vector<double> probas(40);
  REQUIRE(ns_model_predict_dataset(model, data, preds.data(), probas.data()) == NS_OK);
  std::vector<int8_t> truth(40);
  CHECK(ns_dataset_copy_labels(data, truth.data()) == NS_OK);
  CHECK(preds == truth);
  for (int i = 0; i < 40; ++i) {
    CHECK(probas[static_cast<size_t>(i)] > 0.0);
    CHECK(probas[static_cast<size_t>(i)] < 1.0);
    CHECK(preds[static_cast<size_t>(i)] == (probas[static_cast<size_t>(i)] > 0.5 ? 1 : 0));
  }

  const double x = 7.25;
  int32_t label = -1;
  double proba = -1.0;
  CHECK(ns_model_predict(model, &x, 1, &label, &proba) == NS_OK);
  CHECK(label == 1);
  CHECK(proba > 0.5);
  CHECK(ns_model_predict(model, &x, 1, &label, nullptr) == NS_OK);
  CHECK(ns_model_predict(model, &x, 1, nullptr, &proba) == NS_OK);

  char* json = nullptr;
  REQUIRE(ns_model_to_json(model, &json) == NS_OK);
  ns_model* from_json = nullptr;
  REQUIRE(ns_model_from_json(json, &from_json) == NS_OK);
  double proba2 = -1.0;
  CHECK(ns_model_predict(from_json, &x, 1, nullptr, &proba2) == NS_OK);
  CHECK(proba2 == proba);
  ns_model_free(from_json);
  ns_string_free(json);

  std::string path = temp_path("noisescope_capi_model.json");
  REQUIRE(ns_model_save(model, path.c_str()) == NS_OK);
  ns_model* loaded = nullptr;
  REQUIRE(ns_model_load(path.c_str(), &loaded) == NS_OK);
  CHECK(ns_model_predict(loaded, &x, 1, nullptr, &proba2) == NS_OK);
  CHECK(proba2 == proba);
  ns_model_free(loaded);

  ns_model* bad = nullptr;
  CHECK(ns_train_erm(data, "not json", &bad) == NS_ERR_PARSE);
  CHECK(ns_train_erm(data, R"({"l2_penalty": -1.0})", &bad) == NS_ERR_INVALID_ARGUMENT);
  CHECK(ns_model_load("/nonexistent/model.json", &bad) == NS_ERR_IO);

  ns_noise_model* noise = nullptr;
  REQUIRE(ns_noise_model_from_json(kClassModel, &noise) == NS_OK);
  ns_model* hedged = nullptr;
  REQUIRE(ns_train_hedged(data, noise, nullptr, &hedged) == NS_OK);
  CHECK(ns_model_predict(hedged, &x, 1, &label, nullptr) == NS_OK);
  ns_model_free(hedged);

  ns_dataset* clean = line_dataset(40, NS_LABELS_CLEAN);
  CHECK(ns_train_hedged(clean, noise, nullptr, &bad) == NS_ERR_INVALID_ARGUMENT);
  ns_dataset_free(clean);
  ns_noise_model_free(noise);

  ns_model_free(model);
  ns_model_free(nullptr);  // no-op
  ns_dataset_free(data);
}

TEST_CASE("unbiased loss") {
  double value = 0.0;
  CHECK(ns_unbiased_loss(0.0, 1.0, 1, 0.0, 0.2, &value) == NS_OK);
  CHECK(value == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(ns_unbiased_loss(1.0, 0.0, 0, 0.0, 0.2, &value) == NS_OK);
  CHECK(value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ns_unbiased_loss(0.0, 1.0, 2, 0.0, 0.2, &value) == NS_ERR_DOMAIN);
  CHECK(ns_unbiased_loss(0.0, 1.0, 1, 0.6, 0.5, &value) == NS_ERR_DOMAIN);
  CHECK(ns_unbiased_loss(0.0, 1.0, 1, -0.1, 0.2, &value) == NS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("ensembles through the C surface") {
  std::vector<int8_t> labels(30);
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int8_t>(i % 2);
  ns_dataset* noisy = labeled_dataset(labels, NS_LABELS_NOISY);
  std::vector<double> rates(30, 0.25);
  ns_posterior* table = nullptr;
  REQUIRE(ns_posterior_from_rates(rates.data(), 30, &table) == NS_OK);

  ns_ensemble* ensemble = nullptr;
  REQUIRE(ns_ensemble_build(noisy, table, 0.75, 0, 9, 4, R"({"max_iterations": 200})",
                            &ensemble) == NS_OK);
  int64_t m = 0;
  CHECK(ns_ensemble_size(ensemble, &m) == NS_OK);
  CHECK(m == 4);

  ns_model* member = nullptr;
  REQUIRE(ns_ensemble_member_model(ensemble, 0, &member) == NS_OK);
  const double x = 3.0;
  double proba = -1.0;
  CHECK(ns_model_predict(member, &x, 1, nullptr, &proba) == NS_OK);
  CHECK(proba >= 0.0);
  CHECK(proba <= 1.0);
  ns_model* out_of_range = nullptr;
  CHECK(ns_ensemble_member_model(ensemble, 4, &out_of_range) == NS_ERR_INVALID_ARGUMENT);

  std::vector<double> ambiguity(30, -1.0);
  REQUIRE(ns_ensemble_ambiguity(ensemble, noisy, ambiguity.data()) == NS_OK);
  for (double a : ambiguity) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }

  std::vector<double> test_amb(30, -1.0);
  REQUIRE(ns_ensemble_test_ambiguity(ensemble, table, noisy, 5, test_amb.data()) == NS_OK);
  for (double a : test_amb) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }

  ns_model* base = nullptr;
  REQUIRE(ns_train_erm(noisy, R"({"max_iterations": 200})", &base) == NS_OK);
  std::vector<double> disagreement(30, -1.0);
  REQUIRE(ns_ensemble_disagreement(ensemble, base, noisy, disagreement.data()) == NS_OK);
  for (double value : disagreement) {
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);
  }

  // Probability confidence needs only the base model: the probability it
  // assigns to each observed label.
  std::vector<double> conf(30, -1.0);
  REQUIRE(ns_ensemble_confidence(nullptr, base, noisy, nullptr, NS_CONFIDENCE_PROBABILITY, 0,
                                 conf.data()) == NS_OK);
  std::vector<double> probas(30);
  REQUIRE(ns_model_predict_dataset(base, noisy, nullptr, probas.data()) == NS_OK);
  std::vector<int8_t> observed(30);
  REQUIRE(ns_dataset_copy_labels(noisy, observed.data()) == NS_OK);
  for (size_t i = 0; i < conf.size(); ++i) {
    double expected = observed[i] == 1 ? probas[i] : 1.0 - probas[i];
    CHECK(conf[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(ns_ensemble_confidence(nullptr, nullptr, noisy, nullptr, NS_CONFIDENCE_PROBABILITY, 0,
                               conf.data()) == NS_ERR_INVALID_ARGUMENT);
  CHECK(ns_ensemble_confidence(ensemble, base, noisy, table, 9, 0, conf.data()) ==
        NS_ERR_INVALID_ARGUMENT);

  std::string dir = temp_dir("noisescope_capi_ensemble");
  REQUIRE(ns_ensemble_save(ensemble, dir.c_str()) == NS_OK);
  ns_ensemble* loaded = nullptr;
  REQUIRE(ns_ensemble_load(dir.c_str(), &loaded) == NS_OK);
  int64_t m2 = 0;
  CHECK(ns_ensemble_size(loaded, &m2) == NS_OK);
  CHECK(m2 == 4);
  std::vector<double> ambiguity2(30, -1.0);
  REQUIRE(ns_ensemble_ambiguity(loaded, noisy, ambiguity2.data()) == NS_OK);
  CHECK(ambiguity2 == ambiguity);
  ns_ensemble_free(loaded);

  ns_ensemble* missing = nullptr;
  CHECK(ns_ensemble_load("/nonexistent/ensemble", &missing) == NS_ERR_IO);

  ns_model_free(member);
  ns_model_free(base);
  ns_ensemble_free(ensemble);
  ns_ensemble_free(nullptr);  // no-op
  ns_posterior_free(table);
  ns_dataset_free(noisy);
}

TEST_CASE("metrics through the C surface") {
  ns_noise_model* noise = nullptr;
  REQUIRE(ns_noise_model_from_json(kClassModel, &noise) == NS_OK);
  ns_dataset* clean = line_dataset(400, NS_LABELS_CLEAN);
  ns_dataset* noisy = nullptr;
  ns_draw* draw = nullptr;
  REQUIRE(ns_inject_noise(clean, noise, 13, &noisy, &draw) == NS_OK);
  ns_posterior* table = nullptr;
  REQUIRE(ns_posterior_compute(noise, &table) == NS_OK);
  ns_model* model = nullptr;
  REQUIRE(ns_train_erm(noisy, R"({"max_iterations": 500})", &model) == NS_OK);

  char* json = nullptr;
  REQUIRE(ns_metrics_compute(model, noisy, NS_METHOD_IGNORE, table, draw, noise, &json) == NS_OK);
  REQUIRE(json != nullptr);
  nlohmann::json report = nlohmann::json::parse(json);
  CHECK(report.at("n").get<int64_t>() == 400);
  CHECK(report.at("method").get<std::string>() == "ignore");
  CHECK(report.at("anticipated_error").is_number());
  CHECK(report.at("true_error").is_number());
  CHECK(report.at("regret").is_number());
  CHECK(report.at("susceptibility").is_number());
  CHECK(report.at("unbiased_error").is_number());  // noise model was supplied
  ns_string_free(json);

  // Without the posterior table the hedge method has no anticipated labels.
  CHECK(ns_metrics_compute(model, noisy, NS_METHOD_HEDGE, nullptr, nullptr, nullptr, &json) ==
        NS_ERR_CAPABILITY);
  CHECK(ns_metrics_compute(model, noisy, 3, table, nullptr, nullptr, &json) ==
        NS_ERR_INVALID_ARGUMENT);

  // Instance-level noise has no unbiased clean-error estimate but the other
  // quantities still come through.
  ns_noise_model* inst = nullptr;
  {
    nlohmann::json spec;
    spec["family"] = "instance";
    spec["params"]["p"] = std::vector<double>(400, 0.1);
    spec["priors"]["pi_y1"] = 0.5;
    REQUIRE(ns_noise_model_from_json(spec.dump().c_str(), &inst) == NS_OK);
  }
  ns_posterior* inst_table = nullptr;
  REQUIRE(ns_posterior_compute(inst, &inst_table) == NS_OK);
  REQUIRE(ns_metrics_compute(model, noisy, NS_METHOD_IGNORE, inst_table, nullptr, inst, &json) ==
          NS_OK);
  report = nlohmann::json::parse(json);
  CHECK(report.at("unbiased_error").is_null());
  CHECK(report.at("susceptibility").is_number());
  ns_string_free(json);
  ns_posterior_free(inst_table);
  ns_noise_model_free(inst);

  double value = -1.0;
  const double rates[] = {0.0, 0.3};
  ns_posterior* direct = nullptr;
  REQUIRE(ns_posterior_from_rates(rates, 2, &direct) == NS_OK);
  ns_dataset* two = labeled_dataset({0, 1}, NS_LABELS_NOISY);
  CHECK(ns_susceptibility(direct, two, &value) == NS_OK);
  CHECK(value == doctest::Approx(0.5).epsilon(1e-15));

  CHECK(ns_expected_regret(noise, NS_METHOD_IGNORE, &value) == NS_OK);
  CHECK(value == doctest::Approx(0.2 * 0.4).epsilon(1e-12));  // pi1 p1 with p0 = 0

  const double pair[] = {0.2, 0.7};
  ns_posterior* pair_table = nullptr;
  REQUIRE(ns_posterior_from_rates(pair, 2, &pair_table) == NS_OK);
  CHECK(ns_expected_regret_on(pair_table, two, NS_METHOD_IGNORE, &value) == NS_OK);
  CHECK(value == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(ns_expected_regret_on(pair_table, two, NS_METHOD_HEDGE, &value) == NS_OK);
  CHECK(value == doctest::Approx(0.25).epsilon(1e-12));

  ns_posterior_free(pair_table);
  ns_dataset_free(two);
  ns_posterior_free(direct);
  ns_model_free(model);
  ns_posterior_free(table);
  ns_draw_free(draw);
  ns_dataset_free(noisy);
  ns_dataset_free(clean);
  ns_noise_model_free(noise);
}

TEST_CASE("harness entry points") {
  const char* config = R"({
    "synth": {"n": 80, "d": 2, "mean_scale": 1.5},
    "seed": 3,
    "methods": ["ignore"],
    "train": {"max_iterations": 150}
  })";
  std::string dir = temp_dir("noisescope_capi_grid");
  REQUIRE(ns_run_grid(config, dir.c_str()) == NS_OK);
  CHECK(file_exists(dir + "/metrics.json"));
  CHECK(file_exists(dir + "/grid_table.txt"));

  const char* select_config = R"({
    "synth": {"n": 80, "d": 2, "mean_scale": 1.5},
    "seed": 3,
    "methods": ["ignore"],
    "ensemble_size": 4,
    "epsilon": 0.75,
    "abstention_points": 3,
    "train": {"max_iterations": 150}
  })";
  std::string select_dir = temp_dir("noisescope_capi_select");
  REQUIRE(ns_run_select(select_config, select_dir.c_str()) == NS_OK);
  CHECK(file_exists(select_dir + "/select_summary.json"));
  CHECK(file_exists(select_dir + "/frontier_select_ambiguity.csv"));

  CHECK(ns_run_grid("not json", dir.c_str()) == NS_ERR_PARSE);
  CHECK(ns_run_grid(config, nullptr) == NS_ERR_INVALID_ARGUMENT);
  CHECK(ns_run_discover(R"({"data_csv": "rows.csv"})",
                        temp_dir("noisescope_capi_discover").c_str()) == NS_ERR_CONFIG);
}
