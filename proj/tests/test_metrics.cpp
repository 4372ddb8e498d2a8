#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "metrics.hpp"
#include "oracles.hpp"

using namespace noisescope;

namespace {

Dataset line_dataset(const std::vector<double>& xs, std::vector<int8_t> labels, LabelKind kind) {
  Matrix m(static_cast<int64_t>(xs.size()), 1);
  for (size_t i = 0; i < xs.size(); ++i) m.at(static_cast<int64_t>(i), 0) = xs[i];
  return make_dataset(std::move(m), std::move(labels), {}, kind);
}

LinearModel steep_threshold_model() {
  LinearModel model;
  model.weights = {10.0};
  model.bias = 0.0;
  return model;
}

LinearModel constant_model(int label) {
  LinearModel model;
  model.weights = {0.0};
  model.bias = label == 1 ? 25.0 : -25.0;
  return model;
}

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

}  // namespace

TEST_CASE("method names round-trip") {
  CHECK(std::string(method_name(Method::Ignore)) == "ignore");
  CHECK(std::string(method_name(Method::Hedge)) == "hedge");
  CHECK(method_from_name("ignore") == Method::Ignore);
  CHECK(method_from_name("hedge") == Method::Hedge);
  CHECK(code_of([] { method_from_name("both"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("anticipated mistakes per method") {
  Dataset noisy = line_dataset({-1.0, -0.5, 0.5, 1.0}, {0, 1, 1, 0}, LabelKind::Noisy);
  LinearModel model = steep_threshold_model();  // predicts {0, 0, 1, 1}

  std::vector<int8_t> ignore = anticipated_mistakes(model, noisy, Method::Ignore, nullptr);
  CHECK(ignore == std::vector<int8_t>{0, 1, 0, 1});

  // Posterior says instance 1 most likely flipped: hedge scores against
  // y-tilde XOR mle = {0, 0, 1, 0}.
  PosteriorTable table = posterior_from_rates({0.1, 0.6, 0.4, 0.2});
  int64_t ties = -1;
  std::vector<int8_t> hedge =
      anticipated_mistakes(model, noisy, Method::Hedge, &table, &ties);
  CHECK(hedge == std::vector<int8_t>{0, 0, 0, 1});
  CHECK(ties == 0);

  CHECK(code_of([&] { anticipated_mistakes(model, noisy, Method::Hedge, nullptr); }) ==
        ErrorCode::Capability);
  Dataset clean = line_dataset({0.0}, {1}, LabelKind::Clean);
  CHECK(code_of([&] { anticipated_mistakes(model, clean, Method::Ignore, nullptr); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("true mistakes score against the draw-corrected labels") {
  Dataset noisy = line_dataset({-1.0, -0.5, 0.5, 1.0}, {0, 1, 1, 0}, LabelKind::Noisy);
  LinearModel model = steep_threshold_model();
  NoiseDraw draw;
  draw.bits = {0, 1, 0, 1};  // clean labels = {0, 0, 1, 1}
  CHECK(true_mistakes(model, noisy, draw) == std::vector<int8_t>{0, 0, 0, 0});

  NoiseDraw wrong_length;
  wrong_length.bits = {0, 1};
  CHECK(code_of([&] { true_mistakes(model, noisy, wrong_length); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("susceptibility counts strictly positive posterior mass") {
  PosteriorTable table = posterior_from_rates({0.0, 1e-13, 1e-12, 0.3, 0.5});
  Dataset noisy =
      line_dataset({0.0, 1.0, 2.0, 3.0, 4.0}, {1, 1, 1, 1, 1}, LabelKind::Noisy);
  CHECK(susceptibility(table, noisy) == 0.4);
}

TEST_CASE("expected regret on a dataset follows the method's implicit draw") {
  PosteriorTable table = posterior_from_rates({0.2, 0.7});
  Dataset noisy = line_dataset({0.0, 1.0}, {1, 0}, LabelKind::Noisy);
  CHECK(std::fabs(expected_regret_on(table, noisy, Method::Ignore) - 0.45) < 1e-15);
  CHECK(std::fabs(expected_regret_on(table, noisy, Method::Hedge) - 0.25) < 1e-15);
}

TEST_CASE("closed-form expected regret matches the stratum decomposition") {
  NoiseModel uniform;
  uniform.spec.family = NoiseFamily::Uniform;
  uniform.priors.family = NoiseFamily::Uniform;
  uniform.spec.uniform_p = 0.3;
  CHECK(expected_regret(uniform, Method::Ignore) == 0.3);
  CHECK(expected_regret(uniform, Method::Hedge) == 0.3);  // q < 0.5: hedging never flips

  // Mostly-negative data with heavy negative-class noise: observing 1 implies
  // a 90% flip chance, so hedging pays off on that stratum.
  NoiseModel skew;
  skew.spec.family = NoiseFamily::ClassLevel;
  skew.priors.family = NoiseFamily::ClassLevel;
  skew.spec.class_p = {0.45, 0.05};
  skew.priors.pi1 = 0.05;

  // Ignore regret is the total flip mass pi_0 p_0 + pi_1 p_1.
  double ignore = expected_regret(skew, Method::Ignore);
  CHECK(std::fabs(ignore - (0.95 * 0.45 + 0.05 * 0.05)) < 1e-12);
  double hedge = expected_regret(skew, Method::Hedge);
  CHECK(std::fabs(hedge - 0.05) < 1e-12);
  CHECK(hedge < ignore);

  // A dataset whose observed labels hit the noisy marginal exactly (525 zeros,
  // 475 ones per 1000) reproduces the closed form as a dataset average.
  std::vector<double> xs(1000, 0.0);
  std::vector<int8_t> labels(1000);
  for (size_t i = 0; i < 1000; ++i) labels[i] = i < 475 ? 1 : 0;
  Dataset matched = line_dataset(xs, labels, LabelKind::Noisy);
  PosteriorTable table = posterior(skew.spec, skew.priors);
  CHECK(std::fabs(expected_regret_on(table, matched, Method::Ignore) - ignore) < 1e-12);
  CHECK(std::fabs(expected_regret_on(table, matched, Method::Hedge) - hedge) < 1e-12);

  NoiseModel group;
  group.spec.family = NoiseFamily::GroupLevel;
  group.priors.family = NoiseFamily::GroupLevel;
  group.spec.group_p[0] = {0.1, 0.1};
  group.priors.group_pi1[0] = 0.5;
  CHECK(code_of([&] { expected_regret(group, Method::Ignore); }) == ErrorCode::Capability);
}

TEST_CASE("regret is model-independent and decomposes exactly") {
  Rng rng(77);
  int64_t n = 400;
  std::vector<double> xs(static_cast<size_t>(n));
  std::vector<int8_t> labels(static_cast<size_t>(n));
  std::vector<double> rates(static_cast<size_t>(n));
  NoiseDraw true_draw;
  true_draw.bits.resize(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    xs[static_cast<size_t>(i)] = rng.gaussian();
    labels[static_cast<size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
    double q = rng.uniform();
    if (std::fabs(q - 0.5) < 0.01) q = 0.6;  // keep the MLE draw unambiguous
    rates[static_cast<size_t>(i)] = q;
    true_draw.bits[static_cast<size_t>(i)] = rng.bernoulli(q) ? 1 : 0;
  }
  Dataset noisy = line_dataset(xs, labels, LabelKind::Noisy);
  PosteriorTable table = posterior_from_rates(rates);
  NoiseDraw mle = implicit_mle_draw(table, noisy);

  for (Method method : {Method::Ignore, Method::Hedge}) {
    MetricsInputs inputs;
    inputs.noisy = &noisy;
    inputs.method = method;
    inputs.table = &table;
    inputs.true_draw = &true_draw;

    LinearModel steep = steep_threshold_model();
    LinearModel ones = constant_model(1);
    inputs.model = &steep;
    MetricsReport a = compute_metrics(inputs);
    inputs.model = &ones;
    MetricsReport b = compute_metrics(inputs);

    // Regret never depends on the model, only on the two draws.
    CHECK(a.regret_indicator == b.regret_indicator);
    for (int64_t i = 0; i < n; ++i) {
      int expected =
          method == Method::Ignore
              ? true_draw.bits[static_cast<size_t>(i)]
              : (mle.bits[static_cast<size_t>(i)] != true_draw.bits[static_cast<size_t>(i)] ? 1
                                                                                            : 0);
      CHECK(a.regret_indicator[static_cast<size_t>(i)] == expected);
    }

    REQUIRE(a.regret.has_value());
    CHECK(std::fabs(*a.regret - (*a.overreliance + *a.underreliance)) < 1e-15);
    int64_t anticipated_sum =
        std::accumulate(a.anticipated.begin(), a.anticipated.end(), int64_t{0});
    int64_t realized_sum = std::accumulate(a.realized.begin(), a.realized.end(), int64_t{0});
    CHECK(*a.decomposition_total ==
          static_cast<double>(anticipated_sum - realized_sum));
    CHECK(std::fabs(*a.decomposition_mean - (a.anticipated_error - *a.true_error)) < 1e-15);
  }
}

TEST_CASE("compute_metrics full worked example") {
  Dataset noisy = line_dataset({-1.0, -0.5, 0.5, 1.0}, {0, 1, 1, 0}, LabelKind::Noisy);
  LinearModel model = steep_threshold_model();  // predicts {0, 0, 1, 1}
  PosteriorTable table = posterior_from_rates({0.1, 0.6, 0.4, 0.2});
  NoiseDraw true_draw;
  true_draw.bits = {0, 1, 0, 1};
  HedgeSpec hedge;
  hedge.class_rho = {0.1, 0.3};

  MetricsInputs inputs;
  inputs.model = &model;
  inputs.noisy = &noisy;
  inputs.method = Method::Hedge;
  inputs.table = &table;
  inputs.true_draw = &true_draw;
  inputs.hedge = &hedge;

  MetricsReport report = compute_metrics(inputs);
  CHECK(report.n == 4);
  CHECK(report.anticipated == std::vector<int8_t>{0, 0, 0, 1});
  CHECK(report.anticipated_error == 0.25);
  CHECK(report.realized == std::vector<int8_t>{0, 0, 0, 0});
  CHECK(*report.true_error == 0.0);
  CHECK(*report.regret == 0.25);
  CHECK(*report.overreliance == 0.0);
  CHECK(*report.underreliance == 0.25);
  CHECK(*report.decomposition_total == 1.0);
  CHECK(*report.decomposition_mean == 0.25);
  CHECK(*report.susceptibility == 1.0);
  CHECK(std::fabs(*report.expected_regret - 0.275) < 1e-15);
  CHECK(std::fabs(*report.unbiased_error - 0.5) < 1e-12);
  CHECK(report.mle_ties == 0);

  nlohmann::json j = nlohmann::json::parse(report_to_json(report));
  CHECK(j.at("method") == "hedge");
  CHECK(j.at("n") == 4);
  CHECK(j.at("anticipated_error") == 0.25);
  CHECK(std::fabs(j.at("unbiased_error").get<double>() - 0.5) < 1e-12);

  inputs.keep_per_instance = false;
  MetricsReport compact = compute_metrics(inputs);
  CHECK(compact.anticipated.empty());
  CHECK(compact.realized.empty());
  CHECK(compact.regret_indicator.empty());

  inputs.true_draw = nullptr;
  inputs.keep_per_instance = true;
  MetricsReport partial = compute_metrics(inputs);
  CHECK_FALSE(partial.true_error.has_value());
  CHECK_FALSE(partial.regret.has_value());
  nlohmann::json pj = nlohmann::json::parse(report_to_json(partial));
  CHECK(pj.at("true_error").is_null());
  CHECK(pj.at("regret").is_null());

  inputs.table = nullptr;
  CHECK(code_of([&] { compute_metrics(inputs); }) == ErrorCode::Capability);
  inputs.method = Method::Ignore;
  MetricsReport no_table = compute_metrics(inputs);
  CHECK_FALSE(no_table.susceptibility.has_value());
  CHECK_FALSE(no_table.expected_regret.has_value());

  inputs.model = nullptr;
  CHECK(code_of([&] { compute_metrics(inputs); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("unbiased error estimates the clean error in expectation") {
  int64_t n = 500;
  std::vector<double> xs(static_cast<size_t>(n));
  std::vector<int8_t> ys(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    xs[static_cast<size_t>(i)] = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    ys[static_cast<size_t>(i)] = xs[static_cast<size_t>(i)] > 0.0 ? 1 : 0;
  }
  Dataset clean = line_dataset(xs, ys, LabelKind::Clean);

  LinearModel model;
  model.weights = {10.0};
  model.bias = 3.0;  // shifted cut: misclassifies part of the negatives

  std::vector<int8_t> clean_preds = model.predict(clean);
  double clean_error = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    clean_error += clean_preds[static_cast<size_t>(i)] != ys[static_cast<size_t>(i)] ? 1.0 : 0.0;
  }
  clean_error /= static_cast<double>(n);
  CHECK(clean_error > 0.05);  // the example must be nontrivial

  NoiseSpec spec;
  spec.family = NoiseFamily::ClassLevel;
  spec.class_p = {0.1, 0.3};
  HedgeSpec hedge = HedgeSpec::from_noise(spec);

  double total = 0.0;
  int64_t draws = 200;
  for (int64_t k = 0; k < draws; ++k) {
    InjectResult injected = inject_noise(clean, spec, static_cast<uint64_t>(1000 + k));
    MetricsInputs inputs;
    inputs.model = &model;
    inputs.noisy = &injected.noisy;
    inputs.method = Method::Ignore;
    inputs.hedge = &hedge;
    inputs.keep_per_instance = false;
    MetricsReport report = compute_metrics(inputs);
    REQUIRE(report.unbiased_error.has_value());
    total += *report.unbiased_error;
  }
  CHECK(std::fabs(total / static_cast<double>(draws) - clean_error) < 0.02);
}

TEST_CASE("anticipated-optimal and MLE-optimal classifiers coincide over a full class") {
  // Heterogeneous posteriors, every labeling available: minimizing expected
  // error under independent flips and minimizing error against the MLE labels
  // pick the same set pointwise (no q touches 0.5).
  Rng rng(505);
  for (int trial = 0; trial < 20; ++trial) {
    int64_t k = 6;
    std::vector<int8_t> noisy(static_cast<size_t>(k));
    std::vector<double> q(static_cast<size_t>(k));
    for (int64_t i = 0; i < k; ++i) {
      noisy[static_cast<size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
      double v = 0.05 + 0.9 * rng.uniform();
      if (std::fabs(v - 0.5) < 0.02) v = 0.55;
      q[static_cast<size_t>(i)] = v;
    }
    auto everything = oracle::all_labelings(k);
    std::vector<int8_t> mle(static_cast<size_t>(k));
    for (int64_t i = 0; i < k; ++i) {
      mle[static_cast<size_t>(i)] = static_cast<int8_t>(
          xor_bit(noisy[static_cast<size_t>(i)], q[static_cast<size_t>(i)] > 0.5 ? 1 : 0));
    }
    auto expected_best = oracle::argmin_set(everything, [&](const std::vector<int8_t>& pred) {
      return oracle::expected_error_under_flips(pred, noisy, q);
    });
    auto mle_best = oracle::argmin_set(everything, [&](const std::vector<int8_t>& pred) {
      return oracle::error_against(pred, mle);
    });
    CHECK(expected_best == mle_best);
    CHECK(expected_best.size() == 1);
    CHECK(*expected_best.begin() == mle);
  }
}

TEST_CASE("threshold classes break the equivalence under heterogeneous posteriors") {
  // Three collinear points, q = {0.4, 0.35, 0.05}: the expected-error argmin
  // over threshold rules is {110} but scoring against the MLE labels (= the
  // observed ones, all q < 0.5) ties {000, 110, 011}.
  std::vector<double> x = {0.0, 1.0, 2.0};
  std::vector<int8_t> noisy = {0, 1, 0};
  std::vector<double> q = {0.4, 0.35, 0.05};
  auto preds = oracle::threshold_predictions(x, 3, 1);

  auto expected_best = oracle::argmin_set(preds, [&](const std::vector<int8_t>& pred) {
    return oracle::expected_error_under_flips(pred, noisy, q);
  });
  auto mle_best = oracle::argmin_set(preds, [&](const std::vector<int8_t>& pred) {
    return oracle::error_against(pred, noisy);  // q < 0.5 everywhere: MLE = observed
  });
  CHECK(expected_best != mle_best);
  CHECK(expected_best.size() == 1);
  CHECK(*expected_best.begin() == std::vector<int8_t>{1, 1, 0});
  CHECK(mle_best.size() == 3);

  // Homogeneous q restores the equivalence on the same class.
  Rng rng(606);
  for (int trial = 0; trial < 50; ++trial) {
    int64_t k = 8;
    std::vector<double> xs(static_cast<size_t>(k));
    std::vector<int8_t> labels(static_cast<size_t>(k));
    for (int64_t i = 0; i < k; ++i) {
      xs[static_cast<size_t>(i)] = rng.gaussian();
      labels[static_cast<size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
    }
    double shared = rng.bernoulli(0.5) ? 0.05 + 0.4 * rng.uniform() : 0.55 + 0.4 * rng.uniform();
    std::vector<double> qs(static_cast<size_t>(k), shared);
    std::vector<int8_t> mle(static_cast<size_t>(k));
    for (int64_t i = 0; i < k; ++i) {
      mle[static_cast<size_t>(i)] =
          static_cast<int8_t>(xor_bit(labels[static_cast<size_t>(i)], shared > 0.5 ? 1 : 0));
    }
    auto family = oracle::threshold_predictions(xs, k, 1);
    auto by_expectation = oracle::argmin_set(family, [&](const std::vector<int8_t>& pred) {
      return oracle::expected_error_under_flips(pred, labels, qs);
    });
    auto by_mle = oracle::argmin_set(family, [&](const std::vector<int8_t>& pred) {
      return oracle::error_against(pred, mle);
    });
    CHECK(by_expectation == by_mle);
  }
}
