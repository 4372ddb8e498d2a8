#include "metrics.hpp"

#include "json.hpp"

namespace noisescope {

const char* method_name(Method method) {
  switch (method) {
    case Method::Ignore: return "ignore";
    case Method::Hedge: return "hedge";
  }
  fail(ErrorCode::InvalidArgument, "unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "ignore") return Method::Ignore;
  if (name == "hedge") return Method::Hedge;
  fail(ErrorCode::InvalidArgument, "unknown method '" + name + "' (expected ignore or hedge)");
}

namespace {

// Chance the method's implicit flip misses a realized flip drawn with
// probability q: Ignore never flips; Hedge flips exactly when q > 0.5.
double regret_mass(double q, Method method) {
  if (method == Method::Hedge && q > 0.5) return 1.0 - q;
  return q;
}

std::vector<int8_t> method_targets(const Dataset& noisy, Method method,
                                   const PosteriorTable* table, int64_t* mle_ties) {
  std::vector<int8_t> targets = noisy.labels;
  if (method == Method::Hedge) {
    require(table != nullptr, ErrorCode::Capability,
            "hedge anticipation needs a posterior table");
    NoiseDraw mle = implicit_mle_draw(*table, noisy);
    if (mle_ties != nullptr) *mle_ties = mle.mle_ties;
    for (size_t i = 0; i < targets.size(); ++i) {
      targets[i] = static_cast<int8_t>(xor_bit(targets[i], mle.bits[i]));
    }
  } else if (mle_ties != nullptr) {
    *mle_ties = 0;
  }
  return targets;
}

std::vector<int8_t> mistakes_against(const std::vector<int8_t>& preds,
                                     const std::vector<int8_t>& targets) {
  std::vector<int8_t> out(preds.size());
  for (size_t i = 0; i < preds.size(); ++i) out[i] = preds[i] != targets[i] ? 1 : 0;
  return out;
}

double mean_of(const std::vector<int8_t>& bits) {
  int64_t sum = 0;
  for (int8_t b : bits) sum += b;
  return bits.empty() ? 0.0 : static_cast<double>(sum) / static_cast<double>(bits.size());
}

}  // namespace

std::vector<int8_t> anticipated_mistakes(const LinearModel& model, const Dataset& noisy,
                                         Method method, const PosteriorTable* table,
                                         int64_t* mle_ties) {
  require(noisy.label_kind == LabelKind::Noisy, ErrorCode::InvalidArgument,
          "anticipated mistakes are defined on noisy labels");
  return mistakes_against(model.predict(noisy), method_targets(noisy, method, table, mle_ties));
}

std::vector<int8_t> true_mistakes(const LinearModel& model, const Dataset& noisy,
                                  const NoiseDraw& true_draw) {
  require(noisy.label_kind == LabelKind::Noisy, ErrorCode::InvalidArgument,
          "true mistakes need noisy labels plus the realized draw");
  require(true_draw.size() == noisy.size(), ErrorCode::InvalidArgument,
          "draw length does not match dataset size");
  std::vector<int8_t> clean(noisy.labels.size());
  for (size_t i = 0; i < clean.size(); ++i) {
    clean[i] = static_cast<int8_t>(xor_bit(noisy.labels[i], true_draw.bits[i]));
  }
  return mistakes_against(model.predict(noisy), clean);
}

double susceptibility(const PosteriorTable& table, const Dataset& noisy) {
  require(noisy.size() >= 1, ErrorCode::InvalidArgument, "empty dataset");
  int64_t count = 0;
  for (int64_t i = 0; i < noisy.size(); ++i) {
    if (table.rate_for(noisy, i) > kSusceptibilityThreshold) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(noisy.size());
}

double expected_regret_on(const PosteriorTable& table, const Dataset& noisy, Method method) {
  require(noisy.size() >= 1, ErrorCode::InvalidArgument, "empty dataset");
  double sum = 0.0;
  for (int64_t i = 0; i < noisy.size(); ++i) {
    sum += regret_mass(table.rate_for(noisy, i), method);
  }
  return sum / static_cast<double>(noisy.size());
}

double expected_regret(const NoiseModel& model, Method method) {
  model.spec.validate();
  if (model.spec.family == NoiseFamily::Uniform) {
    return regret_mass(model.spec.uniform_p, method);
  }
  require(model.spec.family == NoiseFamily::ClassLevel, ErrorCode::Capability,
          "closed-form expected regret covers uniform and class-level noise only; "
          "use expected_regret_on for a dataset average");
  model.priors.validate();
  PosteriorTable table = posterior(model.spec, model.priors);
  NoisyMarginal marginal = noisy_label_marginal(model.spec, model.priors);
  double sum = 0.0;
  for (int yt = 0; yt < 2; ++yt) {
    double mass = marginal.class_m[static_cast<size_t>(yt)];
    if (mass == 0.0) continue;
    const std::optional<double>& q = table.class_q[static_cast<size_t>(yt)];
    require(q.has_value(), ErrorCode::Evaluation, "posterior undefined on a reachable stratum");
    sum += mass * regret_mass(*q, method);
  }
  return sum;
}

void MetricsReport::clear_per_instance() {
  anticipated.clear();
  realized.clear();
  regret_indicator.clear();
}

MetricsReport compute_metrics(const MetricsInputs& inputs) {
  require(inputs.model != nullptr && inputs.noisy != nullptr, ErrorCode::InvalidArgument,
          "metrics need a model and a noisy dataset");
  const Dataset& data = *inputs.noisy;
  require(data.label_kind == LabelKind::Noisy, ErrorCode::InvalidArgument,
          "metrics are computed on noisy-labeled data");
  inputs.model->validate();

  MetricsReport report;
  report.method = inputs.method;
  report.n = data.size();

  std::vector<int8_t> preds = inputs.model->predict(data);
  std::vector<int8_t> targets =
      method_targets(data, inputs.method, inputs.table, &report.mle_ties);
  report.anticipated = mistakes_against(preds, targets);
  report.anticipated_error = mean_of(report.anticipated);

  if (inputs.true_draw != nullptr) {
    require(inputs.true_draw->size() == data.size(), ErrorCode::InvalidArgument,
            "draw length does not match dataset size");
    std::vector<int8_t> clean(data.labels.size());
    for (size_t i = 0; i < clean.size(); ++i) {
      clean[i] = static_cast<int8_t>(xor_bit(data.labels[i], inputs.true_draw->bits[i]));
    }
    report.realized = mistakes_against(preds, clean);
    report.true_error = mean_of(report.realized);

    report.regret_indicator.resize(report.anticipated.size());
    int64_t over = 0, under = 0;
    for (size_t i = 0; i < report.anticipated.size(); ++i) {
      int8_t a = report.anticipated[i], e = report.realized[i];
      report.regret_indicator[i] = a != e ? 1 : 0;
      if (a == 0 && e == 1) ++over;
      if (a == 1 && e == 0) ++under;
    }
    double n = static_cast<double>(report.n);
    report.regret = mean_of(report.regret_indicator);
    report.overreliance = static_cast<double>(over) / n;
    report.underreliance = static_cast<double>(under) / n;
    report.decomposition_total = static_cast<double>(static_cast<int64_t>(under) - over);
    report.decomposition_mean = *report.decomposition_total / n;
  }

  if (inputs.table != nullptr) {
    report.susceptibility = susceptibility(*inputs.table, data);
    report.expected_regret = expected_regret_on(*inputs.table, data, inputs.method);
  }

  if (inputs.hedge != nullptr) {
    inputs.hedge->validate();
    double sum = 0.0;
    for (int64_t i = 0; i < data.size(); ++i) {
      std::array<double, 2> rho = inputs.hedge->rho_for(data, i);
      double observed = preds[static_cast<size_t>(i)] != data.labels[static_cast<size_t>(i)]
                            ? 1.0
                            : 0.0;
      sum += unbiased_loss(observed, 1.0 - observed, data.labels[static_cast<size_t>(i)], rho[0],
                           rho[1]);
    }
    report.unbiased_error = sum / static_cast<double>(report.n);
  }

  if (!inputs.keep_per_instance) report.clear_per_instance();
  return report;
}

std::string report_to_json(const MetricsReport& report, int indent) {
  nlohmann::json j;
  j["method"] = method_name(report.method);
  j["n"] = report.n;
  j["anticipated_error"] = report.anticipated_error;
  auto put = [&j](const char* key, const std::optional<double>& value) {
    if (value.has_value()) {
      j[key] = *value;
    } else {
      j[key] = nullptr;
    }
  };
  put("true_error", report.true_error);
  put("regret", report.regret);
  put("overreliance", report.overreliance);
  put("underreliance", report.underreliance);
  put("susceptibility", report.susceptibility);
  put("expected_regret", report.expected_regret);
  put("decomposition_total", report.decomposition_total);
  put("decomposition_mean", report.decomposition_mean);
  put("unbiased_error", report.unbiased_error);
  j["mle_ties"] = report.mle_ties;
  return j.dump(indent);
}

}  // namespace noisescope
