#include "learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace noisescope {

using nlohmann::json;

double LinearModel::score(const double* x, int64_t d) const {
  require(static_cast<int64_t>(weights.size()) == d, ErrorCode::InvalidArgument,
          "model: feature dimension mismatch");
  double s = bias;
  if (standardization.active) {
    for (int64_t j = 0; j < d; ++j) {
      double z = (x[j] - standardization.means[static_cast<size_t>(j)]) /
                 standardization.stds[static_cast<size_t>(j)];
      s += weights[static_cast<size_t>(j)] * z;
    }
  } else {
    for (int64_t j = 0; j < d; ++j) s += weights[static_cast<size_t>(j)] * x[j];
  }
  return s;
}

std::vector<double> LinearModel::predict_proba(const Dataset& data) const {
  std::vector<double> out(static_cast<size_t>(data.size()));
  for (int64_t i = 0; i < data.size(); ++i) {
    out[static_cast<size_t>(i)] = predict_proba(data.row(i), data.dim());
  }
  return out;
}

std::vector<int8_t> LinearModel::predict(const Dataset& data) const {
  std::vector<int8_t> out(static_cast<size_t>(data.size()));
  for (int64_t i = 0; i < data.size(); ++i) {
    out[static_cast<size_t>(i)] = static_cast<int8_t>(predict(data.row(i), data.dim()));
  }
  return out;
}

void LinearModel::validate() const {
  for (double w : weights) {
    require(std::isfinite(w), ErrorCode::InvalidArgument, "model: non-finite weight");
  }
  require(std::isfinite(bias), ErrorCode::InvalidArgument, "model: non-finite bias");
  require(std::isfinite(threshold) && threshold >= 0.0 && threshold <= 1.0,
          ErrorCode::InvalidArgument, "model: threshold must lie in [0, 1]");
  if (standardization.active) {
    require(standardization.means.size() == weights.size() &&
                standardization.stds.size() == weights.size(),
            ErrorCode::InvalidArgument, "model: standardization length mismatch");
    for (double v : standardization.means) {
      require(std::isfinite(v), ErrorCode::InvalidArgument, "model: non-finite mean");
    }
    for (double v : standardization.stds) {
      require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidArgument,
              "model: standardization stds must be positive");
    }
  }
}

std::string model_to_json(const LinearModel& model) {
  json j;
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["threshold"] = model.threshold;
  if (model.standardization.active) {
    j["standardization"] = {{"means", model.standardization.means},
                            {"stds", model.standardization.stds}};
  } else {
    j["standardization"] = nullptr;
  }
  j["single_class_warning"] = model.single_class_warning;
  return j.dump(2);
}

LinearModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("model: invalid JSON: ") + e.what());
  }
  LinearModel model;
  try {
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    model.threshold = j.at("threshold").get<double>();
    if (j.contains("standardization") && !j.at("standardization").is_null()) {
      model.standardization.active = true;
      model.standardization.means = j.at("standardization").at("means").get<std::vector<double>>();
      model.standardization.stds = j.at("standardization").at("stds").get<std::vector<double>>();
    }
    model.single_class_warning = j.value("single_class_warning", false);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("model: missing or malformed field: ") + e.what());
  }
  model.validate();
  return model;
}

void save_model(const LinearModel& model, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io, "model: cannot write " + path);
  out << model_to_json(model) << "\n";
  require(out.good(), ErrorCode::Io, "model: write failed for " + path);
}

LinearModel load_model(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "model: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

void TrainConfig::validate() const {
  require(std::isfinite(l2_penalty) && l2_penalty >= 0.0, ErrorCode::InvalidArgument,
          "train config: l2_penalty must be >= 0");
  require(max_iterations >= 0, ErrorCode::InvalidArgument,
          "train config: max_iterations must be >= 0");
  require(std::isfinite(gradient_tolerance) && gradient_tolerance > 0.0,
          ErrorCode::InvalidArgument, "train config: gradient_tolerance must be positive");
}

double penalized_objective(const Matrix& features, const std::vector<double>& targets,
                           double l2_penalty, const std::vector<double>& theta,
                           std::vector<double>* gradient) {
  int64_t n = features.rows;
  int64_t d = features.cols;
  if (gradient != nullptr) {
    gradient->assign(static_cast<size_t>(d + 1), 0.0);
  }
  double value = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double* x = features.row(i);
    double s = theta[static_cast<size_t>(d)];
    for (int64_t j = 0; j < d; ++j) s += theta[static_cast<size_t>(j)] * x[j];
    double t = targets[static_cast<size_t>(i)];
    value += log1pexp(s) - t * s;
    if (gradient != nullptr) {
      double r = sigmoid(s) - t;
      for (int64_t j = 0; j < d; ++j) (*gradient)[static_cast<size_t>(j)] += r * x[j];
      (*gradient)[static_cast<size_t>(d)] += r;
    }
  }
  double inv_n = 1.0 / static_cast<double>(n);
  value *= inv_n;
  for (int64_t j = 0; j < d; ++j) {
    double w = theta[static_cast<size_t>(j)];
    value += 0.5 * l2_penalty * w * w;
  }
  if (gradient != nullptr) {
    for (int64_t j = 0; j <= d; ++j) (*gradient)[static_cast<size_t>(j)] *= inv_n;
    for (int64_t j = 0; j < d; ++j) {
      (*gradient)[static_cast<size_t>(j)] += l2_penalty * theta[static_cast<size_t>(j)];
    }
  }
  return value;
}

namespace {

Standardization compute_standardization(const Dataset& data) {
  Standardization st;
  st.active = true;
  int64_t n = data.size();
  int64_t d = data.dim();
  st.means.assign(static_cast<size_t>(d), 0.0);
  st.stds.assign(static_cast<size_t>(d), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    const double* x = data.row(i);
    for (int64_t j = 0; j < d; ++j) st.means[static_cast<size_t>(j)] += x[j];
  }
  for (int64_t j = 0; j < d; ++j) st.means[static_cast<size_t>(j)] /= static_cast<double>(n);
  for (int64_t i = 0; i < n; ++i) {
    const double* x = data.row(i);
    for (int64_t j = 0; j < d; ++j) {
      double c = x[j] - st.means[static_cast<size_t>(j)];
      st.stds[static_cast<size_t>(j)] += c * c;
    }
  }
  for (int64_t j = 0; j < d; ++j) {
    double v = std::sqrt(st.stds[static_cast<size_t>(j)] / static_cast<double>(n));
    st.stds[static_cast<size_t>(j)] = v > 1e-12 ? v : 1.0;  // constant column guard
  }
  return st;
}

// Shared optimizer: penalized logistic regression on per-instance targets.
LinearModel fit_targets(const Dataset& data, const std::vector<double>& targets,
                        const TrainConfig& config) {
  int64_t n = data.size();
  int64_t d = data.dim();

  LinearModel model;
  model.weights.assign(static_cast<size_t>(d), 0.0);
  if (config.standardize_features) {
    model.standardization = compute_standardization(data);
  }

  Matrix z(n, d);
  for (int64_t i = 0; i < n; ++i) {
    const double* x = data.row(i);
    for (int64_t j = 0; j < d; ++j) {
      double v = x[j];
      if (model.standardization.active) {
        v = (v - model.standardization.means[static_cast<size_t>(j)]) /
            model.standardization.stds[static_cast<size_t>(j)];
      }
      z.at(i, j) = v;
    }
  }

  std::vector<double> theta(static_cast<size_t>(d + 1), 0.0);
  std::vector<double> grad;
  double value = penalized_objective(z, targets, config.l2_penalty, theta, &grad);

  double step = 1.0;
  std::vector<double> trial(theta.size());
  for (int64_t iter = 0; iter < config.max_iterations; ++iter) {
    double grad_inf = 0.0;
    double grad_sq = 0.0;
    for (double g : grad) {
      grad_inf = std::max(grad_inf, std::fabs(g));
      grad_sq += g * g;
    }
    if (grad_inf <= config.gradient_tolerance) break;

    step = std::min(step * 2.0, 1e4);
    bool moved = false;
    while (step >= 1e-20) {
      for (size_t j = 0; j < theta.size(); ++j) trial[j] = theta[j] - step * grad[j];
      double trial_value = penalized_objective(z, targets, config.l2_penalty, trial, nullptr);
      if (trial_value <= value - 1e-4 * step * grad_sq) {
        theta.swap(trial);
        value = penalized_objective(z, targets, config.l2_penalty, theta, &grad);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;  // line search stalled at numerical precision
  }

  model.weights.assign(theta.begin(), theta.begin() + d);
  model.bias = theta[static_cast<size_t>(d)];
  model.validate();
  return model;
}

// Constant classifier used when only one class is present.
LinearModel single_class_model(const Dataset& data, int label, const TrainConfig& config) {
  LinearModel model;
  model.weights.assign(static_cast<size_t>(data.dim()), 0.0);
  model.bias = label == 1 ? 25.0 : -25.0;
  model.single_class_warning = true;
  if (config.standardize_features) {
    model.standardization = compute_standardization(data);
  }
  return model;
}

}  // namespace

LinearModel fit_erm(const Dataset& data, const TrainConfig& config) {
  data.validate();
  config.validate();

  bool has0 = false, has1 = false;
  for (int8_t y : data.labels) (y == 1 ? has1 : has0) = true;
  if (!has0 || !has1) return single_class_model(data, has1 ? 1 : 0, config);

  std::vector<double> targets(data.labels.begin(), data.labels.end());
  return fit_targets(data, targets, config);
}

void HedgeSpec::validate() const {
  auto check = [](const std::array<double, 2>& rho, const std::string& where) {
    require(std::isfinite(rho[0]) && rho[0] >= 0.0 && std::isfinite(rho[1]) && rho[1] >= 0.0,
            ErrorCode::InvalidArgument, where + ": flip rates must be >= 0");
    require(rho[0] + rho[1] < 1.0, ErrorCode::Domain,
            where + ": rho_0 + rho_1 must be < 1 for the correction to exist");
  };
  if (by_group) {
    require(!group_rho.empty(), ErrorCode::InvalidArgument, "hedge spec: no group entries");
    for (const auto& [g, rho] : group_rho) {
      check(rho, "hedge spec (group=" + std::to_string(g) + ")");
    }
  } else {
    check(class_rho, "hedge spec");
  }
}

std::array<double, 2> HedgeSpec::rho_for(const Dataset& data, int64_t i) const {
  if (!by_group) return class_rho;
  require(data.has_groups(), ErrorCode::Config, "hedge spec: dataset has no group column");
  int32_t g = data.groups[static_cast<size_t>(i)];
  auto it = group_rho.find(g);
  require(it != group_rho.end(), ErrorCode::Config,
          "hedge spec: no entry for stratum group=" + std::to_string(g));
  return it->second;
}

HedgeSpec HedgeSpec::from_noise(const NoiseSpec& spec) {
  HedgeSpec hedge;
  switch (spec.family) {
    case NoiseFamily::Uniform:
      hedge.class_rho = {spec.uniform_p, spec.uniform_p};
      break;
    case NoiseFamily::ClassLevel:
      hedge.class_rho = spec.class_p;
      break;
    case NoiseFamily::GroupLevel:
      hedge.by_group = true;
      hedge.group_rho = spec.group_p;
      break;
    case NoiseFamily::InstanceLevel:
      fail(ErrorCode::Capability,
           "hedge: instance-level noise carries no class-conditional rates; "
           "hedged training needs uniform, class, or group rates");
  }
  hedge.validate();
  return hedge;
}

double unbiased_loss(double loss_observed, double loss_flipped, int noisy_label, double rho0,
                     double rho1) {
  require(noisy_label == 0 || noisy_label == 1, ErrorCode::Domain,
          "unbiased_loss: noisy label must be 0 or 1");
  require(std::isfinite(rho0) && rho0 >= 0.0 && std::isfinite(rho1) && rho1 >= 0.0,
          ErrorCode::InvalidArgument, "unbiased_loss: flip rates must be >= 0");
  require(rho0 + rho1 < 1.0, ErrorCode::Domain,
          "unbiased_loss: rho_0 + rho_1 must be < 1 for the correction to exist");
  double rho_self = noisy_label == 1 ? rho1 : rho0;
  double rho_other = noisy_label == 1 ? rho0 : rho1;
  return ((1.0 - rho_other) * loss_observed - rho_self * loss_flipped) / (1.0 - rho0 - rho1);
}

LinearModel fit_hedged(const Dataset& noisy, const HedgeSpec& hedge, const TrainConfig& config) {
  noisy.validate();
  config.validate();
  hedge.validate();
  require(noisy.label_kind == LabelKind::Noisy, ErrorCode::InvalidArgument,
          "fit_hedged: dataset labels must be noisy");

  bool has0 = false, has1 = false;
  for (int8_t y : noisy.labels) (y == 1 ? has1 : has0) = true;
  if (!has0 || !has1) return single_class_model(noisy, has1 ? 1 : 0, config);

  // The unbiased logistic loss collapses to the plain logistic loss on soft
  // targets: yt=1 -> (1-rho0)/(1-rho0-rho1), yt=0 -> -rho0/(1-rho0-rho1).
  // Curvature is label-free, so convexity is preserved.
  std::vector<double> targets(static_cast<size_t>(noisy.size()));
  for (int64_t i = 0; i < noisy.size(); ++i) {
    std::array<double, 2> rho = hedge.rho_for(noisy, i);
    double denom = 1.0 - rho[0] - rho[1];
    targets[static_cast<size_t>(i)] = noisy.labels[static_cast<size_t>(i)] == 1
                                          ? (1.0 - rho[0]) / denom
                                          : -rho[0] / denom;
  }
  return fit_targets(noisy, targets, config);
}

NoiseDraw implicit_mle_draw(const PosteriorTable& table, const Dataset& noisy) {
  std::vector<double> rates = table.rates_for(noisy);
  NoiseDraw draw;
  draw.provenance = DrawProvenance::ImplicitMLE;
  draw.bits.resize(rates.size());
  for (size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] == 0.5) ++draw.mle_ties;  // tie breaks to "no flip"
    draw.bits[i] = rates[i] > 0.5 ? 1 : 0;
  }
  return draw;
}

}  // namespace noisescope
