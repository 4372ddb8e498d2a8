#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "noise.hpp"

namespace noisescope {

struct Standardization {
  bool active = false;
  std::vector<double> means;
  std::vector<double> stds;
};

// Logistic-regression model.  predict() thresholds the positive-class
// probability at `threshold`.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double threshold = 0.5;
  Standardization standardization;
  bool single_class_warning = false;

  double score(const double* x, int64_t d) const;  // pre-sigmoid
  double predict_proba(const double* x, int64_t d) const { return sigmoid(score(x, d)); }
  int predict(const double* x, int64_t d) const {
    return predict_proba(x, d) >= threshold ? 1 : 0;
  }
  std::vector<double> predict_proba(const Dataset& data) const;
  std::vector<int8_t> predict(const Dataset& data) const;

  void validate() const;  // all parameters finite
};

std::string model_to_json(const LinearModel& model);
LinearModel model_from_json(const std::string& text);
void save_model(const LinearModel& model, const std::string& path);
LinearModel load_model(const std::string& path);

struct TrainConfig {
  double l2_penalty = 1e-4;
  int64_t max_iterations = 5000;
  double gradient_tolerance = 1e-8;
  bool standardize_features = true;
  uint64_t seed = 0;  // reserved; the optimizer is deterministic

  void validate() const;
};

// Plain ERM: full-batch gradient descent with backtracking line search on the
// L2-penalized logistic loss (bias unpenalized).  Zero iterations return the
// all-zero model (probability 0.5 everywhere).  Single-class data yields a
// constant classifier with single_class_warning set.  Bit-identical results
// for identical inputs and config.
LinearModel fit_erm(const Dataset& data, const TrainConfig& config);

// Forward flip rates used by the unbiased correction, conditioned on the
// true class: rho_y = p_{u|y}, per class or per group.  rho_0 + rho_1 < 1.
struct HedgeSpec {
  std::array<double, 2> class_rho{0.0, 0.0};
  std::map<int32_t, std::array<double, 2>> group_rho;
  bool by_group = false;

  void validate() const;
  std::array<double, 2> rho_for(const Dataset& data, int64_t i) const;
  // Uniform and ClassLevel map directly; GroupLevel per group.
  // InstanceLevel has no class-conditional rates and is not hedgeable.
  static HedgeSpec from_noise(const NoiseSpec& spec);
};

// Unbiased 0-1/base-loss correction:
//   ((1 - rho_{1-yt}) * loss_observed - rho_yt * loss_flipped) / (1 - rho_0 - rho_1)
// where loss_observed = l(f(x), yt) and loss_flipped = l(f(x), 1-yt).
// May be negative; its expectation over the flip equals the clean loss.
double unbiased_loss(double loss_observed, double loss_flipped, int noisy_label, double rho0,
                     double rho1);

// ERM on the unbiased logistic loss.  The correction folds into per-instance
// soft targets, so the objective stays convex and the optimizer is shared
// with fit_erm; rho = 0 reproduces fit_erm bit for bit.
LinearModel fit_hedged(const Dataset& noisy, const HedgeSpec& hedge, const TrainConfig& config);

// Most likely flip per instance under the posterior: u = 1{q > 0.5}.
// Ties at exactly 0.5 break to 0 and are counted in the draw metadata.
NoiseDraw implicit_mle_draw(const PosteriorTable& table, const Dataset& noisy);

// Internal objective hook, exposed for gradient checks: value and gradient of
// the penalized logistic objective with per-instance targets at parameters
// theta = [w..., b] over standardized features.
double penalized_objective(const Matrix& features, const std::vector<double>& targets,
                           double l2_penalty, const std::vector<double>& theta,
                           std::vector<double>* gradient);

}  // namespace noisescope
