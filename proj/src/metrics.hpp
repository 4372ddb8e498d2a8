#pragma once

#include <optional>
#include <string>
#include <vector>

#include "learner.hpp"

namespace noisescope {

// How mistakes are anticipated on noisy data: Ignore scores predictions
// against the observed labels as-is, Hedge scores them against the labels
// corrected by the implicit most-likely noise draw.
enum class Method : uint8_t { Ignore = 0, Hedge = 1 };

const char* method_name(Method method);
Method method_from_name(const std::string& name);

// Posterior mass at or below this counts as "cannot have flipped".
inline constexpr double kSusceptibilityThreshold = 1e-12;

// Per-instance anticipated mistakes e-tilde.  Hedge needs the posterior for
// its implicit draw; tie counts are reported through mle_ties when given.
std::vector<int8_t> anticipated_mistakes(const LinearModel& model, const Dataset& noisy,
                                         Method method, const PosteriorTable* table,
                                         int64_t* mle_ties = nullptr);

// Per-instance true mistakes e = 1{f(x) != y-tilde XOR u_true}.
std::vector<int8_t> true_mistakes(const LinearModel& model, const Dataset& noisy,
                                  const NoiseDraw& true_draw);

// Fraction of instances whose posterior flip probability is positive.
double susceptibility(const PosteriorTable& table, const Dataset& noisy);

// Expected per-instance regret under the posterior: the chance that the
// method's implicit draw (all-zero for Ignore, 1{q > 0.5} for Hedge) misses
// the realized flip.  Model-free.
double expected_regret_on(const PosteriorTable& table, const Dataset& noisy, Method method);
// Same quantity averaged over the noisy-label distribution instead of a
// dataset; uniform and class-level families only (the others need instance
// weights, so use expected_regret_on).
double expected_regret(const NoiseModel& model, Method method);

struct MetricsInputs {
  const LinearModel* model = nullptr;  // required
  const Dataset* noisy = nullptr;      // required, noisy-labeled
  Method method = Method::Ignore;
  const PosteriorTable* table = nullptr;   // Hedge, susceptibility, expected regret
  const NoiseDraw* true_draw = nullptr;    // true error, regret, decomposition
  const HedgeSpec* hedge = nullptr;        // unbiased clean-error estimate
  bool keep_per_instance = true;
};

// Quantities that need an unavailable input stay unset rather than failing;
// compute_metrics itself fails only on inconsistent inputs.
struct MetricsReport {
  Method method = Method::Ignore;
  int64_t n = 0;
  double anticipated_error = 0.0;
  std::optional<double> true_error;
  std::optional<double> regret;        // mean 1{e-tilde != e}
  std::optional<double> overreliance;  // mean 1{e-tilde = 0, e = 1}
  std::optional<double> underreliance;
  std::optional<double> susceptibility;
  std::optional<double> expected_regret;      // posterior mean on this dataset
  std::optional<double> decomposition_total;  // sum e-tilde - sum e, signed
  std::optional<double> decomposition_mean;
  std::optional<double> unbiased_error;  // expectation over flips = clean error
  int64_t mle_ties = 0;
  std::vector<int8_t> anticipated;
  std::vector<int8_t> realized;          // empty without a true draw
  std::vector<int8_t> regret_indicator;  // empty without a true draw

  void clear_per_instance();
};

MetricsReport compute_metrics(const MetricsInputs& inputs);

std::string report_to_json(const MetricsReport& report, int indent = 2);

}  // namespace noisescope
