#pragma once

#include <string>
#include <vector>

#include "dataset.hpp"

namespace noisescope {

double normal_cdf(double x);

// Gaussian: y ~ Bernoulli(balance), x | y ~ N(mean_y, Sigma), shared Sigma.
// Logistic: x ~ N(0, Sigma), y | x ~ Bernoulli(sigmoid(w.x + bias)).
enum class SynthKind : uint8_t { Gaussian = 0, Logistic = 1 };

struct SynthSpec {
  SynthKind kind = SynthKind::Gaussian;
  int64_t n = 1000;
  int64_t d = 2;
  double balance = 0.5;          // Pr(Y = 1), gaussian kind
  double mean_scale = 1.0;       // default class means are +/- mean_scale * e1
  std::vector<double> mean_pos;  // optional explicit means, length d
  std::vector<double> mean_neg;
  // Empty = identity; one value = that multiple of I; d values = diagonal;
  // d*d values (row-major) = full matrix, must be positive definite.
  std::vector<double> covariance;
  std::vector<double> weights;  // logistic kind; defaults to e1
  double bias = 0.0;            // logistic kind
  int64_t group_count = 0;      // > 0 assigns groups round-robin (demo aid)

  void validate() const;
  std::vector<double> mean_for(int label) const;
};

SynthSpec synth_spec_from_json(const std::string& text);
std::string synth_spec_to_json(const SynthSpec& spec);

struct SyntheticData {
  Dataset data;              // clean labels
  std::vector<double> eta;   // Pr(Y = 1 | x_i), exact under the generator
  double bayes_error = 0.0;  // closed form (gaussian) or quadrature (logistic)
};

// Deterministic for identical (spec, seed).
SyntheticData generate_synthetic(const SynthSpec& spec, uint64_t seed);

}  // namespace noisescope
