#pragma once

#include <vector>

#include "noise.hpp"

namespace noisescope {

// A noisy dataset relabeled by one plausible draw: labels are
// y-tilde XOR u, features shared with the source dataset.
struct PlausibleDataset {
  Dataset data;
  NoiseDraw draw;
};

struct PlausibilityConfig {
  double epsilon = 0.1;
  int64_t max_rejections = 0;  // 0 means 10000 * m
  uint64_t seed = 0;
};

struct GenerateStats {
  int64_t attempts = 0;
  int64_t accepted = 0;
  double acceptance_rate() const {
    return attempts > 0 ? static_cast<double>(accepted) / static_cast<double>(attempts) : 0.0;
  }
};

// One stratum of the plausibility check: the indices it covers and its
// posterior flip rate.  Strata follow the posterior's conditioning cells:
// Uniform has a single whole-dataset stratum, ClassLevel one per observed
// label, GroupLevel one per (observed label, group), InstanceLevel one per
// observed label with the stratum-average rate.
struct PlausibilityStratum {
  std::vector<int64_t> indices;
  double q = 0.0;
};

std::vector<PlausibilityStratum> plausibility_strata(const PosteriorTable& table,
                                                     const Dataset& noisy);

// u_i ~ Bernoulli(q_i) under the posterior.  Deterministic in the seed.
NoiseDraw sample_draw(const PosteriorTable& table, const Dataset& noisy, uint64_t seed);

// Typical-set membership: within every stratum the empirical flip rate
// q-hat must satisfy |q - q-hat| < epsilon * q (strict).  Exact equality is
// always accepted, which also enforces q=0 strata carrying no flips.
bool is_plausible(const NoiseDraw& draw, const PosteriorTable& table, const Dataset& noisy,
                  double epsilon);

// Smallest epsilon for which the true draw lands in the typical set with
// probability at least 1 - delta when the assumed rate is q and the actual
// rate is p over n_p instances:
//   (1/q) * (sqrt(ln(2/delta) / (2 n_p)) + |p - q|).
double min_epsilon(int64_t n_p, double p, double q, double delta);

// Rejection sampler: draws from the posterior until m plausible draws are
// found.  Per-draw RNG streams are derived from (seed, draw index), so the
// result is independent of evaluation order.  Exceeding the rejection budget
// raises an error carrying the empirical acceptance rate.
std::vector<PlausibleDataset> generate_plausible_datasets(const Dataset& noisy,
                                                          const PosteriorTable& table,
                                                          const PlausibilityConfig& config,
                                                          int64_t m,
                                                          GenerateStats* stats = nullptr);

}  // namespace noisescope
