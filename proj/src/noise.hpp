#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace noisescope {

// Label-noise formalism: a clean label y is observed as y-tilde = y XOR u,
// where the flip indicator u is Bernoulli with a rate that depends on the
// noise family.  Every rate is restricted to [0, 0.5).
enum class NoiseFamily : uint8_t { Uniform = 0, ClassLevel = 1, GroupLevel = 2, InstanceLevel = 3 };

const char* family_name(NoiseFamily family);

// XOR on {0,1}: a + b - 2ab.  Non-binary input is a domain error.
int xor_bit(int a, int b);

// Forward flip rates p_{u|...} per family:
//   Uniform:       one rate for every instance
//   ClassLevel:    rate per clean class y
//   GroupLevel:    rate per (clean class, group)
//   InstanceLevel: rate per instance, shared by both classes
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::Uniform;
  double uniform_p = 0.0;
  std::array<double, 2> class_p{0.0, 0.0};
  std::map<int32_t, std::array<double, 2>> group_p;
  std::vector<double> instance_p;

  void validate() const;
  // Flip rate for clean instance i; names the missing stratum on failure.
  double rate_for_clean(const Dataset& clean, int64_t i) const;
};

// Clean-label priors pi, matched to the spec's family:
//   Uniform/ClassLevel: scalar Pr(Y=1)
//   GroupLevel:         Pr(Y=1 | G=g) per group
//   InstanceLevel:      Pr(Y=1 | x_i) per instance; empty vector falls back
//                       to the scalar.
struct Priors {
  NoiseFamily family = NoiseFamily::Uniform;
  double pi1 = 0.5;
  std::map<int32_t, double> group_pi1;
  std::vector<double> instance_pi1;

  void validate() const;
  double pi1_for_group(int32_t group) const;
  double pi1_for_instance(int64_t i) const;
};

// JSON document {family, params, priors}; schema documented in the README.
struct NoiseModel {
  NoiseSpec spec;
  Priors priors;
};

NoiseModel noise_model_from_json(const std::string& text);
std::string noise_model_to_json(const NoiseModel& model);

enum class DrawProvenance : uint8_t { TrueDraw = 0, Sampled = 1, ImplicitMLE = 2 };

// A realization of the flip indicators, one bit per instance.
struct NoiseDraw {
  std::vector<uint8_t> bits;
  DrawProvenance provenance = DrawProvenance::Sampled;
  int64_t mle_ties = 0;  // count of q == 0.5 ties broken to 0 (ImplicitMLE only)

  int64_t size() const { return static_cast<int64_t>(bits.size()); }
  int64_t flip_count() const;
};

struct InjectResult {
  Dataset noisy;
  NoiseDraw draw;
};

// Samples u_i ~ Bernoulli(p_{u|y_i,...}) and returns labels y XOR u.
// Deterministic: identical (dataset, spec, seed) gives identical output.
InjectResult inject_noise(const Dataset& clean, const NoiseSpec& spec, uint64_t seed);

// labels XOR draw bits; flips the label kind.  Recovers clean labels from a
// noisy dataset and its true draw, or builds a plausible relabeling.
Dataset apply_draw(const Dataset& dataset, const NoiseDraw& draw);

// Posterior flip probabilities q_{u|y-tilde,...} = Pr(U=1 | observed data).
// For Uniform the posterior is the prior-free rate itself (no conditioning);
// the other families use the Bayes inversion
//   q = pi_{1-yt} p_{u|1-yt} / (pi_{1-yt} p_{u|1-yt} + pi_yt (1 - p_{u|yt})).
// An entry is undefined when the observed stratum has probability zero.
struct PosteriorTable {
  NoiseFamily family = NoiseFamily::Uniform;
  std::array<std::optional<double>, 2> class_q;                 // by y-tilde
  std::map<int32_t, std::array<std::optional<double>, 2>> group_q;
  std::vector<std::array<std::optional<double>, 2>> instance_q;
  bool direct_rates = false;  // built from user-supplied per-instance rates

  // Rate for noisy instance i; undefined entries raise an evaluation error,
  // missing strata a configuration error.
  double rate_for(const Dataset& noisy, int64_t i) const;
  std::vector<double> rates_for(const Dataset& noisy) const;
};

PosteriorTable posterior(const NoiseSpec& spec, const Priors& priors);

// Enhancer-style construction: per-instance posterior rates supplied
// directly (rate i applies at instance i's observed label), bypassing the
// Bayes inversion.
PosteriorTable posterior_from_rates(std::vector<double> rates);

// Pr(Y-tilde = yt) per stratum:
//   pi_yt (1 - p_{u|yt}) + pi_{1-yt} p_{u|1-yt}.
struct NoisyMarginal {
  NoiseFamily family = NoiseFamily::Uniform;
  std::array<double, 2> class_m{0.0, 0.0};
  std::map<int32_t, std::array<double, 2>> group_m;              // Pr(Yt=yt | G=g)
  std::vector<std::array<double, 2>> instance_m;
};

NoisyMarginal noisy_label_marginal(const NoiseSpec& spec, const Priors& priors);

// Draw serialization: newline-delimited 0/1 text, or a compact bitset with an
// 8-byte header (4-byte magic "NSU1", uint32 little-endian length) followed
// by ceil(n/8) bytes, LSB first.  read_draw sniffs the format.
void write_draw_text(const NoiseDraw& draw, const std::string& path);
void write_draw_binary(const NoiseDraw& draw, const std::string& path);
NoiseDraw read_draw(const std::string& path);

}  // namespace noisescope
