#pragma once

#include <string>
#include <vector>

#include "learner.hpp"
#include "sampling.hpp"

namespace noisescope {

struct EnsembleMember {
  NoiseDraw draw;
  std::vector<int8_t> plausible_labels;  // y-tilde XOR draw
  LinearModel model;
};

// Models trained on independently sampled plausible relabelings of one noisy
// training set.  Spread across member predictions measures how much the
// unknown noise draw could move the learned model.
struct PlausibleEnsemble {
  std::vector<EnsembleMember> members;
  double epsilon = 0.1;
  uint64_t seed = 0;
  std::vector<int8_t> noisy_labels;  // training labels the draws refer to
  TrainConfig train_config;

  int64_t m() const { return static_cast<int64_t>(members.size()); }
};

// Samples m plausible draws and fits one ERM model per member.  Training is
// parallel over members; results are deterministic and ordered by draw index
// regardless of thread count.
PlausibleEnsemble build_ensemble(const Dataset& noisy, const PosteriorTable& table,
                                 const PlausibilityConfig& sampling, int64_t m,
                                 const TrainConfig& train);

// Ambiguity of training instance i: fraction of members whose model disagrees
// with that member's own plausible label at i.  `train` must be the noisy
// dataset the ensemble was built on.
double ambiguity(const PlausibleEnsemble& ensemble, const Dataset& train, int64_t index);
std::vector<double> ambiguity_all(const PlausibleEnsemble& ensemble, const Dataset& train);

// Ambiguity for fresh noisy-labeled data: each member gets its own posterior
// draw over the new instances (seeded per member) in place of the stored
// training draw.
std::vector<double> test_ambiguity(const PlausibleEnsemble& ensemble,
                                   const PosteriorTable& table, const Dataset& noisy_test,
                                   uint64_t seed);

// Fraction of members whose prediction at x differs from the base model's.
double disagreement(const PlausibleEnsemble& ensemble, const LinearModel& base, const double* x,
                    int64_t d);
std::vector<double> disagreement_all(const PlausibleEnsemble& ensemble, const LinearModel& base,
                                     const Dataset& data);

enum class ConfidenceKind : uint8_t {
  Ambiguity = 0,             // 1 - ambiguity
  Disagreement = 1,          // 1 - disagreement with the base model
  PredictedProbability = 2,  // base model's probability of the observed label
};

// Per-instance confidence in [0, 1] under the chosen notion.  Ambiguity uses
// the stored member labels when `data` is the ensemble's training set and
// otherwise needs `table` to sample test draws; Disagreement needs `base`;
// PredictedProbability needs only `base`.
std::vector<double> confidence_scores(const PlausibleEnsemble* ensemble, const LinearModel* base,
                                      const Dataset& data, const PosteriorTable* table,
                                      ConfidenceKind kind, uint64_t seed);

// Directory layout: manifest.json, noisy_labels.bits, and per member
// member_XXX_model.json + member_XXX_draw.bits.  Loadable standalone;
// plausible labels are reconstructed from the stored noisy labels.
void save_ensemble(const PlausibleEnsemble& ensemble, const std::string& dir);
PlausibleEnsemble load_ensemble(const std::string& dir);

}  // namespace noisescope
