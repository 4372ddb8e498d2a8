#pragma once

#include <string>
#include <vector>

#include "ensemble.hpp"
#include "metrics.hpp"
#include "synthetic.hpp"

namespace noisescope {

struct NoiseEntry {
  std::string name;  // column label in the grid table
  NoiseModel model;
};

// Experiment configuration; every field has a default, so {} is a valid
// config.  JSON schema and defaults are documented in the README.
struct ExperimentConfig {
  bool use_synth = true;  // false = load clean-labeled rows from data_csv
  SynthSpec synth;
  std::string data_csv;

  uint64_t seed = 17;
  double train_fraction = 0.8;
  // Empty = class-level noise on positives only at 5/20/40% with empirical
  // priors taken from the clean labels.
  std::vector<NoiseEntry> noise;
  std::vector<Method> methods{Method::Ignore, Method::Hedge};
  int64_t ensemble_size = 100;
  double epsilon = 0.1;
  int64_t max_rejections = 0;  // 0 = sampling default
  TrainConfig train;
  std::vector<double> drop_grid;   // cleaning sweep; default 0, 0.05, ..., 0.5
  int64_t abstention_points = 101; // selective sweep: fractions j/(points-1)
  double discover_fp_scale = 0.5;  // false-positive scale in the discovery demo
  int64_t threads = 0;             // > 0 overrides NOISESCOPE_THREADS

  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;
};

struct FrontierPoint {
  double tau = 0.0;
  double coverage = 1.0;
  double selective_error = 0.0;
  double selective_regret = 0.0;
  double hit_rate = 0.0;
  bool degenerate = false;  // sweep point left no usable data
};

// Indices of the k lowest-confidence rows, ties broken toward the lower
// index.  k = 0 returns empty.
std::vector<int64_t> lowest_confidence(const std::vector<double>& confidence, int64_t k);

// Columns tau,coverage,selective_error,selective_regret[,hit_rate]; nan marks
// unavailable values.
void write_frontier_csv(const std::vector<FrontierPoint>& points, bool with_hit_rate,
                        const std::string& path);

// Noise grid (noise level x method): per-cell training metrics plus held-out
// clean error.  Writes metrics.json and grid_table.txt into out_dir.
void run_grid(const ExperimentConfig& config, const std::string& out_dir);

// Cleaning demo: drop the least-confident training rows, retrain, track clean
// test error.  Writes frontier_clean_<confidence>.csv and clean_summary.json.
void run_clean(const ExperimentConfig& config, const std::string& out_dir);

// Selective-prediction demo: abstain on the least-confident test rows.
// Writes frontier_select_<confidence>.csv and select_summary.json.
void run_select(const ExperimentConfig& config, const std::string& out_dir);

// Discovery demo: a detector that never misses true positives but makes
// feature-correlated false calls on negatives; rank the detector's positives
// by confidence.  Writes frontier_discover_<confidence>.csv and
// discover_summary.json.
void run_discover(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace noisescope
