#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace noisescope {

// Dense row-major feature matrix.
struct Matrix {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(int64_t r, int64_t c) : rows(r), cols(c), values(static_cast<size_t>(r * c), 0.0) {}

  double at(int64_t r, int64_t c) const { return values[static_cast<size_t>(r * cols + c)]; }
  double& at(int64_t r, int64_t c) { return values[static_cast<size_t>(r * cols + c)]; }
  const double* row(int64_t r) const { return values.data() + r * cols; }
};

enum class LabelKind : uint8_t { Clean = 0, Noisy = 1 };

// Binary-labeled dataset.  Labels are interpreted as clean y or noisy y-tilde
// according to label_kind; groups are optional integer identifiers.
// Features are shared between derived datasets (noisy copies, plausible
// relabelings) to avoid duplication.
struct Dataset {
  std::shared_ptr<const Matrix> features;
  std::vector<int8_t> labels;
  std::vector<int32_t> groups;
  LabelKind label_kind = LabelKind::Clean;
  std::vector<std::string> feature_names;

  int64_t size() const { return static_cast<int64_t>(labels.size()); }
  int64_t dim() const { return features ? features->cols : 0; }
  bool has_groups() const { return !groups.empty(); }
  const double* row(int64_t i) const { return features->row(i); }

  // Enforces the type invariants: n >= 1, binary labels, finite features,
  // matching lengths.
  void validate() const;
};

Dataset make_dataset(Matrix features, std::vector<int8_t> labels,
                     std::vector<int32_t> groups, LabelKind kind,
                     std::vector<std::string> feature_names = {});

// Same features, new labels.
Dataset with_labels(const Dataset& base, std::vector<int8_t> labels, LabelKind kind);

// Row subset (copies feature rows).
Dataset subset(const Dataset& base, const std::vector<int64_t>& indices);

// Deterministic shuffled split into (train, test) by fraction of rows.
// split_indices exposes the row assignment so aligned per-row state (noise
// draws, posterior rates) can be carried across the split.
std::pair<std::vector<int64_t>, std::vector<int64_t>> split_indices(int64_t n,
                                                                    double train_fraction,
                                                                    uint64_t seed);
std::pair<Dataset, Dataset> split_dataset(const Dataset& base, double train_fraction,
                                          uint64_t seed);

// CSV layout: header row with a `y` column (0/1), an optional integer `group`
// column, and numeric feature columns; comma separated, `.` decimal, UTF-8.
Dataset read_csv(const std::string& path, LabelKind kind);
void write_csv(const Dataset& dataset, const std::string& path);

}  // namespace noisescope
