#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace noisescope {

void Dataset::validate() const {
  require(features != nullptr, ErrorCode::InvalidArgument, "dataset: missing feature matrix");
  require(size() >= 1, ErrorCode::InvalidArgument, "dataset: need at least one row");
  require(features->rows == size(), ErrorCode::InvalidArgument,
          "dataset: feature rows do not match label count");
  require(groups.empty() || static_cast<int64_t>(groups.size()) == size(),
          ErrorCode::InvalidArgument, "dataset: group column length mismatch");
  for (int8_t y : labels) {
    require(y == 0 || y == 1, ErrorCode::InvalidArgument, "dataset: labels must be 0 or 1");
  }
  for (double v : features->values) {
    require(std::isfinite(v), ErrorCode::InvalidArgument, "dataset: non-finite feature value");
  }
}

Dataset make_dataset(Matrix features, std::vector<int8_t> labels,
                     std::vector<int32_t> groups, LabelKind kind,
                     std::vector<std::string> feature_names) {
  Dataset ds;
  if (feature_names.empty()) {
    for (int64_t j = 0; j < features.cols; ++j) {
      feature_names.push_back("x" + std::to_string(j));
    }
  }
  require(static_cast<int64_t>(feature_names.size()) == features.cols,
          ErrorCode::InvalidArgument, "dataset: feature name count mismatch");
  ds.features = std::make_shared<Matrix>(std::move(features));
  ds.labels = std::move(labels);
  ds.groups = std::move(groups);
  ds.label_kind = kind;
  ds.feature_names = std::move(feature_names);
  ds.validate();
  return ds;
}

Dataset with_labels(const Dataset& base, std::vector<int8_t> labels, LabelKind kind) {
  require(labels.size() == base.labels.size(), ErrorCode::InvalidArgument,
          "with_labels: label count mismatch");
  Dataset ds = base;
  ds.labels = std::move(labels);
  ds.label_kind = kind;
  ds.validate();
  return ds;
}

Dataset subset(const Dataset& base, const std::vector<int64_t>& indices) {
  require(!indices.empty(), ErrorCode::InvalidArgument, "subset: empty index list");
  Matrix m(static_cast<int64_t>(indices.size()), base.dim());
  std::vector<int8_t> labels(indices.size());
  std::vector<int32_t> groups;
  if (base.has_groups()) groups.resize(indices.size());
  for (size_t k = 0; k < indices.size(); ++k) {
    int64_t i = indices[k];
    require(i >= 0 && i < base.size(), ErrorCode::InvalidArgument, "subset: index out of range");
    std::copy_n(base.row(i), base.dim(), m.values.begin() + static_cast<int64_t>(k) * base.dim());
    labels[k] = base.labels[static_cast<size_t>(i)];
    if (base.has_groups()) groups[k] = base.groups[static_cast<size_t>(i)];
  }
  return make_dataset(std::move(m), std::move(labels), std::move(groups), base.label_kind,
                      base.feature_names);
}

std::pair<std::vector<int64_t>, std::vector<int64_t>> split_indices(int64_t n,
                                                                    double train_fraction,
                                                                    uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, ErrorCode::InvalidArgument,
          "split: train fraction must lie in (0, 1)");
  require(n >= 2, ErrorCode::InvalidArgument, "split: need at least two rows");
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int64_t i = n - 1; i > 0; --i) {
    int64_t j = static_cast<int64_t>(rng.uniform_below(static_cast<uint64_t>(i + 1)));
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  }
  int64_t n_train = static_cast<int64_t>(std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::clamp<int64_t>(n_train, 1, n - 1);
  std::vector<int64_t> train_idx(order.begin(), order.begin() + n_train);
  std::vector<int64_t> test_idx(order.begin() + n_train, order.end());
  return {std::move(train_idx), std::move(test_idx)};
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& base, double train_fraction,
                                          uint64_t seed) {
  auto [train_idx, test_idx] = split_indices(base.size(), train_fraction, seed);
  return {subset(base, train_idx), subset(base, test_idx)};
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& cell, int64_t line_no) {
  std::string t = trim(cell);
  double v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  require(ec == std::errc() && ptr == t.data() + t.size(), ErrorCode::Parse,
          "csv: bad numeric value '" + t + "' on line " + std::to_string(line_no));
  return v;
}

}  // namespace

Dataset read_csv(const std::string& path, LabelKind kind) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "csv: cannot open " + path);

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::Parse, "csv: missing header row");
  std::vector<std::string> header = split_line(line);
  int64_t y_col = -1, group_col = -1;
  std::vector<int64_t> feature_cols;
  std::vector<std::string> feature_names;
  for (size_t j = 0; j < header.size(); ++j) {
    std::string name = trim(header[j]);
    if (name == "y") {
      require(y_col < 0, ErrorCode::Parse, "csv: duplicate y column");
      y_col = static_cast<int64_t>(j);
    } else if (name == "group") {
      require(group_col < 0, ErrorCode::Parse, "csv: duplicate group column");
      group_col = static_cast<int64_t>(j);
    } else {
      feature_cols.push_back(static_cast<int64_t>(j));
      feature_names.push_back(name);
    }
  }
  require(y_col >= 0, ErrorCode::Parse, "csv: header must contain a y column");
  require(!feature_cols.empty(), ErrorCode::Parse, "csv: no feature columns");

  std::vector<int8_t> labels;
  std::vector<int32_t> groups;
  std::vector<double> values;
  int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    require(cells.size() == header.size(), ErrorCode::Parse,
            "csv: wrong column count on line " + std::to_string(line_no));
    double y = parse_double(cells[static_cast<size_t>(y_col)], line_no);
    require(y == 0.0 || y == 1.0, ErrorCode::Parse,
            "csv: y must be 0 or 1 on line " + std::to_string(line_no));
    labels.push_back(static_cast<int8_t>(y));
    if (group_col >= 0) {
      double g = parse_double(cells[static_cast<size_t>(group_col)], line_no);
      require(g == std::floor(g), ErrorCode::Parse,
              "csv: group must be an integer on line " + std::to_string(line_no));
      groups.push_back(static_cast<int32_t>(g));
    }
    for (int64_t j : feature_cols) {
      values.push_back(parse_double(cells[static_cast<size_t>(j)], line_no));
    }
  }
  require(!labels.empty(), ErrorCode::Parse, "csv: no data rows");

  Matrix m(static_cast<int64_t>(labels.size()), static_cast<int64_t>(feature_cols.size()));
  m.values = std::move(values);
  return make_dataset(std::move(m), std::move(labels), std::move(groups), kind,
                      std::move(feature_names));
}

void write_csv(const Dataset& dataset, const std::string& path) {
  dataset.validate();
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io, "csv: cannot write " + path);
  out << "y";
  if (dataset.has_groups()) out << ",group";
  for (const auto& name : dataset.feature_names) out << "," << name;
  out << "\n";
  char buf[40];
  for (int64_t i = 0; i < dataset.size(); ++i) {
    out << static_cast<int>(dataset.labels[static_cast<size_t>(i)]);
    if (dataset.has_groups()) out << "," << dataset.groups[static_cast<size_t>(i)];
    const double* row = dataset.row(i);
    for (int64_t j = 0; j < dataset.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
      out << "," << buf;
    }
    out << "\n";
  }
  require(out.good(), ErrorCode::Io, "csv: write failed for " + path);
}

}  // namespace noisescope
