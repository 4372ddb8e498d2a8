#include "synthetic.hpp"

#include <cmath>

#include "common.hpp"
#include "json.hpp"

namespace noisescope {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Lower-triangular Cholesky factor of a row-major symmetric matrix.
std::vector<double> cholesky(const std::vector<double>& sigma, int64_t d) {
  for (int64_t i = 0; i < d; ++i) {
    for (int64_t j = 0; j < i; ++j) {
      require(std::abs(sigma[i * d + j] - sigma[j * d + i]) <= 1e-12,
              ErrorCode::InvalidArgument, "covariance matrix is not symmetric");
    }
  }
  std::vector<double> chol(static_cast<size_t>(d * d), 0.0);
  for (int64_t i = 0; i < d; ++i) {
    for (int64_t j = 0; j <= i; ++j) {
      double sum = sigma[i * d + j];
      for (int64_t k = 0; k < j; ++k) sum -= chol[i * d + k] * chol[j * d + k];
      if (i == j) {
        require(sum > 0.0, ErrorCode::InvalidArgument, "covariance is not positive definite");
        chol[i * d + i] = std::sqrt(sum);
      } else {
        chol[i * d + j] = sum / chol[j * d + j];
      }
    }
  }
  return chol;
}

std::vector<double> full_covariance(const SynthSpec& spec) {
  int64_t d = spec.d;
  std::vector<double> sigma(static_cast<size_t>(d * d), 0.0);
  if (spec.covariance.empty()) {
    for (int64_t i = 0; i < d; ++i) sigma[i * d + i] = 1.0;
  } else if (spec.covariance.size() == 1) {
    for (int64_t i = 0; i < d; ++i) sigma[i * d + i] = spec.covariance[0];
  } else if (static_cast<int64_t>(spec.covariance.size()) == d) {
    for (int64_t i = 0; i < d; ++i) sigma[i * d + i] = spec.covariance[static_cast<size_t>(i)];
  } else if (static_cast<int64_t>(spec.covariance.size()) == d * d) {
    sigma = spec.covariance;
  } else {
    fail(ErrorCode::InvalidArgument, "covariance must have 1, d, or d*d entries");
  }
  return sigma;
}

// Solves (L L^T) x = b in place via forward and back substitution.
std::vector<double> cholesky_solve(const std::vector<double>& chol, int64_t d,
                                   std::vector<double> b) {
  for (int64_t i = 0; i < d; ++i) {
    double sum = b[static_cast<size_t>(i)];
    for (int64_t k = 0; k < i; ++k) sum -= chol[i * d + k] * b[static_cast<size_t>(k)];
    b[static_cast<size_t>(i)] = sum / chol[i * d + i];
  }
  for (int64_t i = d - 1; i >= 0; --i) {
    double sum = b[static_cast<size_t>(i)];
    for (int64_t k = i + 1; k < d; ++k) sum -= chol[k * d + i] * b[static_cast<size_t>(k)];
    b[static_cast<size_t>(i)] = sum / chol[i * d + i];
  }
  return b;
}

// E[sigmoid(-|S|)] for S ~ N(mu, var) by Simpson's rule over +/- 12 sd.
double expected_min_sigmoid(double mu, double var) {
  double sd = std::sqrt(var);
  if (sd == 0.0) return sigmoid(-std::abs(mu));
  const int64_t segments = 20000;  // even
  double lo = mu - 12.0 * sd;
  double hi = mu + 12.0 * sd;
  double h = (hi - lo) / static_cast<double>(segments);
  auto f = [&](double s) {
    double z = (s - mu) / sd;
    double density = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * 3.14159265358979323846));
    return sigmoid(-std::abs(s)) * density;
  };
  double sum = f(lo) + f(hi);
  for (int64_t k = 1; k < segments; ++k) {
    sum += f(lo + h * static_cast<double>(k)) * (k % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

}  // namespace

void SynthSpec::validate() const {
  require(n >= 1, ErrorCode::InvalidArgument, "n must be >= 1");
  require(d >= 1, ErrorCode::InvalidArgument, "d must be >= 1");
  require(balance > 0.0 && balance < 1.0, ErrorCode::InvalidArgument,
          "balance must be in (0, 1)");
  require(std::isfinite(mean_scale), ErrorCode::InvalidArgument, "mean_scale must be finite");
  for (const std::vector<double>* v : {&mean_pos, &mean_neg}) {
    require(v->empty() || static_cast<int64_t>(v->size()) == d, ErrorCode::InvalidArgument,
            "class means must have d entries");
  }
  require(weights.empty() || static_cast<int64_t>(weights.size()) == d,
          ErrorCode::InvalidArgument, "weights must have d entries");
  require(std::isfinite(bias), ErrorCode::InvalidArgument, "bias must be finite");
  require(group_count >= 0, ErrorCode::InvalidArgument, "group_count must be >= 0");
}

std::vector<double> SynthSpec::mean_for(int label) const {
  const std::vector<double>& given = label == 1 ? mean_pos : mean_neg;
  if (!given.empty()) return given;
  std::vector<double> mean(static_cast<size_t>(d), 0.0);
  mean[0] = label == 1 ? mean_scale : -mean_scale;
  return mean;
}

SynthSpec synth_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("invalid synthetic spec: ") + e.what());
  }
  SynthSpec spec;
  try {
    std::string kind = j.value("kind", std::string("gaussian"));
    if (kind == "gaussian") {
      spec.kind = SynthKind::Gaussian;
    } else if (kind == "logistic") {
      spec.kind = SynthKind::Logistic;
    } else {
      fail(ErrorCode::Parse, "kind must be gaussian or logistic");
    }
    spec.n = j.value("n", spec.n);
    spec.d = j.value("d", spec.d);
    spec.balance = j.value("balance", spec.balance);
    spec.mean_scale = j.value("mean_scale", spec.mean_scale);
    if (j.contains("mean_pos")) spec.mean_pos = j.at("mean_pos").get<std::vector<double>>();
    if (j.contains("mean_neg")) spec.mean_neg = j.at("mean_neg").get<std::vector<double>>();
    if (j.contains("covariance")) {
      const nlohmann::json& cov = j.at("covariance");
      if (cov.is_number()) {
        spec.covariance = {cov.get<double>()};
      } else if (cov.is_array() && !cov.empty() && cov.front().is_array()) {
        for (const nlohmann::json& row : cov) {
          std::vector<double> values = row.get<std::vector<double>>();
          spec.covariance.insert(spec.covariance.end(), values.begin(), values.end());
        }
      } else {
        spec.covariance = cov.get<std::vector<double>>();
      }
    }
    if (j.contains("weights")) spec.weights = j.at("weights").get<std::vector<double>>();
    spec.bias = j.value("bias", spec.bias);
    spec.group_count = j.value("group_count", spec.group_count);
  } catch (const Error&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("invalid synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string synth_spec_to_json(const SynthSpec& spec) {
  nlohmann::json j;
  j["kind"] = spec.kind == SynthKind::Gaussian ? "gaussian" : "logistic";
  j["n"] = spec.n;
  j["d"] = spec.d;
  j["balance"] = spec.balance;
  j["mean_scale"] = spec.mean_scale;
  if (!spec.mean_pos.empty()) j["mean_pos"] = spec.mean_pos;
  if (!spec.mean_neg.empty()) j["mean_neg"] = spec.mean_neg;
  if (!spec.covariance.empty()) j["covariance"] = spec.covariance;
  if (!spec.weights.empty()) j["weights"] = spec.weights;
  if (spec.kind == SynthKind::Logistic) j["bias"] = spec.bias;
  if (spec.group_count > 0) j["group_count"] = spec.group_count;
  return j.dump(2);
}

SyntheticData generate_synthetic(const SynthSpec& spec, uint64_t seed) {
  spec.validate();
  int64_t n = spec.n;
  int64_t d = spec.d;
  std::vector<double> chol = cholesky(full_covariance(spec), d);

  Matrix matrix(n, d);

  std::vector<int8_t> labels(static_cast<size_t>(n), 0);
  std::vector<double> eta(static_cast<size_t>(n), 0.0);
  Rng rng(seed);
  std::vector<double> z(static_cast<size_t>(d));

  double bayes = 0.0;
  if (spec.kind == SynthKind::Gaussian) {
    std::vector<double> mean0 = spec.mean_for(0);
    std::vector<double> mean1 = spec.mean_for(1);
    std::vector<double> diff(static_cast<size_t>(d));
    for (int64_t k = 0; k < d; ++k) diff[static_cast<size_t>(k)] = mean1[k] - mean0[k];
    // w = Sigma^-1 (mean1 - mean0); Delta^2 = diff . w is the squared
    // Mahalanobis separation.
    std::vector<double> w = cholesky_solve(chol, d, diff);
    double delta_sq = 0.0;
    for (int64_t k = 0; k < d; ++k) delta_sq += diff[static_cast<size_t>(k)] * w[static_cast<size_t>(k)];
    require(delta_sq > 0.0, ErrorCode::InvalidArgument, "class means must differ");
    double delta = std::sqrt(delta_sq);
    double c = std::log(spec.balance / (1.0 - spec.balance));
    bayes = (1.0 - spec.balance) * normal_cdf((c - 0.5 * delta_sq) / delta) +
            spec.balance * normal_cdf(-(c + 0.5 * delta_sq) / delta);

    for (int64_t i = 0; i < n; ++i) {
      int y = rng.bernoulli(spec.balance) ? 1 : 0;
      labels[static_cast<size_t>(i)] = static_cast<int8_t>(y);
      const std::vector<double>& mean = y == 1 ? mean1 : mean0;
      for (int64_t k = 0; k < d; ++k) z[static_cast<size_t>(k)] = rng.gaussian();
      double* row = matrix.values.data() + i * d;
      for (int64_t r = 0; r < d; ++r) {
        double value = mean[static_cast<size_t>(r)];
        for (int64_t k = 0; k <= r; ++k) value += chol[r * d + k] * z[static_cast<size_t>(k)];
        row[r] = value;
      }
      // Posterior log odds: c + w . (x - midpoint).
      double score = c;
      for (int64_t k = 0; k < d; ++k) {
        score += w[static_cast<size_t>(k)] *
                 (row[k] - 0.5 * (mean0[static_cast<size_t>(k)] + mean1[static_cast<size_t>(k)]));
      }
      eta[static_cast<size_t>(i)] = sigmoid(score);
    }
  } else {
    std::vector<double> w = spec.weights;
    if (w.empty()) {
      w.assign(static_cast<size_t>(d), 0.0);
      w[0] = 1.0;
    }
    // Score S = w . x + bias is Gaussian with variance w^T Sigma w; recover
    // Sigma w from the factor without forming Sigma.
    double var = 0.0;
    for (int64_t r = 0; r < d; ++r) {
      double lw = 0.0;
      for (int64_t i = r; i < d; ++i) lw += chol[i * d + r] * w[static_cast<size_t>(i)];
      var += lw * lw;
    }
    bayes = expected_min_sigmoid(spec.bias, var);

    for (int64_t i = 0; i < n; ++i) {
      for (int64_t k = 0; k < d; ++k) z[static_cast<size_t>(k)] = rng.gaussian();
      double* row = matrix.values.data() + i * d;
      double score = spec.bias;
      for (int64_t r = 0; r < d; ++r) {
        double value = 0.0;
        for (int64_t k = 0; k <= r; ++k) value += chol[r * d + k] * z[static_cast<size_t>(k)];
        row[r] = value;
        score += w[static_cast<size_t>(r)] * value;
      }
      double p1 = sigmoid(score);
      eta[static_cast<size_t>(i)] = p1;
      labels[static_cast<size_t>(i)] = rng.bernoulli(p1) ? 1 : 0;
    }
  }

  SyntheticData out;
  std::vector<std::string> names(static_cast<size_t>(d));
  for (int64_t k = 0; k < d; ++k) names[static_cast<size_t>(k)] = "x" + std::to_string(k);
  std::vector<int32_t> groups;
  if (spec.group_count > 0) {
    groups.resize(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
      groups[static_cast<size_t>(i)] = static_cast<int32_t>(i % spec.group_count);
    }
  }
  out.data = make_dataset(std::move(matrix), std::move(labels), std::move(groups),
                          LabelKind::Clean, std::move(names));
  out.eta = std::move(eta);
  out.bayes_error = bayes;
  return out;
}

}  // namespace noisescope
