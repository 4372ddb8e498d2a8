#include "sampling.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace noisescope {

std::vector<PlausibilityStratum> plausibility_strata(const PosteriorTable& table,
                                                     const Dataset& noisy) {
  std::vector<double> rates = table.rates_for(noisy);
  int64_t n = noisy.size();

  std::vector<PlausibilityStratum> strata;
  switch (table.family) {
    case NoiseFamily::Uniform: {
      PlausibilityStratum s;
      s.indices.resize(static_cast<size_t>(n));
      for (int64_t i = 0; i < n; ++i) s.indices[static_cast<size_t>(i)] = i;
      s.q = rates[0];
      strata.push_back(std::move(s));
      break;
    }
    case NoiseFamily::ClassLevel:
    case NoiseFamily::InstanceLevel: {
      std::array<PlausibilityStratum, 2> by_label;
      std::array<double, 2> q_sum{0.0, 0.0};
      for (int64_t i = 0; i < n; ++i) {
        size_t yt = static_cast<size_t>(noisy.labels[static_cast<size_t>(i)]);
        by_label[yt].indices.push_back(i);
        q_sum[yt] += rates[static_cast<size_t>(i)];
      }
      for (size_t yt = 0; yt < 2; ++yt) {
        if (by_label[yt].indices.empty()) continue;
        by_label[yt].q = q_sum[yt] / static_cast<double>(by_label[yt].indices.size());
        strata.push_back(std::move(by_label[yt]));
      }
      break;
    }
    case NoiseFamily::GroupLevel: {
      std::map<std::pair<int32_t, int>, PlausibilityStratum> cells;
      for (int64_t i = 0; i < n; ++i) {
        int yt = noisy.labels[static_cast<size_t>(i)];
        int32_t g = noisy.groups[static_cast<size_t>(i)];
        auto& cell = cells[{g, yt}];
        cell.indices.push_back(i);
        cell.q = rates[static_cast<size_t>(i)];
      }
      for (auto& [key, cell] : cells) strata.push_back(std::move(cell));
      break;
    }
  }
  return strata;
}

namespace {

NoiseDraw sample_with_rng(const std::vector<double>& rates, Rng& rng) {
  NoiseDraw draw;
  draw.provenance = DrawProvenance::Sampled;
  draw.bits.resize(rates.size());
  for (size_t i = 0; i < rates.size(); ++i) {
    draw.bits[i] = rng.bernoulli(rates[i]) ? 1 : 0;
  }
  return draw;
}

bool strata_plausible(const NoiseDraw& draw, const std::vector<PlausibilityStratum>& strata,
                      double epsilon) {
  for (const auto& stratum : strata) {
    int64_t flips = 0;
    for (int64_t i : stratum.indices) flips += draw.bits[static_cast<size_t>(i)];
    double q_hat = static_cast<double>(flips) / static_cast<double>(stratum.indices.size());
    double diff = std::fabs(stratum.q - q_hat);
    // Zero deviation always passes; otherwise the strict bound applies.
    if (diff != 0.0 && !(diff < epsilon * stratum.q)) return false;
  }
  return true;
}

}  // namespace

NoiseDraw sample_draw(const PosteriorTable& table, const Dataset& noisy, uint64_t seed) {
  std::vector<double> rates = table.rates_for(noisy);
  Rng rng(seed);
  return sample_with_rng(rates, rng);
}

bool is_plausible(const NoiseDraw& draw, const PosteriorTable& table, const Dataset& noisy,
                  double epsilon) {
  require(draw.size() == noisy.size(), ErrorCode::InvalidArgument,
          "is_plausible: draw length does not match dataset size");
  require(epsilon >= 0.0, ErrorCode::InvalidArgument, "is_plausible: epsilon must be >= 0");
  return strata_plausible(draw, plausibility_strata(table, noisy), epsilon);
}

double min_epsilon(int64_t n_p, double p, double q, double delta) {
  require(n_p >= 1, ErrorCode::InvalidArgument, "min_epsilon: n_p must be positive");
  require(std::isfinite(p) && p >= 0.0 && p <= 1.0, ErrorCode::InvalidArgument,
          "min_epsilon: p must lie in [0, 1]");
  require(std::isfinite(q) && q > 0.0 && q < 1.0, ErrorCode::Domain,
          "min_epsilon: q must lie in (0, 1); the bound is undefined at q = 0");
  require(delta > 0.0 && delta < 1.0, ErrorCode::InvalidArgument,
          "min_epsilon: delta must lie in (0, 1)");
  double slack = std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n_p)));
  return (slack + std::fabs(p - q)) / q;
}

std::vector<PlausibleDataset> generate_plausible_datasets(const Dataset& noisy,
                                                          const PosteriorTable& table,
                                                          const PlausibilityConfig& config,
                                                          int64_t m,
                                                          GenerateStats* stats) {
  require(m >= 1, ErrorCode::InvalidArgument, "generate_plausible_datasets: m must be positive");
  require(config.epsilon >= 0.0, ErrorCode::InvalidArgument,
          "generate_plausible_datasets: epsilon must be >= 0");
  require(config.max_rejections >= 0, ErrorCode::InvalidArgument,
          "generate_plausible_datasets: max_rejections must be >= 0");

  std::vector<double> rates = table.rates_for(noisy);
  std::vector<PlausibilityStratum> strata = plausibility_strata(table, noisy);
  int64_t budget = config.max_rejections > 0 ? config.max_rejections : 10000 * m;

  std::vector<PlausibleDataset> out;
  out.reserve(static_cast<size_t>(m));
  int64_t rejections = 0;
  int64_t attempts = 0;

  for (int64_t k = 0; k < m; ++k) {
    Rng rng(derive_seed(config.seed, static_cast<uint64_t>(k)));
    for (;;) {
      ++attempts;
      NoiseDraw draw = sample_with_rng(rates, rng);
      if (strata_plausible(draw, strata, config.epsilon)) {
        Dataset relabeled = apply_draw(noisy, draw);
        out.push_back({std::move(relabeled), std::move(draw)});
        break;
      }
      if (++rejections > budget) {
        double rate = static_cast<double>(k) / static_cast<double>(attempts);
        std::ostringstream msg;
        msg << "generate_plausible_datasets: exceeded " << budget << " rejections after "
            << attempts << " attempts (" << k << " of " << m
            << " draws accepted, acceptance rate " << rate
            << "); epsilon=" << config.epsilon
            << " is too tight for this dataset size. min_epsilon(n_p, p, q, delta) gives the"
            << " smallest workable value per stratum.";
        fail(ErrorCode::RejectionLimit, msg.str());
      }
    }
  }
  if (stats != nullptr) {
    stats->attempts = attempts;
    stats->accepted = m;
  }
  return out;
}

}  // namespace noisescope
