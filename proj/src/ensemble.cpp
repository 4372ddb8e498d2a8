#include "ensemble.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace noisescope {

namespace {

std::vector<int8_t> xor_labels(const std::vector<int8_t>& noisy, const NoiseDraw& draw) {
  require(static_cast<int64_t>(noisy.size()) == draw.size(), ErrorCode::InvalidArgument,
          "draw length does not match label count");
  std::vector<int8_t> out(noisy.size());
  for (size_t i = 0; i < noisy.size(); ++i) {
    out[i] = static_cast<int8_t>(xor_bit(noisy[i], draw.bits[i]));
  }
  return out;
}

std::string member_stem(int64_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "member_%03" PRId64, k);
  return buf;
}

void write_bits_file(const std::string& path, const std::vector<int8_t>& bits) {
  NoiseDraw d;
  d.bits.assign(bits.begin(), bits.end());
  write_draw_binary(d, path);
}

std::vector<int8_t> read_bits_file(const std::string& path) {
  NoiseDraw d = read_draw(path);
  return std::vector<int8_t>(d.bits.begin(), d.bits.end());
}

}  // namespace

PlausibleEnsemble build_ensemble(const Dataset& noisy, const PosteriorTable& table,
                                 const PlausibilityConfig& sampling, int64_t m,
                                 const TrainConfig& train) {
  require(m >= 1, ErrorCode::InvalidArgument, "ensemble size must be >= 1");
  train.validate();
  GenerateStats stats;
  std::vector<PlausibleDataset> drawn = generate_plausible_datasets(noisy, table, sampling, m, &stats);

  PlausibleEnsemble ensemble;
  ensemble.epsilon = sampling.epsilon;
  ensemble.seed = sampling.seed;
  ensemble.noisy_labels = noisy.labels;
  ensemble.train_config = train;
  ensemble.members.resize(static_cast<size_t>(m));
  parallel_for(m, [&](int64_t k) {
    EnsembleMember& member = ensemble.members[static_cast<size_t>(k)];
    member.draw = std::move(drawn[static_cast<size_t>(k)].draw);
    member.plausible_labels = drawn[static_cast<size_t>(k)].data.labels;
    member.model = fit_erm(drawn[static_cast<size_t>(k)].data, train);
  });
  return ensemble;
}

double ambiguity(const PlausibleEnsemble& ensemble, const Dataset& train, int64_t index) {
  require(index >= 0 && index < train.size(), ErrorCode::InvalidArgument,
          "instance index out of range");
  require(train.labels == ensemble.noisy_labels, ErrorCode::InvalidArgument,
          "dataset labels do not match the ensemble's training labels");
  require(!ensemble.members.empty(), ErrorCode::InvalidArgument, "ensemble is empty");
  const double* x = train.row(index);
  int64_t disagreements = 0;
  for (const EnsembleMember& member : ensemble.members) {
    int pred = member.model.predict(x, train.dim());
    if (pred != member.plausible_labels[static_cast<size_t>(index)]) ++disagreements;
  }
  return static_cast<double>(disagreements) / static_cast<double>(ensemble.members.size());
}

std::vector<double> ambiguity_all(const PlausibleEnsemble& ensemble, const Dataset& train) {
  require(train.labels == ensemble.noisy_labels, ErrorCode::InvalidArgument,
          "dataset labels do not match the ensemble's training labels");
  require(!ensemble.members.empty(), ErrorCode::InvalidArgument, "ensemble is empty");
  std::vector<double> out(static_cast<size_t>(train.size()), 0.0);
  parallel_for(train.size(), [&](int64_t i) {
    const double* x = train.row(i);
    int64_t disagreements = 0;
    for (const EnsembleMember& member : ensemble.members) {
      int pred = member.model.predict(x, train.dim());
      if (pred != member.plausible_labels[static_cast<size_t>(i)]) ++disagreements;
    }
    out[static_cast<size_t>(i)] =
        static_cast<double>(disagreements) / static_cast<double>(ensemble.members.size());
  });
  return out;
}

std::vector<double> test_ambiguity(const PlausibleEnsemble& ensemble, const PosteriorTable& table,
                                   const Dataset& noisy_test, uint64_t seed) {
  require(!ensemble.members.empty(), ErrorCode::InvalidArgument, "ensemble is empty");
  require(noisy_test.label_kind == LabelKind::Noisy, ErrorCode::InvalidArgument,
          "test ambiguity needs noisy labels");
  int64_t n = noisy_test.size();
  int64_t m = ensemble.m();
  std::vector<std::vector<int8_t>> member_labels(static_cast<size_t>(m));
  for (int64_t k = 0; k < m; ++k) {
    NoiseDraw draw = sample_draw(table, noisy_test, derive_seed(seed, static_cast<uint64_t>(k)));
    member_labels[static_cast<size_t>(k)] = xor_labels(noisy_test.labels, draw);
  }
  std::vector<double> out(static_cast<size_t>(n), 0.0);
  parallel_for(n, [&](int64_t i) {
    const double* x = noisy_test.row(i);
    int64_t disagreements = 0;
    for (int64_t k = 0; k < m; ++k) {
      int pred = ensemble.members[static_cast<size_t>(k)].model.predict(x, noisy_test.dim());
      if (pred != member_labels[static_cast<size_t>(k)][static_cast<size_t>(i)]) ++disagreements;
    }
    out[static_cast<size_t>(i)] = static_cast<double>(disagreements) / static_cast<double>(m);
  });
  return out;
}

double disagreement(const PlausibleEnsemble& ensemble, const LinearModel& base, const double* x,
                    int64_t d) {
  require(!ensemble.members.empty(), ErrorCode::InvalidArgument, "ensemble is empty");
  int base_pred = base.predict(x, d);
  int64_t differs = 0;
  for (const EnsembleMember& member : ensemble.members) {
    if (member.model.predict(x, d) != base_pred) ++differs;
  }
  return static_cast<double>(differs) / static_cast<double>(ensemble.members.size());
}

std::vector<double> disagreement_all(const PlausibleEnsemble& ensemble, const LinearModel& base,
                                     const Dataset& data) {
  require(!ensemble.members.empty(), ErrorCode::InvalidArgument, "ensemble is empty");
  std::vector<double> out(static_cast<size_t>(data.size()), 0.0);
  parallel_for(data.size(), [&](int64_t i) {
    out[static_cast<size_t>(i)] = disagreement(ensemble, base, data.row(i), data.dim());
  });
  return out;
}

std::vector<double> confidence_scores(const PlausibleEnsemble* ensemble, const LinearModel* base,
                                      const Dataset& data, const PosteriorTable* table,
                                      ConfidenceKind kind, uint64_t seed) {
  switch (kind) {
    case ConfidenceKind::Ambiguity: {
      require(ensemble != nullptr, ErrorCode::InvalidArgument,
              "ambiguity confidence needs an ensemble");
      std::vector<double> amb;
      if (data.labels == ensemble->noisy_labels) {
        amb = ambiguity_all(*ensemble, data);
      } else {
        require(table != nullptr, ErrorCode::InvalidArgument,
                "ambiguity on non-training data needs a posterior table");
        amb = test_ambiguity(*ensemble, *table, data, seed);
      }
      for (double& v : amb) v = 1.0 - v;
      return amb;
    }
    case ConfidenceKind::Disagreement: {
      require(ensemble != nullptr && base != nullptr, ErrorCode::InvalidArgument,
              "disagreement confidence needs an ensemble and a base model");
      std::vector<double> dis = disagreement_all(*ensemble, *base, data);
      for (double& v : dis) v = 1.0 - v;
      return dis;
    }
    case ConfidenceKind::PredictedProbability: {
      require(base != nullptr, ErrorCode::InvalidArgument,
              "probability confidence needs a base model");
      std::vector<double> conf(static_cast<size_t>(data.size()), 0.0);
      for (int64_t i = 0; i < data.size(); ++i) {
        double p1 = base->predict_proba(data.row(i), data.dim());
        conf[static_cast<size_t>(i)] = data.labels[static_cast<size_t>(i)] == 1 ? p1 : 1.0 - p1;
      }
      return conf;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown confidence kind");
}

void save_ensemble(const PlausibleEnsemble& ensemble, const std::string& dir) {
  require(!ensemble.members.empty(), ErrorCode::InvalidArgument, "ensemble is empty");
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["m"] = ensemble.m();
  manifest["epsilon"] = ensemble.epsilon;
  manifest["seed"] = ensemble.seed;
  manifest["train"] = {{"l2_penalty", ensemble.train_config.l2_penalty},
                       {"max_iterations", ensemble.train_config.max_iterations},
                       {"gradient_tolerance", ensemble.train_config.gradient_tolerance},
                       {"standardize_features", ensemble.train_config.standardize_features}};
  std::ofstream out(dir + "/manifest.json");
  require(out.good(), ErrorCode::Io, "cannot write " + dir + "/manifest.json");
  out << manifest.dump(2) << "\n";
  require(out.good(), ErrorCode::Io, "write failed for " + dir + "/manifest.json");
  out.close();

  write_bits_file(dir + "/noisy_labels.bits", ensemble.noisy_labels);
  for (int64_t k = 0; k < ensemble.m(); ++k) {
    const EnsembleMember& member = ensemble.members[static_cast<size_t>(k)];
    save_model(member.model, dir + "/" + member_stem(k) + "_model.json");
    write_draw_binary(member.draw, dir + "/" + member_stem(k) + "_draw.bits");
  }
}

PlausibleEnsemble load_ensemble(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  require(in.good(), ErrorCode::Io, "cannot read " + dir + "/manifest.json");
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("invalid ensemble manifest: ") + e.what());
  }

  PlausibleEnsemble ensemble;
  int64_t m = 0;
  try {
    m = manifest.at("m").get<int64_t>();
    ensemble.epsilon = manifest.at("epsilon").get<double>();
    ensemble.seed = manifest.at("seed").get<uint64_t>();
    const nlohmann::json& train = manifest.at("train");
    ensemble.train_config.l2_penalty = train.at("l2_penalty").get<double>();
    ensemble.train_config.max_iterations = train.at("max_iterations").get<int64_t>();
    ensemble.train_config.gradient_tolerance = train.at("gradient_tolerance").get<double>();
    ensemble.train_config.standardize_features = train.at("standardize_features").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("invalid ensemble manifest: ") + e.what());
  }
  require(m >= 1, ErrorCode::Parse, "ensemble manifest has m < 1");

  ensemble.noisy_labels = read_bits_file(dir + "/noisy_labels.bits");
  ensemble.members.resize(static_cast<size_t>(m));
  for (int64_t k = 0; k < m; ++k) {
    EnsembleMember& member = ensemble.members[static_cast<size_t>(k)];
    member.model = load_model(dir + "/" + member_stem(k) + "_model.json");
    member.draw = read_draw(dir + "/" + member_stem(k) + "_draw.bits");
    member.draw.provenance = DrawProvenance::Sampled;
    member.plausible_labels = xor_labels(ensemble.noisy_labels, member.draw);
  }
  return ensemble;
}

}  // namespace noisescope
