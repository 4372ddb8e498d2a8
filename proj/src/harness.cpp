#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>

#include "json.hpp"

namespace noisescope {

namespace {

void apply_threads(const ExperimentConfig& config) {
  if (config.threads > 0) {
    setenv("NOISESCOPE_THREADS", std::to_string(config.threads).c_str(), 1);
  }
}

struct SourceData {
  Dataset clean;
  std::vector<double> eta;  // synthetic sources only
  std::optional<double> bayes_error;
};

SourceData load_source(const ExperimentConfig& config) {
  if (config.use_synth) {
    SyntheticData synth = generate_synthetic(config.synth, derive_seed(config.seed, 0));
    return {std::move(synth.data), std::move(synth.eta), synth.bayes_error};
  }
  require(!config.data_csv.empty(), ErrorCode::Config, "config needs synth or data_csv");
  Dataset clean = read_csv(config.data_csv, LabelKind::Clean);
  clean.validate();
  return {std::move(clean), {}, std::nullopt};
}

double empirical_pi1(const Dataset& clean) {
  int64_t positives = 0;
  for (int8_t y : clean.labels) positives += y;
  return static_cast<double>(positives) / static_cast<double>(clean.size());
}

std::string percent_label(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g%%", p * 100.0);
  return buf;
}

NoiseEntry class_noise_entry(double p1, double pi1) {
  NoiseEntry entry;
  entry.model.spec.family = NoiseFamily::ClassLevel;
  entry.model.spec.class_p = {0.0, p1};
  entry.model.priors.family = NoiseFamily::ClassLevel;
  entry.model.priors.pi1 = pi1;
  entry.name = "class-" + percent_label(p1);
  return entry;
}

std::string default_noise_name(const NoiseModel& model) {
  switch (model.spec.family) {
    case NoiseFamily::Uniform:
      return "uniform-" + percent_label(model.spec.uniform_p);
    case NoiseFamily::ClassLevel:
      if (model.spec.class_p[0] == 0.0) return "class-" + percent_label(model.spec.class_p[1]);
      return "class-" + percent_label(model.spec.class_p[0]) + "/" +
             percent_label(model.spec.class_p[1]);
    case NoiseFamily::GroupLevel:
      return "group";
    case NoiseFamily::InstanceLevel:
      return "instance";
  }
  return "noise";
}

NoiseDraw gather_draw(const NoiseDraw& full, const std::vector<int64_t>& indices) {
  NoiseDraw out;
  out.provenance = full.provenance;
  out.bits.resize(indices.size());
  for (size_t j = 0; j < indices.size(); ++j) {
    out.bits[j] = full.bits[static_cast<size_t>(indices[j])];
  }
  return out;
}

// Index-free tables are shared across splits; per-instance tables must be
// re-indexed so rates line up with subset rows.
PosteriorTable split_table(const PosteriorTable& table, const Dataset& full_noisy,
                           const std::vector<int64_t>& indices) {
  if (table.family != NoiseFamily::InstanceLevel && !table.direct_rates) return table;
  std::vector<double> rates = table.rates_for(full_noisy);
  std::vector<double> picked(indices.size());
  for (size_t j = 0; j < indices.size(); ++j) {
    picked[j] = rates[static_cast<size_t>(indices[j])];
  }
  return posterior_from_rates(std::move(picked));
}

double error_against(const LinearModel& model, const Dataset& data,
                     const std::vector<int8_t>& labels) {
  require(static_cast<int64_t>(labels.size()) == data.size(), ErrorCode::InvalidArgument,
          "label vector length mismatch");
  std::vector<int8_t> preds = model.predict(data);
  int64_t wrong = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (preds[i] != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

std::vector<double> default_drop_grid() {
  std::vector<double> grid;
  for (int j = 0; j <= 10; ++j) grid.push_back(static_cast<double>(j) * 0.05);
  return grid;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::Io, "cannot write " + path);
  out << content;
  require(out.good(), ErrorCode::Io, "write failed for " + path);
}

std::string format_double(double value, const char* fmt = "%.12g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, value);
  return buf;
}

const char* confidence_kind_name(ConfidenceKind kind) {
  switch (kind) {
    case ConfidenceKind::Ambiguity: return "ambiguity";
    case ConfidenceKind::Disagreement: return "disagreement";
    case ConfidenceKind::PredictedProbability: return "probability";
  }
  return "confidence";
}

constexpr ConfidenceKind kAllKinds[] = {ConfidenceKind::Ambiguity, ConfidenceKind::Disagreement,
                                        ConfidenceKind::PredictedProbability};

// Abstention sweep over a fixed evaluation set: per-instance 0/1 outcomes are
// averaged over the retained (highest-confidence) rows at each grid point.
std::vector<FrontierPoint> sweep_abstention(const std::vector<double>& confidence,
                                            const std::vector<int8_t>& error_bits,
                                            const std::vector<int8_t>& regret_bits,
                                            const std::vector<int8_t>* hit_bits,
                                            int64_t points) {
  int64_t n = static_cast<int64_t>(confidence.size());
  require(n >= 1, ErrorCode::InvalidArgument, "abstention sweep needs at least one row");
  require(points >= 2, ErrorCode::InvalidArgument, "abstention sweep needs at least two points");
  std::vector<int64_t> order = lowest_confidence(confidence, n);
  std::vector<int64_t> err_prefix(static_cast<size_t>(n) + 1, 0);
  std::vector<int64_t> reg_prefix(static_cast<size_t>(n) + 1, 0);
  std::vector<int64_t> hit_prefix(static_cast<size_t>(n) + 1, 0);
  for (int64_t k = 0; k < n; ++k) {
    int64_t i = order[static_cast<size_t>(k)];
    err_prefix[k + 1] = err_prefix[k] + error_bits[static_cast<size_t>(i)];
    reg_prefix[k + 1] = reg_prefix[k] + regret_bits[static_cast<size_t>(i)];
    if (hit_bits != nullptr) hit_prefix[k + 1] = hit_prefix[k] + (*hit_bits)[static_cast<size_t>(i)];
  }
  double min_conf = *std::min_element(confidence.begin(), confidence.end());

  std::vector<FrontierPoint> frontier;
  frontier.reserve(static_cast<size_t>(points));
  for (int64_t j = 0; j < points; ++j) {
    double fraction = static_cast<double>(j) / static_cast<double>(points - 1);
    int64_t k = std::llround(fraction * static_cast<double>(n));
    k = std::clamp<int64_t>(k, 0, n);
    FrontierPoint pt;
    pt.coverage = 1.0 - fraction;
    pt.tau = k == 0 ? min_conf - 1.0 : confidence[static_cast<size_t>(order[static_cast<size_t>(k - 1)])];
    int64_t retained = n - k;
    if (retained == 0) {
      pt.degenerate = true;
      pt.selective_error = std::nan("");
      pt.selective_regret = std::nan("");
      pt.hit_rate = std::nan("");
    } else {
      double denom = static_cast<double>(retained);
      pt.selective_error = static_cast<double>(err_prefix[n] - err_prefix[k]) / denom;
      pt.selective_regret = static_cast<double>(reg_prefix[n] - reg_prefix[k]) / denom;
      pt.hit_rate = hit_bits != nullptr
                        ? static_cast<double>(hit_prefix[n] - hit_prefix[k]) / denom
                        : std::nan("");
    }
    frontier.push_back(pt);
  }
  return frontier;
}

nlohmann::json report_json(const MetricsReport& report) {
  return nlohmann::json::parse(report_to_json(report));
}

nlohmann::json noise_model_json(const NoiseModel& model) {
  return nlohmann::json::parse(noise_model_to_json(model));
}

std::optional<HedgeSpec> try_hedge_spec(const NoiseSpec& spec) {
  try {
    return HedgeSpec::from_noise(spec);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Capability) return std::nullopt;
    throw;
  }
}

}  // namespace

std::vector<int64_t> lowest_confidence(const std::vector<double>& confidence, int64_t k) {
  int64_t n = static_cast<int64_t>(confidence.size());
  k = std::clamp<int64_t>(k, 0, n);
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    double ca = confidence[static_cast<size_t>(a)];
    double cb = confidence[static_cast<size_t>(b)];
    if (ca != cb) return ca < cb;
    return a < b;
  });
  order.resize(static_cast<size_t>(k));
  return order;
}

void write_frontier_csv(const std::vector<FrontierPoint>& points, bool with_hit_rate,
                        const std::string& path) {
  std::string text = with_hit_rate ? "tau,coverage,selective_error,selective_regret,hit_rate\n"
                                   : "tau,coverage,selective_error,selective_regret\n";
  for (const FrontierPoint& pt : points) {
    text += format_double(pt.tau);
    text += ',';
    text += format_double(pt.coverage);
    text += ',';
    text += format_double(pt.selective_error);
    text += ',';
    text += format_double(pt.selective_regret);
    if (with_hit_rate) {
      text += ',';
      text += format_double(pt.hit_rate);
    }
    text += '\n';
  }
  write_text_file(path, text);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("invalid experiment config: ") + e.what());
  }
  require(j.is_object(), ErrorCode::Parse, "experiment config must be a JSON object");

  ExperimentConfig config;
  try {
    require(!(j.contains("synth") && j.contains("data_csv")), ErrorCode::Config,
            "config: synth and data_csv are mutually exclusive");
    if (j.contains("data_csv")) {
      config.use_synth = false;
      config.data_csv = j.at("data_csv").get<std::string>();
    } else if (j.contains("synth")) {
      config.synth = synth_spec_from_json(j.at("synth").dump());
    }
    config.seed = j.value("seed", config.seed);
    config.train_fraction = j.value("train_fraction", config.train_fraction);
    if (j.contains("noise")) {
      require(j.at("noise").is_array(), ErrorCode::Parse, "config: noise must be an array");
      for (const nlohmann::json& entry : j.at("noise")) {
        NoiseEntry parsed;
        parsed.model = noise_model_from_json(entry.dump());
        parsed.name = entry.value("name", default_noise_name(parsed.model));
        config.noise.push_back(std::move(parsed));
      }
    }
    if (j.contains("methods")) {
      config.methods.clear();
      for (const nlohmann::json& m : j.at("methods")) {
        config.methods.push_back(method_from_name(m.get<std::string>()));
      }
      require(!config.methods.empty(), ErrorCode::Config, "config: methods must not be empty");
    }
    config.ensemble_size = j.value("ensemble_size", config.ensemble_size);
    config.epsilon = j.value("epsilon", config.epsilon);
    config.max_rejections = j.value("max_rejections", config.max_rejections);
    if (j.contains("train")) {
      const nlohmann::json& t = j.at("train");
      config.train.l2_penalty = t.value("l2_penalty", config.train.l2_penalty);
      config.train.max_iterations = t.value("max_iterations", config.train.max_iterations);
      config.train.gradient_tolerance =
          t.value("gradient_tolerance", config.train.gradient_tolerance);
      config.train.standardize_features =
          t.value("standardize_features", config.train.standardize_features);
    }
    if (j.contains("drop_grid")) {
      config.drop_grid = j.at("drop_grid").get<std::vector<double>>();
      for (double f : config.drop_grid) {
        require(f >= 0.0 && f <= 1.0, ErrorCode::Config,
                "config: drop_grid fractions must lie in [0, 1]");
      }
    }
    config.abstention_points = j.value("abstention_points", config.abstention_points);
    config.discover_fp_scale = j.value("discover_fp_scale", config.discover_fp_scale);
    config.threads = j.value("threads", config.threads);
  } catch (const Error&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("invalid experiment config: ") + e.what());
  }

  require(config.train_fraction > 0.0 && config.train_fraction < 1.0, ErrorCode::Config,
          "config: train_fraction must lie in (0, 1)");
  require(config.ensemble_size >= 1, ErrorCode::Config, "config: ensemble_size must be >= 1");
  require(config.epsilon >= 0.0, ErrorCode::Config, "config: epsilon must be >= 0");
  require(config.max_rejections >= 0, ErrorCode::Config, "config: max_rejections must be >= 0");
  require(config.abstention_points >= 2, ErrorCode::Config,
          "config: abstention_points must be >= 2");
  require(config.discover_fp_scale >= 0.0, ErrorCode::Config,
          "config: discover_fp_scale must be >= 0");
  require(config.threads >= 0, ErrorCode::Config, "config: threads must be >= 0");
  config.train.validate();
  return config;
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  if (use_synth) {
    j["synth"] = nlohmann::json::parse(synth_spec_to_json(synth));
  } else {
    j["data_csv"] = data_csv;
  }
  j["seed"] = seed;
  j["train_fraction"] = train_fraction;
  nlohmann::json noise_json = nlohmann::json::array();
  for (const NoiseEntry& entry : noise) {
    nlohmann::json e = noise_model_json(entry.model);
    e["name"] = entry.name;
    noise_json.push_back(std::move(e));
  }
  j["noise"] = std::move(noise_json);
  nlohmann::json methods_json = nlohmann::json::array();
  for (Method m : methods) methods_json.push_back(method_name(m));
  j["methods"] = std::move(methods_json);
  j["ensemble_size"] = ensemble_size;
  j["epsilon"] = epsilon;
  j["max_rejections"] = max_rejections;
  j["train"] = {{"l2_penalty", train.l2_penalty},
                {"max_iterations", train.max_iterations},
                {"gradient_tolerance", train.gradient_tolerance},
                {"standardize_features", train.standardize_features}};
  j["drop_grid"] = drop_grid.empty() ? default_drop_grid() : drop_grid;
  j["abstention_points"] = abstention_points;
  j["discover_fp_scale"] = discover_fp_scale;
  j["threads"] = threads;
  return j.dump(2);
}

void run_grid(const ExperimentConfig& config, const std::string& out_dir) {
  apply_threads(config);
  std::filesystem::create_directories(out_dir);
  SourceData source = load_source(config);
  const Dataset& clean = source.clean;

  std::vector<NoiseEntry> noise = config.noise;
  if (noise.empty()) {
    double pi1 = empirical_pi1(clean);
    for (double p1 : {0.05, 0.2, 0.4}) noise.push_back(class_noise_entry(p1, pi1));
  }
  require(!config.methods.empty(), ErrorCode::Config, "config: methods must not be empty");

  auto [train_idx, test_idx] =
      split_indices(clean.size(), config.train_fraction, derive_seed(config.seed, 1));
  Dataset clean_test = subset(clean, test_idx);

  struct Injected {
    Dataset noisy_train;
    Dataset noisy_test;
    NoiseDraw draw_train;
    NoiseDraw draw_test;
    PosteriorTable train_table;
  };
  std::vector<Injected> injected(noise.size());
  for (size_t s = 0; s < noise.size(); ++s) {
    InjectResult full =
        inject_noise(clean, noise[s].model.spec, derive_seed(config.seed, 100 + s));
    injected[s].noisy_train = subset(full.noisy, train_idx);
    injected[s].noisy_test = subset(full.noisy, test_idx);
    injected[s].draw_train = gather_draw(full.draw, train_idx);
    injected[s].draw_test = gather_draw(full.draw, test_idx);
    PosteriorTable table = posterior(noise[s].model.spec, noise[s].model.priors);
    injected[s].train_table = split_table(table, full.noisy, train_idx);
  }

  struct Cell {
    size_t noise_index = 0;
    Method method = Method::Ignore;
    MetricsReport train_metrics;
    double clean_test_error = 0.0;
    double noisy_test_error = 0.0;
  };
  int64_t n_cells = static_cast<int64_t>(noise.size() * config.methods.size());
  std::vector<Cell> cells(static_cast<size_t>(n_cells));
  parallel_for(n_cells, [&](int64_t c) {
    size_t s = static_cast<size_t>(c) / config.methods.size();
    Method method = config.methods[static_cast<size_t>(c) % config.methods.size()];
    const Injected& inj = injected[s];
    std::optional<HedgeSpec> hedge = try_hedge_spec(noise[s].model.spec);
    LinearModel model;
    if (method == Method::Hedge) {
      require(hedge.has_value(), ErrorCode::Capability,
              "hedge method is not defined for instance-level noise");
      model = fit_hedged(inj.noisy_train, *hedge, config.train);
    } else {
      model = fit_erm(inj.noisy_train, config.train);
    }
    MetricsInputs inputs;
    inputs.model = &model;
    inputs.noisy = &inj.noisy_train;
    inputs.method = method;
    inputs.table = &inj.train_table;
    inputs.true_draw = &inj.draw_train;
    inputs.hedge = hedge.has_value() ? &*hedge : nullptr;
    inputs.keep_per_instance = false;
    Cell& cell = cells[static_cast<size_t>(c)];
    cell.noise_index = s;
    cell.method = method;
    cell.train_metrics = compute_metrics(inputs);
    cell.clean_test_error = error_against(model, inj.noisy_test, clean_test.labels);
    cell.noisy_test_error = error_against(model, inj.noisy_test, inj.noisy_test.labels);
  });

  nlohmann::json out;
  out["config"] = nlohmann::json::parse(config.to_json());
  if (source.bayes_error.has_value()) {
    out["bayes_error"] = *source.bayes_error;
  } else {
    out["bayes_error"] = nullptr;
  }
  out["n_train"] = static_cast<int64_t>(train_idx.size());
  out["n_test"] = static_cast<int64_t>(test_idx.size());
  nlohmann::json cell_array = nlohmann::json::array();
  for (const Cell& cell : cells) {
    nlohmann::json c;
    c["noise"] = noise[cell.noise_index].name;
    c["noise_model"] = noise_model_json(noise[cell.noise_index].model);
    c["method"] = method_name(cell.method);
    c["train"] = report_json(cell.train_metrics);
    c["clean_test_error"] = cell.clean_test_error;
    c["noisy_test_error"] = cell.noisy_test_error;
    cell_array.push_back(std::move(c));
  }
  out["cells"] = std::move(cell_array);
  write_text_file(out_dir + "/metrics.json", out.dump(2) + "\n");

  // Fixed-row table: one column per (noise, method) cell.
  struct Row {
    const char* label;
    std::function<double(const Cell&)> value;
  };
  const Row rows[] = {
      {"true_error", [](const Cell& c) { return c.train_metrics.true_error.value(); }},
      {"anticipated_error", [](const Cell& c) { return c.train_metrics.anticipated_error; }},
      {"regret", [](const Cell& c) { return c.train_metrics.regret.value(); }},
      {"overreliance", [](const Cell& c) { return c.train_metrics.overreliance.value(); }},
      {"susceptibility", [](const Cell& c) { return c.train_metrics.susceptibility.value(); }},
  };
  std::vector<std::string> headers{"metric"};
  for (const Cell& cell : cells) {
    headers.push_back(noise[cell.noise_index].name + " " + method_name(cell.method));
  }
  std::vector<size_t> widths;
  for (const std::string& h : headers) widths.push_back(std::max<size_t>(h.size(), 10));
  widths[0] = std::max<size_t>(widths[0], 18);
  std::string table;
  for (size_t k = 0; k < headers.size(); ++k) {
    if (k > 0) table += "  ";
    table += headers[k];
    table.append(widths[k] - headers[k].size(), ' ');
  }
  table += '\n';
  for (const Row& row : rows) {
    std::string line = row.label;
    line.append(widths[0] - line.size(), ' ');
    for (size_t k = 0; k < cells.size(); ++k) {
      std::string value = format_double(row.value(cells[k]), "%.4f");
      line += "  ";
      line += value;
      line.append(widths[k + 1] - value.size(), ' ');
    }
    table += line;
    table += '\n';
  }
  write_text_file(out_dir + "/grid_table.txt", table);
}

namespace {

// Shared setup for the cleaning and selective demos: one noise entry, one
// base model, one ensemble on the noisy training split.
struct DemoState {
  SourceData source;
  NoiseEntry noise;
  std::vector<int64_t> train_idx, test_idx;
  Dataset noisy_train, noisy_test, clean_test;
  NoiseDraw draw_train, draw_test;
  PosteriorTable train_table, test_table;
  LinearModel base;
  PlausibleEnsemble ensemble;
};

DemoState demo_setup(const ExperimentConfig& config, double default_p1) {
  DemoState state;
  state.source = load_source(config);
  const Dataset& clean = state.source.clean;
  state.noise = config.noise.empty() ? class_noise_entry(default_p1, empirical_pi1(clean))
                                     : config.noise.front();

  std::tie(state.train_idx, state.test_idx) =
      split_indices(clean.size(), config.train_fraction, derive_seed(config.seed, 1));
  InjectResult full = inject_noise(clean, state.noise.model.spec, derive_seed(config.seed, 100));
  state.noisy_train = subset(full.noisy, state.train_idx);
  state.noisy_test = subset(full.noisy, state.test_idx);
  state.clean_test = subset(clean, state.test_idx);
  state.draw_train = gather_draw(full.draw, state.train_idx);
  state.draw_test = gather_draw(full.draw, state.test_idx);
  PosteriorTable table = posterior(state.noise.model.spec, state.noise.model.priors);
  state.train_table = split_table(table, full.noisy, state.train_idx);
  state.test_table = split_table(table, full.noisy, state.test_idx);

  state.base = fit_erm(state.noisy_train, config.train);
  PlausibilityConfig sampling;
  sampling.epsilon = config.epsilon;
  sampling.max_rejections = config.max_rejections;
  sampling.seed = derive_seed(config.seed, 2);
  state.ensemble = build_ensemble(state.noisy_train, state.train_table, sampling,
                                  config.ensemble_size, config.train);
  return state;
}

nlohmann::json demo_summary(const ExperimentConfig& config, const DemoState& state) {
  MetricsInputs inputs;
  inputs.model = &state.base;
  inputs.noisy = &state.noisy_train;
  inputs.method = Method::Ignore;
  inputs.table = &state.train_table;
  inputs.true_draw = &state.draw_train;
  std::optional<HedgeSpec> hedge = try_hedge_spec(state.noise.model.spec);
  inputs.hedge = hedge.has_value() ? &*hedge : nullptr;
  inputs.keep_per_instance = false;

  nlohmann::json j;
  j["config"] = nlohmann::json::parse(config.to_json());
  j["noise"] = state.noise.name;
  j["noise_model"] = noise_model_json(state.noise.model);
  j["n_train"] = static_cast<int64_t>(state.train_idx.size());
  j["n_test"] = static_cast<int64_t>(state.test_idx.size());
  j["base_train"] = report_json(compute_metrics(inputs));
  j["base_clean_test_error"] = error_against(state.base, state.noisy_test, state.clean_test.labels);
  if (state.source.bayes_error.has_value()) {
    j["bayes_error"] = *state.source.bayes_error;
  } else {
    j["bayes_error"] = nullptr;
  }
  return j;
}

}  // namespace

void run_clean(const ExperimentConfig& config, const std::string& out_dir) {
  apply_threads(config);
  std::filesystem::create_directories(out_dir);
  DemoState state = demo_setup(config, 0.4);
  int64_t n_train = state.noisy_train.size();
  std::vector<double> drop_grid = config.drop_grid.empty() ? default_drop_grid() : config.drop_grid;

  for (ConfidenceKind kind : kAllKinds) {
    std::vector<double> conf = confidence_scores(&state.ensemble, &state.base, state.noisy_train,
                                                 &state.train_table, kind,
                                                 derive_seed(config.seed, 3));
    std::vector<int64_t> order = lowest_confidence(conf, n_train);
    double min_conf = *std::min_element(conf.begin(), conf.end());

    std::vector<FrontierPoint> frontier;
    for (double fraction : drop_grid) {
      int64_t k = std::clamp<int64_t>(
          std::llround(fraction * static_cast<double>(n_train)), 0, n_train);
      FrontierPoint pt;
      pt.coverage = 1.0 - fraction;
      pt.tau = k == 0 ? min_conf - 1.0
                      : conf[static_cast<size_t>(order[static_cast<size_t>(k - 1)])];
      pt.selective_regret = std::nan("");
      pt.hit_rate = std::nan("");

      std::vector<int8_t> dropped(static_cast<size_t>(n_train), 0);
      for (int64_t j = 0; j < k; ++j) dropped[static_cast<size_t>(order[static_cast<size_t>(j)])] = 1;
      std::vector<int64_t> retained;
      retained.reserve(static_cast<size_t>(n_train - k));
      bool has0 = false, has1 = false;
      for (int64_t i = 0; i < n_train; ++i) {
        if (dropped[static_cast<size_t>(i)]) continue;
        retained.push_back(i);
        (state.noisy_train.labels[static_cast<size_t>(i)] == 1 ? has1 : has0) = true;
      }
      if (retained.empty() || !has0 || !has1) {
        pt.degenerate = true;
        pt.selective_error = std::nan("");
      } else {
        LinearModel retrained = fit_erm(subset(state.noisy_train, retained), config.train);
        pt.selective_error = error_against(retrained, state.noisy_test, state.clean_test.labels);
      }
      frontier.push_back(pt);
    }
    write_frontier_csv(frontier, false,
                       out_dir + "/frontier_clean_" + confidence_kind_name(kind) + ".csv");
  }
  write_text_file(out_dir + "/clean_summary.json", demo_summary(config, state).dump(2) + "\n");
}

void run_select(const ExperimentConfig& config, const std::string& out_dir) {
  apply_threads(config);
  std::filesystem::create_directories(out_dir);
  DemoState state = demo_setup(config, 0.2);

  MetricsInputs inputs;
  inputs.model = &state.base;
  inputs.noisy = &state.noisy_test;
  inputs.method = Method::Ignore;
  inputs.table = &state.test_table;
  inputs.true_draw = &state.draw_test;
  MetricsReport test_report = compute_metrics(inputs);

  for (ConfidenceKind kind : kAllKinds) {
    std::vector<double> conf = confidence_scores(&state.ensemble, &state.base, state.noisy_test,
                                                 &state.test_table, kind,
                                                 derive_seed(config.seed, 4));
    std::vector<FrontierPoint> frontier =
        sweep_abstention(conf, test_report.realized, test_report.regret_indicator, nullptr,
                         config.abstention_points);
    write_frontier_csv(frontier, false,
                       out_dir + "/frontier_select_" + confidence_kind_name(kind) + ".csv");
  }

  nlohmann::json summary = demo_summary(config, state);
  summary["base_test"] = report_json(test_report);
  write_text_file(out_dir + "/select_summary.json", summary.dump(2) + "\n");
}

void run_discover(const ExperimentConfig& config, const std::string& out_dir) {
  apply_threads(config);
  require(config.use_synth, ErrorCode::Config,
          "the discovery demo needs a synthetic source (it uses the generator's posterior)");
  std::filesystem::create_directories(out_dir);
  SyntheticData synth = generate_synthetic(config.synth, derive_seed(config.seed, 0));
  const Dataset& clean = synth.data;
  int64_t n = clean.size();
  int64_t d = clean.dim();

  // Detector: true positives are always flagged; a negative is falsely
  // flagged with probability tied to its last feature, so the false calls
  // carry a signal the class posterior alone does not.
  Rng rng(derive_seed(config.seed, 5));
  std::vector<int8_t> observed(static_cast<size_t>(n), 0);
  NoiseDraw true_draw;
  true_draw.provenance = DrawProvenance::TrueDraw;
  true_draw.bits.resize(static_cast<size_t>(n), 0);
  std::vector<double> fp_rate(static_cast<size_t>(n), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    double p = std::min(0.45, config.discover_fp_scale * sigmoid(clean.row(i)[d - 1]));
    fp_rate[static_cast<size_t>(i)] = p;
    if (clean.labels[static_cast<size_t>(i)] == 1) {
      observed[static_cast<size_t>(i)] = 1;
    } else {
      uint8_t u = rng.bernoulli(p) ? 1 : 0;
      true_draw.bits[static_cast<size_t>(i)] = u;
      observed[static_cast<size_t>(i)] = static_cast<int8_t>(u);
    }
  }

  // Pr(flagged wrongly | flagged, x) from the generator's eta; an unflagged
  // instance is never a missed positive under this detector.
  std::vector<double> q(static_cast<size_t>(n), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    if (observed[static_cast<size_t>(i)] == 1) {
      double eta = synth.eta[static_cast<size_t>(i)];
      double fp = (1.0 - eta) * fp_rate[static_cast<size_t>(i)];
      q[static_cast<size_t>(i)] = (fp + eta) == 0.0 ? 0.0 : fp / (fp + eta);
    }
  }
  PosteriorTable table = posterior_from_rates(q);
  Dataset noisy = with_labels(clean, observed, LabelKind::Noisy);

  LinearModel base = fit_erm(noisy, config.train);
  PlausibilityConfig sampling;
  sampling.epsilon = config.epsilon;
  sampling.max_rejections = config.max_rejections;
  sampling.seed = derive_seed(config.seed, 6);
  PlausibleEnsemble ensemble =
      build_ensemble(noisy, table, sampling, config.ensemble_size, config.train);

  // Candidates are the detector's calls; rank them by confidence.
  std::vector<int64_t> candidates;
  for (int64_t i = 0; i < n; ++i) {
    if (observed[static_cast<size_t>(i)] == 1) candidates.push_back(i);
  }
  require(!candidates.empty(), ErrorCode::Evaluation, "the detector flagged no instances");

  std::vector<int8_t> base_preds = base.predict(noisy);
  std::vector<int8_t> err_bits(candidates.size()), reg_bits(candidates.size()),
      hit_bits(candidates.size());
  for (size_t j = 0; j < candidates.size(); ++j) {
    int64_t i = candidates[j];
    int8_t y = clean.labels[static_cast<size_t>(i)];
    err_bits[j] = base_preds[static_cast<size_t>(i)] != y ? 1 : 0;
    reg_bits[j] = true_draw.bits[static_cast<size_t>(i)];  // flagged wrongly
    hit_bits[j] = y == 1 ? 1 : 0;
  }

  for (ConfidenceKind kind : kAllKinds) {
    std::vector<double> conf_all = confidence_scores(&ensemble, &base, noisy, &table, kind,
                                                     derive_seed(config.seed, 7));
    std::vector<double> conf(candidates.size());
    for (size_t j = 0; j < candidates.size(); ++j) {
      conf[j] = conf_all[static_cast<size_t>(candidates[j])];
    }
    std::vector<FrontierPoint> frontier =
        sweep_abstention(conf, err_bits, reg_bits, &hit_bits, config.abstention_points);
    write_frontier_csv(frontier, true,
                       out_dir + "/frontier_discover_" + confidence_kind_name(kind) + ".csv");
  }

  MetricsInputs inputs;
  inputs.model = &base;
  inputs.noisy = &noisy;
  inputs.method = Method::Ignore;
  inputs.table = &table;
  inputs.true_draw = &true_draw;
  inputs.keep_per_instance = false;

  nlohmann::json summary;
  summary["config"] = nlohmann::json::parse(config.to_json());
  summary["n"] = n;
  summary["candidates"] = static_cast<int64_t>(candidates.size());
  summary["true_positive_candidates"] =
      static_cast<int64_t>(std::count(hit_bits.begin(), hit_bits.end(), int8_t{1}));
  summary["base"] = report_json(compute_metrics(inputs));
  summary["bayes_error"] = synth.bayes_error;
  write_text_file(out_dir + "/discover_summary.json", summary.dump(2) + "\n");
}

}  // namespace noisescope
