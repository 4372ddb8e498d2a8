// Command-line front end; all work goes through the C API.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "noisescope/noisescope.h"

namespace {

[[noreturn]] void die(ns_status status) {
  std::fprintf(stderr, "error: %s\n", ns_last_error());
  std::exit(status == NS_OK ? 1 : static_cast<int>(status));
}

void check(ns_status status) {
  if (status != NS_OK) die(status);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) {
    std::fprintf(stderr, "error: cannot read %s\n", path.c_str());
    std::exit(NS_ERR_IO);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    std::exit(NS_ERR_IO);
  }
  out << text;
}

int32_t method_code(const std::string& name) {
  if (name == "ignore") return NS_METHOD_IGNORE;
  if (name == "hedge") return NS_METHOD_HEDGE;
  std::fprintf(stderr, "error: unknown method '%s' (expected ignore or hedge)\n", name.c_str());
  std::exit(NS_ERR_INVALID_ARGUMENT);
}

int32_t label_kind_code(const std::string& name) {
  if (name == "clean") return NS_LABELS_CLEAN;
  if (name == "noisy") return NS_LABELS_NOISY;
  std::fprintf(stderr, "error: unknown label kind '%s' (expected clean or noisy)\n",
               name.c_str());
  std::exit(NS_ERR_INVALID_ARGUMENT);
}

void print_report(const nlohmann::json& report, const std::string& indent) {
  static const char* keys[] = {"method",
                               "n",
                               "anticipated_error",
                               "true_error",
                               "regret",
                               "overreliance",
                               "underreliance",
                               "susceptibility",
                               "expected_regret",
                               "decomposition_total",
                               "decomposition_mean",
                               "unbiased_error",
                               "mle_ties"};
  for (const char* key : keys) {
    if (!report.contains(key) || report.at(key).is_null()) continue;
    std::printf("%s%-20s %s\n", indent.c_str(), key, report.at(key).dump().c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("noisescope ") + ns_version() +
               " - instance-level impact of label noise: noise posteriors, plausible "
               "datasets, model ensembles, and regret metrics"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  std::string synth_spec, synth_out;
  uint64_t synth_seed = 17;
  synth->add_option("--synth", synth_spec, "generator spec JSON file (defaults apply if omitted)")
      ->check(CLI::ExistingFile);
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->callback([&] {
    std::string spec = synth_spec.empty() ? "{}" : read_file(synth_spec);
    ns_dataset* data = nullptr;
    double bayes = 0.0;
    check(ns_synthetic_generate(spec.c_str(), synth_seed, &data, &bayes));
    std::filesystem::create_directories(synth_out);
    check(ns_dataset_write_csv(data, (synth_out + "/data.csv").c_str()));
    int64_t n = 0, d = 0;
    check(ns_dataset_rows(data, &n));
    check(ns_dataset_cols(data, &d));
    nlohmann::json info;
    info["n"] = n;
    info["d"] = d;
    info["bayes_error"] = bayes;
    info["seed"] = synth_seed;
    write_file(synth_out + "/synth_info.json", info.dump(2) + "\n");
    ns_dataset_free(data);
    std::printf("wrote %s/data.csv (n=%" PRId64 ", d=%" PRId64 ", bayes error %.6f)\n",
                synth_out.c_str(), n, d, bayes);
  });

  // inject
  auto* inject = app.add_subcommand("inject", "Inject label noise into a clean dataset");
  std::string inject_data, inject_noise, inject_out;
  uint64_t inject_seed = 17;
  inject->add_option("--data", inject_data, "clean dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  inject->add_option("--noise", inject_noise, "noise model JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  inject->add_option("--seed", inject_seed, "RNG seed");
  inject->add_option("--out", inject_out, "output directory")->required();
  inject->callback([&] {
    ns_dataset* clean = nullptr;
    ns_noise_model* model = nullptr;
    ns_dataset* noisy = nullptr;
    ns_draw* draw = nullptr;
    check(ns_dataset_read_csv(inject_data.c_str(), NS_LABELS_CLEAN, &clean));
    check(ns_noise_model_from_json(read_file(inject_noise).c_str(), &model));
    check(ns_inject_noise(clean, model, inject_seed, &noisy, &draw));
    std::filesystem::create_directories(inject_out);
    check(ns_dataset_write_csv(noisy, (inject_out + "/noisy.csv").c_str()));
    check(ns_draw_write_binary(draw, (inject_out + "/draw.bits").c_str()));
    int64_t n = 0, flips = 0;
    check(ns_draw_length(draw, &n));
    check(ns_draw_flip_count(draw, &flips));
    nlohmann::json info;
    info["n"] = n;
    info["flips"] = flips;
    info["seed"] = inject_seed;
    write_file(inject_out + "/inject_info.json", info.dump(2) + "\n");
    ns_draw_free(draw);
    ns_dataset_free(noisy);
    ns_noise_model_free(model);
    ns_dataset_free(clean);
    std::printf("wrote %s/noisy.csv and %s/draw.bits (%" PRId64 " of %" PRId64
                " labels flipped)\n",
                inject_out.c_str(), inject_out.c_str(), flips, n);
  });

  // train
  auto* train = app.add_subcommand("train", "Fit a logistic model");
  std::string train_data, train_labels = "noisy", train_method = "ignore", train_noise,
              train_config, train_out;
  train->add_option("--data", train_data, "training dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--labels", train_labels, "label kind of the CSV: clean or noisy");
  train->add_option("--method", train_method, "ignore (plain ERM) or hedge (unbiased loss)");
  train->add_option("--noise", train_noise, "noise model JSON file (required for hedge)")
      ->check(CLI::ExistingFile);
  train->add_option("--config", train_config, "training options JSON file")
      ->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "output directory")->required();
  train->callback([&] {
    ns_dataset* data = nullptr;
    check(ns_dataset_read_csv(train_data.c_str(), label_kind_code(train_labels), &data));
    std::string options = train_config.empty() ? "{}" : read_file(train_config);
    ns_model* model = nullptr;
    if (method_code(train_method) == NS_METHOD_HEDGE) {
      if (train_noise.empty()) {
        std::fprintf(stderr, "error: --method hedge needs --noise\n");
        std::exit(NS_ERR_INVALID_ARGUMENT);
      }
      ns_noise_model* noise = nullptr;
      check(ns_noise_model_from_json(read_file(train_noise).c_str(), &noise));
      check(ns_train_hedged(data, noise, options.c_str(), &model));
      ns_noise_model_free(noise);
    } else {
      check(ns_train_erm(data, options.c_str(), &model));
    }
    std::filesystem::create_directories(train_out);
    check(ns_model_save(model, (train_out + "/model.json").c_str()));
    ns_model_free(model);
    ns_dataset_free(data);
    std::printf("wrote %s/model.json\n", train_out.c_str());
  });

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Score a model on noisy-labeled data");
  std::string metrics_model, metrics_data, metrics_method = "ignore", metrics_noise,
              metrics_draw, metrics_out;
  metrics->add_option("--model", metrics_model, "model JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  metrics->add_option("--data", metrics_data, "noisy dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  metrics->add_option("--method", metrics_method, "ignore or hedge");
  metrics->add_option("--noise", metrics_noise,
                      "noise model JSON file (enables posterior-based quantities)")
      ->check(CLI::ExistingFile);
  metrics->add_option("--draw", metrics_draw, "realized noise draw file (enables true error)")
      ->check(CLI::ExistingFile);
  metrics->add_option("--out", metrics_out, "output directory (prints to stdout if omitted)");
  metrics->callback([&] {
    ns_model* model = nullptr;
    ns_dataset* data = nullptr;
    ns_noise_model* noise = nullptr;
    ns_posterior* table = nullptr;
    ns_draw* draw = nullptr;
    check(ns_model_load(metrics_model.c_str(), &model));
    check(ns_dataset_read_csv(metrics_data.c_str(), NS_LABELS_NOISY, &data));
    if (!metrics_noise.empty()) {
      check(ns_noise_model_from_json(read_file(metrics_noise).c_str(), &noise));
      check(ns_posterior_compute(noise, &table));
    }
    if (!metrics_draw.empty()) check(ns_draw_read(metrics_draw.c_str(), &draw));
    char* report = nullptr;
    check(ns_metrics_compute(model, data, method_code(metrics_method), table, draw, noise,
                             &report));
    if (metrics_out.empty()) {
      print_report(nlohmann::json::parse(report), "");
    } else {
      std::filesystem::create_directories(metrics_out);
      write_file(metrics_out + "/report.json", std::string(report) + "\n");
      std::printf("wrote %s/report.json\n", metrics_out.c_str());
    }
    ns_string_free(report);
    ns_draw_free(draw);
    ns_posterior_free(table);
    ns_noise_model_free(noise);
    ns_dataset_free(data);
    ns_model_free(model);
  });

  // ensemble
  auto* ensemble = app.add_subcommand(
      "ensemble", "Build a plausible-model ensemble and score confidence");
  std::string ens_data, ens_noise, ens_config, ens_test, ens_out;
  int64_t ens_m = 100;
  double ens_epsilon = 0.1;
  int64_t ens_max_rejections = 0;
  uint64_t ens_seed = 17;
  ensemble->add_option("--data", ens_data, "noisy training dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  ensemble->add_option("--noise", ens_noise, "noise model JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  ensemble->add_option("--m", ens_m, "ensemble size");
  ensemble->add_option("--epsilon", ens_epsilon, "plausibility tolerance");
  ensemble->add_option("--max-rejections", ens_max_rejections,
                       "total rejection budget (0 = default)");
  ensemble->add_option("--seed", ens_seed, "RNG seed");
  ensemble->add_option("--config", ens_config, "training options JSON file")
      ->check(CLI::ExistingFile);
  ensemble->add_option("--test-data", ens_test, "noisy test CSV for test-time confidence")
      ->check(CLI::ExistingFile);
  ensemble->add_option("--out", ens_out, "output directory")->required();
  ensemble->callback([&] {
    ns_dataset* data = nullptr;
    ns_noise_model* noise = nullptr;
    ns_posterior* table = nullptr;
    check(ns_dataset_read_csv(ens_data.c_str(), NS_LABELS_NOISY, &data));
    check(ns_noise_model_from_json(read_file(ens_noise).c_str(), &noise));
    check(ns_posterior_compute(noise, &table));
    std::string options = ens_config.empty() ? "{}" : read_file(ens_config);
    ns_model* base = nullptr;
    check(ns_train_erm(data, options.c_str(), &base));
    ns_ensemble* ens = nullptr;
    check(ns_ensemble_build(data, table, ens_epsilon, ens_max_rejections, ens_seed, ens_m,
                            options.c_str(), &ens));
    std::filesystem::create_directories(ens_out);
    check(ns_ensemble_save(ens, (ens_out + "/ensemble").c_str()));
    check(ns_model_save(base, (ens_out + "/base_model.json").c_str()));

    auto confidence_csv = [&](ns_dataset* target, uint64_t seed, const std::string& path) {
      int64_t n = 0;
      check(ns_dataset_rows(target, &n));
      std::vector<double> ambiguity(n), disagreement(n), probability(n);
      check(ns_ensemble_confidence(ens, base, target, table, NS_CONFIDENCE_AMBIGUITY, seed,
                                   ambiguity.data()));
      check(ns_ensemble_confidence(ens, base, target, table, NS_CONFIDENCE_DISAGREEMENT, seed,
                                   disagreement.data()));
      check(ns_ensemble_confidence(ens, base, target, table, NS_CONFIDENCE_PROBABILITY, seed,
                                   probability.data()));
      std::string csv = "index,ambiguity,disagreement,probability\n";
      char line[128];
      for (int64_t i = 0; i < n; ++i) {
        std::snprintf(line, sizeof(line), "%" PRId64 ",%.12g,%.12g,%.12g\n", i,
                      ambiguity[static_cast<size_t>(i)], disagreement[static_cast<size_t>(i)],
                      probability[static_cast<size_t>(i)]);
        csv += line;
      }
      write_file(path, csv);
    };
    confidence_csv(data, ens_seed + 1, ens_out + "/confidence.csv");
    if (!ens_test.empty()) {
      ns_dataset* test = nullptr;
      check(ns_dataset_read_csv(ens_test.c_str(), NS_LABELS_NOISY, &test));
      confidence_csv(test, ens_seed + 2, ens_out + "/test_confidence.csv");
      ns_dataset_free(test);
    }
    ns_ensemble_free(ens);
    ns_model_free(base);
    ns_posterior_free(table);
    ns_noise_model_free(noise);
    ns_dataset_free(data);
    std::printf("wrote %s/ensemble (m=%" PRId64 ") and %s/confidence.csv\n", ens_out.c_str(),
                ens_m, ens_out.c_str());
  });

  // experiment harness commands share option plumbing
  struct HarnessArgs {
    std::string config;
    std::string data_csv;
    uint64_t seed = 0;
    int64_t m = 0;
    double epsilon = 0.0;
    int64_t threads = 0;
    std::string out;
    CLI::App* sub = nullptr;
  };
  auto add_harness = [&app](const char* name, const char* help) {
    auto args = std::make_shared<HarnessArgs>();
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args->config, "experiment config JSON file")
        ->check(CLI::ExistingFile);
    sub->add_option("--data", args->data_csv, "clean dataset CSV (overrides config)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", args->seed, "RNG seed (overrides config)");
    sub->add_option("--m", args->m, "ensemble size (overrides config)");
    sub->add_option("--epsilon", args->epsilon, "plausibility tolerance (overrides config)");
    sub->add_option("--threads", args->threads, "worker threads (overrides config)");
    sub->add_option("--out", args->out, "output directory")->required();
    args->sub = sub;
    return args;
  };
  auto merged_config = [](const HarnessArgs& args) {
    nlohmann::json j =
        args.config.empty() ? nlohmann::json::object() : nlohmann::json::parse(read_file(args.config));
    if (args.sub->count("--data") > 0) {
      j["data_csv"] = args.data_csv;
      j.erase("synth");
    }
    if (args.sub->count("--seed") > 0) j["seed"] = args.seed;
    if (args.sub->count("--m") > 0) j["ensemble_size"] = args.m;
    if (args.sub->count("--epsilon") > 0) j["epsilon"] = args.epsilon;
    if (args.sub->count("--threads") > 0) j["threads"] = args.threads;
    return j.dump();
  };

  auto grid_args = add_harness("grid", "Noise-level x method metric grid");
  grid_args->sub->callback([&, grid_args] {
    check(ns_run_grid(merged_config(*grid_args).c_str(), grid_args->out.c_str()));
    std::printf("wrote %s/metrics.json and %s/grid_table.txt\n", grid_args->out.c_str(),
                grid_args->out.c_str());
  });
  auto clean_args = add_harness("clean", "Confidence-ranked training-data cleaning sweep");
  clean_args->sub->callback([&, clean_args] {
    check(ns_run_clean(merged_config(*clean_args).c_str(), clean_args->out.c_str()));
    std::printf("wrote %s/frontier_clean_*.csv and %s/clean_summary.json\n",
                clean_args->out.c_str(), clean_args->out.c_str());
  });
  auto select_args = add_harness("select", "Selective-prediction abstention sweep");
  select_args->sub->callback([&, select_args] {
    check(ns_run_select(merged_config(*select_args).c_str(), select_args->out.c_str()));
    std::printf("wrote %s/frontier_select_*.csv and %s/select_summary.json\n",
                select_args->out.c_str(), select_args->out.c_str());
  });
  auto discover_args = add_harness("discover", "Noisy-detector discovery triage sweep");
  discover_args->sub->callback([&, discover_args] {
    check(ns_run_discover(merged_config(*discover_args).c_str(), discover_args->out.c_str()));
    std::printf("wrote %s/frontier_discover_*.csv and %s/discover_summary.json\n",
                discover_args->out.c_str(), discover_args->out.c_str());
  });

  // report
  auto* report = app.add_subcommand("report", "Pretty-print a metrics JSON file");
  std::string report_path;
  report->add_option("--metrics", report_path, "report.json or grid metrics.json")
      ->required()
      ->check(CLI::ExistingFile);
  report->callback([&] {
    nlohmann::json j = nlohmann::json::parse(read_file(report_path));
    if (j.contains("cells")) {
      for (const nlohmann::json& cell : j.at("cells")) {
        std::printf("%s / %s  (clean test error %s)\n",
                    cell.at("noise").get<std::string>().c_str(),
                    cell.at("method").get<std::string>().c_str(),
                    cell.at("clean_test_error").dump().c_str());
        print_report(cell.at("train"), "  ");
      }
    } else {
      print_report(j, "");
    }
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}
