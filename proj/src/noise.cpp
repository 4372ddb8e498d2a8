#include "noise.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace noisescope {

using nlohmann::json;

const char* family_name(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::Uniform: return "uniform";
    case NoiseFamily::ClassLevel: return "class";
    case NoiseFamily::GroupLevel: return "group";
    case NoiseFamily::InstanceLevel: return "instance";
  }
  return "unknown";
}

int xor_bit(int a, int b) {
  require(a == 0 || a == 1, ErrorCode::Domain, "xor_bit: first argument must be 0 or 1");
  require(b == 0 || b == 1, ErrorCode::Domain, "xor_bit: second argument must be 0 or 1");
  return a + b - 2 * a * b;
}

namespace {

void check_rate(double p, const std::string& where) {
  require(std::isfinite(p) && p >= 0.0 && p < 0.5, ErrorCode::InvalidArgument,
          where + ": flip rate must lie in [0, 0.5), got " + std::to_string(p));
}

void check_prior(double pi, const std::string& where) {
  require(std::isfinite(pi) && pi >= 0.0 && pi <= 1.0, ErrorCode::InvalidArgument,
          where + ": prior must lie in [0, 1], got " + std::to_string(pi));
}

}  // namespace

void NoiseSpec::validate() const {
  switch (family) {
    case NoiseFamily::Uniform:
      check_rate(uniform_p, "noise spec (uniform)");
      break;
    case NoiseFamily::ClassLevel:
      check_rate(class_p[0], "noise spec (class, y=0)");
      check_rate(class_p[1], "noise spec (class, y=1)");
      break;
    case NoiseFamily::GroupLevel:
      require(!group_p.empty(), ErrorCode::InvalidArgument,
              "noise spec (group): no group entries");
      for (const auto& [g, rates] : group_p) {
        check_rate(rates[0], "noise spec (group=" + std::to_string(g) + ", y=0)");
        check_rate(rates[1], "noise spec (group=" + std::to_string(g) + ", y=1)");
      }
      break;
    case NoiseFamily::InstanceLevel:
      require(!instance_p.empty(), ErrorCode::InvalidArgument,
              "noise spec (instance): empty rate vector");
      for (size_t i = 0; i < instance_p.size(); ++i) {
        check_rate(instance_p[i], "noise spec (instance " + std::to_string(i) + ")");
      }
      break;
  }
}

double NoiseSpec::rate_for_clean(const Dataset& clean, int64_t i) const {
  int y = clean.labels[static_cast<size_t>(i)];
  switch (family) {
    case NoiseFamily::Uniform:
      return uniform_p;
    case NoiseFamily::ClassLevel:
      return class_p[static_cast<size_t>(y)];
    case NoiseFamily::GroupLevel: {
      require(clean.has_groups(), ErrorCode::Config,
              "noise spec (group): dataset has no group column");
      int32_t g = clean.groups[static_cast<size_t>(i)];
      auto it = group_p.find(g);
      require(it != group_p.end(), ErrorCode::Config,
              "noise spec (group): no entry for stratum group=" + std::to_string(g));
      return it->second[static_cast<size_t>(y)];
    }
    case NoiseFamily::InstanceLevel:
      require(static_cast<int64_t>(instance_p.size()) == clean.size(), ErrorCode::Config,
              "noise spec (instance): rate vector length " +
                  std::to_string(instance_p.size()) + " does not match dataset size " +
                  std::to_string(clean.size()));
      return instance_p[static_cast<size_t>(i)];
  }
  fail(ErrorCode::Internal, "noise spec: unknown family");
}

void Priors::validate() const {
  switch (family) {
    case NoiseFamily::Uniform:
    case NoiseFamily::ClassLevel:
      check_prior(pi1, "priors");
      break;
    case NoiseFamily::GroupLevel:
      require(!group_pi1.empty(), ErrorCode::InvalidArgument, "priors (group): no group entries");
      for (const auto& [g, pi] : group_pi1) {
        check_prior(pi, "priors (group=" + std::to_string(g) + ")");
      }
      break;
    case NoiseFamily::InstanceLevel:
      if (instance_pi1.empty()) {
        check_prior(pi1, "priors (instance fallback)");
      } else {
        for (size_t i = 0; i < instance_pi1.size(); ++i) {
          check_prior(instance_pi1[i], "priors (instance " + std::to_string(i) + ")");
        }
      }
      break;
  }
}

double Priors::pi1_for_group(int32_t group) const {
  auto it = group_pi1.find(group);
  require(it != group_pi1.end(), ErrorCode::Config,
          "priors (group): no entry for stratum group=" + std::to_string(group));
  return it->second;
}

double Priors::pi1_for_instance(int64_t i) const {
  if (instance_pi1.empty()) return pi1;
  require(i >= 0 && i < static_cast<int64_t>(instance_pi1.size()), ErrorCode::Config,
          "priors (instance): index out of range");
  return instance_pi1[static_cast<size_t>(i)];
}

int64_t NoiseDraw::flip_count() const {
  int64_t c = 0;
  for (uint8_t b : bits) c += b;
  return c;
}

InjectResult inject_noise(const Dataset& clean, const NoiseSpec& spec, uint64_t seed) {
  clean.validate();
  spec.validate();
  require(clean.label_kind == LabelKind::Clean, ErrorCode::InvalidArgument,
          "inject_noise: dataset labels must be clean");

  int64_t n = clean.size();
  NoiseDraw draw;
  draw.bits.resize(static_cast<size_t>(n));
  draw.provenance = DrawProvenance::TrueDraw;
  std::vector<int8_t> noisy_labels(static_cast<size_t>(n));

  Rng rng(seed);
  for (int64_t i = 0; i < n; ++i) {
    double p = spec.rate_for_clean(clean, i);
    uint8_t u = rng.bernoulli(p) ? 1 : 0;
    draw.bits[static_cast<size_t>(i)] = u;
    noisy_labels[static_cast<size_t>(i)] =
        static_cast<int8_t>(xor_bit(clean.labels[static_cast<size_t>(i)], u));
  }
  return {with_labels(clean, std::move(noisy_labels), LabelKind::Noisy), std::move(draw)};
}

Dataset apply_draw(const Dataset& dataset, const NoiseDraw& draw) {
  require(draw.size() == dataset.size(), ErrorCode::InvalidArgument,
          "apply_draw: draw length does not match dataset size");
  std::vector<int8_t> flipped(static_cast<size_t>(dataset.size()));
  for (int64_t i = 0; i < dataset.size(); ++i) {
    flipped[static_cast<size_t>(i)] = static_cast<int8_t>(
        xor_bit(dataset.labels[static_cast<size_t>(i)], draw.bits[static_cast<size_t>(i)]));
  }
  LabelKind kind =
      dataset.label_kind == LabelKind::Noisy ? LabelKind::Clean : LabelKind::Noisy;
  return with_labels(dataset, std::move(flipped), kind);
}

namespace {

// Bayes inversion for one stratum.  Returns nullopt when Pr(Yt=yt) is zero.
std::optional<double> bayes_q(int yt, double pi1, double p0, double p1) {
  double pi_yt = yt == 1 ? pi1 : 1.0 - pi1;
  double pi_other = 1.0 - pi_yt;
  double p_other = yt == 1 ? p0 : p1;
  double p_yt = yt == 1 ? p1 : p0;
  double numer = pi_other * p_other;
  double denom = numer + pi_yt * (1.0 - p_yt);
  if (denom == 0.0) return std::nullopt;
  return numer / denom;
}

double marginal_yt(int yt, double pi1, double p0, double p1) {
  double pi_yt = yt == 1 ? pi1 : 1.0 - pi1;
  double pi_other = 1.0 - pi_yt;
  double p_other = yt == 1 ? p0 : p1;
  double p_yt = yt == 1 ? p1 : p0;
  return pi_yt * (1.0 - p_yt) + pi_other * p_other;
}

}  // namespace

PosteriorTable posterior(const NoiseSpec& spec, const Priors& priors) {
  spec.validate();
  priors.validate();
  require(spec.family == priors.family, ErrorCode::InvalidArgument,
          "posterior: spec and priors families differ");

  PosteriorTable table;
  table.family = spec.family;
  switch (spec.family) {
    case NoiseFamily::Uniform:
      // Uniform noise keeps the prior-free rate on both observed labels.
      table.class_q[0] = spec.uniform_p;
      table.class_q[1] = spec.uniform_p;
      break;
    case NoiseFamily::ClassLevel:
      for (int yt = 0; yt < 2; ++yt) {
        table.class_q[static_cast<size_t>(yt)] =
            bayes_q(yt, priors.pi1, spec.class_p[0], spec.class_p[1]);
      }
      break;
    case NoiseFamily::GroupLevel:
      for (const auto& [g, rates] : spec.group_p) {
        double pi1 = priors.pi1_for_group(g);
        std::array<std::optional<double>, 2> qs;
        for (int yt = 0; yt < 2; ++yt) {
          qs[static_cast<size_t>(yt)] = bayes_q(yt, pi1, rates[0], rates[1]);
        }
        table.group_q[g] = qs;
      }
      break;
    case NoiseFamily::InstanceLevel: {
      if (!priors.instance_pi1.empty()) {
        require(priors.instance_pi1.size() == spec.instance_p.size(), ErrorCode::InvalidArgument,
                "posterior: instance prior vector length does not match rate vector");
      }
      table.instance_q.resize(spec.instance_p.size());
      for (size_t i = 0; i < spec.instance_p.size(); ++i) {
        double pi1 = priors.pi1_for_instance(static_cast<int64_t>(i));
        double p = spec.instance_p[i];
        for (int yt = 0; yt < 2; ++yt) {
          table.instance_q[i][static_cast<size_t>(yt)] = bayes_q(yt, pi1, p, p);
        }
      }
      break;
    }
  }
  return table;
}

PosteriorTable posterior_from_rates(std::vector<double> rates) {
  require(!rates.empty(), ErrorCode::InvalidArgument, "posterior_from_rates: empty rate vector");
  PosteriorTable table;
  table.family = NoiseFamily::InstanceLevel;
  table.direct_rates = true;
  table.instance_q.resize(rates.size());
  for (size_t i = 0; i < rates.size(); ++i) {
    double q = rates[i];
    require(std::isfinite(q) && q >= 0.0 && q <= 1.0, ErrorCode::InvalidArgument,
            "posterior_from_rates: rate must lie in [0, 1]");
    table.instance_q[i][0] = q;
    table.instance_q[i][1] = q;
  }
  return table;
}

double PosteriorTable::rate_for(const Dataset& noisy, int64_t i) const {
  require(noisy.label_kind == LabelKind::Noisy, ErrorCode::InvalidArgument,
          "posterior: dataset labels must be noisy");
  require(i >= 0 && i < noisy.size(), ErrorCode::InvalidArgument, "posterior: index out of range");
  int yt = noisy.labels[static_cast<size_t>(i)];
  std::optional<double> q;
  switch (family) {
    case NoiseFamily::Uniform:
    case NoiseFamily::ClassLevel:
      q = class_q[static_cast<size_t>(yt)];
      break;
    case NoiseFamily::GroupLevel: {
      require(noisy.has_groups(), ErrorCode::Config,
              "posterior (group): dataset has no group column");
      int32_t g = noisy.groups[static_cast<size_t>(i)];
      auto it = group_q.find(g);
      require(it != group_q.end(), ErrorCode::Config,
              "posterior (group): no entry for stratum group=" + std::to_string(g));
      q = it->second[static_cast<size_t>(yt)];
      break;
    }
    case NoiseFamily::InstanceLevel:
      require(static_cast<int64_t>(instance_q.size()) == noisy.size(), ErrorCode::Config,
              "posterior (instance): table length " + std::to_string(instance_q.size()) +
                  " does not match dataset size " + std::to_string(noisy.size()));
      q = instance_q[static_cast<size_t>(i)][static_cast<size_t>(yt)];
      break;
  }
  require(q.has_value(), ErrorCode::Evaluation,
          "posterior: stratum for observed label " + std::to_string(yt) +
              " has zero probability; posterior undefined");
  return *q;
}

std::vector<double> PosteriorTable::rates_for(const Dataset& noisy) const {
  std::vector<double> out(static_cast<size_t>(noisy.size()));
  for (int64_t i = 0; i < noisy.size(); ++i) out[static_cast<size_t>(i)] = rate_for(noisy, i);
  return out;
}

NoisyMarginal noisy_label_marginal(const NoiseSpec& spec, const Priors& priors) {
  spec.validate();
  priors.validate();
  require(spec.family == priors.family, ErrorCode::InvalidArgument,
          "noisy_label_marginal: spec and priors families differ");

  NoisyMarginal m;
  m.family = spec.family;
  switch (spec.family) {
    case NoiseFamily::Uniform:
      for (int yt = 0; yt < 2; ++yt) {
        m.class_m[static_cast<size_t>(yt)] =
            marginal_yt(yt, priors.pi1, spec.uniform_p, spec.uniform_p);
      }
      break;
    case NoiseFamily::ClassLevel:
      for (int yt = 0; yt < 2; ++yt) {
        m.class_m[static_cast<size_t>(yt)] =
            marginal_yt(yt, priors.pi1, spec.class_p[0], spec.class_p[1]);
      }
      break;
    case NoiseFamily::GroupLevel:
      for (const auto& [g, rates] : spec.group_p) {
        double pi1 = priors.pi1_for_group(g);
        m.group_m[g] = {marginal_yt(0, pi1, rates[0], rates[1]),
                        marginal_yt(1, pi1, rates[0], rates[1])};
      }
      break;
    case NoiseFamily::InstanceLevel:
      m.instance_m.resize(spec.instance_p.size());
      for (size_t i = 0; i < spec.instance_p.size(); ++i) {
        double pi1 = priors.pi1_for_instance(static_cast<int64_t>(i));
        double p = spec.instance_p[i];
        m.instance_m[i] = {marginal_yt(0, pi1, p, p), marginal_yt(1, pi1, p, p)};
      }
      break;
  }
  return m;
}

namespace {

NoiseFamily family_from_name(const std::string& name) {
  if (name == "uniform") return NoiseFamily::Uniform;
  if (name == "class") return NoiseFamily::ClassLevel;
  if (name == "group") return NoiseFamily::GroupLevel;
  if (name == "instance") return NoiseFamily::InstanceLevel;
  fail(ErrorCode::Parse, "noise model: unknown family '" + name + "'");
}

void check_prior_pair(double pi0, double pi1, const std::string& where) {
  require(std::fabs(pi0 + pi1 - 1.0) <= 1e-12, ErrorCode::InvalidArgument,
          where + ": pi_y0 + pi_y1 must equal 1 within 1e-12");
}

json require_object(const json& j, const char* key, const std::string& where) {
  require(j.contains(key), ErrorCode::Parse, where + ": missing field '" + key + "'");
  return j.at(key);
}

}  // namespace

NoiseModel noise_model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("noise model: invalid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::Parse, "noise model: document must be an object");

  NoiseModel model;
  std::string fam = require_object(j, "family", "noise model").get<std::string>();
  model.spec.family = family_from_name(fam);
  model.priors.family = model.spec.family;

  json params = require_object(j, "params", "noise model");
  switch (model.spec.family) {
    case NoiseFamily::Uniform:
      model.spec.uniform_p = require_object(params, "p", "noise params").get<double>();
      break;
    case NoiseFamily::ClassLevel:
      model.spec.class_p[0] = require_object(params, "p_u_y0", "noise params").get<double>();
      model.spec.class_p[1] = require_object(params, "p_u_y1", "noise params").get<double>();
      break;
    case NoiseFamily::GroupLevel: {
      json groups = require_object(params, "groups", "noise params");
      require(groups.is_object(), ErrorCode::Parse, "noise params: groups must be an object");
      for (const auto& [key, value] : groups.items()) {
        int32_t g = 0;
        try {
          g = static_cast<int32_t>(std::stol(key));
        } catch (...) {
          fail(ErrorCode::Parse, "noise params: group key '" + key + "' is not an integer");
        }
        model.spec.group_p[g] = {
            require_object(value, "p_u_y0", "noise params group " + key).get<double>(),
            require_object(value, "p_u_y1", "noise params group " + key).get<double>()};
      }
      break;
    }
    case NoiseFamily::InstanceLevel: {
      json rates = require_object(params, "p", "noise params");
      require(rates.is_array(), ErrorCode::Parse,
              "noise params: instance rates must be an array");
      model.spec.instance_p = rates.get<std::vector<double>>();
      break;
    }
  }

  json priors = require_object(j, "priors", "noise model");
  switch (model.spec.family) {
    case NoiseFamily::Uniform:
    case NoiseFamily::ClassLevel: {
      double pi0 = require_object(priors, "pi_y0", "priors").get<double>();
      double pi1 = require_object(priors, "pi_y1", "priors").get<double>();
      check_prior_pair(pi0, pi1, "priors");
      model.priors.pi1 = pi1;
      break;
    }
    case NoiseFamily::GroupLevel: {
      json groups = require_object(priors, "groups", "priors");
      require(groups.is_object(), ErrorCode::Parse, "priors: groups must be an object");
      for (const auto& [key, value] : groups.items()) {
        int32_t g = 0;
        try {
          g = static_cast<int32_t>(std::stol(key));
        } catch (...) {
          fail(ErrorCode::Parse, "priors: group key '" + key + "' is not an integer");
        }
        double pi0 = require_object(value, "pi_y0", "priors group " + key).get<double>();
        double pi1 = require_object(value, "pi_y1", "priors group " + key).get<double>();
        check_prior_pair(pi0, pi1, "priors group " + key);
        model.priors.group_pi1[g] = pi1;
      }
      break;
    }
    case NoiseFamily::InstanceLevel:
      if (priors.contains("pi_y1") && priors.at("pi_y1").is_array()) {
        model.priors.instance_pi1 = priors.at("pi_y1").get<std::vector<double>>();
      } else if (priors.contains("pi_y1")) {
        model.priors.pi1 = priors.at("pi_y1").get<double>();
      } else {
        fail(ErrorCode::Parse, "priors: instance family needs pi_y1 (scalar or array)");
      }
      break;
  }

  model.spec.validate();
  model.priors.validate();
  if (model.spec.family == NoiseFamily::InstanceLevel && !model.priors.instance_pi1.empty()) {
    require(model.priors.instance_pi1.size() == model.spec.instance_p.size(),
            ErrorCode::InvalidArgument,
            "noise model: instance priors length does not match instance rates length");
  }
  return model;
}

std::string noise_model_to_json(const NoiseModel& model) {
  json j;
  j["family"] = family_name(model.spec.family);
  json params = json::object();
  json priors = json::object();
  switch (model.spec.family) {
    case NoiseFamily::Uniform:
      params["p"] = model.spec.uniform_p;
      priors["pi_y0"] = 1.0 - model.priors.pi1;
      priors["pi_y1"] = model.priors.pi1;
      break;
    case NoiseFamily::ClassLevel:
      params["p_u_y0"] = model.spec.class_p[0];
      params["p_u_y1"] = model.spec.class_p[1];
      priors["pi_y0"] = 1.0 - model.priors.pi1;
      priors["pi_y1"] = model.priors.pi1;
      break;
    case NoiseFamily::GroupLevel: {
      json pg = json::object();
      json rg = json::object();
      for (const auto& [g, rates] : model.spec.group_p) {
        pg[std::to_string(g)] = {{"p_u_y0", rates[0]}, {"p_u_y1", rates[1]}};
      }
      for (const auto& [g, pi1] : model.priors.group_pi1) {
        rg[std::to_string(g)] = {{"pi_y0", 1.0 - pi1}, {"pi_y1", pi1}};
      }
      params["groups"] = pg;
      priors["groups"] = rg;
      break;
    }
    case NoiseFamily::InstanceLevel:
      params["p"] = model.spec.instance_p;
      if (model.priors.instance_pi1.empty()) {
        priors["pi_y1"] = model.priors.pi1;
      } else {
        priors["pi_y1"] = model.priors.instance_pi1;
      }
      break;
  }
  j["params"] = params;
  j["priors"] = priors;
  return j.dump(2);
}

namespace {
constexpr char kDrawMagic[4] = {'N', 'S', 'U', '1'};
}

void write_draw_text(const NoiseDraw& draw, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io, "draw: cannot write " + path);
  for (uint8_t b : draw.bits) out << static_cast<int>(b) << "\n";
  require(out.good(), ErrorCode::Io, "draw: write failed for " + path);
}

void write_draw_binary(const NoiseDraw& draw, const std::string& path) {
  require(draw.size() <= UINT32_MAX, ErrorCode::InvalidArgument, "draw: too long for bitset format");
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::Io, "draw: cannot write " + path);
  out.write(kDrawMagic, 4);
  uint32_t n = static_cast<uint32_t>(draw.size());
  char len[4] = {static_cast<char>(n & 0xFF), static_cast<char>((n >> 8) & 0xFF),
                 static_cast<char>((n >> 16) & 0xFF), static_cast<char>((n >> 24) & 0xFF)};
  out.write(len, 4);
  std::vector<uint8_t> packed((draw.bits.size() + 7) / 8, 0);
  for (size_t i = 0; i < draw.bits.size(); ++i) {
    if (draw.bits[i]) packed[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
  }
  out.write(reinterpret_cast<const char*>(packed.data()),
            static_cast<std::streamsize>(packed.size()));
  require(out.good(), ErrorCode::Io, "draw: write failed for " + path);
}

NoiseDraw read_draw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::Io, "draw: cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  NoiseDraw draw;
  if (in.gcount() == 4 && std::equal(magic, magic + 4, kDrawMagic)) {
    unsigned char len[4];
    in.read(reinterpret_cast<char*>(len), 4);
    require(in.gcount() == 4, ErrorCode::Parse, "draw: truncated bitset header in " + path);
    uint32_t n = static_cast<uint32_t>(len[0]) | (static_cast<uint32_t>(len[1]) << 8) |
                 (static_cast<uint32_t>(len[2]) << 16) | (static_cast<uint32_t>(len[3]) << 24);
    std::vector<uint8_t> packed((n + 7) / 8);
    in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    require(in.gcount() == static_cast<std::streamsize>(packed.size()), ErrorCode::Parse,
            "draw: truncated bitset payload in " + path);
    draw.bits.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
      draw.bits[i] = (packed[i / 8] >> (i % 8)) & 1u;
    }
    return draw;
  }
  // Text format: one 0/1 per line.
  in.clear();
  in.seekg(0);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    char c = line[0];
    require((c == '0' || c == '1') && (line.size() == 1 || line[1] == '\r'), ErrorCode::Parse,
            "draw: expected 0/1 lines in " + path);
    draw.bits.push_back(static_cast<uint8_t>(c - '0'));
  }
  require(!draw.bits.empty(), ErrorCode::Parse, "draw: empty file " + path);
  return draw;
}

}  // namespace noisescope
