#include "cdiff/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cdiff/error.hpp"
#include "cdiff/tabular.hpp"

namespace cdiff {

namespace {

std::vector<KeyInfo> build_keys() {
  const auto& densities = toy_density_names();
  return {
      {"seed", KeyType::unsigned_integer, "0", {}, "master seed of every random stream"},
      {"threads", KeyType::integer, "0", {}, "OpenMP threads (0 = all cores)"},
      {"data.kind", KeyType::choice, "toy", {"toy", "table"}, "toy 2-D density or a tabular distribution file"},
      {"data.dataset", KeyType::choice, "2spirals", {densities.begin(), densities.end()}, "toy density"},
      {"data.bits", KeyType::integer, "16", {}, "bits per axis of the toy quantization"},
      {"data.lim", KeyType::real, "4", {}, "half-width of the toy bounding box"},
      {"data.table", KeyType::text, "", {}, "tabular distribution file (data.kind = table)"},
      {"process.schedule", KeyType::choice, "constant", {"constant", "cosine"}, "noise schedule beta(t)"},
      {"process.base_rate", KeyType::real, "1", {}, "beta of the constant schedule"},
      {"process.horizon", KeyType::real, "1", {}, "time horizon T"},
      {"model.kind", KeyType::choice, "ebm", {"tabular", "ebm", "masked", "hollow", "ordinal_score"}, "architecture"},
      {"model.mode", KeyType::choice, "noisy_marginal", {"noisy_marginal", "x0_denoising"}, "what the logits describe"},
      {"model.hidden", KeyType::integer, "256", {}, "hidden width"},
      {"model.layers", KeyType::integer, "3", {}, "hidden layers"},
      {"model.stream_width", KeyType::integer, "16", {}, "per-position stream width (hollow)"},
      {"model.precision", KeyType::choice, "float32", {"float32", "float64"}, "network compute precision"},
      {"model.time_bins", KeyType::integer, "1", {}, "time bins of the tabular model"},
      {"train.loss",
       KeyType::choice,
       "ce_simplified",
       {"ce_simplified", "ce_original_tabular", "l2_ratio", "l2_ratio_simplified", "x0_ce", "ordinal_score",
        "path_kl_tabular"},
       "training objective"},
      {"train.steps", KeyType::integer, "1000", {}, "optimizer steps"},
      {"train.batch_size", KeyType::integer, "128", {}, "batch size"},
      {"train.learning_rate", KeyType::real, "0.0001", {}, "Adam step size"},
      {"train.lambda", KeyType::real, "1", {}, "constant time weight"},
      {"train.t_min", KeyType::real, "0.001", {}, "smallest training time"},
      {"train.t_max", KeyType::real, "0", {}, "largest training time (0 = horizon)"},
      {"train.eval_every", KeyType::integer, "100", {}, "steps per metrics row"},
      {"train.optimizer", KeyType::choice, "standard", {"standard", "zero_momentum"}, "Adam moment settings"},
      {"train.record_wall_time", KeyType::boolean, "false", {}, "fill the wall_ms column"},
      {"train.ordinal_corrupt_rate", KeyType::real, "1", {}, "corruption rate of the ordinal kernel"},
      {"train.path_grid_points", KeyType::integer, "64", {}, "time grid of the path objective"},
      {"sample.kind", KeyType::choice, "euler", {"euler", "analytical"}, "predictor"},
      {"sample.steps", KeyType::integer, "100", {}, "predictor steps"},
      {"sample.grid", KeyType::choice, "uniform", {"uniform", "geometric"}, "time grid"},
      {"sample.corrector", KeyType::choice, "none", {"none", "lb"}, "corrector"},
      {"sample.g", KeyType::choice, "sqrt", {"sqrt", "t_over_1pt"}, "locally balanced function"},
      {"sample.corrector_steps", KeyType::integer, "1", {}, "corrector steps per predictor step"},
      {"sample.corrector_step_size", KeyType::real, "0", {}, "corrector step (0 = half the predictor step)"},
      {"sample.t_min", KeyType::real, "0.001", {}, "final time of the sampler"},
      {"sample.n", KeyType::unsigned_integer, "4000", {}, "samples to draw"},
      {"eval.bandwidth", KeyType::real, "0.1", {}, "MMD kernel bandwidth"},
      {"eval.estimator", KeyType::choice, "biased", {"biased", "unbiased"}, "MMD estimator"},
      {"eval.repeats", KeyType::integer, "10", {}, "independent repeats"},
      {"eval.samples", KeyType::unsigned_integer, "4000", {}, "samples per repeat"},
      {"eval.normalize_hamming", KeyType::boolean, "true", {}, "divide Hamming distances by D"},
  };
}

const KeyInfo& key_info(std::string_view key) {
  for (const auto& k : config_keys())
    if (k.key == key) return k;
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string normalize_choice(const KeyInfo& info, std::string v) {
  if (info.key == "train.loss") {
    if (v == "ce") v = "ce_simplified";
    if (v == "l2") v = "l2_ratio_simplified";
    if (v == "x0") v = "x0_ce";
  }
  if (std::find(info.choices.begin(), info.choices.end(), v) == info.choices.end()) {
    std::string options;
    for (const auto& c : info.choices) options += (options.empty() ? "" : ", ") + c;
    throw ConfigError(info.key + ": invalid value '" + v + "' (expected one of " + options + ")");
  }
  return v;
}

std::string normalize(const KeyInfo& info, std::string_view raw) {
  const std::string v = trim(raw);
  const auto bad = [&] { return ConfigError(info.key + ": invalid value '" + v + "'"); };
  const char* first = v.data();
  const char* last = v.data() + v.size();
  switch (info.type) {
    case KeyType::integer: {
      long x = 0;
      const auto r = std::from_chars(first, last, x);
      if (r.ec != std::errc() || r.ptr != last) throw bad();
      return std::to_string(x);
    }
    case KeyType::unsigned_integer: {
      std::uint64_t x = 0;
      const auto r = std::from_chars(first, last, x);
      if (r.ec != std::errc() || r.ptr != last) throw bad();
      return std::to_string(x);
    }
    case KeyType::real: {
      double x = 0.0;
      const auto r = std::from_chars(first, last, x);
      if (r.ec != std::errc() || r.ptr != last || !std::isfinite(x)) throw bad();
      char buf[64];
      const auto w = std::to_chars(buf, buf + sizeof buf, x);
      return std::string(buf, w.ptr);
    }
    case KeyType::boolean:
      if (v == "true" || v == "1" || v == "yes" || v == "on") return "true";
      if (v == "false" || v == "0" || v == "no" || v == "off") return "false";
      throw bad();
    case KeyType::choice:
      return normalize_choice(info, v);
    case KeyType::text:
      if (v.find_first_of("#\n") != std::string::npos) throw bad();
      return v;
  }
  throw bad();
}

}  // namespace

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = build_keys();
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_[k.key] = normalize(k, k.default_value);
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    try {
      cfg.set(trim(body.substr(0, eq)), body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const KeyInfo& info = key_info(key);
  values_[info.key] = normalize(info, value);
}

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(std::string(key));
  if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

long RunConfig::get_int(std::string_view key) const { return std::stol(get(key)); }
std::uint64_t RunConfig::get_uint(std::string_view key) const { return std::stoull(get(key)); }
double RunConfig::get_real(std::string_view key) const {
  const std::string& s = get(key);
  double x = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), x);
  return x;
}
bool RunConfig::get_bool(std::string_view key) const { return get(key) == "true"; }

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string RunConfig::digest() const { return hex64(fnv1a64(serialize())); }

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 15];
  return s;
}

std::unique_ptr<DataSource> make_data_source(const RunConfig& cfg) {
  if (cfg.get("data.kind") == "table") {
    const std::string& path = cfg.get("data.table");
    if (path.empty()) throw ConfigError("data.table: required when data.kind = table");
    return std::make_unique<TabularDataSource>(load_tabular(path));
  }
  ToyDatasetSpec spec;
  spec.density = parse_toy_density(cfg.get("data.dataset"));
  spec.bits_per_axis = static_cast<int>(cfg.get_int("data.bits"));
  spec.lim = cfg.get_real("data.lim");
  spec.validate();
  return std::make_unique<ToyDataSource>(spec);
}

ForwardProcess make_process(const RunConfig& cfg, const StateSpace& space) {
  const double horizon = cfg.get_real("process.horizon");
  if (!(horizon > 0.0)) throw ConfigError("process.horizon must be > 0");
  const auto kind = parse_schedule_kind(cfg.get("process.schedule"));
  NoiseSchedule schedule(kind, cfg.get_real("process.base_rate"), horizon);
  return ForwardProcess{space, schedule, RateSpec::uniform(space.vocab())};
}

nlohmann::json model_descriptor(const RunConfig& cfg, const StateSpace& space) {
  nlohmann::json j;
  j["kind"] = cfg.get("model.kind");
  j["dims"] = space.dims();
  j["vocab"] = space.vocab();
  j["ordinal"] = space.ordinal();
  j["mode"] = cfg.get("model.mode");
  j["horizon"] = cfg.get_real("process.horizon");
  j["hidden"] = cfg.get_int("model.hidden");
  j["layers"] = cfg.get_int("model.layers");
  j["stream_width"] = cfg.get_int("model.stream_width");
  j["precision"] = cfg.get("model.precision");
  j["time_bins"] = cfg.get_int("model.time_bins");
  return j;
}

TrainConfig make_train_config(const RunConfig& cfg) {
  TrainConfig t;
  t.loss = parse_loss_kind(cfg.get("train.loss"));
  t.steps = cfg.get_int("train.steps");
  t.batch_size = static_cast<int>(cfg.get_int("train.batch_size"));
  t.learning_rate = cfg.get_real("train.learning_rate");
  t.lambda = cfg.get_real("train.lambda");
  t.t_min = cfg.get_real("train.t_min");
  t.t_max = cfg.get_real("train.t_max");
  t.seed = cfg.get_uint("seed");
  t.eval_every = cfg.get_int("train.eval_every");
  const auto preset = cfg.get("train.optimizer") == "zero_momentum" ? nn::AdamPreset::zero_momentum
                                                                     : nn::AdamPreset::standard;
  t.adam = nn::AdamConfig::preset(preset, t.learning_rate);
  t.record_wall_time = cfg.get_bool("train.record_wall_time");
  t.ordinal_corrupt_rate = cfg.get_real("train.ordinal_corrupt_rate");
  t.path.grid_points = static_cast<int>(cfg.get_int("train.path_grid_points"));
  t.path.t_min = t.t_min;
  t.validate();
  return t;
}

SamplerConfig make_sampler_config(const RunConfig& cfg) {
  SamplerConfig s;
  s.kind = parse_sampler_kind(cfg.get("sample.kind"));
  s.steps = static_cast<int>(cfg.get_int("sample.steps"));
  s.grid = parse_step_grid(cfg.get("sample.grid"));
  s.corrector = parse_corrector_kind(cfg.get("sample.corrector"));
  s.g = parse_balance_fn(cfg.get("sample.g"));
  s.corrector_steps = static_cast<int>(cfg.get_int("sample.corrector_steps"));
  s.corrector_step_size = cfg.get_real("sample.corrector_step_size");
  s.t_min = cfg.get_real("sample.t_min");
  s.seed = cfg.get_uint("seed");
  s.validate();
  return s;
}

MmdConfig make_mmd_config(const RunConfig& cfg) {
  MmdConfig m;
  m.bandwidth = cfg.get_real("eval.bandwidth");
  m.estimator = parse_mmd_estimator(cfg.get("eval.estimator"));
  m.repeats = static_cast<int>(cfg.get_int("eval.repeats"));
  m.samples = cfg.get_uint("eval.samples");
  m.normalize_hamming = cfg.get_bool("eval.normalize_hamming");
  m.validate();
  return m;
}

}  // namespace cdiff
