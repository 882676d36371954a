#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cdiff/checkpoint.hpp"
#include "cdiff/config.hpp"
#include "cdiff/error.hpp"
#include "cdiff/eval.hpp"
#include "cdiff/io.hpp"
#include "cdiff/runtime.hpp"
#include "cdiff/samplers.hpp"
#include "cdiff/toy_data.hpp"
#include "cdiff/training.hpp"
#include "cdiff/verify.hpp"

namespace fs = std::filesystem;
using namespace cdiff;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitVerify = 4;

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  // Shorthand flags; empty means "not given".
  std::string dataset, bits, model, loss, steps, seed, threads, sampler, n;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_file, "config file of 'key = value' lines");
  app->add_option("-s,--set", c.sets, "override one key: --set train.steps=500 (repeatable)");
  app->add_option("--seed", c.seed, "shorthand for --set seed=...");
  app->add_option("--threads", c.threads, "shorthand for --set threads=...");
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (!value.empty()) cfg.set(key, value);
}

RunConfig resolve(const Common& c, const std::optional<RunConfig>& base) {
  RunConfig cfg = base.value_or(RunConfig{});
  if (!c.config_file.empty()) {
    const RunConfig file = RunConfig::load(c.config_file);
    const RunConfig defaults;
    for (const auto& [k, v] : file.values())
      if (!base || v != defaults.get(k)) cfg.set(k, v);
  }
  apply(cfg, "data.dataset", c.dataset);
  apply(cfg, "data.bits", c.bits);
  apply(cfg, "model.kind", c.model);
  apply(cfg, "train.loss", c.loss);
  apply(cfg, "train.steps", c.steps);
  apply(cfg, "seed", c.seed);
  apply(cfg, "threads", c.threads);
  apply(cfg, "sample.kind", c.sampler);
  apply(cfg, "sample.n", c.n);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (const long threads = cfg.get_int("threads"); threads > 0) omp_set_num_threads(static_cast<int>(threads));
  return cfg;
}

nlohmann::json artifact_metadata(const RunConfig& cfg) {
  return {{"tool", kToolVersion}, {"config_digest", cfg.digest()}, {"seed", cfg.get_uint("seed")}};
}

std::optional<ToyDatasetSpec> toy_spec(const RunConfig& cfg, const StateSpace& space) {
  if (cfg.get("data.kind") != "toy") return std::nullopt;
  ToyDatasetSpec spec;
  spec.density = parse_toy_density(cfg.get("data.dataset"));
  spec.bits_per_axis = static_cast<int>(cfg.get_int("data.bits"));
  spec.lim = cfg.get_real("data.lim");
  if (!(spec.space() == space)) return std::nullopt;
  return spec;
}

std::vector<State> draw_samples(const Model& model, const RunConfig& cfg, const ForwardProcess& process,
                                std::size_t n, std::uint64_t seed) {
  SamplerConfig sc = make_sampler_config(cfg);
  sc.seed = seed;
  if (model.kind() == ModelKind::ordinal_score) return sample_ordinal(model, n, sc);
  return sample_reverse(model, n, sc, process);
}

RunConfig checkpoint_config(const Checkpoint& ckpt) {
  if (!ckpt.metadata.contains("config")) return RunConfig{};
  return RunConfig::parse(ckpt.metadata.at("config").get<std::string>());
}

int run_train(const Common& c, const std::string& out_dir) {
  const RunConfig cfg = resolve(c, std::nullopt);
  const auto data = make_data_source(cfg);
  const auto process = make_process(cfg, data->space());
  const TrainConfig tc = make_train_config(cfg);
  auto model = make_model(model_descriptor(cfg, data->space()));
  Rng init(derive_seed(cfg.get_uint("seed"), {0xC0FFEE}));
  model->initialize(init);

  fs::create_directories(out_dir);
  const auto meta = artifact_metadata(cfg);
  write_text(fs::path(out_dir) / "config.txt", "# " + std::string(kToolVersion) + "\n# digest: " + cfg.digest() +
                                                   "\n" + cfg.serialize());
  const auto result = train(*model, *data, process, tc, [](const MetricRow& row) {
    std::cerr << "step " << row.step << " loss " << row.loss << '\n';
  });
  write_text(fs::path(out_dir) / "metrics.csv", metrics_csv(result.metrics, meta));
  auto ckpt_meta = meta;
  ckpt_meta["config"] = cfg.serialize();
  ckpt_meta["steps"] = tc.steps;
  save_checkpoint(*model, ckpt_meta, fs::path(out_dir) / "checkpoint.bin");
  std::cout << (fs::path(out_dir) / "checkpoint.bin").string() << '\n';
  return 0;
}

int run_sample(const Common& c, const std::string& checkpoint, const std::string& out) {
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  const RunConfig cfg = resolve(c, checkpoint_config(ckpt));
  const auto model = model_from_checkpoint(ckpt);
  const auto process = make_process(cfg, model->space());
  const auto xs = draw_samples(*model, cfg, process, cfg.get_uint("sample.n"), cfg.get_uint("seed"));
  auto meta = artifact_metadata(cfg);
  meta["sampler"] = cfg.get("sample.kind");
  meta["samples"] = xs.size();
  write_samples_csv(out, xs, model->space(), toy_spec(cfg, model->space()), meta);
  std::cout << out << '\n';
  return 0;
}

int run_eval(const Common& c, const std::string& samples_file, const std::string& checkpoint, const std::string& out) {
  std::optional<Checkpoint> ckpt;
  if (!checkpoint.empty()) ckpt = read_checkpoint(checkpoint);
  const RunConfig cfg = resolve(c, ckpt ? std::optional(checkpoint_config(*ckpt)) : std::nullopt);
  const auto data = make_data_source(cfg);
  const MmdConfig mmd = make_mmd_config(cfg);
  const std::uint64_t seed = cfg.get_uint("seed");
  MetricsReport report;
  if (!samples_file.empty()) {
    // A fixed sample file is split into `repeats` consecutive blocks.
    const auto all = read_samples_csv(samples_file, data->space());
    const std::size_t block = all.size() / static_cast<std::size_t>(mmd.repeats);
    if (block == 0) throw ConfigError("eval: " + samples_file + " has fewer samples than eval.repeats");
    MmdConfig m = mmd;
    m.samples = block;
    std::size_t next = 0;
    report = evaluate_run(
        [&](std::size_t n, std::uint64_t) {
          std::vector<State> part(all.begin() + static_cast<std::ptrdiff_t>(next),
                                  all.begin() + static_cast<std::ptrdiff_t>(next + n));
          next += n;
          return part;
        },
        *data, m, seed);
    report.metadata["samples_file"] = samples_file;
  } else if (ckpt) {
    const auto model = model_from_checkpoint(*ckpt);
    const auto process = make_process(cfg, model->space());
    report = evaluate_run(
        [&](std::size_t n, std::uint64_t s) { return draw_samples(*model, cfg, process, n, s); }, *data, mmd, seed);
    report.metadata["checkpoint"] = checkpoint;
  } else {
    throw ConfigError("eval needs --samples or --checkpoint");
  }
  const auto meta = artifact_metadata(cfg);
  for (const auto& [k, v] : meta.items()) report.metadata[k] = v;
  write_text(out + ".json", report.to_json().dump(2) + "\n");
  write_text(out + ".csv", csv_metadata(report.metadata) + report.to_csv());
  std::cout << report.to_json()["metrics"].dump(2) << '\n';
  return 0;
}

int run_verify(const std::string& level, std::uint64_t seed, bool long_run, const std::string& json_out) {
  VerifyOptions opt;
  opt.level = parse_verify_level(level);
  opt.seed = seed;
  opt.long_run = long_run;
  const auto results = run_verification(opt, [](const CheckResult& r) {
    std::cout << (r.skipped ? "SKIP" : r.passed ? "PASS" : "FAIL") << "  " << r.id << "  " << r.detail << "  ("
              << r.seconds << " s)" << std::endl;
  });
  const auto verdict = verdict_json(results, opt);
  if (!json_out.empty()) write_text(json_out, verdict.dump(2) + "\n");
  return verdict.at("passed").get<bool>() ? 0 : kExitVerify;
}

int run_gen_data(const Common& c, const std::string& out) {
  const RunConfig cfg = resolve(c, std::nullopt);
  ToyDatasetSpec spec;
  spec.density = parse_toy_density(cfg.get("data.dataset"));
  spec.bits_per_axis = static_cast<int>(cfg.get_int("data.bits"));
  spec.lim = cfg.get_real("data.lim");
  spec.validate();
  const auto pts = sample_toy2d(spec, cfg.get_uint("sample.n"), cfg.get_uint("seed"));
  auto meta = artifact_metadata(cfg);
  meta["dataset"] = cfg.get("data.dataset");
  write_points_csv(out, pts, spec, meta);
  std::cout << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Discrete-state continuous-time diffusion: train, sample, evaluate and verify."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Common common;
  std::string out_dir = "run";
  auto* train = app.add_subcommand("train", "train a model; writes checkpoint.bin, metrics.csv and config.txt");
  add_common(train, common);
  train->add_option("--dataset", common.dataset, "toy density (data.dataset)");
  train->add_option("--bits", common.bits, "bits per axis (data.bits)");
  train->add_option("--model", common.model, "architecture (model.kind)");
  train->add_option("--loss", common.loss, "objective (train.loss; ce, l2 and x0 are accepted shorthands)");
  train->add_option("--steps", common.steps, "optimizer steps (train.steps)");
  train->add_option("-o,--out", out_dir, "output directory");

  std::string checkpoint, samples_out = "samples.csv";
  auto* sample = app.add_subcommand("sample", "draw samples from a checkpoint");
  add_common(sample, common);
  sample->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  sample->add_option("--sampler", common.sampler, "euler or analytical (sample.kind)");
  sample->add_option("-n", common.n, "number of samples (sample.n)");
  sample->add_option("-o,--out", samples_out, "samples CSV");

  std::string eval_samples, eval_ckpt, eval_out = "report";
  auto* eval = app.add_subcommand("eval", "MMD (and TV for tabular data) against the data distribution");
  add_common(eval, common);
  eval->add_option("--samples", eval_samples, "samples CSV to evaluate");
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint to sample from");
  eval->add_option("--dataset", common.dataset, "toy density (data.dataset)");
  eval->add_option("--bits", common.bits, "bits per axis (data.bits)");
  eval->add_option("-o,--out", eval_out, "report path prefix (.json and .csv are appended)");

  std::string level = "fast", verdict_out;
  std::uint64_t verify_seed = 7;
  bool long_run = false;
  auto* verify = app.add_subcommand("verify", "run the property and acceptance suite");
  verify->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  verify->add_option("--seed", verify_seed, "suite seed");
  verify->add_flag("--long", long_run, "include the 16-bit toy run");
  verify->add_option("--json", verdict_out, "write the JSON verdict here");

  std::string gen_out = "data.csv";
  auto* gen = app.add_subcommand("gen-data", "dump toy points with their quantized states");
  add_common(gen, common);
  gen->add_option("--dataset", common.dataset, "toy density (data.dataset)");
  gen->add_option("--bits", common.bits, "bits per axis (data.bits)");
  gen->add_option("-n", common.n, "number of points (sample.n)");
  gen->add_option("-o,--out", gen_out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (train->parsed()) return run_train(common, out_dir);
    if (sample->parsed()) return run_sample(common, checkpoint, samples_out);
    if (eval->parsed()) return run_eval(common, eval_samples, eval_ckpt, eval_out);
    if (verify->parsed()) return run_verify(level, verify_seed, long_run, verdict_out);
    if (gen->parsed()) return run_gen_data(common, gen_out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
