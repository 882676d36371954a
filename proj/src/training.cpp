#include "cdiff/training.hpp"

#include <chrono>
#include <cmath>

#include "cdiff/error.hpp"

namespace cdiff {

ToyDataSource::ToyDataSource(ToyDatasetSpec spec) : spec_(spec), space_(spec.space()) { spec_.validate(); }

std::vector<State> ToyDataSource::sample(std::size_t n, std::uint64_t seed) const {
  const auto points = sample_toy2d(spec_, n, seed);
  std::vector<State> out;
  out.reserve(n);
  for (const auto& p : points) out.push_back(quantize2d(p, spec_));
  return out;
}

std::vector<State> TabularDataSource::sample(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<State> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(dist_.sample(rng));
  return out;
}

void TrainConfig::validate() const {
  if (steps < 0) throw ConfigError("train.steps must be >= 0");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (!(lambda > 0.0)) throw ConfigError("train.lambda must be > 0");
  if (!(t_min > 0.0)) throw ConfigError("train.t_min must be > 0");
  if (eval_every < 1) throw ConfigError("train.eval_every must be >= 1");
  if (!(ordinal_corrupt_rate > 0.0)) throw ConfigError("train.ordinal_corrupt_rate must be > 0");
}

TrainingTuple sample_training_tuple(const State& x0, const ForwardProcess& process, double t_min, double t_max,
                                    double lambda, Rng& rng) {
  if (t_min > t_max) throw DomainError("training time range is empty");
  const double t = t_min == t_max ? t_min : rng.uniform(t_min, t_max);
  return {x0, t, forward_sample(x0, 0.0, t, process, rng), lambda};
}

namespace {

double upper_time(const TrainConfig& cfg, const ForwardProcess& process) {
  return cfg.t_max > 0.0 ? cfg.t_max : process.schedule.horizon();
}

}  // namespace

std::vector<TrainingTuple> sample_training_batch(const DataSource& data, const ForwardProcess& process,
                                                 const TrainConfig& cfg, long step) {
  const auto s = static_cast<std::uint64_t>(step);
  const auto x0s = data.sample(static_cast<std::size_t>(cfg.batch_size), derive_seed(cfg.seed, {s, 0}));
  std::vector<TrainingTuple> batch(x0s.size());
  const double t_max = upper_time(cfg, process);
  const OrdinalKernelSpec kernel{cfg.ordinal_corrupt_rate, process.space.vocab()};
  const auto n = static_cast<std::int64_t>(x0s.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(cfg.seed, {s, static_cast<std::uint64_t>(i) + 1}));
    const State& x0 = x0s[static_cast<std::size_t>(i)];
    if (cfg.loss == LossKind::ordinal_score) {
      const double t = cfg.t_min == t_max ? cfg.t_min : rng.uniform(cfg.t_min, t_max);
      State xt = x0;
      for (auto& v : xt) v = kernel.sample(v, t, rng);
      batch[static_cast<std::size_t>(i)] = {x0, t, std::move(xt), cfg.lambda};
    } else {
      batch[static_cast<std::size_t>(i)] = sample_training_tuple(x0, process, cfg.t_min, t_max, cfg.lambda, rng);
    }
  }
  return batch;
}

LossValue evaluate_loss(const Model& model, const DataSource& data, const ForwardProcess& process,
                        const TrainConfig& cfg, std::span<const TrainingTuple> batch, bool want_grad) {
  switch (cfg.loss) {
    case LossKind::ce_simplified:
      return loss_ce_simplified(model, batch, want_grad);
    case LossKind::l2_ratio_simplified:
      return loss_l2_ratio_simplified(model, batch, want_grad);
    case LossKind::x0_ce:
      return loss_x0_ce(model, batch, process, want_grad);
    case LossKind::ordinal_score:
      return loss_ordinal_score(model, batch, OrdinalKernelSpec{cfg.ordinal_corrupt_rate, model.space().vocab()},
                                want_grad);
    case LossKind::path_kl_tabular:
    case LossKind::ce_original_tabular:
    case LossKind::l2_ratio:
      break;
  }
  const TabularDistribution* table = data.table();
  if (table == nullptr)
    throw ConfigError(std::string(loss_kind_name(cfg.loss)) + " needs a tabular data distribution");
  if (cfg.loss == LossKind::path_kl_tabular) {
    auto v = loss_path_kl_tabular(model, *table, process, cfg.path, want_grad);
    for (auto& g : v.grad) g *= cfg.lambda;
    v.value *= cfg.lambda;
    return v;
  }
  // Exact expectation over x at each sampled time, averaged over the batch.
  LossValue out;
  if (want_grad) out.grad.assign(model.params().size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& b : batch) {
    const TabularDistribution q_t = exact_marginal(*table, b.t, process);
    const LossValue v = cfg.loss == LossKind::l2_ratio ? loss_l2_ratio_tabular(model, q_t, b.t, want_grad)
                                                       : loss_ce_original_tabular(model, q_t, b.t, want_grad);
    out.value += b.weight * inv_n * v.value;
    for (std::size_t k = 0; k < out.grad.size(); ++k) out.grad[k] += b.weight * inv_n * v.grad[k];
  }
  return out;
}

TrainResult train(Model& model, const DataSource& data, const ForwardProcess& process, const TrainConfig& cfg,
                  const std::function<void(const MetricRow&)>& on_log) {
  cfg.validate();
  if (!(data.space() == model.space()) || !(process.space == model.space()))
    throw ConfigError("model, data and forward process use different state spaces");
  if (cfg.loss == LossKind::x0_ce && model.mode() != ModelMode::x0_denoising)
    throw ConfigError("x0_ce needs an x0_denoising model");
  if (cfg.loss != LossKind::x0_ce && cfg.loss != LossKind::ordinal_score && model.mode() != ModelMode::noisy_marginal)
    throw ConfigError(std::string(loss_kind_name(cfg.loss)) + " needs a noisy_marginal model");
  nn::AdamConfig adam = cfg.adam;
  adam.learning_rate = cfg.learning_rate;
  TrainResult result;
  const auto start = std::chrono::steady_clock::now();
  double window = 0.0;
  long window_count = 0;
  for (long step = 0; step < cfg.steps; ++step) {
    const auto batch = sample_training_batch(data, process, cfg, step);
    LossValue v;
    try {
      v = evaluate_loss(model, data, process, cfg, batch, true);
    } catch (const NumericError& e) {
      throw NumericError("step " + std::to_string(step + 1) + ": " + e.what());
    }
    nn::adam_step(model.params().values(), v.grad, result.optimizer, adam);
    window += v.value;
    ++window_count;
    if ((step + 1) % cfg.eval_every == 0 || step + 1 == cfg.steps) {
      MetricRow row{step + 1, window / static_cast<double>(window_count), 0.0};
      if (cfg.record_wall_time)
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      result.metrics.push_back(row);
      if (on_log) on_log(row);
      window = 0.0;
      window_count = 0;
    }
  }
  return result;
}

}  // namespace cdiff
