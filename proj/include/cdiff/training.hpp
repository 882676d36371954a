#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "cdiff/ctmc.hpp"
#include "cdiff/losses.hpp"
#include "cdiff/models.hpp"
#include "cdiff/nn.hpp"
#include "cdiff/tabular.hpp"
#include "cdiff/toy_data.hpp"

namespace cdiff {

// Source of clean data x0. sample() is deterministic in (n, seed).
class DataSource {
 public:
  virtual ~DataSource() = default;
  virtual const StateSpace& space() const = 0;
  virtual std::vector<State> sample(std::size_t n, std::uint64_t seed) const = 0;
  // Exact table when the data law is known (tabular losses need it).
  virtual const TabularDistribution* table() const { return nullptr; }
};

class ToyDataSource : public DataSource {
 public:
  explicit ToyDataSource(ToyDatasetSpec spec);
  const StateSpace& space() const override { return space_; }
  std::vector<State> sample(std::size_t n, std::uint64_t seed) const override;
  const ToyDatasetSpec& spec() const { return spec_; }

 private:
  ToyDatasetSpec spec_;
  StateSpace space_;
};

class TabularDataSource : public DataSource {
 public:
  explicit TabularDataSource(TabularDistribution dist) : dist_(std::move(dist)) {}
  const StateSpace& space() const override { return dist_.space(); }
  std::vector<State> sample(std::size_t n, std::uint64_t seed) const override;
  const TabularDistribution* table() const override { return &dist_; }

 private:
  TabularDistribution dist_;
};

struct TrainConfig {
  LossKind loss = LossKind::ce_simplified;
  long steps = 1000;
  int batch_size = 128;
  double learning_rate = 1e-4;
  // Constant time weight lambda(t).
  double lambda = 1.0;
  double t_min = 1e-3;
  // Upper end of the time range; non-positive means the schedule horizon.
  double t_max = 0.0;
  std::uint64_t seed = 0;
  long eval_every = 100;
  // Moment settings; the step size comes from learning_rate.
  nn::AdamConfig adam;
  bool record_wall_time = false;
  double ordinal_corrupt_rate = 1.0;
  PathKlOptions path;

  void validate() const;
};

// t ~ U(t_min, t_max), x_t ~ q_{t|0}(. | x0).
TrainingTuple sample_training_tuple(const State& x0, const ForwardProcess& process, double t_min, double t_max,
                                    double lambda, Rng& rng);

// Batch of step `step`: data and per-entry streams are derived from
// (cfg.seed, step), so batches are reproducible and independent of threads.
std::vector<TrainingTuple> sample_training_batch(const DataSource& data, const ForwardProcess& process,
                                                 const TrainConfig& cfg, long step);

// Loss (and gradient) of cfg.loss on one batch.
LossValue evaluate_loss(const Model& model, const DataSource& data, const ForwardProcess& process,
                        const TrainConfig& cfg, std::span<const TrainingTuple> batch, bool want_grad);

struct MetricRow {
  long step = 0;
  double loss = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  std::vector<MetricRow> metrics;
  nn::AdamState optimizer;
};

// Runs cfg.steps Adam steps on model's parameters. Every eval_every steps the
// mean batch loss since the previous row is recorded (and passed to on_log).
TrainResult train(Model& model, const DataSource& data, const ForwardProcess& process, const TrainConfig& cfg,
                  const std::function<void(const MetricRow&)>& on_log = {});

}  // namespace cdiff
