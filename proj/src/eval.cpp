#include "cdiff/eval.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "cdiff/error.hpp"
#include "cdiff/kernels.hpp"

namespace cdiff {

MmdEstimator parse_mmd_estimator(std::string_view s) {
  if (s == "biased") return MmdEstimator::biased;
  if (s == "unbiased") return MmdEstimator::unbiased;
  throw ConfigError("unknown MMD estimator '" + std::string(s) + "' (expected biased or unbiased)");
}

std::string_view mmd_estimator_name(MmdEstimator e) { return e == MmdEstimator::biased ? "biased" : "unbiased"; }

void MmdConfig::validate() const {
  if (!(bandwidth > 0.0)) throw ConfigError("eval.bandwidth must be > 0");
  if (repeats < 1) throw ConfigError("eval.repeats must be >= 1");
  if (samples < 1) throw ConfigError("eval.samples must be >= 1");
}

std::vector<double> exp_hamming_table(int dims, const MmdConfig& cfg) {
  cfg.validate();
  const double scale = cfg.normalize_hamming ? 1.0 / (dims * cfg.bandwidth) : 1.0 / cfg.bandwidth;
  std::vector<double> table(static_cast<std::size_t>(dims) + 1);
  for (int h = 0; h <= dims; ++h) table[static_cast<std::size_t>(h)] = std::exp(-h * scale);
  return table;
}

double mmd_exp_hamming(std::span<const State> x, std::span<const State> y, const StateSpace& space,
                       const MmdConfig& cfg) {
  if (x.empty() || y.empty()) throw DomainError("MMD needs non-empty sample sets");
  const auto table = exp_hamming_table(space.dims(), cfg);
  const kernels::PackedStates px(space, x);
  const kernels::PackedStates py(space, y);
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());
  const double xy = kernels::gram_sum(px, py, table, false) / (n * m);
  if (cfg.estimator == MmdEstimator::biased) {
    const double xx = kernels::gram_sum(px, px, table, false) / (n * n);
    const double yy = kernels::gram_sum(py, py, table, false) / (m * m);
    return xx + yy - 2.0 * xy;
  }
  if (x.size() < 2 || y.size() < 2) throw DomainError("unbiased MMD needs at least two samples per set");
  const double xx = kernels::gram_sum(px, px, table, true) / (n * (n - 1.0));
  const double yy = kernels::gram_sum(py, py, table, true) / (m * (m - 1.0));
  return xx + yy - 2.0 * xy;
}

TabularDistribution empirical_distribution(std::span<const State> samples, const StateSpace& space) {
  space.require_enumerable();
  if (samples.empty()) throw DomainError("empirical distribution of no samples");
  std::vector<double> counts(space.state_count(), 0.0);
  for (const auto& s : samples) counts[space.index(s)] += 1.0;
  return TabularDistribution::from_weights(space, std::move(counts));
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["metrics"] = metrics;
  j["per_repeat"] = per_repeat;
  j["metadata"] = metadata;
  return j;
}

std::string MetricsReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "metric,value\n";
  for (const auto& [k, v] : metrics) os << k << ',' << v << '\n';
  for (std::size_t r = 0; r < per_repeat.size(); ++r) os << "repeat_" << r << "_mmd," << per_repeat[r] << '\n';
  return os.str();
}

MetricsReport evaluate_run(const SampleFn& generate, const DataSource& data, const MmdConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  MetricsReport report;
  const StateSpace& space = data.space();
  std::vector<State> pooled;
  for (int r = 0; r < cfg.repeats; ++r) {
    const auto rr = static_cast<std::uint64_t>(r);
    const auto model_samples = generate(cfg.samples, derive_seed(seed, {rr, 1}));
    const auto data_samples = data.sample(cfg.samples, derive_seed(seed, {rr, 2}));
    for (const auto& s : model_samples) space.validate(s);
    report.per_repeat.push_back(mmd_exp_hamming(model_samples, data_samples, space, cfg));
    if (data.table() != nullptr) pooled.insert(pooled.end(), model_samples.begin(), model_samples.end());
  }
  double mean = 0.0;
  for (double v : report.per_repeat) mean += v;
  mean /= static_cast<double>(report.per_repeat.size());
  double var = 0.0;
  for (double v : report.per_repeat) var += (v - mean) * (v - mean);
  const double stderr_ =
      report.per_repeat.size() > 1 ? std::sqrt(var / static_cast<double>(report.per_repeat.size() - 1) /
                                               static_cast<double>(report.per_repeat.size()))
                                   : 0.0;
  report.metrics["mmd_mean"] = mean;
  report.metrics["mmd_stderr"] = stderr_;
  report.metrics["mmd_mean_x1e4"] = mean * 1e4;
  report.metrics["mmd_stderr_x1e4"] = stderr_ * 1e4;
  if (data.table() != nullptr) report.metrics["tv"] = tv_distance(empirical_distribution(pooled, space), *data.table());
  for (const auto& [k, v] : report.metrics)
    if (!std::isfinite(v)) throw NumericError("metric " + k + " is not finite");
  report.metadata["seed"] = seed;
  report.metadata["samples_per_repeat"] = cfg.samples;
  report.metadata["repeats"] = cfg.repeats;
  report.metadata["bandwidth"] = cfg.bandwidth;
  report.metadata["estimator"] = mmd_estimator_name(cfg.estimator);
  report.metadata["kernel"] = cfg.normalize_hamming ? "exp(-H/(D*bandwidth))" : "exp(-H/bandwidth)";
  return report;
}

}  // namespace cdiff
