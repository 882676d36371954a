#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cdiff/state_space.hpp"
#include "cdiff/tabular.hpp"
#include "cdiff/training.hpp"

namespace cdiff {

enum class MmdEstimator { biased, unbiased };

MmdEstimator parse_mmd_estimator(std::string_view s);
std::string_view mmd_estimator_name(MmdEstimator e);

struct MmdConfig {
  double bandwidth = 0.1;
  MmdEstimator estimator = MmdEstimator::biased;
  int repeats = 10;
  std::size_t samples = 4000;
  // Kernel argument H / D (true) or raw H (false), divided by the bandwidth.
  bool normalize_hamming = true;

  void validate() const;
};

// k(x, y) for every Hamming distance 0..D.
std::vector<double> exp_hamming_table(int dims, const MmdConfig& cfg);

// Squared MMD with k(x, y) = exp(-H(x, y) / (D * bandwidth)) (or H / bandwidth).
double mmd_exp_hamming(std::span<const State> x, std::span<const State> y, const StateSpace& space,
                       const MmdConfig& cfg);

TabularDistribution empirical_distribution(std::span<const State> samples, const StateSpace& space);

struct MetricsReport {
  std::map<std::string, double> metrics;
  std::vector<double> per_repeat;
  nlohmann::json metadata = nlohmann::json::object();

  nlohmann::json to_json() const;
  // Two-column metric,value table followed by one row per repeat.
  std::string to_csv() const;
};

// Draws n states for a given seed.
using SampleFn = std::function<std::vector<State>(std::size_t n, std::uint64_t seed)>;

// Per repeat r: cfg.samples generated states and cfg.samples fresh data states,
// both seeded from (seed, r); reports the MMD mean and standard error (also
// scaled by 1e4), and the TV distance of the pooled samples to the data table
// when one is available.
MetricsReport evaluate_run(const SampleFn& generate, const DataSource& data, const MmdConfig& cfg, std::uint64_t seed);

}  // namespace cdiff
