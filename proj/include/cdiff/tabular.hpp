#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"

#include "cdiff/random.hpp"
#include "cdiff/state_space.hpp"

namespace cdiff {

// Exact probability table over an enumerable product space, indexed
// lexicographically (see StateSpace::index).
class TabularDistribution {
 public:
  TabularDistribution() = default;
  // Validates non-negativity and sum = 1 within 1e-9.
  TabularDistribution(StateSpace space, std::vector<double> probs);

  static TabularDistribution uniform(const StateSpace& space);
  static TabularDistribution point_mass(const StateSpace& space, const State& x);
  // Normalizes arbitrary non-negative weights.
  static TabularDistribution from_weights(const StateSpace& space, std::vector<double> weights);
  // Dirichlet(alpha) draw; alpha <= 1 gives peaky tables.
  static TabularDistribution random(const StateSpace& space, Rng& rng, double alpha = 1.0);
  // Product of per-dimension marginals (each of length vocab).
  static TabularDistribution product(const StateSpace& space, const std::vector<std::vector<double>>& marginals);

  const StateSpace& space() const { return space_; }
  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  double prob(const State& x) const { return probs_[space_.index(x)]; }

  State sample(Rng& rng) const;

 private:
  StateSpace space_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

double tv_distance(const TabularDistribution& p, const TabularDistribution& q);

// Versioned binary file: "CDIFFTAB", u32 version, u32 dims, u32 vocab,
// u8 ordinal + 3 pad, u64 count, count x float64 (little endian).
void save_tabular(const TabularDistribution& dist, const std::filesystem::path& path);
TabularDistribution load_tabular(const std::filesystem::path& path);

nlohmann::json tabular_to_json(const TabularDistribution& dist);
TabularDistribution tabular_from_json(const nlohmann::json& j);

}  // namespace cdiff
