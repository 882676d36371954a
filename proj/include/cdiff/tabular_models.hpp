#pragma once

#include <memory>
#include <vector>

#include "cdiff/ctmc.hpp"
#include "cdiff/models.hpp"
#include "cdiff/tabular.hpp"

namespace cdiff {

// Singleton conditionals pi(X^d = c | x^{\d}) of a tabular distribution, stored
// for every (x, d) (the x^d entry of x is ignored).
class ConditionalTable {
 public:
  ConditionalTable() = default;
  ConditionalTable(StateSpace space, std::vector<double> probs, std::vector<char> defined);

  const StateSpace& space() const { return space_; }
  double operator()(std::uint64_t x_index, int d, int c) const {
    return probs_[(x_index * static_cast<std::uint64_t>(space_.dims()) + static_cast<std::uint64_t>(d)) *
                      static_cast<std::uint64_t>(space_.vocab()) +
                  static_cast<std::uint64_t>(c)];
  }
  double operator()(const State& x, int d, int c) const { return (*this)(space_.index(x), d, c); }
  // False when the conditioning slice has zero total mass.
  bool defined(std::uint64_t x_index, int d) const {
    return defined_[x_index * static_cast<std::uint64_t>(space_.dims()) + static_cast<std::uint64_t>(d)] != 0;
  }

 private:
  StateSpace space_;
  std::vector<double> probs_;
  std::vector<char> defined_;
};

// Normalizes a non-negative table along each dimension: entry (x, d, c) is
// w(x^{d=c}) / sum_c' w(x^{d=c'}).
ConditionalTable slice_conditionals(const StateSpace& space, std::span<const double> weights);
ConditionalTable tabular_conditionals(const TabularDistribution& q);

// Exact denoising posteriors q_{0|t}(X_0^d = c | x_t^{\d}) for pi0 pushed
// through the forward process to time t.
ConditionalTable x0_posterior_table(const TabularDistribution& pi0, double t, const ForwardProcess& process);

// prod_d pi(y^d | x^{1:d-1}, y^{d+1:D}) / pi(x^d | x^{1:d-1}, y^{d+1:D}), which
// equals q(y) / q(x) for strictly positive q. Throws NumericError on a zero
// conditional.
double ratio_via_conditional_chain(const ConditionalTable& cond, const State& x, const State& y);

// Rebuilds q from its conditionals alone via chain ratios against the first
// state, then renormalizes.
TabularDistribution reconstruct_from_conditionals(const ConditionalTable& cond);

// Oracle whose logits are the log exact conditionals of q_t, where q_t is pi0
// pushed through the forward process (or the x0 posterior in x0 mode).
// Tables are cached per time.
std::unique_ptr<Model> make_oracle_model(const TabularDistribution& pi0, const ForwardProcess& process, ModelMode mode);
// Oracle returning the conditionals of a fixed q at every time.
std::unique_ptr<Model> make_fixed_oracle_model(const TabularDistribution& q, double horizon);

// Free logits per (time bin, d, x^{\d}); leak-free by construction.
std::unique_ptr<Model> make_tabular_logit_model(const StateSpace& space, ModelMode mode, double horizon, int time_bins);

// Logits representing a conditional table (log probabilities, floored at
// 1e-300; undefined slices become uniform).
Eigen::MatrixXd conditional_logits(const ConditionalTable& cond, std::span<const State> xs);

}  // namespace cdiff
