#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cdiff/ctmc.hpp"
#include "cdiff/models.hpp"
#include "cdiff/random.hpp"
#include "cdiff/tabular.hpp"

namespace cdiff {

enum class SamplerKind { euler, analytical, exact_oracle };
enum class StepGrid { uniform, geometric };
enum class CorrectorKind { none, lb };
// Locally balanced functions: sqrt(u) and u / (1 + u).
enum class BalanceFn { sqrt, t_over_1pt };

SamplerKind parse_sampler_kind(std::string_view s);
std::string_view sampler_kind_name(SamplerKind k);
StepGrid parse_step_grid(std::string_view s);
std::string_view step_grid_name(StepGrid g);
CorrectorKind parse_corrector_kind(std::string_view s);
std::string_view corrector_kind_name(CorrectorKind c);
BalanceFn parse_balance_fn(std::string_view s);
std::string_view balance_fn_name(BalanceFn g);

double balance(BalanceFn g, double u);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::euler;
  int steps = 100;
  StepGrid grid = StepGrid::uniform;
  CorrectorKind corrector = CorrectorKind::none;
  BalanceFn g = BalanceFn::sqrt;
  int corrector_steps = 1;
  // Non-positive means half the predictor step.
  double corrector_step_size = 0.0;
  double t_min = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

// Decreasing times T = t_0 > ... > t_steps = t_min.
std::vector<double> time_grid(const SamplerConfig& cfg, double horizon);

// Conditionals p_t(X^d | x^{\d}) of a model, (n * D) x C; x0-denoising models
// are mapped through the forward kernel K_{0,t}.
Eigen::MatrixXd model_conditionals(const Model& model, std::span<const State> xs, double t,
                                   const ForwardProcess& process);

// Per-dimension one-step laws, (n * D) x C, each row a distribution.
//
// Euler: off-value c gets tau * p(c) / p(x^d) * Q(c, x^d), tau = integral of
// beta over [t - eps, t]; clipped at 0 and renormalized.
Eigen::MatrixXd euler_step_probs(const Model& model, std::span<const State> xs, double t, double eps,
                                 const ForwardProcess& process);
// Analytical: p(c) proportional to sum_c0 p_{0|t}(c0) K_{t-eps,t}(c, x^d) K_{0,t-eps}(c0, c).
Eigen::MatrixXd analytical_step_probs(const Model& model, std::span<const State> xs, double t, double eps,
                                      const ForwardProcess& process);
// Locally balanced corrector: off-value c gets h * g(p(c) / p(x^d)).
Eigen::MatrixXd lb_corrector_probs(const Model& model, std::span<const State> xs, double t, double h, BalanceFn g,
                                   const ForwardProcess& process);

// Draws every dimension independently from per-dimension rows.
void apply_step(std::vector<State>& xs, const Eigen::MatrixXd& probs, std::span<Rng> rngs);

void euler_step(const Model& model, std::vector<State>& xs, double t, double eps, const ForwardProcess& process,
                std::span<Rng> rngs);
void analytical_step(const Model& model, std::vector<State>& xs, double t, double eps, const ForwardProcess& process,
                     std::span<Rng> rngs);
void lb_corrector_step(const Model& model, std::vector<State>& xs, double t, double h, BalanceFn g,
                       const ForwardProcess& process, std::span<Rng> rngs);

// Neighbour ratios pi(x + 1) / pi(x) and pi(x - 1) / pi(x) per (sample, dim),
// zero where the neighbour is outside the support.
struct OrdinalRatios {
  Eigen::MatrixXd up;
  Eigen::MatrixXd down;
};
// From a score model: up = exp(s), down = exp(-s).
OrdinalRatios ordinal_ratios_from_model(const Model& model, std::span<const State> xs, double t);
OrdinalRatios ordinal_ratios_exact(const TabularDistribution& q, std::span<const State> xs);

// Birth/death move: up and down counts are independent Poisson draws with
// means h g(up) and h g(down); the result is clamped to the support.
void ordinal_birth_death_step(std::vector<State>& xs, const OrdinalRatios& ratios, double h, BalanceFn g, int vocab,
                              std::span<Rng> rngs);

// Predictor-corrector generation from the uniform reference law.
std::vector<State> sample_reverse(const Model& model, std::size_t n, const SamplerConfig& cfg,
                                  const ForwardProcess& process);
// Annealed birth/death sampling for ordinal score models: corrector moves
// along the time grid.
std::vector<State> sample_ordinal(const Model& model, std::size_t n, const SamplerConfig& cfg);

// Rate used by the exact reverse simulator: f(q_t(x), q_t(y), Q_t(y, x)) for a
// jump x -> y. The default is the time-reversal formula.
using ReverseRateFn = std::function<double(double q_x, double q_y, double forward_rate)>;

struct ExactReverseOptions {
  double grid = 1e-3;
  // Simulation stops at this time (0 = run to the end).
  double t_end = 0.0;
  ReverseRateFn rate;
};

// Starts n paths from the exact q_T and runs the reverse jump process with
// rates frozen at the midpoint of each grid interval.
std::vector<State> exact_reverse_simulate(const TabularDistribution& pi_data, const ForwardProcess& process,
                                          std::size_t n, std::uint64_t seed, const ExactReverseOptions& opt = {});

}  // namespace cdiff
