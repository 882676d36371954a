#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cdiff/random.hpp"
#include "cdiff/rate.hpp"
#include "cdiff/schedule.hpp"
#include "cdiff/state_space.hpp"
#include "cdiff/tabular.hpp"

namespace cdiff {

// Factorized forward process: every dimension runs an independent CTMC with
// generator beta(t) * Q.
struct ForwardProcess {
  StateSpace space;
  NoiseSchedule schedule;
  RateSpec rate;

  // Per-dimension transition matrix from time s to time t.
  Eigen::MatrixXd kernel(double s, double t) const { return rate.transition(schedule.cumulative(s, t)); }
  // Forward rate Q_t(from, to) between two states of the product space; zero
  // unless they differ in exactly one dimension.
  double state_rate(double t, const State& from, const State& to) const;
};

struct JumpEvent {
  double time;
  int dim;
  int value;
};

// A jump-process path: initial state and time-ordered jumps.
struct Trajectory {
  State initial;
  std::vector<JumpEvent> events;

  State state_at_end() const;
};

// x_t ~ q_{t|s}(. | x_s), each dimension independently.
State forward_sample(const State& x0, double s, double t, const ForwardProcess& process, Rng& rng);

// Exact event-driven simulation on [0, horizon]. Waiting times are drawn in
// cumulative-rate time and mapped back through the schedule integral.
Trajectory gillespie_forward(const State& x0, const ForwardProcess& process, double horizon, Rng& rng);

// q_t = pi_0 propagated from time 0 to t.
TabularDistribution exact_marginal(const TabularDistribution& pi0, double t, const ForwardProcess& process);
// q_t from q_s, s <= t.
TabularDistribution propagate_marginal(const TabularDistribution& q_s, double s, double t, const ForwardProcess& process);

// States with probability below this are treated as unreachable.
inline constexpr double kUnreachable = 1e-300;

// Reverse-time rate R_t(x, y) = q_t(y) / q_t(x) * Q_t(y, x). Zero unless x and y
// differ in exactly one dimension. Throws NumericError when q_t(x) is zero.
double reverse_rate(const TabularDistribution& q_t, const ForwardProcess& process, double t, const State& x,
                    const State& y);

// Exact reverse transition table q_{s|t}(x | y). Row y (conditioning state),
// column x. Rows with q_t(y) below kUnreachable are zero and flagged.
struct ReverseKernel {
  Eigen::MatrixXd table;
  std::vector<bool> reachable;
};
ReverseKernel reverse_transition_exact(const TabularDistribution& pi0, double s, double t, const ForwardProcess& process);

// Dense |X| x |X| objects for small spaces (|X| <= 4096), used as oracles.
inline constexpr std::uint64_t kMaxDenseStates = 4096;
Eigen::MatrixXd full_transition(const StateSpace& space, const Eigen::MatrixXd& dim_kernel);
Eigen::MatrixXd full_generator(const StateSpace& space, const RateSpec& rate);

}  // namespace cdiff
