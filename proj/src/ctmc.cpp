#include "cdiff/ctmc.hpp"

#include <cmath>
#include <limits>

#include "cdiff/error.hpp"
#include "cdiff/kernels.hpp"

namespace cdiff {

namespace {

// Index of the single differing dimension, -1 if equal, -2 if more than one.
int single_difference(const State& a, const State& b) {
  int diff = -1;
  for (std::size_t d = 0; d < a.size(); ++d) {
    if (a[d] == b[d]) continue;
    if (diff != -1) return -2;
    diff = static_cast<int>(d);
  }
  return diff;
}

void require_dense(const StateSpace& space) {
  if (space.state_count() > kMaxDenseStates)
    throw CapacityError("dense transition objects need at most 4096 states");
}

}  // namespace

double ForwardProcess::state_rate(double t, const State& from, const State& to) const {
  const int d = single_difference(from, to);
  if (d < 0) return 0.0;
  return schedule.beta(t) * rate(from[d], to[d]);
}

State Trajectory::state_at_end() const {
  State x = initial;
  for (const auto& e : events) x[e.dim] = e.value;
  return x;
}

State forward_sample(const State& x0, double s, double t, const ForwardProcess& process, Rng& rng) {
  process.space.validate(x0);
  if (s > t) throw DomainError("forward_sample needs s <= t");
  if (s == t) return x0;
  const Eigen::MatrixXd k = process.kernel(s, t);
  const int c = process.space.vocab();
  State x = x0;
  std::vector<double> row(c);
  for (auto& v : x) {
    for (int j = 0; j < c; ++j) row[j] = k(v, j);
    v = rng.categorical(row);
  }
  return x;
}

Trajectory gillespie_forward(const State& x0, const ForwardProcess& process, double horizon, Rng& rng) {
  process.space.validate(x0);
  Trajectory traj{x0, {}};
  State x = x0;
  const int dims = process.space.dims();
  const int c = process.space.vocab();
  std::vector<double> dim_rates(dims);
  std::vector<double> targets(c);
  double t = 0.0;
  for (;;) {
    // Total exit intensity of x, in units of beta(t).
    double total = 0.0;
    for (int d = 0; d < dims; ++d) total += (dim_rates[d] = process.rate.exit_rate(x[d]));
    if (total <= 0.0) break;
    const double next = process.schedule.advance(t, rng.exponential() / total);
    if (!(next <= horizon)) break;
    if (next <= t) break;  // cumulative-time resolution exhausted
    t = next;
    const int d = rng.categorical(dim_rates);
    for (int j = 0; j < c; ++j) targets[j] = j == x[d] ? 0.0 : process.rate(x[d], j);
    x[d] = rng.categorical(targets);
    traj.events.push_back({t, d, x[d]});
  }
  return traj;
}

TabularDistribution exact_marginal(const TabularDistribution& pi0, double t, const ForwardProcess& process) {
  return propagate_marginal(pi0, 0.0, t, process);
}

TabularDistribution propagate_marginal(const TabularDistribution& q_s, double s, double t, const ForwardProcess& process) {
  if (!(q_s.space() == process.space)) throw DomainError("distribution and process use different spaces");
  process.space.require_enumerable();
  auto out = kernels::propagate(process.space, q_s.probs(), process.kernel(s, t));
  return TabularDistribution::from_weights(process.space, std::move(out));
}

double reverse_rate(const TabularDistribution& q_t, const ForwardProcess& process, double t, const State& x,
                    const State& y) {
  const int d = single_difference(x, y);
  if (d < 0) return 0.0;
  const double qx = q_t.prob(x);
  if (qx < kUnreachable) throw NumericError("reverse_rate: q_t(x) is zero");
  return q_t.prob(y) / qx * process.schedule.beta(t) * process.rate(y[d], x[d]);
}

ReverseKernel reverse_transition_exact(const TabularDistribution& pi0, double s, double t, const ForwardProcess& process) {
  if (s > t) throw DomainError("reverse transition needs s <= t");
  const StateSpace& space = process.space;
  require_dense(space);
  const auto n = static_cast<Eigen::Index>(space.state_count());
  ReverseKernel out{Eigen::MatrixXd::Zero(n, n), std::vector<bool>(static_cast<std::size_t>(n), false)};
  const TabularDistribution q_s = exact_marginal(pi0, s, process);
  const TabularDistribution q_t = propagate_marginal(q_s, s, t, process);
  const Eigen::MatrixXd forward = full_transition(space, process.kernel(s, t));
  for (Eigen::Index y = 0; y < n; ++y) {
    if (q_t[static_cast<std::size_t>(y)] < kUnreachable) continue;
    out.reachable[static_cast<std::size_t>(y)] = true;
    for (Eigen::Index x = 0; x < n; ++x)
      out.table(y, x) = q_s[static_cast<std::size_t>(x)] * forward(x, y) / q_t[static_cast<std::size_t>(y)];
  }
  return out;
}

Eigen::MatrixXd full_transition(const StateSpace& space, const Eigen::MatrixXd& dim_kernel) {
  require_dense(space);
  const auto n = static_cast<Eigen::Index>(space.state_count());
  Eigen::MatrixXd m(n, n);
  std::vector<State> states;
  states.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) states.push_back(space.state_at(static_cast<std::uint64_t>(i)));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double v = 1.0;
      for (int d = 0; d < space.dims(); ++d) v *= dim_kernel(states[i][d], states[j][d]);
      m(i, j) = v;
    }
  return m;
}

Eigen::MatrixXd full_generator(const StateSpace& space, const RateSpec& rate) {
  require_dense(space);
  const auto n = static_cast<Eigen::Index>(space.state_count());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const State x = space.state_at(static_cast<std::uint64_t>(i));
    for (int d = 0; d < space.dims(); ++d)
      for (int c = 0; c < space.vocab(); ++c) {
        if (c == x[d]) continue;
        State y = x;
        y[d] = c;
        const auto j = static_cast<Eigen::Index>(space.index(y));
        g(i, j) = rate(x[d], c);
        g(i, i) -= rate(x[d], c);
      }
  }
  return g;
}

}  // namespace cdiff
