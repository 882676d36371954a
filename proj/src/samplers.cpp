#include "cdiff/samplers.hpp"

#include <algorithm>
#include <cmath>

#include "cdiff/error.hpp"

namespace cdiff {

namespace {

template <class E>
struct Named {
  E value;
  const char* name;
};

constexpr Named<SamplerKind> kSamplers[] = {
    {SamplerKind::euler, "euler"}, {SamplerKind::analytical, "analytical"}, {SamplerKind::exact_oracle, "exact_oracle"}};
constexpr Named<StepGrid> kGrids[] = {{StepGrid::uniform, "uniform"}, {StepGrid::geometric, "geometric"}};
constexpr Named<CorrectorKind> kCorrectors[] = {{CorrectorKind::none, "none"}, {CorrectorKind::lb, "lb"}};
constexpr Named<BalanceFn> kBalance[] = {{BalanceFn::sqrt, "sqrt"}, {BalanceFn::t_over_1pt, "t_over_1pt"}};

template <class E, std::size_t N>
E parse_named(const Named<E> (&table)[N], std::string_view s, const char* what) {
  for (const auto& e : table)
    if (s == e.name) return e.value;
  std::string options;
  for (const auto& e : table) options += std::string(options.empty() ? "" : ", ") + e.name;
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "' (expected " + options + ")");
}

template <class E, std::size_t N>
std::string_view name_of(const Named<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "unknown";
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& l) {
  Eigen::MatrixXd p(l.rows(), l.cols());
  for (Eigen::Index r = 0; r < l.rows(); ++r) {
    const Eigen::RowVectorXd e = (l.row(r).array() - l.row(r).maxCoeff()).exp();
    p.row(r) = e / e.sum();
  }
  return p;
}

// Clip negatives and renormalize each row.
void normalize_rows(Eigen::MatrixXd& p) {
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    auto row = p.row(r);
    row = row.cwiseMax(0.0);
    const double s = row.sum();
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericError("step probabilities are degenerate");
    row /= s;
  }
}

// Off-diagonal jump weights per (sample, dim) with stay = 1 - sum.
template <class OffWeight>
Eigen::MatrixXd jump_rows(std::span<const State> xs, int dims, int vocab, OffWeight off) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xs.size()) * dims, vocab);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (int d = 0; d < dims; ++d) {
      const Eigen::Index r = static_cast<Eigen::Index>(i) * dims + d;
      const int y = xs[i][d];
      double total = 0.0;
      for (int c = 0; c < vocab; ++c) {
        if (c == y) continue;
        p(r, c) = off(r, y, c);
        total += p(r, c);
      }
      p(r, y) = 1.0 - total;
    }
  normalize_rows(p);
  return p;
}

void require_conditional(const Model& model) {
  if (model.kind() == ModelKind::ordinal_score)
    throw ConfigError("ordinal score models are sampled with the birth/death corrector");
}

}  // namespace

SamplerKind parse_sampler_kind(std::string_view s) { return parse_named(kSamplers, s, "sampler"); }
std::string_view sampler_kind_name(SamplerKind k) { return name_of(kSamplers, k); }
StepGrid parse_step_grid(std::string_view s) { return parse_named(kGrids, s, "step grid"); }
std::string_view step_grid_name(StepGrid g) { return name_of(kGrids, g); }
CorrectorKind parse_corrector_kind(std::string_view s) { return parse_named(kCorrectors, s, "corrector"); }
std::string_view corrector_kind_name(CorrectorKind c) { return name_of(kCorrectors, c); }
BalanceFn parse_balance_fn(std::string_view s) { return parse_named(kBalance, s, "balance function"); }
std::string_view balance_fn_name(BalanceFn g) { return name_of(kBalance, g); }

double balance(BalanceFn g, double u) { return g == BalanceFn::sqrt ? std::sqrt(u) : u / (1.0 + u); }

void SamplerConfig::validate() const {
  if (steps < 1) throw ConfigError("sampler.steps must be >= 1");
  if (corrector_steps < 0) throw ConfigError("sampler.corrector_steps must be >= 0");
  if (!(t_min > 0.0)) throw ConfigError("sampler.t_min must be > 0");
}

std::vector<double> time_grid(const SamplerConfig& cfg, double horizon) {
  cfg.validate();
  if (!(cfg.t_min < horizon)) throw ConfigError("sampler.t_min must be below the horizon");
  std::vector<double> ts(static_cast<std::size_t>(cfg.steps) + 1);
  for (int k = 0; k <= cfg.steps; ++k) {
    const double f = static_cast<double>(k) / cfg.steps;
    ts[static_cast<std::size_t>(k)] = cfg.grid == StepGrid::uniform ? horizon - f * (horizon - cfg.t_min)
                                                                    : horizon * std::pow(cfg.t_min / horizon, f);
  }
  ts.back() = cfg.t_min;
  return ts;
}

Eigen::MatrixXd model_conditionals(const Model& model, std::span<const State> xs, double t,
                                   const ForwardProcess& process) {
  require_conditional(model);
  Eigen::MatrixXd p = softmax_rows(model.logits(xs, t));
  if (model.mode() == ModelMode::x0_denoising) {
    p = p * process.kernel(0.0, t);
    normalize_rows(p);
  }
  return p;
}

Eigen::MatrixXd euler_step_probs(const Model& model, std::span<const State> xs, double t, double eps,
                                 const ForwardProcess& process) {
  if (eps < 0.0 || eps > t) throw DomainError("euler step needs 0 <= eps <= t");
  const int dims = model.space().dims();
  const int vocab = model.space().vocab();
  if (eps == 0.0) return jump_rows(xs, dims, vocab, [](Eigen::Index, int, int) { return 0.0; });
  const Eigen::MatrixXd p = model_conditionals(model, xs, t, process);
  const double tau = process.schedule.cumulative(t - eps, t);
  return jump_rows(xs, dims, vocab,
                   [&](Eigen::Index r, int y, int c) { return tau * p(r, c) / p(r, y) * process.rate(c, y); });
}

Eigen::MatrixXd analytical_step_probs(const Model& model, std::span<const State> xs, double t, double eps,
                                      const ForwardProcess& process) {
  require_conditional(model);
  if (model.mode() != ModelMode::x0_denoising) throw ConfigError("the analytical sampler needs an x0_denoising model");
  if (eps < 0.0 || eps > t) throw DomainError("analytical step needs 0 <= eps <= t");
  const int dims = model.space().dims();
  const Eigen::MatrixXd p0 = softmax_rows(model.logits(xs, t));
  const Eigen::MatrixXd k_step = process.kernel(t - eps, t);
  const Eigen::MatrixXd mixed = p0 * process.kernel(0.0, t - eps);
  Eigen::MatrixXd out(mixed.rows(), mixed.cols());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (int d = 0; d < dims; ++d) {
      const Eigen::Index r = static_cast<Eigen::Index>(i) * dims + d;
      out.row(r) = mixed.row(r).cwiseProduct(k_step.col(xs[i][d]).transpose());
    }
  normalize_rows(out);
  return out;
}

Eigen::MatrixXd lb_corrector_probs(const Model& model, std::span<const State> xs, double t, double h, BalanceFn g,
                                   const ForwardProcess& process) {
  if (h < 0.0) throw DomainError("corrector step size must be >= 0");
  const Eigen::MatrixXd p = model_conditionals(model, xs, t, process);
  return jump_rows(xs, model.space().dims(), model.space().vocab(),
                   [&](Eigen::Index r, int y, int c) { return h * balance(g, p(r, c) / p(r, y)); });
}

void apply_step(std::vector<State>& xs, const Eigen::MatrixXd& probs, std::span<Rng> rngs) {
  if (xs.empty()) return;
  const auto dims = static_cast<Eigen::Index>(xs.front().size());
  if (rngs.size() != xs.size() || probs.rows() != static_cast<Eigen::Index>(xs.size()) * dims)
    throw DomainError("apply_step: batch sizes differ");
  const auto n = static_cast<std::int64_t>(xs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& x = xs[static_cast<std::size_t>(i)];
    auto& rng = rngs[static_cast<std::size_t>(i)];
    for (Eigen::Index d = 0; d < dims; ++d) {
      const Eigen::RowVectorXd row = probs.row(i * dims + d);
      x[static_cast<std::size_t>(d)] = rng.categorical(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
    }
  }
}

void euler_step(const Model& model, std::vector<State>& xs, double t, double eps, const ForwardProcess& process,
                std::span<Rng> rngs) {
  apply_step(xs, euler_step_probs(model, xs, t, eps, process), rngs);
}

void analytical_step(const Model& model, std::vector<State>& xs, double t, double eps, const ForwardProcess& process,
                     std::span<Rng> rngs) {
  apply_step(xs, analytical_step_probs(model, xs, t, eps, process), rngs);
}

void lb_corrector_step(const Model& model, std::vector<State>& xs, double t, double h, BalanceFn g,
                       const ForwardProcess& process, std::span<Rng> rngs) {
  apply_step(xs, lb_corrector_probs(model, xs, t, h, g, process), rngs);
}

OrdinalRatios ordinal_ratios_from_model(const Model& model, std::span<const State> xs, double t) {
  if (model.kind() != ModelKind::ordinal_score) throw ConfigError("ordinal ratios need an ordinal score model");
  const Eigen::MatrixXd s = model.logits(xs, t);
  const int dims = model.space().dims();
  const int vocab = model.space().vocab();
  OrdinalRatios r{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xs.size()), dims),
                  Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xs.size()), dims)};
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (int d = 0; d < dims; ++d) {
      const double v = s(static_cast<Eigen::Index>(i) * dims + d, 0);
      const auto row = static_cast<Eigen::Index>(i);
      if (xs[i][d] + 1 < vocab) r.up(row, d) = std::exp(v);
      if (xs[i][d] > 0) r.down(row, d) = std::exp(-v);
    }
  return r;
}

OrdinalRatios ordinal_ratios_exact(const TabularDistribution& q, std::span<const State> xs) {
  const StateSpace& space = q.space();
  const int dims = space.dims();
  OrdinalRatios r{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xs.size()), dims),
                  Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xs.size()), dims)};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double qx = q.prob(xs[i]);
    if (!(qx > 0.0)) throw NumericError("ordinal ratio at a zero-probability state");
    for (int d = 0; d < dims; ++d) {
      State y = xs[i];
      const auto row = static_cast<Eigen::Index>(i);
      if (xs[i][d] + 1 < space.vocab()) {
        y[d] = xs[i][d] + 1;
        r.up(row, d) = q.prob(y) / qx;
      }
      if (xs[i][d] > 0) {
        y[d] = xs[i][d] - 1;
        r.down(row, d) = q.prob(y) / qx;
      }
    }
  }
  return r;
}

void ordinal_birth_death_step(std::vector<State>& xs, const OrdinalRatios& ratios, double h, BalanceFn g, int vocab,
                              std::span<Rng> rngs) {
  if (h < 0.0) throw DomainError("corrector step size must be >= 0");
  if (rngs.size() != xs.size() || ratios.up.rows() != static_cast<Eigen::Index>(xs.size()))
    throw DomainError("birth/death step: batch sizes differ");
  const auto n = static_cast<std::int64_t>(xs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& x = xs[static_cast<std::size_t>(i)];
    auto& rng = rngs[static_cast<std::size_t>(i)];
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double up = x[d] + 1 < vocab ? balance(g, ratios.up(i, static_cast<Eigen::Index>(d))) : 0.0;
      const double down = x[d] > 0 ? balance(g, ratios.down(i, static_cast<Eigen::Index>(d))) : 0.0;
      const long n_up = rng.poisson(h * up);
      const long n_down = rng.poisson(h * down);
      x[d] = static_cast<int>(std::clamp<long>(x[d] + n_up - n_down, 0, vocab - 1));
    }
  }
}

namespace {

constexpr std::size_t kChainChunk = 256;
constexpr long kMaxJumpsPerInterval = 1000000;

std::vector<Rng> chain_streams(std::uint64_t seed, std::size_t begin, std::size_t end) {
  std::vector<Rng> rngs;
  rngs.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) rngs.emplace_back(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
  return rngs;
}

std::vector<State> uniform_starts(const StateSpace& space, std::span<Rng> rngs) {
  std::vector<State> xs;
  xs.reserve(rngs.size());
  for (auto& rng : rngs) {
    State x(static_cast<std::size_t>(space.dims()));
    for (auto& v : x) v = rng.uniform_int(0, space.vocab() - 1);
    xs.push_back(std::move(x));
  }
  return xs;
}

}  // namespace

std::vector<State> sample_reverse(const Model& model, std::size_t n, const SamplerConfig& cfg,
                                  const ForwardProcess& process) {
  cfg.validate();
  require_conditional(model);
  if (!(process.space == model.space())) throw ConfigError("model and forward process use different state spaces");
  if (cfg.kind == SamplerKind::exact_oracle)
    throw ConfigError("exact_oracle sampling runs from the data table, not a model");
  if (cfg.kind == SamplerKind::analytical && model.mode() != ModelMode::x0_denoising)
    throw ConfigError("the analytical sampler needs an x0_denoising model");
  const auto grid = time_grid(cfg, process.schedule.horizon());
  std::vector<State> out;
  out.reserve(n);
  for (std::size_t begin = 0; begin < n; begin += kChainChunk) {
    const std::size_t end = std::min(n, begin + kChainChunk);
    auto rngs = chain_streams(cfg.seed, begin, end);
    auto xs = uniform_starts(model.space(), rngs);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      const double t = grid[k];
      const double eps = t - grid[k + 1];
      if (cfg.kind == SamplerKind::analytical)
        analytical_step(model, xs, t, eps, process, rngs);
      else
        euler_step(model, xs, t, eps, process, rngs);
      if (cfg.corrector == CorrectorKind::lb) {
        const double h = cfg.corrector_step_size > 0.0 ? cfg.corrector_step_size : 0.5 * eps;
        for (int c = 0; c < cfg.corrector_steps; ++c) lb_corrector_step(model, xs, grid[k + 1], h, cfg.g, process, rngs);
      }
    }
    for (auto& x : xs) out.push_back(std::move(x));
  }
  return out;
}

std::vector<State> sample_ordinal(const Model& model, std::size_t n, const SamplerConfig& cfg) {
  cfg.validate();
  if (model.kind() != ModelKind::ordinal_score) throw ConfigError("sample_ordinal needs an ordinal score model");
  const auto grid = time_grid(cfg, model.horizon());
  std::vector<State> out;
  out.reserve(n);
  const int moves = std::max(cfg.corrector_steps, 1);
  for (std::size_t begin = 0; begin < n; begin += kChainChunk) {
    const std::size_t end = std::min(n, begin + kChainChunk);
    auto rngs = chain_streams(cfg.seed, begin, end);
    auto xs = uniform_starts(model.space(), rngs);
    for (std::size_t k = 1; k < grid.size(); ++k) {
      const double h = cfg.corrector_step_size > 0.0 ? cfg.corrector_step_size : grid[k - 1] - grid[k];
      for (int m = 0; m < moves; ++m)
        ordinal_birth_death_step(xs, ordinal_ratios_from_model(model, xs, grid[k]), h, cfg.g, model.space().vocab(),
                                 rngs);
    }
    for (auto& x : xs) out.push_back(std::move(x));
  }
  return out;
}

std::vector<State> exact_reverse_simulate(const TabularDistribution& pi_data, const ForwardProcess& process,
                                          std::size_t n, std::uint64_t seed, const ExactReverseOptions& opt) {
  const StateSpace& space = process.space;
  space.require_enumerable();
  if (!(pi_data.space() == space)) throw DomainError("distribution and process use different spaces");
  if (!(opt.grid > 0.0)) throw ConfigError("reverse simulation grid must be positive");
  const double horizon = process.schedule.horizon();
  if (opt.t_end < 0.0 || opt.t_end > horizon) throw DomainError("reverse simulation end time outside [0, T]");
  const ReverseRateFn rate_fn =
      opt.rate ? opt.rate : ReverseRateFn([](double qx, double qy, double fwd) { return qy / qx * fwd; });
  const int dims = space.dims();
  const int vocab = space.vocab();
  const std::uint64_t states = space.state_count();
  const std::size_t moves = static_cast<std::size_t>(dims) * static_cast<std::size_t>(vocab - 1);

  // Start from the exact q_T.
  const TabularDistribution q_T = exact_marginal(pi_data, horizon, process);
  std::vector<Rng> rngs;
  rngs.reserve(n);
  std::vector<std::uint64_t> xs(n);
  std::vector<double> budget(n);
  for (std::size_t i = 0; i < n; ++i) {
    rngs.emplace_back(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    xs[i] = space.index(q_T.sample(rngs[i]));
    budget[i] = rngs[i].exponential();
  }

  // Move m of state x: dimension m / (C - 1), value skipping x^d.
  auto target = [&](std::uint64_t x, std::size_t m) {
    const int d = static_cast<int>(m / static_cast<std::size_t>(vocab - 1));
    const int k = static_cast<int>(m % static_cast<std::size_t>(vocab - 1));
    const std::uint64_t stride = space.stride(d);
    const int cur = static_cast<int>((x / stride) % static_cast<std::uint64_t>(vocab));
    const int c = k < cur ? k : k + 1;
    return x + static_cast<std::uint64_t>(c) * stride - static_cast<std::uint64_t>(cur) * stride;
  };

  std::vector<double> rates(states * moves);
  std::vector<double> totals(states);
  const auto intervals = static_cast<long>(std::ceil((horizon - opt.t_end) / opt.grid - 1e-9));
  for (long k = 0; k < intervals; ++k) {
    const double hi = horizon - static_cast<double>(k) * opt.grid;
    const double lo = std::max(opt.t_end, hi - opt.grid);
    const double mid = 0.5 * (lo + hi);
    const double len = hi - lo;
    const TabularDistribution q = exact_marginal(pi_data, mid, process);
    const double beta = process.schedule.beta(mid);
    for (std::uint64_t x = 0; x < states; ++x) {
      double total = 0.0;
      for (std::size_t m = 0; m < moves; ++m) {
        double r = 0.0;
        if (q[x] >= kUnreachable) {
          const std::uint64_t y = target(x, m);
          const int d = static_cast<int>(m / static_cast<std::size_t>(vocab - 1));
          const std::uint64_t stride = space.stride(d);
          const int xd = static_cast<int>((x / stride) % static_cast<std::uint64_t>(vocab));
          const int yd = static_cast<int>((y / stride) % static_cast<std::uint64_t>(vocab));
          r = rate_fn(q[x], q[y], beta * process.rate(yd, xd));
        }
        rates[x * moves + m] = r;
        total += r;
      }
      totals[x] = total;
    }
    const auto count = static_cast<std::int64_t>(n);
    bool runaway = false;
#pragma omp parallel for schedule(static) reduction(|| : runaway)
    for (std::int64_t i = 0; i < count; ++i) {
      auto& x = xs[static_cast<std::size_t>(i)];
      auto& e = budget[static_cast<std::size_t>(i)];
      auto& rng = rngs[static_cast<std::size_t>(i)];
      double remaining = len;
      long jumps = 0;
      // Time change: a jump happens once the integrated rate uses up e.
      while (totals[x] * remaining >= e && totals[x] > 0.0) {
        if (++jumps > kMaxJumpsPerInterval) {
          runaway = true;
          break;
        }
        remaining -= e / totals[x];
        const std::span<const double> w(rates.data() + x * moves, moves);
        x = target(x, static_cast<std::size_t>(rng.categorical(w)));
        e = rng.exponential();
      }
      e -= totals[x] * remaining;
    }
    if (runaway) throw NumericError("reverse simulation: jump rates diverge near t = " + std::to_string(mid));
  }
  std::vector<State> out;
  out.reserve(n);
  for (auto x : xs) out.push_back(space.state_at(x));
  return out;
}

}  // namespace cdiff
