#include "cdiff/losses.hpp"

#include <algorithm>
#include <cmath>

#include "cdiff/error.hpp"
#include "cdiff/tabular_models.hpp"

namespace cdiff {

namespace {

struct NamedLoss {
  LossKind kind;
  const char* name;
};

constexpr NamedLoss kLosses[] = {
    {LossKind::ce_simplified, "ce_simplified"},
    {LossKind::ce_original_tabular, "ce_original_tabular"},
    {LossKind::l2_ratio, "l2_ratio"},
    {LossKind::l2_ratio_simplified, "l2_ratio_simplified"},
    {LossKind::x0_ce, "x0_ce"},
    {LossKind::ordinal_score, "ordinal_score"},
    {LossKind::path_kl_tabular, "path_kl_tabular"},
};

using RowVec = Eigen::RowVectorXd;

RowVec softmax(const RowVec& l) {
  RowVec e = (l.array() - l.maxCoeff()).exp();
  return e / e.sum();
}

RowVec log_softmax(const RowVec& l) {
  const double m = l.maxCoeff();
  return l.array() - (m + std::log((l.array() - m).exp().sum()));
}

// d(loss)/d(logits) from d(loss)/d(p) through p = softmax(l).
RowVec softmax_backward(const RowVec& p, const RowVec& dp) { return p.cwiseProduct((dp.array() - p.dot(dp)).matrix()); }

void require_mode(const Model& model, ModelMode mode, const char* loss) {
  if (model.mode() != mode)
    throw ConfigError(std::string(loss) + " needs a " + std::string(model_mode_name(mode)) + " model, got " +
                      std::string(model_mode_name(model.mode())));
  if (model.kind() == ModelKind::ordinal_score) throw ConfigError(std::string(loss) + " needs a conditional model");
}

void check_finite(double v, const char* loss) {
  if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + loss);
}

std::vector<State> batch_states(std::span<const TrainingTuple> batch) {
  std::vector<State> xs;
  xs.reserve(batch.size());
  for (const auto& b : batch) xs.push_back(b.xt);
  return xs;
}

std::vector<double> batch_times(std::span<const TrainingTuple> batch) {
  std::vector<double> ts;
  ts.reserve(batch.size());
  for (const auto& b : batch) ts.push_back(b.t);
  return ts;
}

std::vector<State> all_states(const StateSpace& space) {
  space.require_enumerable();
  std::vector<State> xs;
  xs.reserve(space.state_count());
  for (std::uint64_t i = 0; i < space.state_count(); ++i) xs.push_back(space.state_at(i));
  return xs;
}

// Per-row loss head: returns the row loss and writes d(row loss)/d(logits).
template <class Head>
LossValue sampled_loss(const Model& model, std::span<const TrainingTuple> batch, bool want_grad, const char* name,
                       Head head) {
  LossValue out;
  if (batch.empty()) throw DomainError(std::string(name) + ": empty batch");
  const auto xs = batch_states(batch);
  const auto ts = batch_times(batch);
  const auto pass = model.forward(xs, ts);
  const Eigen::MatrixXd& l = pass->logits();
  const int dims = model.space().dims();
  Eigen::MatrixXd dl = Eigen::MatrixXd::Zero(l.rows(), l.cols());
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    for (int d = 0; d < dims; ++d) {
      const Eigen::Index r = static_cast<Eigen::Index>(i) * dims + d;
      RowVec g(l.cols());
      total += batch[i].weight * head(i, d, RowVec(l.row(r)), g);
      dl.row(r) = batch[i].weight * inv_n * g;
    }
  out.value = total * inv_n;
  check_finite(out.value, name);
  if (want_grad) {
    out.grad.assign(model.params().size(), 0.0);
    pass->backward(dl, out.grad);
  }
  return out;
}

// Exact expectation over q_t of a per-(x, d) head.
template <class Head>
LossValue tabular_loss(const Model& model, const TabularDistribution& q_t, double t, bool want_grad, const char* name,
                       Head head) {
  if (!(q_t.space() == model.space())) throw DomainError(std::string(name) + ": space mismatch");
  LossValue out;
  const auto xs = all_states(model.space());
  const auto pass = model.forward(xs, std::vector<double>(xs.size(), t));
  const Eigen::MatrixXd& l = pass->logits();
  const int dims = model.space().dims();
  Eigen::MatrixXd dl = Eigen::MatrixXd::Zero(l.rows(), l.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = q_t[i];
    if (w == 0.0) continue;
    for (int d = 0; d < dims; ++d) {
      const Eigen::Index r = static_cast<Eigen::Index>(i) * dims + d;
      RowVec g(l.cols());
      total += w * head(i, d, RowVec(l.row(r)), g);
      dl.row(r) = w * g;
    }
  }
  out.value = total;
  check_finite(out.value, name);
  if (want_grad) {
    out.grad.assign(model.params().size(), 0.0);
    pass->backward(dl, out.grad);
  }
  return out;
}

// Cross-entropy against target distribution w: value and gradient in logits.
double cross_entropy(const RowVec& l, const RowVec& target, RowVec& g) {
  const RowVec ls = log_softmax(l);
  g = ls.array().exp().matrix() - target;
  return -target.dot(ls);
}

double ce_onehot(const RowVec& l, int y, RowVec& g) {
  const RowVec ls = log_softmax(l);
  g = ls.array().exp();
  g[y] -= 1.0;
  return -ls[y];
}

double l2_simplified_head(const RowVec& l, int y, RowVec& g) {
  const RowVec p = softmax(l);
  RowVec dp = 2.0 * p;
  dp[y] -= 2.0;
  g = softmax_backward(p, dp);
  return p.squaredNorm() - 2.0 * p[y];
}

}  // namespace

LossKind parse_loss_kind(std::string_view s) {
  for (const auto& l : kLosses)
    if (s == l.name) return l.kind;
  std::string options;
  for (const auto& l : kLosses) options += std::string(options.empty() ? "" : ", ") + l.name;
  throw ConfigError("unknown loss '" + std::string(s) + "' (expected " + options + ")");
}

std::string_view loss_kind_name(LossKind k) {
  for (const auto& l : kLosses)
    if (l.kind == k) return l.name;
  return "unknown";
}

bool loss_needs_table(LossKind k) {
  return k == LossKind::ce_original_tabular || k == LossKind::l2_ratio || k == LossKind::path_kl_tabular;
}

LossValue loss_ce_simplified(const Model& model, std::span<const TrainingTuple> batch, bool want_grad) {
  require_mode(model, ModelMode::noisy_marginal, "ce_simplified");
  return sampled_loss(model, batch, want_grad, "ce_simplified",
                      [&](std::size_t i, int d, const RowVec& l, RowVec& g) { return ce_onehot(l, batch[i].xt[d], g); });
}

LossValue loss_l2_ratio_simplified(const Model& model, std::span<const TrainingTuple> batch, bool want_grad) {
  require_mode(model, ModelMode::noisy_marginal, "l2_ratio_simplified");
  return sampled_loss(model, batch, want_grad, "l2_ratio_simplified", [&](std::size_t i, int d, const RowVec& l, RowVec& g) {
    return l2_simplified_head(l, batch[i].xt[d], g);
  });
}

Eigen::VectorXd x0_marginal_transform(const Eigen::VectorXd& x0_logits, const Eigen::MatrixXd& kernel) {
  const RowVec a = softmax(x0_logits.transpose());
  RowVec p = a * kernel;
  p /= p.sum();
  return p.transpose();
}

LossValue loss_x0_ce(const Model& model, std::span<const TrainingTuple> batch, const ForwardProcess& process,
                     bool want_grad) {
  require_mode(model, ModelMode::x0_denoising, "x0_ce");
  std::vector<Eigen::MatrixXd> kernels;
  kernels.reserve(batch.size());
  for (const auto& b : batch) kernels.push_back(process.kernel(0.0, b.t));
  return sampled_loss(model, batch, want_grad, "x0_ce", [&](std::size_t i, int d, const RowVec& l, RowVec& g) {
    // p_y = a . K(:, y); d(-log p_y)/dl_j = a_j (1 - K(j, y) / p_y).
    const RowVec a = softmax(l);
    const int y = batch[i].xt[d];
    const Eigen::VectorXd v = kernels[i].col(y);
    const double py = a.dot(v.transpose());
    if (!(py > 0.0)) throw NumericError("x0_ce: zero probability for the observed value");
    g = a.array() * (1.0 - v.transpose().array() / py);
    return -std::log(py);
  });
}

LossValue loss_ce_original_tabular(const Model& model, const TabularDistribution& q_t, double t, bool want_grad) {
  require_mode(model, ModelMode::noisy_marginal, "ce_original_tabular");
  const ConditionalTable cond = tabular_conditionals(q_t);
  const int c_count = model.space().vocab();
  return tabular_loss(model, q_t, t, want_grad, "ce_original_tabular", [&](std::size_t i, int d, const RowVec& l, RowVec& g) {
    RowVec target(c_count);
    for (int c = 0; c < c_count; ++c) target[c] = cond(i, d, c);
    return cross_entropy(l, target, g);
  });
}

LossValue loss_ce_simplified_exact(const Model& model, const TabularDistribution& q_t, double t, bool want_grad) {
  require_mode(model, ModelMode::noisy_marginal, "ce_simplified");
  const StateSpace& space = model.space();
  return tabular_loss(model, q_t, t, want_grad, "ce_simplified", [&](std::size_t i, int d, const RowVec& l, RowVec& g) {
    return ce_onehot(l, space.state_at(i)[d], g);
  });
}

LossValue loss_l2_ratio_tabular(const Model& model, const TabularDistribution& q_t, double t, bool want_grad) {
  require_mode(model, ModelMode::noisy_marginal, "l2_ratio");
  const ConditionalTable cond = tabular_conditionals(q_t);
  const int c_count = model.space().vocab();
  return tabular_loss(model, q_t, t, want_grad, "l2_ratio", [&](std::size_t i, int d, const RowVec& l, RowVec& g) {
    const RowVec p = softmax(l);
    RowVec diff(c_count);
    for (int c = 0; c < c_count; ++c) diff[c] = p[c] - cond(i, d, c);
    g = softmax_backward(p, 2.0 * diff);
    return diff.squaredNorm();
  });
}

LossValue loss_l2_ratio_simplified_exact(const Model& model, const TabularDistribution& q_t, double t, bool want_grad) {
  require_mode(model, ModelMode::noisy_marginal, "l2_ratio_simplified");
  const StateSpace& space = model.space();
  return tabular_loss(model, q_t, t, want_grad, "l2_ratio_simplified", [&](std::size_t i, int d, const RowVec& l, RowVec& g) {
    return l2_simplified_head(l, space.state_at(i)[d], g);
  });
}

double conditional_entropy(const TabularDistribution& q_t) {
  const ConditionalTable cond = tabular_conditionals(q_t);
  const StateSpace& space = q_t.space();
  double h = 0.0;
  for (std::uint64_t i = 0; i < q_t.size(); ++i) {
    if (q_t[i] == 0.0) continue;
    const State x = space.state_at(i);
    for (int d = 0; d < space.dims(); ++d) h -= q_t[i] * std::log(cond(i, d, x[d]));
  }
  return h;
}

double conditional_kl(const Model& model, const TabularDistribution& q_t, double t) {
  const ConditionalTable cond = tabular_conditionals(q_t);
  const auto xs = all_states(model.space());
  const Eigen::MatrixXd l = model.logits(xs, t);
  const int dims = model.space().dims();
  double kl = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (q_t[i] == 0.0) continue;
    for (int d = 0; d < dims; ++d) {
      const RowVec ls = log_softmax(l.row(static_cast<Eigen::Index>(i) * dims + d));
      for (int c = 0; c < model.space().vocab(); ++c) {
        const double p = cond(i, d, c);
        if (p > 0.0) kl += q_t[i] * p * (std::log(p) - ls[c]);
      }
    }
  }
  return kl;
}

double l2_simplified_term(std::span<const double> p, int x) {
  double s = 0.0;
  for (double v : p) s += v * v;
  return s - 2.0 * p[static_cast<std::size_t>(x)];
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::pair<double, double>> trapezoid_grid(const PathKlOptions& opt, double horizon) {
  if (opt.grid_points < 2) throw ConfigError("path objective needs at least 2 grid points");
  if (!(opt.t_min >= 0.0 && opt.t_min < horizon)) throw ConfigError("path objective needs 0 <= t_min < T");
  std::vector<std::pair<double, double>> grid;
  const double h = (horizon - opt.t_min) / (opt.grid_points - 1);
  for (int k = 0; k < opt.grid_points; ++k) {
    const double w = (k == 0 || k == opt.grid_points - 1) ? 0.5 * h : h;
    grid.emplace_back(opt.t_min + k * h, w);
  }
  return grid;
}

constexpr double kProbFloor = 1e-12;

}  // namespace

LossValue loss_path_kl_tabular(const Model& model, const TabularDistribution& pi_data, const ForwardProcess& process,
                               const PathKlOptions& opt, bool want_grad) {
  require_mode(model, ModelMode::noisy_marginal, "path_kl_tabular");
  const StateSpace& space = model.space();
  if (!(pi_data.space() == space) || !(process.space == space)) throw DomainError("path_kl_tabular: space mismatch");
  const auto xs = all_states(space);
  const int dims = space.dims();
  const int c_count = space.vocab();
  const double log_floor = std::log(kProbFloor);
  LossValue out;
  if (want_grad) out.grad.assign(model.params().size(), 0.0);
  for (const auto& [t, wt] : trapezoid_grid(opt, process.schedule.horizon())) {
    const TabularDistribution q_t = exact_marginal(pi_data, t, process);
    const double beta = process.schedule.beta(t);
    const auto pass = model.forward(xs, std::vector<double>(xs.size(), t));
    const Eigen::MatrixXd& l = pass->logits();
    Eigen::MatrixXd dl = Eigen::MatrixXd::Zero(l.rows(), l.cols());
    double slice = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double w = q_t[i];
      if (w == 0.0) continue;
      for (int d = 0; d < dims; ++d) {
        const Eigen::Index r = static_cast<Eigen::Index>(i) * dims + d;
        const int y = xs[i][d];
        RowVec ls = log_softmax(l.row(r));
        std::vector<bool> active(static_cast<std::size_t>(c_count), true);
        for (int c = 0; c < c_count; ++c)
          if (ls[c] < log_floor) {
            ls[c] = log_floor;
            active[static_cast<std::size_t>(c)] = false;
            ++out.clamped;
          }
        RowVec dls = RowVec::Zero(c_count);
        double term = 0.0;
        for (int z = 0; z < c_count; ++z) {
          if (z == y) continue;
          const double out_rate = beta * process.rate(y, z);
          const double in_rate = beta * process.rate(z, y);
          const double ratio = std::exp(ls[z] - ls[y]);
          term += ratio * out_rate - in_rate * (ls[y] - ls[z]);
          const double dz = ratio * out_rate + in_rate;
          dls[z] += dz;
          dls[y] -= dz;
        }
        slice += w * term;
        if (want_grad) {
          for (int c = 0; c < c_count; ++c)
            if (!active[static_cast<std::size_t>(c)]) dls[c] = 0.0;
          const RowVec p = log_softmax(l.row(r)).array().exp();
          dl.row(r) = wt * w * (dls - dls.sum() * p);
        }
      }
    }
    out.value += wt * slice;
    if (want_grad) pass->backward(dl, out.grad);
  }
  check_finite(out.value, "path_kl_tabular");
  return out;
}

double path_kl_exact_ratios(const TabularDistribution& pi_data, const ForwardProcess& process, const PathKlOptions& opt) {
  const StateSpace& space = pi_data.space();
  const auto xs = all_states(space);
  double total = 0.0;
  for (const auto& [t, wt] : trapezoid_grid(opt, process.schedule.horizon())) {
    const TabularDistribution q_t = exact_marginal(pi_data, t, process);
    const double beta = process.schedule.beta(t);
    double slice = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double qx = q_t[i];
      if (qx < kUnreachable) continue;
      for (int d = 0; d < space.dims(); ++d) {
        const int y = xs[i][d];
        const std::uint64_t stride = space.stride(d);
        for (int z = 0; z < space.vocab(); ++z) {
          if (z == y) continue;
          const std::uint64_t j = i + static_cast<std::uint64_t>(z) * stride - static_cast<std::uint64_t>(y) * stride;
          const double ratio = std::max(q_t[j], kProbFloor * qx) / qx;
          slice += qx * (ratio * beta * process.rate(y, z) - beta * process.rate(z, y) * std::log(1.0 / ratio));
        }
      }
    }
    total += wt * slice;
  }
  return total;
}

// ---------------------------------------------------------------------------

std::vector<double> OrdinalKernelSpec::row(int x0, double t) const {
  if (!(corrupt_rate > 0.0)) throw ConfigError("corrupt rate must be positive");
  if (!(t > 0.0)) throw DomainError("ordinal kernel needs t > 0");
  std::vector<double> w(static_cast<std::size_t>(vocab));
  double total = 0.0;
  for (int y = 0; y < vocab; ++y) {
    const double dy = y - x0;
    total += (w[static_cast<std::size_t>(y)] = std::exp(-dy * dy / (corrupt_rate * t)));
  }
  for (auto& v : w) v /= total;
  return w;
}

int OrdinalKernelSpec::sample(int x0, double t, Rng& rng) const { return rng.categorical(row(x0, t)); }

double ordinal_score_target(const OrdinalKernelSpec& kernel, int x0, double t, int xt) {
  if (xt < 0 || xt >= kernel.vocab) throw DomainError("ordinal value outside the support");
  // Log kernel up to its normalizer, which cancels in every ratio.
  auto log_k = [&](int y) {
    const double dy = y - x0;
    return -dy * dy / (kernel.corrupt_rate * t);
  };
  const bool has_up = xt + 1 < kernel.vocab;
  const bool has_down = xt - 1 >= 0;
  if (has_up && has_down) return 0.5 * (log_k(xt + 1) - log_k(xt - 1));
  if (has_up) return log_k(xt + 1) - log_k(xt);
  if (has_down) return log_k(xt) - log_k(xt - 1);
  return 0.0;
}

LossValue loss_ordinal_score(const Model& model, std::span<const TrainingTuple> batch, const OrdinalKernelSpec& kernel,
                             bool want_grad) {
  if (model.kind() != ModelKind::ordinal_score) throw ConfigError("ordinal_score loss needs an ordinal score model");
  return sampled_loss(model, batch, want_grad, "ordinal_score", [&](std::size_t i, int d, const RowVec& s, RowVec& g) {
    const double diff = s[0] - ordinal_score_target(kernel, batch[i].x0[d], batch[i].t, batch[i].xt[d]);
    g.resize(1);
    g[0] = 2.0 * diff;
    return diff * diff;
  });
}

}  // namespace cdiff
