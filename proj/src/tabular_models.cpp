#include "cdiff/tabular_models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "cdiff/error.hpp"
#include "cdiff/kernels.hpp"

namespace cdiff {

ConditionalTable::ConditionalTable(StateSpace space, std::vector<double> probs, std::vector<char> defined)
    : space_(space), probs_(std::move(probs)), defined_(std::move(defined)) {
  const auto n = space_.state_count() * static_cast<std::uint64_t>(space_.dims());
  if (defined_.size() != n || probs_.size() != n * static_cast<std::uint64_t>(space_.vocab()))
    throw DomainError("conditional table has the wrong size");
}

ConditionalTable slice_conditionals(const StateSpace& space, std::span<const double> weights) {
  space.require_enumerable();
  const std::uint64_t n = space.state_count();
  if (weights.size() != n) throw DomainError("table size does not match the state space");
  const int dims = space.dims();
  const int c_count = space.vocab();
  std::vector<double> probs(n * static_cast<std::uint64_t>(dims) * static_cast<std::uint64_t>(c_count), 0.0);
  std::vector<char> defined(n * static_cast<std::uint64_t>(dims), 0);
  for (std::uint64_t xi = 0; xi < n; ++xi) {
    const State x = space.state_at(xi);
    for (int d = 0; d < dims; ++d) {
      const std::uint64_t stride = space.stride(d);
      const std::uint64_t base = xi - static_cast<std::uint64_t>(x[d]) * stride;
      double total = 0.0;
      for (int c = 0; c < c_count; ++c) total += weights[base + static_cast<std::uint64_t>(c) * stride];
      const std::uint64_t row = xi * static_cast<std::uint64_t>(dims) + static_cast<std::uint64_t>(d);
      if (!(total > 0.0)) continue;
      defined[row] = 1;
      for (int c = 0; c < c_count; ++c)
        probs[row * static_cast<std::uint64_t>(c_count) + static_cast<std::uint64_t>(c)] =
            weights[base + static_cast<std::uint64_t>(c) * stride] / total;
    }
  }
  return ConditionalTable(space, std::move(probs), std::move(defined));
}

ConditionalTable tabular_conditionals(const TabularDistribution& q) { return slice_conditionals(q.space(), q.probs()); }

ConditionalTable x0_posterior_table(const TabularDistribution& pi0, double t, const ForwardProcess& process) {
  const StateSpace& space = process.space;
  space.require_enumerable();
  if (!(pi0.space() == space)) throw DomainError("distribution and process use different spaces");
  const Eigen::MatrixXd k = process.kernel(0.0, t);
  const std::uint64_t n = space.state_count();
  const int dims = space.dims();
  const int c_count = space.vocab();
  std::vector<double> probs(n * static_cast<std::uint64_t>(dims) * static_cast<std::uint64_t>(c_count), 0.0);
  std::vector<char> defined(n * static_cast<std::uint64_t>(dims), 0);
  for (int d = 0; d < dims; ++d) {
    // Joint weight of (x_0^d, x_t^{\d}): propagate every dimension except d.
    std::vector<double> joint(pi0.probs().begin(), pi0.probs().end());
    for (int e = 0; e < dims; ++e)
      if (e != d) joint = kernels::apply_dim_kernel(space, joint, e, k);
    const ConditionalTable slice = slice_conditionals(space, joint);
    for (std::uint64_t xi = 0; xi < n; ++xi) {
      const std::uint64_t row = xi * static_cast<std::uint64_t>(dims) + static_cast<std::uint64_t>(d);
      defined[row] = slice.defined(xi, d) ? 1 : 0;
      for (int c = 0; c < c_count; ++c)
        probs[row * static_cast<std::uint64_t>(c_count) + static_cast<std::uint64_t>(c)] = slice(xi, d, c);
    }
  }
  return ConditionalTable(space, std::move(probs), std::move(defined));
}

double ratio_via_conditional_chain(const ConditionalTable& cond, const State& x, const State& y) {
  const StateSpace& space = cond.space();
  space.validate(x);
  space.validate(y);
  State w = y;
  double ratio = 1.0;
  for (int d = 0; d < space.dims(); ++d) {
    if (x[d] != y[d]) {
      const std::uint64_t wi = space.index(w);
      const double num = cond(wi, d, y[d]);
      const double den = cond(wi, d, x[d]);
      if (!cond.defined(wi, d) || num <= 0.0 || den <= 0.0)
        throw NumericError("zero conditional in chain ratio at dimension " + std::to_string(d));
      ratio *= num / den;
    }
    w[d] = x[d];
  }
  return ratio;
}

TabularDistribution reconstruct_from_conditionals(const ConditionalTable& cond) {
  const StateSpace& space = cond.space();
  space.require_enumerable();
  const State ref = space.state_at(0);
  std::vector<double> w(space.state_count());
  for (std::uint64_t i = 0; i < w.size(); ++i) w[i] = ratio_via_conditional_chain(cond, ref, space.state_at(i));
  return TabularDistribution::from_weights(space, std::move(w));
}

Eigen::MatrixXd conditional_logits(const ConditionalTable& cond, std::span<const State> xs) {
  const StateSpace& space = cond.space();
  const int dims = space.dims();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()) * dims, space.vocab());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::uint64_t xi = space.index(xs[i]);
    for (int d = 0; d < dims; ++d) {
      const Eigen::Index r = static_cast<Eigen::Index>(i) * dims + d;
      for (int c = 0; c < space.vocab(); ++c)
        out(r, c) = cond.defined(xi, d) ? std::log(std::max(cond(xi, d, c), 1e-300)) : 0.0;
    }
  }
  return out;
}

namespace {

class ConstantPass : public ForwardPass {
 public:
  explicit ConstantPass(Eigen::MatrixXd logits) { logits_ = std::move(logits); }
  void backward(const Eigen::MatrixXd&, std::span<double>) const override {}
};

class OracleModel : public Model {
 public:
  OracleModel(TabularDistribution pi0, ForwardProcess process, ModelMode mode, bool fixed)
      : Model(pi0.space(), mode, process.schedule.horizon()),
        pi0_(std::move(pi0)),
        process_(std::move(process)),
        fixed_(fixed) {
    space_.require_enumerable();
  }

  ModelKind kind() const override { return ModelKind::tabular_oracle; }

  std::unique_ptr<ForwardPass> forward(std::span<const State> xs, std::span<const double> ts) const override {
    check_batch(xs, ts);
    const int dims = space_.dims();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()) * dims, space_.vocab());
    std::size_t i = 0;
    while (i < xs.size()) {
      std::size_t j = i;
      while (j < xs.size() && ts[j] == ts[i]) ++j;
      const auto table = table_at(ts[i]);
      out.middleRows(static_cast<Eigen::Index>(i) * dims, static_cast<Eigen::Index>(j - i) * dims) =
          conditional_logits(*table, xs.subspan(i, j - i));
      i = j;
    }
    return std::make_unique<ConstantPass>(std::move(out));
  }

 private:
  std::shared_ptr<const ConditionalTable> table_at(double t) const {
    const double key = fixed_ ? 0.0 : t;
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    std::shared_ptr<const ConditionalTable> table;
    if (fixed_)
      table = std::make_shared<const ConditionalTable>(tabular_conditionals(pi0_));
    else if (mode_ == ModelMode::x0_denoising)
      table = std::make_shared<const ConditionalTable>(x0_posterior_table(pi0_, t, process_));
    else
      table = std::make_shared<const ConditionalTable>(tabular_conditionals(exact_marginal(pi0_, t, process_)));
    if (cache_.size() >= 256) cache_.clear();
    cache_.emplace(key, table);
    return table;
  }

  TabularDistribution pi0_;
  ForwardProcess process_;
  bool fixed_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::shared_ptr<const ConditionalTable>> cache_;
};

class TabularLogitPass : public ForwardPass {
 public:
  TabularLogitPass(Eigen::MatrixXd logits, std::vector<std::size_t> columns, int vocab)
      : columns_(std::move(columns)), vocab_(vocab) {
    logits_ = std::move(logits);
  }

  void backward(const Eigen::MatrixXd& d_logits, std::span<double> grad) const override {
    for (std::size_t r = 0; r < columns_.size(); ++r)
      for (int c = 0; c < vocab_; ++c)
        grad[columns_[r] * static_cast<std::size_t>(vocab_) + static_cast<std::size_t>(c)] +=
            d_logits(static_cast<Eigen::Index>(r), c);
  }

 private:
  std::vector<std::size_t> columns_;
  int vocab_;
};

class TabularLogitModel : public Model {
 public:
  TabularLogitModel(const StateSpace& space, ModelMode mode, double horizon, int bins)
      : Model(space, mode, horizon), bins_(bins) {
    if (bins < 1) throw ConfigError("time_bins must be >= 1");
    std::uint64_t contexts = 1;
    for (int e = 1; e < space.dims(); ++e) {
      contexts *= static_cast<std::uint64_t>(space.vocab());
      if (contexts > (std::uint64_t{1} << 22)) throw CapacityError("tabular model: too many contexts");
    }
    contexts_ = contexts;
    const std::uint64_t cols = contexts * static_cast<std::uint64_t>(space.dims()) * static_cast<std::uint64_t>(bins);
    if (cols * static_cast<std::uint64_t>(space.vocab()) > (std::uint64_t{1} << 24))
      throw CapacityError("tabular model: too many parameters");
    params_.add("logits", space.vocab(), static_cast<int>(cols));
  }

  ModelKind kind() const override { return ModelKind::tabular; }

  nlohmann::json descriptor() const override {
    auto j = Model::descriptor();
    j["time_bins"] = bins_;
    return j;
  }

  void initialize(Rng&, bool random_readout) override {
    // Zero logits give uniform conditionals; random ones are for gradient checks.
    Rng local(17);
    for (auto& v : params_.values()) v = random_readout ? local.uniform(-1.0, 1.0) : 0.0;
  }

  std::unique_ptr<ForwardPass> forward(std::span<const State> xs, std::span<const double> ts) const override {
    check_batch(xs, ts);
    const int dims = space_.dims();
    const int c_count = space_.vocab();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()) * dims, c_count);
    std::vector<std::size_t> columns(xs.size() * static_cast<std::size_t>(dims));
    const auto values = params_.values();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const int bin = std::clamp(static_cast<int>(std::floor(ts[i] / horizon_ * bins_)), 0, bins_ - 1);
      for (int d = 0; d < dims; ++d) {
        std::uint64_t ctx = 0;
        for (int e = 0; e < dims; ++e)
          if (e != d) ctx = ctx * static_cast<std::uint64_t>(c_count) + static_cast<std::uint64_t>(xs[i][e]);
        const std::size_t col = (static_cast<std::size_t>(bin) * static_cast<std::size_t>(dims) + static_cast<std::size_t>(d)) *
                                    contexts_ +
                                ctx;
        const std::size_t r = i * static_cast<std::size_t>(dims) + static_cast<std::size_t>(d);
        columns[r] = col;
        for (int c = 0; c < c_count; ++c)
          out(static_cast<Eigen::Index>(r), c) = values[col * static_cast<std::size_t>(c_count) + static_cast<std::size_t>(c)];
      }
    }
    return std::make_unique<TabularLogitPass>(std::move(out), std::move(columns), c_count);
  }

 private:
  int bins_;
  std::size_t contexts_ = 1;
};

}  // namespace

std::unique_ptr<Model> make_oracle_model(const TabularDistribution& pi0, const ForwardProcess& process, ModelMode mode) {
  return std::make_unique<OracleModel>(pi0, process, mode, false);
}

std::unique_ptr<Model> make_fixed_oracle_model(const TabularDistribution& q, double horizon) {
  ForwardProcess process{q.space(), NoiseSchedule::constant(1.0, horizon), RateSpec::uniform(q.space().vocab())};
  return std::make_unique<OracleModel>(q, process, ModelMode::noisy_marginal, true);
}

std::unique_ptr<Model> make_tabular_logit_model(const StateSpace& space, ModelMode mode, double horizon, int time_bins) {
  return std::make_unique<TabularLogitModel>(space, mode, horizon, time_bins);
}

}  // namespace cdiff
