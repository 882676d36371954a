#include "cdiff/models.hpp"

#include <algorithm>
#include <cmath>

#include "cdiff/error.hpp"
#include "cdiff/tabular_models.hpp"

namespace cdiff {

namespace {

template <class E>
struct Named {
  E value;
  const char* name;
};

constexpr Named<ModelMode> kModes[] = {{ModelMode::noisy_marginal, "noisy_marginal"},
                                       {ModelMode::x0_denoising, "x0_denoising"}};
constexpr Named<ModelKind> kKinds[] = {{ModelKind::tabular_oracle, "tabular_oracle"}, {ModelKind::tabular, "tabular"},
                                       {ModelKind::ebm, "ebm"},       {ModelKind::masked, "masked"},
                                       {ModelKind::hollow, "hollow"}, {ModelKind::ordinal_score, "ordinal_score"}};
constexpr Named<Precision> kPrecisions[] = {{Precision::float32, "float32"}, {Precision::float64, "float64"}};

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

}  // namespace

ModelMode parse_model_mode(std::string_view s) { return parse_named(kModes, s, "model mode"); }
std::string_view model_mode_name(ModelMode m) { return name_of(kModes, m); }
ModelKind parse_model_kind(std::string_view s) { return parse_named(kKinds, s, "model kind"); }
std::string_view model_kind_name(ModelKind k) { return name_of(kKinds, k); }
Precision parse_precision(std::string_view s) { return parse_named(kPrecisions, s, "precision"); }
std::string_view precision_name(Precision p) { return name_of(kPrecisions, p); }

Model::Model(StateSpace space, ModelMode mode, double horizon) : space_(space), mode_(mode), horizon_(horizon) {
  if (!(horizon > 0.0)) throw ConfigError("model horizon must be positive");
}

nlohmann::json Model::descriptor() const {
  return {{"kind", model_kind_name(kind())},
          {"dims", space_.dims()},
          {"vocab", space_.vocab()},
          {"ordinal", space_.ordinal()},
          {"mode", model_mode_name(mode_)},
          {"horizon", horizon_}};
}

void Model::initialize(Rng&, bool) {}

void Model::check_batch(std::span<const State> xs, std::span<const double> ts) const {
  if (xs.size() != ts.size()) throw DomainError("one time per state required");
  for (const auto& x : xs) space_.validate(x);
}

Eigen::MatrixXd Model::logits(std::span<const State> xs, std::span<const double> ts) const {
  return forward(xs, ts)->logits();
}

Eigen::MatrixXd Model::logits(std::span<const State> xs, double t) const {
  const std::vector<double> ts(xs.size(), t);
  return logits(xs, ts);
}

namespace {

Eigen::MatrixXd time_feature_matrix(std::span<const double> ts, double horizon) {
  Eigen::MatrixXd phi(nn::kTimeFeatures, static_cast<Eigen::Index>(ts.size()));
  for (std::size_t i = 0; i < ts.size(); ++i) phi.col(static_cast<Eigen::Index>(i)) = nn::time_features(ts[i], horizon);
  return phi;
}

// Base for the neural realizations: an Mlp evaluated in precision S.
class NeuralModel : public Model {
 public:
  NeuralModel(StateSpace space, ModelMode mode, double horizon, NetworkOptions opt)
      : Model(space, mode, horizon), opt_(opt) {
    if (opt_.hidden < 1 || opt_.layers < 1 || opt_.stream_width < 1) throw ConfigError("network sizes must be positive");
  }

  nlohmann::json descriptor() const override {
    auto j = Model::descriptor();
    j["hidden"] = opt_.hidden;
    j["layers"] = opt_.layers;
    j["precision"] = precision_name(opt_.precision);
    j["time_features"] = nn::kTimeFeatures;
    return j;
  }

  void initialize(Rng& rng, bool random_readout) override { net_.init(params_, rng, random_readout); }

 protected:
  NetworkOptions opt_;
  nn::Mlp net_;
};

template <class S>
using MatrixS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// Energy model

template <class S>
class EbmPass : public ForwardPass {
 public:
  EbmPass(const nn::Mlp& net, const nn::ParameterVector& params, const StateSpace& space, std::span<const State> xs,
          std::span<const double> ts, double horizon)
      : xs_(xs.begin(), xs.end()), dims_(space.dims()), vocab_(space.vocab()) {
    const int d_count = dims_;
    const int c_count = vocab_;
    const Eigen::Index rows_per = 1 + static_cast<Eigen::Index>(d_count) * (c_count - 1);
    const auto n = static_cast<Eigen::Index>(xs.size());
    MatrixS<S> input = MatrixS<S>::Zero(static_cast<Eigen::Index>(d_count) * c_count, n * rows_per);
    std::vector<int> group(static_cast<std::size_t>(n * rows_per));
    for (Eigen::Index i = 0; i < n; ++i) {
      const State& x = xs_[static_cast<std::size_t>(i)];
      for (Eigen::Index r = 0; r < rows_per; ++r) {
        const Eigen::Index col = i * rows_per + r;
        group[static_cast<std::size_t>(col)] = static_cast<int>(i);
        for (int d = 0; d < d_count; ++d) input(d * c_count + x[d], col) = S(1);
      }
      for (int d = 0; d < d_count; ++d)
        for (int c = 0; c < c_count; ++c) {
          if (c == x[d]) continue;
          const Eigen::Index col = i * rows_per + row_of(x, d, c);
          input(d * c_count + x[d], col) = S(0);
          input(d * c_count + c, col) = S(1);
        }
    }
    run_ = std::make_unique<nn::MlpRun<S>>(net, params, std::move(input), time_feature_matrix(ts, horizon),
                                           std::move(group));
    const auto& energy = run_->output();
    logits_.resize(n * d_count, c_count);
    for (Eigen::Index i = 0; i < n; ++i) {
      const State& x = xs_[static_cast<std::size_t>(i)];
      for (int d = 0; d < d_count; ++d)
        for (int c = 0; c < c_count; ++c)
          logits_(i * d_count + d, c) = -static_cast<double>(energy(0, i * rows_per + row_of(x, d, c)));
    }
  }

  void backward(const Eigen::MatrixXd& d_logits, std::span<double> grad) const override {
    const Eigen::Index rows_per = 1 + static_cast<Eigen::Index>(dims_) * (vocab_ - 1);
    const auto n = static_cast<Eigen::Index>(xs_.size());
    MatrixS<S> d_energy = MatrixS<S>::Zero(1, n * rows_per);
    for (Eigen::Index i = 0; i < n; ++i) {
      const State& x = xs_[static_cast<std::size_t>(i)];
      for (int d = 0; d < dims_; ++d)
        for (int c = 0; c < vocab_; ++c)
          d_energy(0, i * rows_per + row_of(x, d, c)) -= static_cast<S>(d_logits(i * dims_ + d, c));
    }
    run_->backward(d_energy, grad);
  }

 private:
  // Row of x with x^d = c inside one sample's block; row 0 is x itself.
  Eigen::Index row_of(const State& x, int d, int c) const {
    if (c == x[d]) return 0;
    return 1 + static_cast<Eigen::Index>(d) * (vocab_ - 1) + (c < x[d] ? c : c - 1);
  }

  std::vector<State> xs_;
  int dims_;
  int vocab_;
  std::unique_ptr<nn::MlpRun<S>> run_;
};

class EbmModel : public NeuralModel {
 public:
  EbmModel(const StateSpace& space, ModelMode mode, double horizon, const NetworkOptions& opt)
      : NeuralModel(space, mode, horizon, opt) {
    std::vector<nn::LayerDef> layers;
    int in = space.dims() * space.vocab();
    for (int l = 0; l < opt.layers; ++l) {
      layers.push_back({"hidden" + std::to_string(l), in, opt.hidden, true, true, {}});
      in = opt.hidden;
    }
    layers.push_back({"energy", in, 1, false, false, {}});
    net_ = nn::Mlp(std::move(layers), nn::kTimeFeatures, params_);
  }

  ModelKind kind() const override { return ModelKind::ebm; }

  std::unique_ptr<ForwardPass> forward(std::span<const State> xs, std::span<const double> ts) const override {
    check_batch(xs, ts);
    if (opt_.precision == Precision::float32)
      return std::make_unique<EbmPass<float>>(net_, params_, space_, xs, ts, horizon_);
    return std::make_unique<EbmPass<double>>(net_, params_, space_, xs, ts, horizon_);
  }
};

// ---------------------------------------------------------------------------
// Mask-token model

template <class S>
class MaskedPass : public ForwardPass {
 public:
  MaskedPass(const nn::Mlp& net, const nn::ParameterVector& params, const StateSpace& space, std::span<const State> xs,
             std::span<const double> ts, double horizon)
      : dims_(space.dims()), vocab_(space.vocab()) {
    const int d_count = dims_;
    const int c_in = vocab_ + 1;
    const auto n = static_cast<Eigen::Index>(xs.size());
    const Eigen::Index token_rows = static_cast<Eigen::Index>(d_count) * c_in;
    MatrixS<S> input = MatrixS<S>::Zero(token_rows + nn::kTimeFeatures, n * d_count);
    for (Eigen::Index i = 0; i < n; ++i) {
      const State& x = xs[static_cast<std::size_t>(i)];
      const Eigen::VectorXd phi = nn::time_features(ts[static_cast<std::size_t>(i)], horizon);
      for (int m = 0; m < d_count; ++m) {
        const Eigen::Index col = i * d_count + m;
        for (int d = 0; d < d_count; ++d) input(d * c_in + (d == m ? vocab_ : x[d]), col) = S(1);
        input.col(col).tail(nn::kTimeFeatures) = phi.cast<S>();
      }
    }
    run_ = std::make_unique<nn::MlpRun<S>>(net, params, std::move(input), Eigen::MatrixXd(), std::vector<int>());
    const auto& out = run_->output();
    logits_.resize(n * d_count, vocab_);
    for (Eigen::Index r = 0; r < n * d_count; ++r) {
      const auto d = static_cast<int>(r % d_count);
      for (int c = 0; c < vocab_; ++c) logits_(r, c) = static_cast<double>(out(d * vocab_ + c, r));
    }
  }

  void backward(const Eigen::MatrixXd& d_logits, std::span<double> grad) const override {
    const auto& out = run_->output();
    MatrixS<S> d_out = MatrixS<S>::Zero(out.rows(), out.cols());
    for (Eigen::Index r = 0; r < out.cols(); ++r) {
      const auto d = static_cast<int>(r % dims_);
      for (int c = 0; c < vocab_; ++c) d_out(d * vocab_ + c, r) = static_cast<S>(d_logits(r, c));
    }
    run_->backward(d_out, grad);
  }

 private:
  int dims_;
  int vocab_;
  std::unique_ptr<nn::MlpRun<S>> run_;
};

class MaskedModel : public NeuralModel {
 public:
  MaskedModel(const StateSpace& space, ModelMode mode, double horizon, const NetworkOptions& opt)
      : NeuralModel(space, mode, horizon, opt) {
    std::vector<nn::LayerDef> layers;
    int in = space.dims() * (space.vocab() + 1) + nn::kTimeFeatures;
    for (int l = 0; l < opt.layers; ++l) {
      layers.push_back({"hidden" + std::to_string(l), in, opt.hidden, true, false, {}});
      in = opt.hidden;
    }
    layers.push_back({"readout", in, space.dims() * space.vocab(), false, false, {}});
    net_ = nn::Mlp(std::move(layers), 0, params_);
  }

  ModelKind kind() const override { return ModelKind::masked; }

  std::unique_ptr<ForwardPass> forward(std::span<const State> xs, std::span<const double> ts) const override {
    check_batch(xs, ts);
    if (opt_.precision == Precision::float32)
      return std::make_unique<MaskedPass<float>>(net_, params_, space_, xs, ts, horizon_);
    return std::make_unique<MaskedPass<double>>(net_, params_, space_, xs, ts, horizon_);
  }
};

// ---------------------------------------------------------------------------
// Two-stream hollow model

// Plain one-pass evaluation: one-hot tokens plus time features in, D * C out.
template <class S>
class HollowPass : public ForwardPass {
 public:
  HollowPass(const nn::Mlp& net, const nn::ParameterVector& params, const StateSpace& space, std::span<const State> xs,
             std::span<const double> ts, double horizon)
      : vocab_(space.vocab()), dims_(space.dims()) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    const Eigen::Index token_rows = static_cast<Eigen::Index>(dims_) * vocab_;
    MatrixS<S> input = MatrixS<S>::Zero(token_rows + nn::kTimeFeatures, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const State& x = xs[static_cast<std::size_t>(i)];
      for (int d = 0; d < dims_; ++d) input(d * vocab_ + x[d], i) = S(1);
      input.col(i).tail(nn::kTimeFeatures) = nn::time_features(ts[static_cast<std::size_t>(i)], horizon).cast<S>();
    }
    run_ = std::make_unique<nn::MlpRun<S>>(net, params, std::move(input), Eigen::MatrixXd(), std::vector<int>());
    const auto& out = run_->output();
    logits_.resize(n * dims_, vocab_);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int d = 0; d < dims_; ++d)
        for (int c = 0; c < vocab_; ++c) logits_(i * dims_ + d, c) = static_cast<double>(out(d * vocab_ + c, i));
  }

  void backward(const Eigen::MatrixXd& d_logits, std::span<double> grad) const override {
    const auto& out = run_->output();
    MatrixS<S> d_out(out.rows(), out.cols());
    for (Eigen::Index i = 0; i < out.cols(); ++i)
      for (int d = 0; d < dims_; ++d)
        for (int c = 0; c < vocab_; ++c) d_out(d * vocab_ + c, i) = static_cast<S>(d_logits(i * dims_ + d, c));
    run_->backward(d_out, grad);
  }

 private:
  int vocab_;
  int dims_;
  std::unique_ptr<nn::MlpRun<S>> run_;
};

class HollowModel : public NeuralModel {
 public:
  HollowModel(const StateSpace& space, ModelMode mode, double horizon, const NetworkOptions& opt)
      : NeuralModel(space, mode, horizon, opt) {
    const int d_count = space.dims();
    const int c = space.vocab();
    const int s = opt.stream_width;
    const int h = 2 * s;
    const int in = d_count * c + nn::kTimeFeatures;
    const int width = 2 * d_count * s;
    auto fwd = [s](int i, int k) { return i * s + k; };
    auto bwd = [s, d_count](int i, int k) { return d_count * s + i * s + k; };

    std::vector<nn::LayerDef> layers;
    // First stream layer: forward units of position i read tokens j < i,
    // backward units read j > i; both read the time features.
    Eigen::MatrixXd m0 = Eigen::MatrixXd::Zero(width, in);
    for (int i = 0; i < d_count; ++i)
      for (int k = 0; k < s; ++k) {
        for (int j = 0; j < d_count; ++j)
          for (int v = 0; v < c; ++v) {
            if (j < i) m0(fwd(i, k), j * c + v) = 1.0;
            if (j > i) m0(bwd(i, k), j * c + v) = 1.0;
          }
        for (int u = 0; u < nn::kTimeFeatures; ++u) {
          m0(fwd(i, k), d_count * c + u) = 1.0;
          m0(bwd(i, k), d_count * c + u) = 1.0;
        }
      }
    layers.push_back({"stream0", in, width, true, false, m0});
    // Later stream layers: forward units see forward units j <= i, backward
    // units see backward units j >= i.
    Eigen::MatrixXd ms = Eigen::MatrixXd::Zero(width, width);
    for (int i = 0; i < d_count; ++i)
      for (int j = 0; j < d_count; ++j)
        for (int k = 0; k < s; ++k)
          for (int k2 = 0; k2 < s; ++k2) {
            if (j <= i) ms(fwd(i, k), fwd(j, k2)) = 1.0;
            if (j >= i) ms(bwd(i, k), bwd(j, k2)) = 1.0;
          }
    for (int l = 1; l < opt.layers; ++l) layers.push_back({"stream" + std::to_string(l), width, width, true, false, ms});
    // Combining block of position i reads both streams at position i.
    Eigen::MatrixXd mc = Eigen::MatrixXd::Zero(d_count * h, width);
    for (int i = 0; i < d_count; ++i)
      for (int k = 0; k < h; ++k)
        for (int k2 = 0; k2 < s; ++k2) {
          mc(i * h + k, fwd(i, k2)) = 1.0;
          mc(i * h + k, bwd(i, k2)) = 1.0;
        }
    layers.push_back({"combine", width, d_count * h, true, false, mc});
    Eigen::MatrixXd mr = Eigen::MatrixXd::Zero(d_count * c, d_count * h);
    for (int i = 0; i < d_count; ++i) mr.block(i * c, i * h, c, h).setOnes();
    layers.push_back({"readout", d_count * h, d_count * c, false, false, mr});
    net_ = nn::Mlp(std::move(layers), 0, params_);
  }

  ModelKind kind() const override { return ModelKind::hollow; }

  nlohmann::json descriptor() const override {
    auto j = NeuralModel::descriptor();
    j["stream_width"] = opt_.stream_width;
    j.erase("hidden");
    return j;
  }

  std::unique_ptr<ForwardPass> forward(std::span<const State> xs, std::span<const double> ts) const override {
    check_batch(xs, ts);
    if (opt_.precision == Precision::float32)
      return std::make_unique<HollowPass<float>>(net_, params_, space_, xs, ts, horizon_);
    return std::make_unique<HollowPass<double>>(net_, params_, space_, xs, ts, horizon_);
  }
};

// ---------------------------------------------------------------------------
// Ordinal score network

template <class S>
class ScorePass : public ForwardPass {
 public:
  ScorePass(const nn::Mlp& net, const nn::ParameterVector& params, const StateSpace& space, std::span<const State> xs,
            std::span<const double> ts, double horizon)
      : dims_(space.dims()) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    const double scale = space.vocab() > 1 ? 2.0 / (space.vocab() - 1) : 0.0;
    MatrixS<S> input(dims_ + nn::kTimeFeatures, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const State& x = xs[static_cast<std::size_t>(i)];
      for (int d = 0; d < dims_; ++d) input(d, i) = static_cast<S>(scale * x[d] - 1.0);
      input.col(i).tail(nn::kTimeFeatures) = nn::time_features(ts[static_cast<std::size_t>(i)], horizon).cast<S>();
    }
    run_ = std::make_unique<nn::MlpRun<S>>(net, params, std::move(input), Eigen::MatrixXd(), std::vector<int>());
    const auto& out = run_->output();
    logits_.resize(n * dims_, 1);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int d = 0; d < dims_; ++d) logits_(i * dims_ + d, 0) = static_cast<double>(out(d, i));
  }

  void backward(const Eigen::MatrixXd& d_logits, std::span<double> grad) const override {
    const auto& out = run_->output();
    MatrixS<S> d_out(out.rows(), out.cols());
    for (Eigen::Index i = 0; i < out.cols(); ++i)
      for (int d = 0; d < dims_; ++d) d_out(d, i) = static_cast<S>(d_logits(i * dims_ + d, 0));
    run_->backward(d_out, grad);
  }

 private:
  int dims_;
  std::unique_ptr<nn::MlpRun<S>> run_;
};

class OrdinalScoreModel : public NeuralModel {
 public:
  OrdinalScoreModel(const StateSpace& space, double horizon, const NetworkOptions& opt)
      : NeuralModel(space, ModelMode::noisy_marginal, horizon, opt) {
    if (!space.ordinal()) throw ConfigError("ordinal score model needs an ordinal space");
    std::vector<nn::LayerDef> layers;
    int in = space.dims() + nn::kTimeFeatures;
    for (int l = 0; l < opt.layers; ++l) {
      layers.push_back({"hidden" + std::to_string(l), in, opt.hidden, true, false, {}});
      in = opt.hidden;
    }
    layers.push_back({"score", in, space.dims(), false, false, {}});
    net_ = nn::Mlp(std::move(layers), 0, params_);
  }

  ModelKind kind() const override { return ModelKind::ordinal_score; }

  std::unique_ptr<ForwardPass> forward(std::span<const State> xs, std::span<const double> ts) const override {
    check_batch(xs, ts);
    if (opt_.precision == Precision::float32)
      return std::make_unique<ScorePass<float>>(net_, params_, space_, xs, ts, horizon_);
    return std::make_unique<ScorePass<double>>(net_, params_, space_, xs, ts, horizon_);
  }
};

template <class M, class... Args>
std::unique_ptr<Model> build(Args&&... args) {
  auto m = std::make_unique<M>(std::forward<Args>(args)...);
  Rng rng(0);
  m->initialize(rng, false);
  return m;
}

}  // namespace

std::unique_ptr<Model> make_ebm_model(const StateSpace& space, ModelMode mode, double horizon, const NetworkOptions& opt) {
  return build<EbmModel>(space, mode, horizon, opt);
}

std::unique_ptr<Model> make_masked_model(const StateSpace& space, ModelMode mode, double horizon,
                                         const NetworkOptions& opt) {
  return build<MaskedModel>(space, mode, horizon, opt);
}

std::unique_ptr<Model> make_hollow_model(const StateSpace& space, ModelMode mode, double horizon,
                                         const NetworkOptions& opt) {
  return build<HollowModel>(space, mode, horizon, opt);
}

std::unique_ptr<Model> make_ordinal_score_model(const StateSpace& space, double horizon, const NetworkOptions& opt) {
  return build<OrdinalScoreModel>(space, horizon, opt);
}

std::unique_ptr<Model> make_model(const nlohmann::json& j) {
  try {
    const ModelKind kind = parse_model_kind(j.at("kind").get<std::string>());
    const StateSpace space(j.at("dims").get<int>(), j.at("vocab").get<int>(), j.value("ordinal", false));
    const ModelMode mode = parse_model_mode(j.value("mode", std::string("noisy_marginal")));
    const double horizon = j.value("horizon", 1.0);
    NetworkOptions opt;
    opt.hidden = j.value("hidden", opt.hidden);
    opt.layers = j.value("layers", opt.layers);
    opt.stream_width = j.value("stream_width", opt.stream_width);
    opt.precision = parse_precision(j.value("precision", std::string("float32")));
    switch (kind) {
      case ModelKind::ebm:
        return make_ebm_model(space, mode, horizon, opt);
      case ModelKind::masked:
        return make_masked_model(space, mode, horizon, opt);
      case ModelKind::hollow:
        return make_hollow_model(space, mode, horizon, opt);
      case ModelKind::ordinal_score:
        return make_ordinal_score_model(space, horizon, opt);
      case ModelKind::tabular:
        return make_tabular_logit_model(space, mode, horizon, j.value("time_bins", 1));
      case ModelKind::tabular_oracle:
        break;
    }
    throw ConfigError("oracle models are built from a data distribution, not a descriptor");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model descriptor: ") + e.what());
  }
}

LeakReport leak_check(const Model& model, int trials, Rng& rng) {
  LeakReport report;
  const StateSpace& space = model.space();
  constexpr int kChunk = 128;
  for (int done = 0; done < trials;) {
    const int n = std::min(kChunk, trials - done);
    std::vector<State> xs;
    std::vector<double> ts;
    std::vector<int> dims;
    for (int k = 0; k < n; ++k) {
      State x(static_cast<std::size_t>(space.dims()));
      for (auto& v : x) v = rng.uniform_int(0, space.vocab() - 1);
      const double t = rng.uniform(0.0, model.horizon());
      const int d = rng.uniform_int(0, space.dims() - 1);
      State y = x;
      y[d] = (x[d] + rng.uniform_int(1, space.vocab() - 1)) % space.vocab();
      xs.push_back(std::move(x));
      xs.push_back(std::move(y));
      ts.push_back(t);
      ts.push_back(t);
      dims.push_back(d);
    }
    const Eigen::MatrixXd l = model.logits(xs, ts);
    const int dd = space.dims();
    for (int k = 0; k < n; ++k) {
      const int d = dims[static_cast<std::size_t>(k)];
      const double dev = (l.row((2 * k) * dd + d) - l.row((2 * k + 1) * dd + d)).cwiseAbs().maxCoeff();
      report.max_deviation = std::max(report.max_deviation, dev);
      if (dev != 0.0) ++report.violations;
    }
    report.trials += n;
    done += n;
  }
  return report;
}

}  // namespace cdiff
