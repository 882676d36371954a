#include "cdiff/nn.hpp"

#include <cmath>

#include "cdiff/error.hpp"

namespace cdiff::nn {

std::size_t ParameterVector::add(std::string name, int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw DomainError("parameter block '" + name + "' has an empty shape");
  if (find(name) != blocks_.size()) throw DomainError("duplicate parameter block '" + name + "'");
  ParamBlock b{std::move(name), values_.size(), rows, cols};
  values_.resize(values_.size() + b.size(), 0.0);
  blocks_.push_back(std::move(b));
  return blocks_.size() - 1;
}

std::size_t ParameterVector::find(std::string_view name) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    if (blocks_[i].name == name) return i;
  return blocks_.size();
}

Eigen::Map<Eigen::MatrixXd> ParameterVector::matrix(std::size_t block) {
  const auto& b = blocks_.at(block);
  return {values_.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<const Eigen::MatrixXd> ParameterVector::matrix(std::size_t block) const {
  const auto& b = blocks_.at(block);
  return {values_.data() + b.offset, b.rows, b.cols};
}

nlohmann::json ParameterVector::layout() const {
  auto arr = nlohmann::json::array();
  for (const auto& b : blocks_) arr.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}});
  return arr;
}

bool ParameterVector::same_layout(const ParameterVector& other) const {
  if (blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& a = blocks_[i];
    const auto& b = other.blocks_[i];
    if (a.name != b.name || a.rows != b.rows || a.cols != b.cols) return false;
  }
  return true;
}

Eigen::VectorXd time_features(double t, double horizon) {
  constexpr int half = kTimeFeatures / 2;
  Eigen::VectorXd phi(kTimeFeatures);
  const double u = t / horizon;
  for (int k = 0; k < half; ++k) {
    const double freq = std::pow(1e4, static_cast<double>(k) / (half - 1));
    phi[k] = std::sin(freq * u);
    phi[half + k] = std::cos(freq * u);
  }
  return phi;
}

Mlp::Mlp(std::vector<LayerDef> layers, int time_dim, ParameterVector& params)
    : layers_(std::move(layers)), time_dim_(time_dim) {
  if (layers_.empty()) throw DomainError("network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& def = layers_[l];
    if (l > 0 && def.in != layers_[l - 1].out) throw DomainError("layer '" + def.name + "' input width mismatch");
    if (def.mask.size() != 0 && (def.mask.rows() != def.out || def.mask.cols() != def.in))
      throw DomainError("layer '" + def.name + "' mask has the wrong shape");
    if (def.time_injection && time_dim_ <= 0) throw DomainError("time injection without time features");
    Slots s;
    s.w = params.add(def.name + ".w", def.out, def.in);
    s.b = params.add(def.name + ".b", def.out, 1);
    if (def.time_injection) s.wt = params.add(def.name + ".wt", def.out, time_dim_);
    slots_.push_back(s);
  }
}

void Mlp::init(ParameterVector& params, Rng& rng, bool random_readout) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& def = layers_[l];
    const bool last = l + 1 == layers_.size();
    auto w = params.matrix(slots_[l].w);
    params.matrix(slots_[l].b).setZero();
    const double a = std::sqrt(6.0 / (def.in + def.out));
    const bool zero = last && !random_readout;
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const bool on = def.mask.size() == 0 || def.mask(i, j) != 0.0;
        w(i, j) = (zero || !on) ? 0.0 : rng.uniform(-a, a);
      }
    if (def.time_injection) {
      auto wt = params.matrix(slots_[l].wt);
      const double at = std::sqrt(6.0 / (time_dim_ + def.out));
      for (Eigen::Index j = 0; j < wt.cols(); ++j)
        for (Eigen::Index i = 0; i < wt.rows(); ++i) wt(i, j) = rng.uniform(-at, at);
    }
  }
}

template <class S>
MlpRun<S>::MlpRun(const Mlp& net, const ParameterVector& params, Matrix input, const Eigen::MatrixXd& time_feats,
                  std::vector<int> group)
    : net_(&net), params_(&params), group_(std::move(group)) {
  const auto& layers = net.layers_;
  if (input.rows() != layers.front().in) throw DomainError("network input has the wrong width");
  const Eigen::Index n = input.cols();
  const bool uses_time = net.time_dim_ > 0;
  if (uses_time) {
    if (time_feats.rows() != net.time_dim_) throw DomainError("time features have the wrong width");
    if (static_cast<Eigen::Index>(group_.size()) != n) throw DomainError("one time group per input column required");
    for (int g : group_)
      if (g < 0 || g >= time_feats.cols()) throw DomainError("time group index out of range");
    phi_ = time_feats.cast<S>();
  }
  acts_.reserve(layers.size() + 1);
  acts_.push_back(std::move(input));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& def = layers[l];
    const auto& slot = net.slots_[l];
    Eigen::MatrixXd w = params.matrix(slot.w);
    if (def.mask.size() != 0) w = w.cwiseProduct(def.mask);
    weights_.push_back(w.cast<S>());
    Matrix z = weights_.back() * acts_.back();
    z.colwise() += params.matrix(slot.b).col(0).cast<S>();
    if (def.time_injection) {
      time_proj_weights_.push_back(params.matrix(slot.wt).cast<S>());
      const Matrix proj = time_proj_weights_.back() * phi_;
      for (Eigen::Index i = 0; i < n; ++i) z.col(i) += proj.col(group_[static_cast<std::size_t>(i)]);
    } else {
      time_proj_weights_.emplace_back();
    }
    if (!z.allFinite()) throw NumericError("non-finite activation in layer '" + def.name + "'");
    Matrix a = def.elu ? Matrix((z.array() > S(0)).select(z.array(), z.array().exp() - S(1))) : z;
    pre_.push_back(std::move(z));
    acts_.push_back(std::move(a));
  }
}

template <class S>
void MlpRun<S>::accumulate(std::span<double> grad, std::size_t block, const Eigen::MatrixXd& g) const {
  const auto& b = params_->block(block);
  if (grad.size() != params_->size()) throw DomainError("gradient buffer does not match the parameter vector");
  Eigen::Map<Eigen::MatrixXd>(grad.data() + b.offset, b.rows, b.cols) += g;
}

template <class S>
void MlpRun<S>::backward(const Matrix& d_output, std::span<double> grad) const {
  const auto& layers = net_->layers_;
  if (d_output.rows() != acts_.back().rows() || d_output.cols() != acts_.back().cols())
    throw DomainError("output gradient has the wrong shape");
  Matrix da = d_output;
  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto& def = layers[li];
    const auto& slot = net_->slots_[li];
    const Matrix& z = pre_[li];
    const Matrix& a = acts_[li + 1];
    Matrix dz = def.elu ? Matrix(da.array() * (z.array() > S(0)).select(S(1), a.array() + S(1))) : da;

    const Matrix dw = dz * acts_[li].transpose();
    Eigen::MatrixXd dwd = dw.template cast<double>();
    if (def.mask.size() != 0) dwd = dwd.cwiseProduct(def.mask);
    accumulate(grad, slot.w, dwd);
    accumulate(grad, slot.b, dz.rowwise().sum().template cast<double>());
    if (def.time_injection) {
      Matrix dproj = Matrix::Zero(dz.rows(), phi_.cols());
      for (Eigen::Index i = 0; i < dz.cols(); ++i) dproj.col(group_[static_cast<std::size_t>(i)]) += dz.col(i);
      accumulate(grad, slot.wt, (dproj * phi_.transpose()).template cast<double>());
    }
    if (li > 0) da = weights_[li].transpose() * dz;
  }
}

template class MlpRun<float>;
template class MlpRun<double>;

AdamConfig AdamConfig::preset(AdamPreset p, double learning_rate) {
  AdamConfig c;
  c.learning_rate = learning_rate;
  if (p == AdamPreset::zero_momentum) {
    c.beta1 = 0.0;
    c.beta2 = 0.99;
  }
  return c;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg) {
  if (grads.size() != params.size()) throw DomainError("adam_step: gradient and parameter sizes differ");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw DomainError("adam_step: moment and parameter sizes differ");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

}  // namespace cdiff::nn
