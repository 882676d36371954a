#pragma once

// Small dense networks with hand-written reverse mode. Parameters always live
// in a float64 ParameterVector; a network copies them into its compute
// precision at the start of every forward pass, applying connectivity masks,
// so masked weights are exact zeros in every computation.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "cdiff/random.hpp"

namespace cdiff::nn {

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

// Flat parameter storage with a named block layout. Blocks are column-major
// rows x cols matrices laid end to end in registration order.
class ParameterVector {
 public:
  std::size_t add(std::string name, int rows, int cols);

  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock& block(std::size_t i) const { return blocks_.at(i); }
  std::size_t find(std::string_view name) const;

  Eigen::Map<Eigen::MatrixXd> matrix(std::size_t block);
  Eigen::Map<const Eigen::MatrixXd> matrix(std::size_t block) const;

  nlohmann::json layout() const;
  bool same_layout(const ParameterVector& other) const;

 private:
  std::vector<ParamBlock> blocks_;
  std::vector<double> values_;
};

inline constexpr int kTimeFeatures = 64;

// Sinusoidal features of t / horizon: 32 geometric frequencies in [1, 1e4],
// sine block followed by cosine block.
Eigen::VectorXd time_features(double t, double horizon);

// Dense layer description. mask (optional) is out x in with 0/1 entries.
struct LayerDef {
  std::string name;
  int in = 0;
  int out = 0;
  bool elu = true;
  // Adds W_t * phi(t) to the pre-activation.
  bool time_injection = false;
  Eigen::MatrixXd mask;
};

// Feed-forward stack; registers its blocks (W, b, optional W_t per layer) in a
// ParameterVector.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<LayerDef> layers, int time_dim, ParameterVector& params);

  int input_dim() const { return layers_.front().in; }
  int output_dim() const { return layers_.back().out; }
  int time_dim() const { return time_dim_; }
  const std::vector<LayerDef>& layers() const { return layers_; }

  // Xavier-uniform weights (masked entries zero), zero biases; the last layer is
  // zeroed unless random_readout.
  void init(ParameterVector& params, Rng& rng, bool random_readout = false) const;

 private:
  template <class S>
  friend class MlpRun;

  struct Slots {
    std::size_t w = 0;
    std::size_t b = 0;
    std::size_t wt = 0;
  };

  std::vector<LayerDef> layers_;
  std::vector<Slots> slots_;
  int time_dim_ = 0;
};

// One forward evaluation in precision S, holding the activations needed by
// backward. Inputs are column-per-sample; time features are given per group
// and broadcast through group[i] (groups let many rows share one time).
template <class S>
class MlpRun {
 public:
  using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

  MlpRun(const Mlp& net, const ParameterVector& params, Matrix input, const Eigen::MatrixXd& time_feats,
         std::vector<int> group);

  const Matrix& output() const { return acts_.back(); }
  // Accumulates d(loss)/d(params) into grad given d(loss)/d(output).
  void backward(const Matrix& d_output, std::span<double> grad) const;

 private:
  void accumulate(std::span<double> grad, std::size_t block, const Eigen::MatrixXd& g) const;

  const Mlp* net_;
  const ParameterVector* params_;
  std::vector<Matrix> weights_;
  std::vector<Matrix> time_proj_weights_;
  Matrix phi_;
  std::vector<int> group_;
  std::vector<Matrix> pre_;
  std::vector<Matrix> acts_;  // acts_[0] is the input
};

extern template class MlpRun<float>;
extern template class MlpRun<double>;

enum class AdamPreset { standard, zero_momentum };

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamConfig preset(AdamPreset p, double learning_rate);
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

// Bias-corrected Adam update in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg);

}  // namespace cdiff::nn
