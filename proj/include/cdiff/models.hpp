#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "cdiff/nn.hpp"
#include "cdiff/random.hpp"
#include "cdiff/state_space.hpp"

namespace cdiff {

// What the per-dimension logits describe: the noisy conditional
// q_t(X^d | x^{\d}) or the denoising posterior q_{0|t}(X_0^d | x_t^{\d}).
enum class ModelMode { noisy_marginal, x0_denoising };

ModelMode parse_model_mode(std::string_view s);
std::string_view model_mode_name(ModelMode m);

enum class ModelKind { tabular_oracle, tabular, ebm, masked, hollow, ordinal_score };

ModelKind parse_model_kind(std::string_view s);
std::string_view model_kind_name(ModelKind k);

enum class Precision { float32, float64 };

Precision parse_precision(std::string_view s);
std::string_view precision_name(Precision p);

// Result of one batched evaluation. For conditional models logits() is
// (n * D) x C with row i * D + d holding the logits of dimension d of sample i.
// Ordinal score models produce (n * D) x 1 scores.
class ForwardPass {
 public:
  virtual ~ForwardPass() = default;
  const Eigen::MatrixXd& logits() const { return logits_; }
  // Adds d(loss)/d(theta) to grad given d(loss)/d(logits).
  virtual void backward(const Eigen::MatrixXd& d_logits, std::span<double> grad) const = 0;

 protected:
  Eigen::MatrixXd logits_;
};

class Model {
 public:
  virtual ~Model() = default;

  virtual ModelKind kind() const = 0;
  const StateSpace& space() const { return space_; }
  ModelMode mode() const { return mode_; }
  double horizon() const { return horizon_; }
  // Width of one output row: vocab for conditional models, 1 for score models.
  int output_width() const { return kind() == ModelKind::ordinal_score ? 1 : space_.vocab(); }

  // Architecture descriptor; checkpoints are compatible iff descriptors match.
  virtual nlohmann::json descriptor() const;
  // Re-draws parameters. random_readout also randomizes the final layer
  // (gradient checks need a non-degenerate network).
  virtual void initialize(Rng& rng, bool random_readout = false);

  nn::ParameterVector& params() { return params_; }
  const nn::ParameterVector& params() const { return params_; }

  virtual std::unique_ptr<ForwardPass> forward(std::span<const State> xs, std::span<const double> ts) const = 0;
  Eigen::MatrixXd logits(std::span<const State> xs, std::span<const double> ts) const;
  Eigen::MatrixXd logits(std::span<const State> xs, double t) const;

 protected:
  Model(StateSpace space, ModelMode mode, double horizon);
  void check_batch(std::span<const State> xs, std::span<const double> ts) const;

  StateSpace space_;
  ModelMode mode_;
  double horizon_;
  nn::ParameterVector params_;
};

struct NetworkOptions {
  int hidden = 256;
  int layers = 3;
  // Per-position width of each directional stream (hollow only).
  int stream_width = 16;
  Precision precision = Precision::float32;
};

// Energy model: logits[c] of dimension d are -f(x with x^d = c, t) for an MLP
// energy f with one-hot input and sinusoidal time features added to every
// hidden pre-activation. Evaluates 1 + D (C - 1) energies per sample.
std::unique_ptr<Model> make_ebm_model(const StateSpace& space, ModelMode mode, double horizon, const NetworkOptions& opt);
// Mask-token model: vocabulary C + 1, one network pass per dimension with x^d
// replaced by the mask token; time features concatenated to the input.
std::unique_ptr<Model> make_masked_model(const StateSpace& space, ModelMode mode, double horizon,
                                         const NetworkOptions& opt);
// Two-stream masked network emitting all D conditionals in one pass; output d
// has no path from input d.
std::unique_ptr<Model> make_hollow_model(const StateSpace& space, ModelMode mode, double horizon,
                                         const NetworkOptions& opt);
// Scalar per-dimension score s(x, t) for ordinal data.
std::unique_ptr<Model> make_ordinal_score_model(const StateSpace& space, double horizon, const NetworkOptions& opt);

// Builds a trainable model from its descriptor. Oracle models are not
// constructible this way.
std::unique_ptr<Model> make_model(const nlohmann::json& descriptor);

struct LeakReport {
  int trials = 0;
  int violations = 0;
  double max_deviation = 0.0;
};

// Random (x, t, d, c') probes: the d-th logits must not change when x^d is
// replaced by c'.
LeakReport leak_check(const Model& model, int trials, Rng& rng);

}  // namespace cdiff
