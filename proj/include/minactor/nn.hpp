#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace minactor::nn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Activation { relu, tanh };

/// Output nonlinearity. `tanh_scaled` maps to [-bound, bound].
struct OutputActivation {
  enum class Kind { linear, tanh, tanh_scaled };

  Kind kind = Kind::linear;
  double bound = 1.0;

  static OutputActivation linear() { return {Kind::linear, 1.0}; }
  static OutputActivation tanh() { return {Kind::tanh, 1.0}; }
  static OutputActivation tanh_scaled(double bound) { return {Kind::tanh_scaled, bound}; }

  bool operator==(const OutputActivation&) const = default;
};

/// Fully connected network shape. `hidden` holds hidden widths only; the
/// output layer is implied by `out_dim`, so |16,16| with one output is
/// {16, 16}. An empty `hidden` is a single linear layer.
struct MlpSpec {
  int in_dim = 1;
  std::vector<int> hidden;
  int out_dim = 1;
  Activation hidden_activation = Activation::relu;
  OutputActivation output = OutputActivation::linear();

  /// Throws SpecError on zero/negative dims, more than two hidden layers, or
  /// a non-positive tanh_scaled bound.
  void validate() const;

  bool operator==(const MlpSpec&) const = default;
};

struct Layer {
  Mat weight;  // out x in
  Vec bias;    // out
};

struct MlpParams {
  MlpSpec spec;
  std::vector<Layer> layers;

  /// All-zero parameters with the layer shapes implied by `spec`.
  static MlpParams zeros(const MlpSpec& spec);

  std::int64_t size() const;
  bool all_finite() const;

  /// Flat copy in layer order, each layer as row-major weight then bias.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> values);

  bool same_shape(const MlpParams& other) const;
};

/// Post-activation values of every layer for one batch; column j is sample j.
/// `activations[0]` is the input batch, `activations.back()` the output.
struct ForwardCache {
  std::vector<Mat> activations;
};

struct Gradients {
  MlpParams param_grads;
  Vec input_grad;
};

struct BatchGradients {
  MlpParams params;  // summed over the batch columns
  Mat inputs;        // in_dim x batch, empty unless requested
};

MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed);

Vec forward(const MlpParams& params, const Vec& input);

/// Batched forward; inputs are in_dim x batch. Fills `cache` when non-null.
Mat forward_batch(const MlpParams& params, const Mat& inputs, ForwardCache* cache = nullptr);

/// Exact gradients of (output . output_grad) w.r.t. parameters and input.
Gradients backward(const MlpParams& params, const Vec& input, const Vec& output_grad);

BatchGradients backward_batch(const MlpParams& params, const ForwardCache& cache,
                              const Mat& output_grads, bool want_input_grads);

struct AdamState {
  std::int64_t step_count = 0;
  MlpParams m;
  MlpParams v;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState fresh(const MlpParams& params, double lr);
};

/// One bias-corrected Adam descent step. Throws DivergenceError if a
/// gradient is non-finite; `params` and `state` are untouched in that case.
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state);

/// target <- tau * online + (1 - tau) * target.
void soft_update(MlpParams& target, const MlpParams& online, double tau);

/// Weights plus biases of an in_dim -> hidden... -> out_dim network.
std::int64_t param_count(int in_dim, std::span<const int> hidden, int out_dim);
std::int64_t param_count(const MlpSpec& spec);

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

}  // namespace minactor::nn
