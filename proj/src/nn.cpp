#include "minactor/nn.hpp"

#include <cmath>

#include "minactor/errors.hpp"
#include "minactor/rng.hpp"

namespace minactor::nn {
namespace {

void check_dim(int d, const char* what) {
  if (d < 1) throw SpecError(std::string(what) + " must be >= 1, got " + std::to_string(d));
}

std::vector<int> layer_widths(const MlpSpec& spec) {
  std::vector<int> widths;
  widths.reserve(spec.hidden.size() + 2);
  widths.push_back(spec.in_dim);
  widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
  widths.push_back(spec.out_dim);
  return widths;
}

void apply_hidden(Mat& z, Activation a) {
  if (a == Activation::relu) {
    z = z.cwiseMax(0.0);
  } else {
    z = z.array().tanh().matrix();
  }
}

void apply_output(Mat& z, const OutputActivation& out) {
  switch (out.kind) {
    case OutputActivation::Kind::linear:
      break;
    case OutputActivation::Kind::tanh:
      z = z.array().tanh().matrix();
      break;
    case OutputActivation::Kind::tanh_scaled:
      z = (z.array().tanh() * out.bound).matrix();
      break;
  }
}

// Multiplies `grad` in place by the activation derivative, expressed in terms
// of the post-activation value `y`.
void hidden_derivative(Mat& grad, const Mat& y, Activation a) {
  if (a == Activation::relu) {
    grad = (y.array() > 0.0).select(grad, 0.0);
  } else {
    grad.array() *= 1.0 - y.array().square();
  }
}

void output_derivative(Mat& grad, const Mat& y, const OutputActivation& out) {
  switch (out.kind) {
    case OutputActivation::Kind::linear:
      break;
    case OutputActivation::Kind::tanh:
      grad.array() *= 1.0 - y.array().square();
      break;
    case OutputActivation::Kind::tanh_scaled: {
      const double b = out.bound;
      grad.array() *= b * (1.0 - (y.array() / b).square());
      break;
    }
  }
}

}  // namespace

void MlpSpec::validate() const {
  check_dim(in_dim, "in_dim");
  check_dim(out_dim, "out_dim");
  if (hidden.size() > 2) throw SpecError("at most two hidden layers are supported");
  for (int h : hidden) check_dim(h, "hidden width");
  if (output.kind == OutputActivation::Kind::tanh_scaled && !(output.bound > 0.0)) {
    throw SpecError("tanh_scaled bound must be > 0");
  }
}

MlpParams MlpParams::zeros(const MlpSpec& spec) {
  spec.validate();
  const auto widths = layer_widths(spec);
  MlpParams p;
  p.spec = spec;
  p.layers.reserve(widths.size() - 1);
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    p.layers.push_back({Mat::Zero(widths[k + 1], widths[k]), Vec::Zero(widths[k + 1])});
  }
  return p;
}

std::int64_t MlpParams::size() const {
  std::int64_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

bool MlpParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

std::vector<double> MlpParams::flatten() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

void MlpParams::unflatten(std::span<const double> values) {
  if (static_cast<std::int64_t>(values.size()) != size()) {
    throw ContractError("flat parameter vector has " + std::to_string(values.size()) +
                        " values, expected " + std::to_string(size()));
  }
  std::size_t i = 0;
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = values[i++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = values[i++];
  }
}

bool MlpParams::same_shape(const MlpParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].weight.rows() != other.layers[k].weight.rows() ||
        layers[k].weight.cols() != other.layers[k].weight.cols()) {
      return false;
    }
  }
  return true;
}

MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed) {
  MlpParams p = MlpParams::zeros(spec);
  Rng rng(seed);
  for (auto& l : p.layers) {
    const double bound = std::sqrt(1.0 / static_cast<double>(l.weight.cols()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = rng.uniform(-bound, bound);
    }
  }
  return p;
}

Mat forward_batch(const MlpParams& params, const Mat& inputs, ForwardCache* cache) {
  if (inputs.rows() != params.spec.in_dim) {
    throw ContractError("forward: input has " + std::to_string(inputs.rows()) +
                        " rows, network expects " + std::to_string(params.spec.in_dim));
  }
  if (!inputs.allFinite()) throw ContractError("forward: non-finite input");

  if (cache) {
    cache->activations.clear();
    cache->activations.reserve(params.layers.size() + 1);
    cache->activations.push_back(inputs);
  }
  Mat x = inputs;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const auto& l = params.layers[k];
    Mat z(l.weight.rows(), x.cols());
    z.noalias() = l.weight * x;
    z.colwise() += l.bias;
    if (k + 1 < params.layers.size()) {
      apply_hidden(z, params.spec.hidden_activation);
    } else {
      apply_output(z, params.spec.output);
    }
    x = std::move(z);
    if (cache) cache->activations.push_back(x);
  }
  return x;
}

Vec forward(const MlpParams& params, const Vec& input) {
  return forward_batch(params, input);
}

BatchGradients backward_batch(const MlpParams& params, const ForwardCache& cache,
                              const Mat& output_grads, bool want_input_grads) {
  const std::size_t n_layers = params.layers.size();
  if (cache.activations.size() != n_layers + 1) {
    throw ContractError("backward: forward cache does not match network depth");
  }
  const Mat& out = cache.activations.back();
  if (output_grads.rows() != out.rows() || output_grads.cols() != out.cols()) {
    throw ContractError("backward: output gradient shape does not match network output");
  }

  BatchGradients g{MlpParams::zeros(params.spec), Mat()};
  Mat delta = output_grads;
  output_derivative(delta, out, params.spec.output);
  for (std::size_t k = n_layers; k-- > 0;) {
    const Mat& x = cache.activations[k];
    auto& gl = g.params.layers[k];
    gl.weight.noalias() = delta * x.transpose();
    gl.bias = delta.rowwise().sum();
    if (k == 0 && !want_input_grads) break;
    Mat upstream(x.rows(), x.cols());
    upstream.noalias() = params.layers[k].weight.transpose() * delta;
    if (k > 0) {
      hidden_derivative(upstream, x, params.spec.hidden_activation);
      delta = std::move(upstream);
    } else {
      g.inputs = std::move(upstream);
    }
  }
  return g;
}

Gradients backward(const MlpParams& params, const Vec& input, const Vec& output_grad) {
  if (output_grad.size() != params.spec.out_dim) {
    throw ContractError("backward: output gradient has wrong length");
  }
  ForwardCache cache;
  forward_batch(params, input, &cache);
  auto g = backward_batch(params, cache, output_grad, true);
  return {std::move(g.params), g.inputs.col(0)};
}

AdamState AdamState::fresh(const MlpParams& params, double lr) {
  if (!(lr > 0.0)) throw SpecError("Adam learning rate must be > 0");
  AdamState s;
  s.m = MlpParams::zeros(params.spec);
  s.v = MlpParams::zeros(params.spec);
  s.lr = lr;
  return s;
}

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
    throw ContractError("adam_step: parameter, gradient, and moment shapes differ");
  }
  if (!grads.all_finite()) throw DivergenceError("non-finite gradient");

  const auto t = static_cast<double>(state.step_count + 1);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    p.array() -= state.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  };
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    update(params.layers[k].weight, grads.layers[k].weight, state.m.layers[k].weight,
           state.v.layers[k].weight);
    update(params.layers[k].bias, grads.layers[k].bias, state.m.layers[k].bias,
           state.v.layers[k].bias);
  }
  ++state.step_count;
}

void soft_update(MlpParams& target, const MlpParams& online, double tau) {
  if (!(target.spec == online.spec)) throw ContractError("soft_update: network specs differ");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ContractError("soft_update: tau must lie in [0, 1]");
  for (std::size_t k = 0; k < target.layers.size(); ++k) {
    auto& t = target.layers[k];
    const auto& o = online.layers[k];
    t.weight = tau * o.weight + (1.0 - tau) * t.weight;
    t.bias = tau * o.bias + (1.0 - tau) * t.bias;
  }
}

std::int64_t param_count(int in_dim, std::span<const int> hidden, int out_dim) {
  MlpSpec spec{in_dim, {hidden.begin(), hidden.end()}, out_dim};
  return param_count(spec);
}

std::int64_t param_count(const MlpSpec& spec) {
  check_dim(spec.in_dim, "in_dim");
  check_dim(spec.out_dim, "out_dim");
  std::int64_t n = 0;
  std::int64_t fan_in = spec.in_dim;
  for (int h : spec.hidden) {
    check_dim(h, "hidden width");
    n += fan_in * h + h;
    fan_in = h;
  }
  n += fan_in * spec.out_dim + spec.out_dim;
  return n;
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw SpecError("unknown activation '" + name + "'");
}

}  // namespace minactor::nn
