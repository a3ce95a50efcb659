#pragma once

// Dense multilayer perceptron, generic over the scalar type so one forward
// routine serves plain evaluation, taped evaluation and dual (input
// derivative) evaluation.
//
// Flat parameter order: layer-major; within a layer the out_dim x in_dim
// weight matrix row-major, then the out_dim biases.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tpinn/activation.hpp"
#include "tpinn/autodiff.hpp"
#include "tpinn/dual.hpp"
#include "tpinn/error.hpp"

namespace tpinn {

struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weights;  // out_dim x in_dim, row-major
  std::vector<double> biases;   // out_dim

  double weight(std::size_t row, std::size_t col) const { return weights[row * in_dim + col]; }
};

// 2 inputs, 1 output, at least one layer, no zero widths. Throws ConfigError.
void validate_dims(std::span<const std::size_t> dims);
std::size_t parameter_count(std::span<const std::size_t> dims);
std::vector<std::size_t> parse_dims(const std::string& text);  // "2,16,16,1"
std::string format_dims(std::span<const std::size_t> dims);

class Mlp {
 public:
  Mlp() = default;
  // Layers must chain (in_dim of layer i+1 equals out_dim of layer i).
  Mlp(const std::vector<DenseLayer>& layers, Activation hidden);

  static Mlp zeros(std::span<const std::size_t> dims, Activation hidden = {});

  std::span<const std::size_t> dims() const noexcept { return dims_; }
  std::size_t layer_count() const noexcept { return dims_.empty() ? 0 : dims_.size() - 1; }
  DenseLayer layer(std::size_t i) const;
  const Activation& activation() const noexcept { return activation_; }
  void set_activation(Activation act) noexcept { activation_ = act; }

  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<const double> params() const noexcept { return params_; }
  std::vector<double> get_params() const { return params_; }
  // Throws ShapeError on a length mismatch, ConfigError on non-finite entries.
  void set_params(std::span<const double> params);

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<std::size_t> dims_;
  Activation activation_;
  std::vector<double> params_;
};

// Uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
Mlp init_glorot(std::span<const std::size_t> dims, std::uint64_t seed, Activation hidden = {});

// Affine + activation per hidden layer, affine output. P is the parameter
// scalar (double for frozen weights, ad::Var for trainable ones), S the
// activation scalar (double, ad::Var, or a dual over either).
template <class P, class S>
S forward(std::span<const std::size_t> dims, const Activation& act, std::span<const P> params,
          const S& x, const S& t) {
  if (dims.size() < 2 || dims.front() != 2 || dims.back() != 1) {
    throw ShapeError("network must map 2 inputs to 1 output");
  }
  if (params.size() != parameter_count(dims)) {
    throw ShapeError("parameter vector has " + std::to_string(params.size()) + " entries, network needs " +
                     std::to_string(parameter_count(dims)));
  }
  std::vector<S> in{x, t};
  std::vector<S> out;
  std::size_t off = 0;
  const std::size_t layers = dims.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t n_in = dims[l];
    const std::size_t n_out = dims[l + 1];
    const std::size_t bias_off = off + n_out * n_in;
    out.clear();
    out.reserve(n_out);
    for (std::size_t j = 0; j < n_out; ++j) {
      const P* row = params.data() + off + j * n_in;
      S z = row[0] * in[0];
      for (std::size_t k = 1; k < n_in; ++k) z = z + row[k] * in[k];
      z = z + params[bias_off + j];
      if (l + 1 < layers) z = activate(act, z);
      out.push_back(std::move(z));
    }
    off = bias_off + n_out;
    in.swap(out);
  }
  return in.front();
}

template <class P, class S>
S forward(const Mlp& net, std::span<const P> params, const S& x, const S& t) {
  return forward<P, S>(net.dims(), net.activation(), params, x, t);
}

// Plain evaluation with the stored parameters.
inline double forward(const Mlp& net, double x, double t) { return forward<double, double>(net, net.params(), x, t); }

// Taped evaluation with the stored parameters recorded as constants.
inline ad::Var forward(const Mlp& net, const ad::Var& x, const ad::Var& t) {
  return forward<double, ad::Var>(net, net.params(), x, t);
}
inline Dual forward(const Mlp& net, const Dual& x, const Dual& t) { return forward<double, Dual>(net, net.params(), x, t); }

// Records every parameter as a variable node, in flat order.
std::vector<ad::Var> record_parameters(ad::Tape& tape, std::span<const double> params);

}  // namespace tpinn
