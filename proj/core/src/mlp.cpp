#include "tpinn/mlp.hpp"

#include <cmath>
#include <sstream>

#include "tpinn/rng.hpp"

namespace tpinn {

void validate_dims(std::span<const std::size_t> dims) {
  if (dims.empty()) throw ConfigError("layer size list is empty");
  if (dims.size() < 2) throw ConfigError("layer size list needs at least an input and an output size");
  if (dims.front() != 2) throw ConfigError("input size must be 2, got " + std::to_string(dims.front()));
  if (dims.back() != 1) throw ConfigError("output size must be 1, got " + std::to_string(dims.back()));
  for (std::size_t d : dims) {
    if (d == 0) throw ConfigError("layer sizes must be positive");
  }
}

std::size_t parameter_count(std::span<const std::size_t> dims) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l + 1] * dims[l] + dims[l + 1];
  return n;
}

std::vector<std::size_t> parse_dims(const std::string& text) {
  std::vector<std::size_t> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      throw ConfigError("bad layer size '" + item + "' in '" + text + "'");
    }
    if (pos != item.size() || item.empty() || item[0] == '-') {
      throw ConfigError("bad layer size '" + item + "' in '" + text + "'");
    }
    dims.push_back(v);
  }
  validate_dims(dims);
  return dims;
}

std::string format_dims(std::span<const std::size_t> dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(dims[i]);
  }
  return out;
}

Mlp::Mlp(const std::vector<DenseLayer>& layers, Activation hidden) : activation_(hidden) {
  if (layers.empty()) throw ShapeError("network has no layers");
  dims_.push_back(layers.front().in_dim);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& L = layers[i];
    if (L.in_dim != dims_.back()) {
      throw ShapeError("layer " + std::to_string(i) + " expects " + std::to_string(L.in_dim) +
                       " inputs but the previous layer produces " + std::to_string(dims_.back()));
    }
    if (L.weights.size() != L.in_dim * L.out_dim || L.biases.size() != L.out_dim) {
      throw ShapeError("layer " + std::to_string(i) + " storage does not match its dimensions");
    }
    dims_.push_back(L.out_dim);
    params_.insert(params_.end(), L.weights.begin(), L.weights.end());
    params_.insert(params_.end(), L.biases.begin(), L.biases.end());
  }
  if (dims_.front() != 2 || dims_.back() != 1) throw ShapeError("network must map 2 inputs to 1 output");
  for (double p : params_) {
    if (!std::isfinite(p)) throw ConfigError("non-finite parameter");
  }
}

Mlp Mlp::zeros(std::span<const std::size_t> dims, Activation hidden) {
  validate_dims(dims);
  Mlp m;
  m.dims_.assign(dims.begin(), dims.end());
  m.activation_ = hidden;
  m.params_.assign(tpinn::parameter_count(dims), 0.0);
  return m;
}

DenseLayer Mlp::layer(std::size_t i) const {
  if (i >= layer_count()) throw ShapeError("layer index out of range");
  std::size_t off = 0;
  for (std::size_t l = 0; l < i; ++l) off += dims_[l + 1] * dims_[l] + dims_[l + 1];
  DenseLayer L;
  L.in_dim = dims_[i];
  L.out_dim = dims_[i + 1];
  const auto w_begin = params_.begin() + static_cast<std::ptrdiff_t>(off);
  const auto b_begin = w_begin + static_cast<std::ptrdiff_t>(L.in_dim * L.out_dim);
  L.weights.assign(w_begin, b_begin);
  L.biases.assign(b_begin, b_begin + static_cast<std::ptrdiff_t>(L.out_dim));
  return L;
}

void Mlp::set_params(std::span<const double> params) {
  if (params.size() != params_.size()) {
    throw ShapeError("expected " + std::to_string(params_.size()) + " parameters, got " +
                     std::to_string(params.size()));
  }
  for (double p : params) {
    if (!std::isfinite(p)) throw ConfigError("non-finite parameter");
  }
  params_.assign(params.begin(), params.end());
}

Mlp init_glorot(std::span<const std::size_t> dims, std::uint64_t seed, Activation hidden) {
  Mlp m = Mlp::zeros(dims, hidden);
  Rng rng(seed);
  std::vector<double> p = m.get_params();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l];
    const std::size_t fan_out = dims[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) p[off + i] = rng.uniform(-limit, limit);
    off += fan_in * fan_out + fan_out;
  }
  m.set_params(p);
  return m;
}

std::vector<ad::Var> record_parameters(ad::Tape& tape, std::span<const double> params) {
  std::vector<ad::Var> vars;
  vars.reserve(params.size());
  for (double p : params) vars.push_back(ad::variable(tape, p));
  return vars;
}

}  // namespace tpinn
