#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "tpinn/dual.hpp"
#include "tpinn/scalar.hpp"

namespace tpinn {

enum class ActivationKind { Relu, Tanh, Sigmoid, LeakyRelu, Elu, Swish };

// Report order: Relu, Tanh, Sigmoid, LeakyRelu, Elu, Swish.
inline constexpr std::array<ActivationKind, 6> kAllActivations{
    ActivationKind::Relu,      ActivationKind::Tanh, ActivationKind::Sigmoid,
    ActivationKind::LeakyRelu, ActivationKind::Elu,  ActivationKind::Swish};

struct Activation {
  ActivationKind kind = ActivationKind::Tanh;
  double leaky_slope = 0.01;
  double elu_alpha = 1.0;

  friend bool operator==(const Activation&, const Activation&) = default;
};

// CLI / file spelling: relu, tanh, sigmoid, leaky_relu, elu, swish.
std::string_view activation_name(ActivationKind kind);
// Display spelling used in report tables.
std::string_view activation_label(ActivationKind kind);
// Throws ConfigError listing the valid names.
ActivationKind parse_activation(std::string_view name);
std::string activation_names_joined(std::string_view sep = ", ");

template <class S>
S sigmoid(const S& z) {
  using std::exp;
  // Split on sign so exp never sees a large positive argument.
  if (value_of(z) >= 0.0) {
    return 1.0 / (1.0 + exp(-z));
  }
  const S e = exp(z);
  return e / (1.0 + e);
}

// Closed forms for plain scalars (double, ad::Var).
template <class S>
S activate(const Activation& act, const S& z) {
  using std::exp;
  using std::tanh;
  switch (act.kind) {
    case ActivationKind::Relu:
      return relu(z);
    case ActivationKind::Tanh:
      return tanh(z);
    case ActivationKind::Sigmoid:
      return sigmoid(z);
    case ActivationKind::LeakyRelu:
      return value_of(z) > 0.0 ? z : z * act.leaky_slope;
    case ActivationKind::Elu:
      return value_of(z) > 0.0 ? z : (exp(z) - 1.0) * act.elu_alpha;
    case ActivationKind::Swish:
      return z * sigmoid(z);
  }
  return z;
}

// Duals: primal through the closed form, tangent through the derivative
// expressed in terms of the primal output where possible.
template <class T, std::size_t N>
BasicDual<T, N> activate(const Activation& act, const BasicDual<T, N>& z) {
  using std::exp;
  using std::tanh;
  const T& p = z.primal;
  const bool positive = value_of(p) > 0.0;
  switch (act.kind) {
    case ActivationKind::Relu:
      return chain_const(relu(p), positive ? 1.0 : 0.0, z);
    case ActivationKind::LeakyRelu:
      return positive ? z : chain_const(p * act.leaky_slope, act.leaky_slope, z);
    case ActivationKind::Tanh: {
      const T y = tanh(p);
      if (!has_tangent(z)) return constant_dual<T, N>(y);
      return chain(y, 1.0 - y * y, z);
    }
    case ActivationKind::Sigmoid: {
      const T y = sigmoid(p);
      if (!has_tangent(z)) return constant_dual<T, N>(y);
      return chain(y, y * (1.0 - y), z);
    }
    case ActivationKind::Elu: {
      if (positive) return z;
      const T y = (exp(p) - 1.0) * act.elu_alpha;
      if (!has_tangent(z)) return constant_dual<T, N>(y);
      return chain(y, y + act.elu_alpha, z);
    }
    case ActivationKind::Swish: {
      const T s = sigmoid(p);
      const T y = p * s;
      if (!has_tangent(z)) return constant_dual<T, N>(y);
      return chain(y, s + y * (1.0 - s), z);
    }
  }
  return z;
}

inline double activation_eval(const Activation& act, double x) { return activate(act, x); }
inline double activation_eval(ActivationKind kind, double x) { return activate(Activation{kind}, x); }

}  // namespace tpinn
