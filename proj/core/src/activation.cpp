#include "tpinn/activation.hpp"

#include "tpinn/error.hpp"

namespace tpinn {

std::string_view activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Relu: return "relu";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::LeakyRelu: return "leaky_relu";
    case ActivationKind::Elu: return "elu";
    case ActivationKind::Swish: return "swish";
  }
  return "unknown";
}

std::string_view activation_label(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Relu: return "Relu";
    case ActivationKind::Tanh: return "Tanh";
    case ActivationKind::Sigmoid: return "Sigmoid";
    case ActivationKind::LeakyRelu: return "Leaky Relu";
    case ActivationKind::Elu: return "Exponential Linear Unit";
    case ActivationKind::Swish: return "Swish";
  }
  return "unknown";
}

std::string activation_names_joined(std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < kAllActivations.size(); ++i) {
    if (i) out += sep;
    out += activation_name(kAllActivations[i]);
  }
  return out;
}

ActivationKind parse_activation(std::string_view name) {
  for (ActivationKind k : kAllActivations) {
    if (activation_name(k) == name) return k;
  }
  throw ConfigError("unknown activation '" + std::string(name) +
                    "'; valid names: " + activation_names_joined());
}

}  // namespace tpinn
