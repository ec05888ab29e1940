#include "ffnfold/activations.hpp"

#include <cmath>

#include "ffnfold/error.hpp"

namespace ffnfold {

double activate(Activation kind, double z) {
  switch (kind) {
    case Activation::ReLU:
      return z > 0.0 ? z : 0.0;
    case Activation::GeluErf:
      return 0.5 * z * (1.0 + std::erf(z / std::sqrt(2.0)));
    case Activation::GeluTanh: {
      const double c = std::sqrt(2.0 / M_PI);
      return 0.5 * z * (1.0 + std::tanh(c * (z + 0.044715 * z * z * z)));
    }
    case Activation::SiLU:
      return z / (1.0 + std::exp(-z));
  }
  throw Error(ErrKind::Internal, "bad-activation", "unreachable activation tag");
}

std::string to_string(Activation kind) {
  switch (kind) {
    case Activation::ReLU: return "relu";
    case Activation::GeluErf: return "gelu";
    case Activation::GeluTanh: return "gelu_tanh";
    case Activation::SiLU: return "silu";
  }
  throw Error(ErrKind::Internal, "bad-activation", "unreachable activation tag");
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "gelu") return Activation::GeluErf;
  if (name == "gelu_tanh") return Activation::GeluTanh;
  if (name == "silu") return Activation::SiLU;
  throw Error(ErrKind::Validation, "bad-activation",
              "unknown activation name: " + name);
}

}  // namespace ffnfold
