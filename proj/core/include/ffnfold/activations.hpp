#pragma once

#include <string>

namespace ffnfold {

enum class Activation {
  ReLU,
  GeluErf,   // z * Phi(z), the erf-based definition
  GeluTanh,  // tanh approximation
  SiLU,
};

double activate(Activation kind, double z);

// Names used in file headers: "relu" | "gelu" | "gelu_tanh" | "silu".
std::string to_string(Activation kind);
Activation activation_from_string(const std::string& name);

}  // namespace ffnfold
