#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ffnfold/activations.hpp"
#include "ffnfold/linalg.hpp"

namespace ffnfold {

// One FFN block: sigma(x W1 + b1) W2 + b2.
struct FfnLayer {
  Matrix w1;   // d x h
  Vector b1;   // h
  Activation act = Activation::GeluErf;
  Matrix w2;   // h x d
  Vector b2;   // d

  std::size_t d() const { return w1.rows; }
  std::size_t h() const { return w1.cols; }

  void validate() const;
};

struct ToyModel {
  std::vector<FfnLayer> layers;
  std::size_t d = 0;

  void validate() const;
};

// Ground-truth oracle: sigma(x W1 + b1) W2 + b2, row-wise over tokens.
Matrix ffn_exact(const FfnLayer& layer, const Matrix& x);

// Whole-stack exact forward pass.
Matrix model_exact(const ToyModel& model, const Matrix& x);

void model_save(const ToyModel& model, const std::string& path);
ToyModel model_load(const std::string& path);

// Deterministic synthetic model; weights i.i.d. Gaussian scaled by
// 1/sqrt(d) (w1) and 1/sqrt(h) (w2), biases zero.
ToyModel gen_synthetic(std::size_t d, std::size_t h, std::size_t layers,
                       std::uint64_t seed, Activation act);

}  // namespace ffnfold
