#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ffnfold/model.hpp"
#include "ffnfold/predictor.hpp"
#include "ffnfold/range_search.hpp"
#include "ffnfold/thresholding.hpp"

namespace ffnfold {

// Constant-folded FFN layer: y ~ x C + B + b2, with the original weights
// retained for result fixing.
struct FoldedLayer {
  Matrix c;        // d x d
  Vector bfold;    // d; excludes b2, which is added at runtime
  std::vector<NeuronApprox> approx;
  FfnLayer original;
  Predictor predictor;

  std::size_t d() const { return c.rows; }
  std::size_t h() const { return approx.size(); }
};

struct FoldConfig {
  double global_t = 0.85;
  ThresholdBounds bounds;
  int predictor_bits = 4;
  bool bypass_predictor = false;
  double step = 0.0;  // <= 0: per-neuron span/200
  std::uint64_t seed = 42;
};

struct FoldedModel {
  std::vector<FoldedLayer> layers;
  ThresholdPlan plan;
  FoldConfig config;

  std::size_t d() const { return layers.empty() ? 0 : layers.front().d(); }
};

// Per-neuron fold: C_n = a * w1_col w2_row, B_n = (a*b1_n + b) * w2_row.
std::pair<Matrix, Vector> fold_neuron(const Vector& w1_col,
                                      const Vector& w2_row,
                                      const NeuronApprox& approx, double b1_n);

// Sums neuron folds in ascending index order (byte-stable artifacts).
FoldedLayer fold_layer(const FfnLayer& layer,
                       const std::vector<NeuronApprox>& approx);

struct ParamAccounting {
  std::size_t original_params = 0;   // 2dh + h + d
  std::size_t folded_params = 0;     // d^2 + d
  double predictor_equiv = 0.0;      // h*d*bits/32, in 32-bit parameters
  double compression_ratio = 0.0;
};

ParamAccounting folded_params(std::size_t d, std::size_t h, int predictor_bits);

void folded_save(const FoldedModel& folded, const std::string& path);
FoldedModel folded_load(const std::string& path);

}  // namespace ffnfold
