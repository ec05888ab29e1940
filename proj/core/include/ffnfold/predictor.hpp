#pragma once

#include <cstdint>
#include <vector>

#include "ffnfold/linalg.hpp"
#include "ffnfold/model.hpp"
#include "ffnfold/range_search.hpp"

namespace ffnfold {

// k-bit round-to-nearest quantized copy of W1 with per-column scale and
// zero-point, used to estimate activation inputs and flag out-of-range
// neurons. A bypass predictor keeps the exact weights.
struct Predictor {
  int bits = 4;  // 2, 3, 4 or 8
  bool bypass = false;
  std::size_t d = 0;
  std::size_t h = 0;
  std::vector<float> scale;           // per column
  std::vector<float> zero;            // per column
  std::vector<std::uint8_t> codes;    // per column, packed (k=3 unpacked)
  Matrix dequant;                     // d x h reconstruction used at runtime

  std::size_t packed_column_bytes() const;
};

Predictor build_predictor(const Matrix& w1, int bits);

// Exact-weight predictor; its flags equal the ground truth.
Predictor bypass_predictor(const Matrix& w1);

// Estimated pre-activations z_n = x . dequant_col_n + b1_n; a neuron is
// flagged when its estimate falls outside [l1, l2).
std::vector<std::size_t> predict_flags(const Predictor& pred, const Vector& b1,
                                       std::span<const double> x_row,
                                       const std::vector<NeuronApprox>& approx);

struct FlagStats {
  double precision = 1.0;
  double recall = 1.0;
  double false_negative_rate = 0.0;
  std::uint64_t true_out_of_range = 0;
  std::uint64_t flagged = 0;
};

// Compares predicted flags to ground-truth out-of-range sets over every
// token row of x.
FlagStats flag_stats(const Predictor& pred, const FfnLayer& layer,
                     const Matrix& x, const std::vector<NeuronApprox>& approx);

}  // namespace ffnfold
