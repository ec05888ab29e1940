#pragma once

#include <cstdint>
#include <vector>

#include "ffnfold/folding.hpp"
#include "ffnfold/linalg.hpp"

namespace ffnfold {

enum class InferMode {
  Predictor,    // flags from the quantized predictor
  OracleFlags,  // flags from exact pre-activations
  NoFix,        // speculative output only
};

InferMode infer_mode_from_string(const std::string& name);
std::string to_string(InferMode mode);

struct InferenceReport {
  Matrix output;
  std::vector<std::uint64_t> flagged_count;  // per token, summed over layers
  std::uint64_t speculative_flops = 0;
  std::uint64_t fixed_flops = 0;
  std::uint64_t exact_flops = 0;  // cost of the unfolded FFN, for comparison

  double flagged_fraction(std::size_t h, std::size_t layers) const;
};

// FLOP accounting building blocks (per token).
std::uint64_t speculative_flops_per_token(std::size_t d);
std::uint64_t fix_flops_per_neuron(std::size_t d);
std::uint64_t exact_flops_per_token(std::size_t d, std::size_t h);

// y = x C + B + b2, row-wise.
Matrix infer_speculative(const FoldedLayer& folded, const Matrix& x);

// For each flagged neuron: subtract its baked-in linear contribution and
// add the exact activation contribution. Unflagged neurons are untouched.
void fix_results(const FoldedLayer& folded, const Matrix& x, Matrix& y,
                 const std::vector<std::vector<std::size_t>>& flags_per_token);

// Ground-truth out-of-range neuron sets per token row.
std::vector<std::vector<std::size_t>> oracle_flags(const FoldedLayer& folded,
                                                   const Matrix& x);

InferenceReport infer(const FoldedLayer& folded, const Matrix& x,
                      InferMode mode);

InferenceReport model_infer(const FoldedModel& folded, const Matrix& x,
                            InferMode mode);

}  // namespace ffnfold
