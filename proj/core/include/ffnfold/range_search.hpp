#pragma once

#include <vector>

#include "ffnfold/activations.hpp"

namespace ffnfold {

// Single linear range for one neuron: sigma(z) ~ slope*z + intercept over
// [l1, l2).
struct NeuronApprox {
  double l1 = 0.0;
  double l2 = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double coverage = 0.0;
  double residual = 0.0;  // L2 fit error scaled by ||W2 row||

  bool in_range(double z) const { return l1 <= z && z < l2; }
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double err = 0.0;  // sqrt(sum of squared residuals) * w2_row_norm
};

// OLS fit of sigma over the in-range samples plus the scaled L2 error.
// Throws "insufficient-samples" (<2 in range) or "degenerate-range".
FitResult approx_error(const std::vector<double>& sorted_samples,
                       double w2_row_norm, Activation act, double l1,
                       double l2);

// Greedy expansion from the KDE centroid until coverage >= t_in; each step
// grows the range by `step` on the side with smaller fit error.
NeuronApprox search_range(const std::vector<double>& sorted_samples,
                          double w2_row_norm, Activation act, double t_in,
                          double step, double centroid);

// Same, computing the centroid internally via KDE.
NeuronApprox search_range(const std::vector<double>& sorted_samples,
                          double w2_row_norm, Activation act, double t_in,
                          double step);

// (max - min) / 200, or 1e-6 for zero spread.
double default_step(const std::vector<double>& sorted_samples);

}  // namespace ffnfold
