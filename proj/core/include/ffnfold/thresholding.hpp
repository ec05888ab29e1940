#pragma once

#include <vector>

#include "ffnfold/calibration.hpp"
#include "ffnfold/model.hpp"

namespace ffnfold {

struct ThresholdBounds {
  double lo = 0.0;
  double hi = 1.0;
};

// Bounds derived from the global budget: [t-0.15, t+0.15] clipped to [0,1].
ThresholdBounds default_bounds(double global_t);

struct ThresholdPlan {
  double global_t = 0.0;
  ThresholdBounds bounds;
  std::vector<double> layer_t;                 // mean == global_t
  std::vector<std::vector<double>> neuron_t;   // per layer, mean == layer_t[i]
};

// Box-constrained minimization of sum(err_i * t_i) with mean(t_i) == budget:
// fractional-knapsack greedy, ties share their allocation equally so equal
// errors receive equal thresholds.
std::vector<double> allocate(const std::vector<double>& errors, double budget,
                             ThresholdBounds bounds);

// KDE centroid per neuron, computed once and shared by all probe passes.
std::vector<std::vector<double>> compute_centroids(
    const ActivationProfile& prof);

// Per-neuron squared approximation error at probe threshold probe_t
// (range search + OLS residual, squared and scaled by ||W2 row||^2).
std::vector<double> estimate_error_neurons(
    const FfnLayer& layer, const std::vector<std::vector<double>>& samples,
    const std::vector<double>& centroids, double probe_t);

double estimate_error_layer(const FfnLayer& layer,
                            const std::vector<std::vector<double>>& samples,
                            const std::vector<double>& centroids,
                            double probe_t);

// Layer thresholds probed at global_t, then neuron thresholds probed at the
// assigned layer budget.
ThresholdPlan build_plan(const ToyModel& model, const ActivationProfile& prof,
                         double global_t, ThresholdBounds bounds);

ThresholdPlan build_plan(const ToyModel& model, const ActivationProfile& prof,
                         double global_t, ThresholdBounds bounds,
                         const std::vector<std::vector<double>>& centroids);

}  // namespace ffnfold
