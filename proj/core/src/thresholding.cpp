#include "ffnfold/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ffnfold/density.hpp"
#include "ffnfold/error.hpp"
#include "ffnfold/range_search.hpp"
#include "parallel.hpp"

namespace ffnfold {

ThresholdBounds default_bounds(double global_t) {
  return {std::max(0.0, global_t - 0.15), std::min(1.0, global_t + 0.15)};
}

std::vector<double> allocate(const std::vector<double>& errors, double budget,
                             ThresholdBounds bounds) {
  if (errors.empty()) {
    throw Error(ErrKind::Validation, "bad-config", "allocate: no scopes");
  }
  for (double e : errors) {
    if (!(e >= 0.0) || !std::isfinite(e)) {
      throw Error(ErrKind::Validation, "bad-config",
                  "allocate: errors must be finite and non-negative");
    }
  }
  if (bounds.lo > bounds.hi || bounds.lo < 0.0 || bounds.hi > 1.0 ||
      budget < bounds.lo - 1e-12 || budget > bounds.hi + 1e-12) {
    throw Error(ErrKind::Validation, "infeasible-budget",
                "budget " + std::to_string(budget) + " outside bounds [" +
                    std::to_string(bounds.lo) + ", " +
                    std::to_string(bounds.hi) + "]");
  }

  const std::size_t n = errors.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return errors[a] < errors[b];
                   });

  std::vector<double> out(n, bounds.lo);
  double extra = (budget - bounds.lo) * static_cast<double>(n);
  const double headroom = bounds.hi - bounds.lo;

  // Walk tie groups cheapest-first; members of a group split their
  // allocation evenly so equal errors get equal thresholds.
  std::size_t g = 0;
  while (g < n && extra > 1e-15) {
    std::size_t g_end = g + 1;
    while (g_end < n && errors[order[g_end]] == errors[order[g]]) ++g_end;
    const double group_size = static_cast<double>(g_end - g);
    const double give = std::min(extra, headroom * group_size);
    for (std::size_t m = g; m < g_end; ++m) {
      out[order[m]] = bounds.lo + give / group_size;
    }
    extra -= give;
    g = g_end;
  }
  return out;
}

std::vector<std::vector<double>> compute_centroids(
    const ActivationProfile& prof) {
  std::vector<std::vector<double>> out(prof.samples.size());
  for (std::size_t li = 0; li < prof.samples.size(); ++li) {
    const auto& layer = prof.samples[li];
    out[li].resize(layer.size());
    par::parallel_for(layer.size(), [&](std::size_t n) {
      out[li][n] = find_centroid(kde_fit(layer[n]));
    });
  }
  return out;
}

std::vector<double> estimate_error_neurons(
    const FfnLayer& layer, const std::vector<std::vector<double>>& samples,
    const std::vector<double>& centroids, double probe_t) {
  if (samples.size() != layer.h() || centroids.size() != layer.h()) {
    throw Error(ErrKind::Validation, "dim-mismatch",
                "profile does not cover the layer");
  }
  std::vector<double> errs(layer.h());
  par::parallel_for(layer.h(), [&](std::size_t n) {
    const double w2norm = l2_norm(layer.w2.row(n));
    const double step = default_step(samples[n]);
    const NeuronApprox a = search_range(samples[n], w2norm, layer.act, probe_t,
                                        step, centroids[n]);
    // Squared form: same ordering as err_n, cheaper to accumulate.
    errs[n] = a.residual * a.residual;
  });
  return errs;
}

double estimate_error_layer(const FfnLayer& layer,
                            const std::vector<std::vector<double>>& samples,
                            const std::vector<double>& centroids,
                            double probe_t) {
  const auto errs = estimate_error_neurons(layer, samples, centroids, probe_t);
  double sum = 0.0;
  for (double e : errs) sum += e;
  return sum;
}

ThresholdPlan build_plan(const ToyModel& model, const ActivationProfile& prof,
                         double global_t, ThresholdBounds bounds,
                         const std::vector<std::vector<double>>& centroids) {
  if (prof.layers() != model.layers.size()) {
    throw Error(ErrKind::Validation, "dim-mismatch",
                "profile layer count does not match the model");
  }
  ThresholdPlan plan;
  plan.global_t = global_t;
  plan.bounds = bounds;

  std::vector<double> layer_errors(model.layers.size());
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    layer_errors[li] = estimate_error_layer(model.layers[li], prof.samples[li],
                                            centroids[li], global_t);
  }
  plan.layer_t = allocate(layer_errors, global_t, bounds);

  plan.neuron_t.resize(model.layers.size());
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const auto neuron_errors = estimate_error_neurons(
        model.layers[li], prof.samples[li], centroids[li], plan.layer_t[li]);
    plan.neuron_t[li] = allocate(neuron_errors, plan.layer_t[li], bounds);
  }
  return plan;
}

ThresholdPlan build_plan(const ToyModel& model, const ActivationProfile& prof,
                         double global_t, ThresholdBounds bounds) {
  return build_plan(model, prof, global_t, bounds, compute_centroids(prof));
}

}  // namespace ffnfold
