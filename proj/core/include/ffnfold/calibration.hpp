#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ffnfold/linalg.hpp"
#include "ffnfold/model.hpp"

namespace ffnfold {

// k tokens x d features of calibration input.
struct CalibrationSet {
  Matrix x;

  std::size_t tokens() const { return x.rows; }
};

// Per layer, per neuron: the k activation-input scalars z = x W1[:,n] + b1[n],
// sorted ascending.
struct ActivationProfile {
  std::vector<std::vector<std::vector<double>>> samples;  // [layer][neuron][k]

  std::size_t layers() const { return samples.size(); }
};

// Propagates the calibration set through the exact model and records every
// neuron's activation inputs.
ActivationProfile profile(const ToyModel& model, const CalibrationSet& calib);

// Fraction of samples falling in [l1, l2). Samples must be sorted.
double coverage(const std::vector<double>& sorted_samples, double l1, double l2);

struct SkewReport {
  std::vector<std::vector<double>> per_neuron_ratio;  // [layer][neuron]
  std::vector<double> per_layer_mean;
};

// For each neuron: length of the shortest contiguous window holding >= mass
// of the samples, divided by the full sample span. Degenerate spread -> 0.
SkewReport skew_report(const ActivationProfile& prof, double mass);

void calibration_save(const CalibrationSet& calib, const std::string& path);
CalibrationSet calibration_load(const std::string& path);
CalibrationSet calibration_load_csv(const std::string& path);

// Profile sidecar: full sorted sample arrays, reusable by the fold pipeline.
void profile_save(const ActivationProfile& prof, const std::string& path);
ActivationProfile profile_load(const std::string& path);

// Human-readable summary (per-neuron min/max/quartiles) as a JSON string.
std::string profile_summary_json(const ActivationProfile& prof);

// Deterministic synthetic calibration data. "mixture" draws each entry from
// 0.7*N(0,1) + 0.3*N(2,0.5); "gaussian" from N(0,1).
CalibrationSet gen_calibration(std::size_t tokens, std::size_t d,
                               std::uint64_t seed,
                               const std::string& distribution = "gaussian");

}  // namespace ffnfold
