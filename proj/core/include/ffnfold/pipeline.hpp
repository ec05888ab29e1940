#pragma once

#include <string>
#include <vector>

#include "ffnfold/calibration.hpp"
#include "ffnfold/folding.hpp"
#include "ffnfold/runtime.hpp"

namespace ffnfold {

// Offline pipeline: profile -> threshold plan -> per-neuron range search ->
// fold -> predictor.
FoldedModel run_fold(const ToyModel& model, const CalibrationSet& calib,
                     const FoldConfig& config);

FoldedModel run_fold(const ToyModel& model, const ActivationProfile& prof,
                     const FoldConfig& config);

struct LayerEval {
  double fold_mse = 0.0;             // selected-mode output MSE vs exact
  double coverage_target = 0.0;      // layer threshold budget
  double coverage_actual_mean = 0.0; // mean in-range fraction on eval data
  double flagged_fraction = 0.0;
  double predictor_precision = 1.0;
  double predictor_recall = 1.0;
  double compression_ratio = 0.0;
};

struct EvalReport {
  double mse_no_fix = 0.0;
  double mse_oracle = 0.0;
  double mse_predictor = 0.0;
  double mse_all_flagged = 0.0;
  double flagged_fraction_oracle = 0.0;
  double flagged_fraction_predictor = 0.0;
  double coverage_actual_mean = 0.0;
  double compression_ratio = 0.0;
  std::uint64_t speculative_flops = 0;
  std::uint64_t fixed_flops = 0;
  std::uint64_t exact_flops = 0;
  std::vector<LayerEval> per_layer;
  FoldConfig config;

  std::string to_json() const;  // versioned "report_v1", full config echo
};

// Folded-vs-exact comparison on a token matrix, under all infer modes.
EvalReport run_eval(const ToyModel& model, const FoldedModel& folded,
                    const Matrix& data);

struct SweepRow {
  double t = 0.0;
  double mse_oracle = 0.0;
  double mse_predictor = 0.0;
  double flagged_fraction = 0.0;
  double compression = 0.0;
};

std::vector<SweepRow> run_sweep(const ToyModel& model,
                                const CalibrationSet& calib,
                                const std::vector<double>& t_list,
                                const FoldConfig& base_config);

// CSV with the fixed header
// "t,mse_oracle,mse_predictor,flagged_fraction,compression".
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Text for the `stats` subcommand: compression, thresholds, range table.
std::string stats_text(const FoldedModel& folded);

double mse(const Matrix& a, const Matrix& b);

}  // namespace ffnfold
