#include "ffnfold/pipeline.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

#include "ffnfold/error.hpp"
#include "parallel.hpp"

namespace ffnfold {

namespace {

// Fixing every neuron reduces the folded layer to the exact computation up
// to reorder error; used as the reference point in eval.
Matrix infer_all_flagged(const FoldedModel& folded, const Matrix& x) {
  Matrix cur = x;
  for (const auto& layer : folded.layers) {
    Matrix y = infer_speculative(layer, cur);
    std::vector<std::size_t> all(layer.h());
    for (std::size_t n = 0; n < layer.h(); ++n) all[n] = n;
    std::vector<std::vector<std::size_t>> flags(cur.rows, all);
    fix_results(layer, cur, y, flags);
    cur = std::move(y);
  }
  return cur;
}

}  // namespace

double mse(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw Error(ErrKind::Validation, "dim-mismatch", "mse shapes differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return a.data.empty() ? 0.0 : acc / static_cast<double>(a.data.size());
}

FoldedModel run_fold(const ToyModel& model, const ActivationProfile& prof,
                     const FoldConfig& config) {
  model.validate();
  if (config.global_t <= 0.0 || config.global_t > 1.0) {
    throw Error(ErrKind::Validation, "bad-config",
                "threshold must lie in (0, 1]");
  }
  FoldConfig cfg = config;
  // The permissive default [0,1] would let the allocator hand a neuron a
  // zero budget; derive working bounds from the global threshold instead.
  if (cfg.bounds.lo <= 0.0 && cfg.bounds.hi >= 1.0) {
    cfg.bounds = default_bounds(cfg.global_t);
  }

  const auto centroids = compute_centroids(prof);
  FoldedModel folded;
  folded.config = cfg;
  folded.plan =
      build_plan(model, prof, cfg.global_t, cfg.bounds, centroids);

  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const auto& layer = model.layers[li];
    std::vector<NeuronApprox> approx(layer.h());
    par::parallel_for(layer.h(), [&](std::size_t n) {
      const auto& samples = prof.samples[li][n];
      const double step =
          config.step > 0.0 ? config.step : default_step(samples);
      const double w2norm = l2_norm(layer.w2.row(n));
      approx[n] = search_range(samples, w2norm, layer.act,
                               folded.plan.neuron_t[li][n], step,
                               centroids[li][n]);
    });
    FoldedLayer fl = fold_layer(layer, approx);
    fl.predictor = config.bypass_predictor
                       ? bypass_predictor(layer.w1)
                       : build_predictor(layer.w1, config.predictor_bits);
    folded.layers.push_back(std::move(fl));
  }
  return folded;
}

FoldedModel run_fold(const ToyModel& model, const CalibrationSet& calib,
                     const FoldConfig& config) {
  return run_fold(model, profile(model, calib), config);
}

EvalReport run_eval(const ToyModel& model, const FoldedModel& folded,
                    const Matrix& data) {
  model.validate();
  if (folded.layers.size() != model.layers.size() ||
      folded.d() != model.d) {
    throw Error(ErrKind::Validation, "dim-mismatch",
                "artifact does not match the model");
  }

  EvalReport rep;
  rep.config = folded.config;

  const Matrix exact = model_exact(model, data);
  const auto rep_nofix = model_infer(folded, data, InferMode::NoFix);
  const auto rep_oracle = model_infer(folded, data, InferMode::OracleFlags);
  const auto rep_pred = model_infer(folded, data, InferMode::Predictor);
  const Matrix all_flagged = infer_all_flagged(folded, data);

  rep.mse_no_fix = mse(rep_nofix.output, exact);
  rep.mse_oracle = mse(rep_oracle.output, exact);
  rep.mse_predictor = mse(rep_pred.output, exact);
  rep.mse_all_flagged = mse(all_flagged, exact);

  const std::size_t h = folded.layers.front().h();
  rep.flagged_fraction_oracle =
      rep_oracle.flagged_fraction(h, folded.layers.size());
  rep.flagged_fraction_predictor =
      rep_pred.flagged_fraction(h, folded.layers.size());
  rep.speculative_flops = rep_oracle.speculative_flops;
  rep.fixed_flops = rep_oracle.fixed_flops;
  rep.exact_flops = rep_oracle.exact_flops;

  const int bits =
      folded.config.bypass_predictor ? 32 : folded.config.predictor_bits;
  rep.compression_ratio = folded_params(model.d, h, bits).compression_ratio;

  // Per-layer diagnostics on the exact propagated inputs.
  CalibrationSet as_calib{data};
  const ActivationProfile eval_prof = profile(model, as_calib);
  double cov_sum = 0.0;
  for (std::size_t li = 0; li < folded.layers.size(); ++li) {
    const auto& fl = folded.layers[li];
    LayerEval le;
    le.coverage_target = folded.plan.layer_t.empty()
                             ? folded.config.global_t
                             : folded.plan.layer_t[li];
    double cov = 0.0;
    for (std::size_t n = 0; n < fl.h(); ++n) {
      cov += coverage(eval_prof.samples[li][n], fl.approx[n].l1,
                      fl.approx[n].l2);
    }
    le.coverage_actual_mean = cov / static_cast<double>(fl.h());
    cov_sum += le.coverage_actual_mean;

    // Layer-local comparison on its exact input.
    Matrix layer_in = data;
    for (std::size_t lj = 0; lj < li; ++lj)
      layer_in = ffn_exact(model.layers[lj], layer_in);
    const auto layer_rep = infer(fl, layer_in, InferMode::OracleFlags);
    le.fold_mse = mse(layer_rep.output, ffn_exact(model.layers[li], layer_in));
    le.flagged_fraction = layer_rep.flagged_fraction(fl.h(), 1);

    const FlagStats fs =
        flag_stats(fl.predictor, model.layers[li], layer_in, fl.approx);
    le.predictor_precision = fs.precision;
    le.predictor_recall = fs.recall;
    le.compression_ratio = rep.compression_ratio;
    rep.per_layer.push_back(le);
  }
  rep.coverage_actual_mean =
      cov_sum / static_cast<double>(folded.layers.size());
  return rep;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["schema"] = "report_v1";
  j["config"] = {{"global_t", config.global_t},
                 {"bound_lo", config.bounds.lo},
                 {"bound_hi", config.bounds.hi},
                 {"predictor_bits", config.predictor_bits},
                 {"bypass_predictor", config.bypass_predictor},
                 {"step", config.step},
                 {"seed", config.seed}};
  j["mse_no_fix"] = mse_no_fix;
  j["mse_oracle"] = mse_oracle;
  j["mse_predictor"] = mse_predictor;
  j["mse_all_flagged"] = mse_all_flagged;
  j["flagged_fraction_oracle"] = flagged_fraction_oracle;
  j["flagged_fraction_predictor"] = flagged_fraction_predictor;
  j["coverage_actual_mean"] = coverage_actual_mean;
  j["compression_ratio"] = compression_ratio;
  j["flops"] = {{"speculative", speculative_flops},
                {"fixed", fixed_flops},
                {"exact", exact_flops}};
  j["per_layer"] = nlohmann::json::array();
  for (const auto& le : per_layer) {
    j["per_layer"].push_back({{"fold_mse", le.fold_mse},
                              {"coverage_target", le.coverage_target},
                              {"coverage_actual_mean", le.coverage_actual_mean},
                              {"flagged_fraction", le.flagged_fraction},
                              {"predictor_precision", le.predictor_precision},
                              {"predictor_recall", le.predictor_recall},
                              {"compression_ratio", le.compression_ratio}});
  }
  return j.dump(2);
}

std::vector<SweepRow> run_sweep(const ToyModel& model,
                                const CalibrationSet& calib,
                                const std::vector<double>& t_list,
                                const FoldConfig& base_config) {
  if (t_list.empty()) {
    throw Error(ErrKind::Validation, "bad-config", "sweep needs thresholds");
  }
  const ActivationProfile prof = profile(model, calib);
  std::vector<SweepRow> rows;
  for (double t : t_list) {
    FoldConfig cfg = base_config;
    cfg.global_t = t;
    cfg.bounds = default_bounds(t);
    const FoldedModel folded = run_fold(model, prof, cfg);
    const EvalReport rep = run_eval(model, folded, calib.x);
    SweepRow row;
    row.t = t;
    row.mse_oracle = rep.mse_oracle;
    row.mse_predictor = rep.mse_predictor;
    row.flagged_fraction = rep.flagged_fraction_oracle;
    row.compression = rep.compression_ratio;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "t,mse_oracle,mse_predictor,flagged_fraction,compression\n";
  out.precision(12);
  for (const auto& r : rows) {
    out << r.t << ',' << r.mse_oracle << ',' << r.mse_predictor << ','
        << r.flagged_fraction << ',' << r.compression << '\n';
  }
  return out.str();
}

std::string stats_text(const FoldedModel& folded) {
  std::ostringstream out;
  const std::size_t d = folded.d();
  const std::size_t h = folded.layers.front().h();
  const int bits =
      folded.config.bypass_predictor ? 32 : folded.config.predictor_bits;
  const ParamAccounting acc = folded_params(d, h, bits);
  out << "layers: " << folded.layers.size() << "  d: " << d << "  h: " << h
      << "\n";
  out << "threshold: " << folded.config.global_t << "  bounds: ["
      << folded.config.bounds.lo << ", " << folded.config.bounds.hi << "]\n";
  out << "original params/layer: " << acc.original_params
      << "  folded: " << acc.folded_params
      << "  predictor-equiv: " << acc.predictor_equiv << "\n";
  out << "compression ratio: " << acc.compression_ratio << "\n";
  for (std::size_t li = 0; li < folded.layers.size(); ++li) {
    const auto& fl = folded.layers[li];
    double tsum = 0.0, csum = 0.0;
    for (double t : folded.plan.neuron_t[li]) tsum += t;
    for (const auto& a : fl.approx) csum += a.coverage;
    out << "layer " << li << ": t_i=" << folded.plan.layer_t[li]
        << " mean(t_in)=" << tsum / static_cast<double>(h)
        << " mean(coverage)=" << csum / static_cast<double>(h) << "\n";
  }
  out << "ranges (layer, neuron, l1, l2, slope, intercept, coverage):\n";
  for (std::size_t li = 0; li < folded.layers.size(); ++li) {
    const auto& fl = folded.layers[li];
    const std::size_t show = std::min<std::size_t>(8, fl.h());
    for (std::size_t n = 0; n < show; ++n) {
      const auto& a = fl.approx[n];
      out << "  " << li << " " << n << " " << a.l1 << " " << a.l2 << " "
          << a.slope << " " << a.intercept << " " << a.coverage << "\n";
    }
    if (fl.h() > show) out << "  ... (" << fl.h() - show << " more)\n";
  }
  return out.str();
}

}  // namespace ffnfold
