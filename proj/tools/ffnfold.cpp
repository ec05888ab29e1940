// Command-line surface for the FFN constant-folding pipeline.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ffnfold/error.hpp"
#include "ffnfold/pipeline.hpp"

namespace {

using namespace ffnfold;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrKind::Io, "io-error", "cannot write: " + path);
  out << text;
  if (!out) throw Error(ErrKind::Io, "io-error", "write failed: " + path);
}

CalibrationSet load_tokens(const std::string& path, bool csv) {
  return csv ? calibration_load_csv(path) : calibration_load(path);
}

std::vector<double> parse_t_list(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw Error(ErrKind::Validation, "bad-config",
                  "bad threshold list entry: " + cell);
    }
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Constant folding for FFN blocks: fold, predict, fix"};
  app.require_subcommand(1);

  // gen-model
  auto* gen_model = app.add_subcommand("gen-model", "generate a synthetic model");
  std::size_t gm_d = 64, gm_h = 256, gm_layers = 2;
  std::uint64_t gm_seed = 42;
  std::string gm_act = "gelu", gm_out;
  gen_model->add_option("--d", gm_d, "embedding width");
  gen_model->add_option("--hidden", gm_h, "hidden width h");
  gen_model->add_option("--layers", gm_layers, "layer count");
  gen_model->add_option("--seed", gm_seed, "rng seed");
  gen_model->add_option("--act", gm_act, "relu|gelu|gelu_tanh|silu");
  gen_model->add_option("--out", gm_out, "output model path")->required();

  // gen-calib
  auto* gen_calib = app.add_subcommand("gen-calib", "generate calibration data");
  std::size_t gc_tokens = 2048, gc_d = 64;
  std::uint64_t gc_seed = 42;
  std::string gc_dist = "gaussian", gc_out;
  gen_calib->add_option("--tokens", gc_tokens, "token count");
  gen_calib->add_option("--d", gc_d, "embedding width");
  gen_calib->add_option("--seed", gc_seed, "rng seed");
  gen_calib->add_option("--dist", gc_dist, "gaussian|mixture");
  gen_calib->add_option("--out", gc_out, "output calibration path")->required();

  // profile
  auto* prof_cmd = app.add_subcommand("profile", "record activation inputs");
  std::string pf_model, pf_calib, pf_out, pf_sidecar;
  bool pf_csv = false;
  prof_cmd->add_option("--model", pf_model)->required();
  prof_cmd->add_option("--calib", pf_calib)->required();
  prof_cmd->add_flag("--csv", pf_csv, "calibration file is CSV");
  prof_cmd->add_option("--out", pf_out, "summary JSON path")->required();
  prof_cmd->add_option("--sidecar", pf_sidecar, "full-sample sidecar path");

  // fold
  auto* fold_cmd = app.add_subcommand("fold", "build the folded artifact");
  std::string fd_model, fd_calib, fd_out, fd_profile;
  bool fd_csv = false, fd_bypass = false;
  FoldConfig fd_cfg;
  double fd_lo = -1.0, fd_hi = -1.0;
  fold_cmd->add_option("--model", fd_model)->required();
  fold_cmd->add_option("--calib", fd_calib);
  fold_cmd->add_option("--profile", fd_profile, "profile sidecar to reuse");
  fold_cmd->add_flag("--csv", fd_csv, "calibration file is CSV");
  fold_cmd->add_option("--threshold", fd_cfg.global_t, "global coverage t");
  fold_cmd->add_option("--bound-lo", fd_lo, "per-scope threshold floor");
  fold_cmd->add_option("--bound-hi", fd_hi, "per-scope threshold ceiling");
  fold_cmd->add_option("--bits", fd_cfg.predictor_bits, "predictor bits");
  fold_cmd->add_flag("--bypass-predictor", fd_bypass, "exact-weight predictor");
  fold_cmd->add_option("--step", fd_cfg.step, "range increment (0 = auto)");
  fold_cmd->add_option("--seed", fd_cfg.seed);
  fold_cmd->add_option("--out", fd_out, "artifact path")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "folded-vs-exact report");
  std::string ev_model, ev_folded, ev_data, ev_out;
  bool ev_csv = false;
  eval_cmd->add_option("--model", ev_model)->required();
  eval_cmd->add_option("--folded", ev_folded)->required();
  eval_cmd->add_option("--data", ev_data)->required();
  eval_cmd->add_flag("--csv", ev_csv, "data file is CSV");
  eval_cmd->add_option("--out", ev_out, "report JSON path (default stdout)");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "artifact accounting");
  std::string st_folded;
  stats_cmd->add_option("--folded", st_folded)->required();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "threshold sweep CSV");
  std::string sw_model, sw_calib, sw_tlist = "0.65,0.75,0.85,0.95", sw_out;
  bool sw_csv = false;
  FoldConfig sw_cfg;
  sweep_cmd->add_option("--model", sw_model)->required();
  sweep_cmd->add_option("--calib", sw_calib)->required();
  sweep_cmd->add_flag("--csv", sw_csv, "calibration file is CSV");
  sweep_cmd->add_option("--t-list", sw_tlist, "comma-separated thresholds");
  sweep_cmd->add_option("--bits", sw_cfg.predictor_bits);
  sweep_cmd->add_option("--step", sw_cfg.step);
  sweep_cmd->add_option("--seed", sw_cfg.seed);
  sweep_cmd->add_option("--out", sw_out, "CSV path (default stdout)");

  // infer
  auto* infer_cmd = app.add_subcommand("infer", "run the folded runtime");
  std::string in_folded, in_data, in_mode = "predictor", in_out, in_report;
  bool in_csv = false;
  infer_cmd->add_option("--folded", in_folded)->required();
  infer_cmd->add_option("--data", in_data)->required();
  infer_cmd->add_flag("--csv", in_csv, "data file is CSV");
  infer_cmd->add_option("--mode", in_mode, "predictor|oracle-flags|no-fix");
  infer_cmd->add_option("--out", in_out, "output token matrix path");
  infer_cmd->add_option("--report", in_report, "JSON report path");

  CLI11_PARSE(app, argc, argv);

  if (*gen_model) {
    model_save(gen_synthetic(gm_d, gm_h, gm_layers, gm_seed,
                             activation_from_string(gm_act)),
               gm_out);
    std::cout << "wrote model " << gm_out << " (d=" << gm_d << " h=" << gm_h
              << " layers=" << gm_layers << ")\n";
  } else if (*gen_calib) {
    calibration_save(gen_calibration(gc_tokens, gc_d, gc_seed, gc_dist),
                     gc_out);
    std::cout << "wrote calibration " << gc_out << " (" << gc_tokens << "x"
              << gc_d << ", " << gc_dist << ")\n";
  } else if (*prof_cmd) {
    const ToyModel model = model_load(pf_model);
    const ActivationProfile prof =
        profile(model, load_tokens(pf_calib, pf_csv));
    write_text(pf_out, profile_summary_json(prof));
    if (!pf_sidecar.empty()) profile_save(prof, pf_sidecar);
    std::cout << "profiled " << prof.layers() << " layers -> " << pf_out
              << "\n";
  } else if (*fold_cmd) {
    fd_cfg.bypass_predictor = fd_bypass;
    fd_cfg.bounds = default_bounds(fd_cfg.global_t);
    if (fd_lo >= 0.0) fd_cfg.bounds.lo = fd_lo;
    if (fd_hi >= 0.0) fd_cfg.bounds.hi = fd_hi;
    const ToyModel model = model_load(fd_model);
    FoldedModel folded;
    if (!fd_profile.empty()) {
      folded = run_fold(model, profile_load(fd_profile), fd_cfg);
    } else if (!fd_calib.empty()) {
      folded = run_fold(model, load_tokens(fd_calib, fd_csv), fd_cfg);
    } else {
      throw Error(ErrKind::Validation, "bad-config",
                  "fold needs --calib or --profile");
    }
    folded_save(folded, fd_out);
    double cov = 0.0;
    std::size_t cnt = 0;
    for (const auto& fl : folded.layers)
      for (const auto& a : fl.approx) {
        cov += a.coverage;
        ++cnt;
      }
    std::cout << "wrote artifact " << fd_out << " (t=" << fd_cfg.global_t
              << ", mean coverage=" << cov / static_cast<double>(cnt)
              << ")\n";
  } else if (*eval_cmd) {
    const ToyModel model = model_load(ev_model);
    const FoldedModel folded = folded_load(ev_folded);
    const EvalReport rep =
        run_eval(model, folded, load_tokens(ev_data, ev_csv).x);
    if (ev_out.empty()) {
      std::cout << rep.to_json() << "\n";
    } else {
      write_text(ev_out, rep.to_json());
      std::cout << "wrote report " << ev_out << "\n";
    }
  } else if (*stats_cmd) {
    std::cout << stats_text(folded_load(st_folded));
  } else if (*sweep_cmd) {
    const ToyModel model = model_load(sw_model);
    const CalibrationSet calib = load_tokens(sw_calib, sw_csv);
    const std::string csv =
        sweep_csv(run_sweep(model, calib, parse_t_list(sw_tlist), sw_cfg));
    if (sw_out.empty()) {
      std::cout << csv;
    } else {
      write_text(sw_out, csv);
      std::cout << "wrote sweep " << sw_out << "\n";
    }
  } else if (*infer_cmd) {
    const FoldedModel folded = folded_load(in_folded);
    const CalibrationSet data = load_tokens(in_data, in_csv);
    const InferenceReport rep =
        model_infer(folded, data.x, infer_mode_from_string(in_mode));
    if (!in_out.empty()) calibration_save(CalibrationSet{rep.output}, in_out);
    nlohmann::json j;
    const std::size_t h = folded.layers.front().h();
    j["mode"] = in_mode;
    j["flagged_fraction"] = rep.flagged_fraction(h, folded.layers.size());
    j["flops"] = {{"speculative", rep.speculative_flops},
                  {"fixed", rep.fixed_flops},
                  {"exact", rep.exact_flops}};
    j["tokens"] = data.x.rows;
    if (in_report.empty()) {
      std::cout << j.dump(2) << "\n";
    } else {
      write_text(in_report, j.dump(2));
      std::cout << "wrote report " << in_report << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
