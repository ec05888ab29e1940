#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "ffnfold/pipeline.hpp"
#include "helpers.hpp"

using namespace ffnfold;

TEST_CASE("run_fold is deterministic: identical artifacts byte for byte") {
  testutil::TempDir tmp;
  const ToyModel m = gen_synthetic(12, 48, 2, 91, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(400, 12, 92);
  FoldConfig cfg;
  const std::string p1 = tmp.file("a.bin"), p2 = tmp.file("b.bin");
  folded_save(run_fold(m, calib, cfg), p1);
  folded_save(run_fold(m, calib, cfg), p2);
  CHECK(testutil::read_bytes(p1) == testutil::read_bytes(p2));
}

TEST_CASE("run_fold from a saved profile matches run_fold from calibration") {
  const ToyModel m = gen_synthetic(8, 32, 1, 93, Activation::SiLU);
  const CalibrationSet calib = gen_calibration(300, 8, 94);
  FoldConfig cfg;
  const FoldedModel a = run_fold(m, calib, cfg);
  const FoldedModel b = run_fold(m, profile(m, calib), cfg);
  CHECK(a.layers[0].c.data == b.layers[0].c.data);
  CHECK(a.layers[0].bfold == b.layers[0].bfold);
}

TEST_CASE("run_eval: mode ordering and report sanity") {
  const ToyModel m = gen_synthetic(16, 64, 2, 95, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(600, 16, 96);
  FoldConfig cfg;
  const FoldedModel folded = run_fold(m, calib, cfg);
  const EvalReport rep = run_eval(m, folded, calib.x);

  CHECK(rep.mse_no_fix >= rep.mse_oracle - 1e-15);
  CHECK(rep.mse_oracle >= rep.mse_all_flagged - 1e-15);
  CHECK(rep.mse_all_flagged <= 1e-12);
  CHECK(rep.coverage_actual_mean >= 0.0);
  CHECK(rep.coverage_actual_mean <= 1.0);
  CHECK(rep.flagged_fraction_oracle >= 0.0);
  CHECK(rep.flagged_fraction_oracle <= 1.0);
  CHECK(rep.compression_ratio > 0.0);
  REQUIRE(rep.per_layer.size() == 2);
  for (const auto& l : rep.per_layer) {
    CHECK(l.fold_mse >= 0.0);
    CHECK(l.coverage_actual_mean >= 0.0);
    CHECK(l.coverage_actual_mean <= 1.0);
    CHECK(l.predictor_precision >= 0.0);
    CHECK(l.predictor_precision <= 1.0);
    CHECK(l.predictor_recall >= 0.0);
    CHECK(l.predictor_recall <= 1.0);
  }
}

TEST_CASE("run_eval: oracle flag rate complements coverage") {
  const ToyModel m = gen_synthetic(16, 64, 1, 97, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(800, 16, 98);
  FoldConfig cfg;
  const FoldedModel folded = run_fold(m, calib, cfg);
  const EvalReport rep = run_eval(m, folded, calib.x);
  CHECK(std::abs(rep.flagged_fraction_oracle -
                 (1.0 - rep.coverage_actual_mean)) <= 0.01);
}

TEST_CASE("eval report JSON: schema fields and config echo round-trip") {
  const ToyModel m = gen_synthetic(8, 32, 1, 99, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(200, 8, 100);
  FoldConfig cfg;
  cfg.global_t = 0.8;
  cfg.predictor_bits = 8;
  cfg.seed = 7;
  cfg.bounds = default_bounds(cfg.global_t);
  const EvalReport rep = run_eval(m, run_fold(m, calib, cfg), calib.x);

  const nlohmann::json j = nlohmann::json::parse(rep.to_json());
  CHECK(j.at("schema") == "report_v1");
  for (const char* key :
       {"mse_no_fix", "mse_oracle", "mse_predictor", "mse_all_flagged",
        "flagged_fraction_oracle", "flagged_fraction_predictor",
        "coverage_actual_mean", "compression_ratio", "per_layer", "config",
        "flops"}) {
    CHECK(j.contains(key));
  }
  CHECK(j.at("config").at("global_t").get<double>() == doctest::Approx(0.8));
  CHECK(j.at("config").at("predictor_bits").get<int>() == 8);
  CHECK(j.at("config").at("seed").get<std::uint64_t>() == 7);
  CHECK(j.at("per_layer").size() == 1);
  for (const auto& l : j.at("per_layer")) {
    CHECK(l.at("fold_mse").get<double>() >= 0.0);
    CHECK(l.at("coverage_target").get<double>() >= 0.0);
  }
}

TEST_CASE("run_sweep: header format and row counts") {
  const ToyModel m = gen_synthetic(8, 32, 1, 101, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(300, 8, 102);
  FoldConfig cfg;
  const auto rows = run_sweep(m, calib, {0.85}, cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].t == doctest::Approx(0.85));

  const std::string csv = sweep_csv(rows);
  CHECK(csv.rfind("t,mse_oracle,mse_predictor,flagged_fraction,compression\n",
                  0) == 0);
  // Header plus exactly one data row.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("stats_text mentions compression and thresholds") {
  const ToyModel m = gen_synthetic(8, 32, 1, 103, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(200, 8, 104);
  FoldConfig cfg;
  const std::string text = stats_text(run_fold(m, calib, cfg));
  CHECK(text.find("compression") != std::string::npos);
  CHECK(text.find("layer") != std::string::npos);
}

TEST_CASE("mse helper") {
  Matrix a(1, 2), b(1, 2);
  a.data = {1, 2};
  b.data = {0, 4};
  CHECK(mse(a, b) == doctest::Approx(2.5).epsilon(1e-12));
}
