#include <doctest.h>

#include <cmath>

#include "ffnfold/calibration.hpp"
#include "ffnfold/error.hpp"
#include "ffnfold/pipeline.hpp"
#include "ffnfold/runtime.hpp"
#include "helpers.hpp"

using namespace ffnfold;

namespace {

NeuronApprox line(double a, double b, double lo = -1e9, double hi = 1e9) {
  NeuronApprox n;
  n.l1 = lo;
  n.l2 = hi;
  n.slope = a;
  n.intercept = b;
  n.coverage = 1.0;
  return n;
}

FoldedLayer figure_folded() {
  FfnLayer l;
  l.w1 = Matrix(2, 2);
  l.w1.data = {3, 1, -1, 2};
  l.b1 = {0, 0};
  l.w2 = Matrix(2, 2);
  l.w2.data = {-1, 0, 1, 1};
  l.b2 = {0, 0};
  l.act = Activation::ReLU;
  return fold_layer(l, {line(0.25, 0.1), line(0.1, 0.2)});
}

double rel_err(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    worst = std::max(worst, std::abs(a.data[i] - b.data[i]) /
                                std::max(1.0, std::abs(b.data[i])));
  return worst;
}

FoldedModel fold_full_range(const ToyModel& m, const CalibrationSet& calib,
                            bool bypass = true) {
  FoldConfig cfg;
  cfg.global_t = 1.0;
  cfg.bounds = {1.0, 1.0};
  cfg.bypass_predictor = bypass;
  return run_fold(m, calib, cfg);
}

}  // namespace

TEST_CASE("infer_speculative: figure example") {
  const FoldedLayer folded = figure_folded();
  Matrix x(1, 2);
  x.data = {-1, -1};
  const Matrix y = infer_speculative(folded, x);
  CHECK(y.at(0, 0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(y.at(0, 1) == doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("infer_speculative: zero fold gives zero output") {
  FfnLayer l;
  l.w1 = Matrix(2, 2);
  l.b1 = {0, 0};
  l.w2 = Matrix(2, 2);
  l.b2 = {0, 0};
  l.act = Activation::ReLU;
  const FoldedLayer folded = fold_layer(l, {line(0, 0), line(0, 0)});
  const Matrix y = infer_speculative(folded, testutil::random_matrix(3, 2, 5));
  for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("fix_results: figure subtraction term for neuron one") {
  const FoldedLayer folded = figure_folded();
  Matrix x(1, 2);
  x.data = {-1, -1};
  Matrix y = infer_speculative(folded, x);

  // z_1 = x . (3,-1) = -2; the baked-in approximate contribution to be
  // subtracted is (0.25*z+0.1)*(-1,0) = (0.4, 0).
  const double z1 = -2.0;
  const double approx_part0 = (0.25 * z1 + 0.1) * -1.0;
  const double approx_part1 = (0.25 * z1 + 0.1) * 0.0;
  CHECK(approx_part0 == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(approx_part1 == doctest::Approx(0.0).epsilon(1e-12));

  fix_results(folded, x, y, {{0}});
  // Fixed output = speculative - approx contribution + exact ReLU(z1)*row,
  // and ReLU(-2) = 0, so only neuron two's approximation remains.
  CHECK(y.at(0, 0) == doctest::Approx(0.3 - 0.4).epsilon(1e-12));
  CHECK(y.at(0, 1) == doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("fix_results: empty flag set leaves y untouched") {
  const FoldedLayer folded = figure_folded();
  const Matrix x = testutil::random_matrix(4, 2, 6);
  const Matrix y0 = infer_speculative(folded, x);
  Matrix y = y0;
  fix_results(folded, x, y, {{}, {}, {}, {}});
  CHECK(y.data == y0.data);
}

TEST_CASE("fix_results: flagging all neurons recovers ffn_exact") {
  for (Activation act : {Activation::GeluErf, Activation::SiLU}) {
    const ToyModel m = gen_synthetic(8, 32, 1, 7, act);
    const Matrix x = testutil::random_matrix(6, 8, 8);
    const CalibrationSet calib = gen_calibration(100, 8, 9);
    const FoldedModel folded = fold_full_range(m, calib);
    Matrix y = infer_speculative(folded.layers[0], x);
    std::vector<std::vector<std::size_t>> flags(x.rows);
    for (auto& f : flags)
      for (std::size_t n = 0; n < 32; ++n) f.push_back(n);
    fix_results(folded.layers[0], x, y, flags);
    CHECK(rel_err(y, ffn_exact(m.layers[0], x)) <= 1e-9);
  }
}

TEST_CASE("all-in-range ReLU layer equals ffn_exact with no fixing") {
  // Inputs whose pre-activations all stay positive: ReLU is linear there.
  ToyModel m = gen_synthetic(8, 32, 1, 10, Activation::ReLU);
  for (auto& b : m.layers[0].b1) b = 6.0;  // push pre-activations positive
  CalibrationSet calib = gen_calibration(300, 8, 11);
  const FoldedModel folded = fold_full_range(m, calib);
  const Matrix y = infer_speculative(folded.layers[0], calib.x);
  CHECK(rel_err(y, ffn_exact(m.layers[0], calib.x)) <= 1e-9);
}

TEST_CASE("oracle-flags error equals the in-range residual decomposition") {
  const ToyModel m = gen_synthetic(8, 32, 1, 12, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(400, 8, 13);
  FoldConfig cfg;
  cfg.bypass_predictor = true;
  const FoldedModel folded = run_fold(m, calib, cfg);
  const FoldedLayer& fl = folded.layers[0];

  const Matrix x = testutil::random_matrix(25, 8, 14);
  const InferenceReport rep = infer(fl, x, InferMode::OracleFlags);
  const Matrix exact = ffn_exact(m.layers[0], x);

  for (std::size_t t = 0; t < x.rows; ++t) {
    // Reference error vector: unflagged (in-range) neurons contribute their
    // fit residual; flagged neurons contribute nothing.
    Vector want(8, 0.0);
    for (std::size_t n = 0; n < fl.h(); ++n) {
      double z = fl.original.b1[n];
      for (std::size_t j = 0; j < 8; ++j) z += x.at(t, j) * fl.original.w1.at(j, n);
      if (!fl.approx[n].in_range(z)) continue;
      const double resid = (fl.approx[n].slope * z + fl.approx[n].intercept) -
                           activate(fl.original.act, z);
      for (std::size_t j = 0; j < 8; ++j)
        want[j] += resid * fl.original.w2.at(n, j);
    }
    for (std::size_t j = 0; j < 8; ++j)
      CHECK(std::abs((rep.output.at(t, j) - exact.at(t, j)) - want[j]) <=
            1e-8);
  }
}

TEST_CASE("monotone fixing: nested flag sets never increase the batch MSE") {
  const ToyModel m = gen_synthetic(8, 32, 1, 15, Activation::SiLU);
  const CalibrationSet calib = gen_calibration(200, 8, 16);
  const FoldedModel folded = fold_full_range(m, calib);
  const FoldedLayer& fl = folded.layers[0];
  const Matrix& x = calib.x;
  const Matrix exact = ffn_exact(m.layers[0], x);

  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n <= 32; n += 8) {
    std::vector<std::size_t> flags;
    for (std::size_t i = 0; i < n; ++i) flags.push_back(i);
    Matrix y = infer_speculative(fl, x);
    fix_results(fl, x, y, std::vector<std::vector<std::size_t>>(x.rows, flags));
    const double err = mse(y, exact);
    CHECK(err <= prev + 1e-12);
    prev = err;
  }
}

TEST_CASE("infer: no-fix at t=1.0 equals the speculative output") {
  const ToyModel m = gen_synthetic(8, 32, 1, 17, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(150, 8, 18);
  const FoldedModel folded = fold_full_range(m, calib, false);
  const InferenceReport rep =
      infer(folded.layers[0], calib.x, InferMode::NoFix);
  const Matrix spec = infer_speculative(folded.layers[0], calib.x);
  CHECK(rep.output.data == spec.data);
  for (auto c : rep.flagged_count) CHECK(c == 0);
}

TEST_CASE("infer: bypass predictor mode equals oracle-flags bit-for-bit") {
  const ToyModel m = gen_synthetic(8, 32, 1, 19, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(300, 8, 20);
  FoldConfig cfg;
  cfg.bypass_predictor = true;
  const FoldedModel folded = run_fold(m, calib, cfg);
  const Matrix x = testutil::random_matrix(12, 8, 21);
  const InferenceReport a = infer(folded.layers[0], x, InferMode::Predictor);
  const InferenceReport b = infer(folded.layers[0], x, InferMode::OracleFlags);
  CHECK(a.output.data == b.output.data);
  CHECK(a.flagged_count == b.flagged_count);
}

TEST_CASE("FLOP accounting") {
  CHECK(speculative_flops_per_token(64) == 2 * 64 * 64 + 64);
  CHECK(fix_flops_per_neuron(64) == 4 * 64 + 1);
  CHECK(exact_flops_per_token(64, 256) == 4 * 64 * 256 + 256);

  const ToyModel m = gen_synthetic(8, 32, 1, 22, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(100, 8, 23);
  FoldConfig cfg;
  const FoldedModel folded = run_fold(m, calib, cfg);
  const Matrix x = testutil::random_matrix(9, 8, 24);
  const InferenceReport rep = infer(folded.layers[0], x, InferMode::OracleFlags);
  CHECK(rep.speculative_flops == 9 * speculative_flops_per_token(8));
  std::uint64_t flagged = 0;
  for (auto c : rep.flagged_count) flagged += c;
  CHECK(rep.fixed_flops == flagged * fix_flops_per_neuron(8));
  CHECK(rep.exact_flops == 9 * exact_flops_per_token(8, 32));
  for (auto c : rep.flagged_count) CHECK(c <= 32);
}

TEST_CASE("model_infer: one layer equals infer; flop totals add up") {
  const ToyModel m1 = gen_synthetic(8, 32, 1, 25, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(200, 8, 26);
  FoldConfig cfg;
  const FoldedModel f1 = run_fold(m1, calib, cfg);
  const Matrix x = testutil::random_matrix(7, 8, 27);
  const InferenceReport a = model_infer(f1, x, InferMode::Predictor);
  const InferenceReport b = infer(f1.layers[0], x, InferMode::Predictor);
  CHECK(a.output.data == b.output.data);
  CHECK(a.speculative_flops == b.speculative_flops);
  CHECK(a.fixed_flops == b.fixed_flops);
}

TEST_CASE("model_infer: two layers all-flagged equals stacked ffn_exact") {
  const ToyModel m = gen_synthetic(8, 32, 2, 28, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(200, 8, 29);
  const FoldedModel folded = fold_full_range(m, calib);
  const Matrix x = testutil::random_matrix(6, 8, 30);
  // Oracle flags with empty ranges flag everything; emulate by shrinking the
  // ranges to empty intervals so every neuron is out of range.
  FoldedModel all_flagged = folded;
  for (auto& layer : all_flagged.layers)
    for (auto& a : layer.approx) {
      a.l1 = 0.0;
      a.l2 = 0.0;
    }
  const InferenceReport rep = model_infer(all_flagged, x, InferMode::OracleFlags);
  const Matrix exact = model_exact(m, x);
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.data.size(); ++i)
    worst = std::max(worst, std::abs(rep.output.data[i] - exact.data[i]));
  CHECK(worst <= 1e-8);
}

TEST_CASE("infer mode names round-trip") {
  for (InferMode mode : {InferMode::Predictor, InferMode::OracleFlags,
                         InferMode::NoFix}) {
    CHECK(infer_mode_from_string(to_string(mode)) == mode);
  }
  CHECK_THROWS_AS(infer_mode_from_string("magic"), Error);
}
