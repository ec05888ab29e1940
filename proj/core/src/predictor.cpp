#include "ffnfold/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "ffnfold/error.hpp"
#include "parallel.hpp"

namespace ffnfold {

namespace {

bool bits_supported(int bits) {
  return bits == 2 || bits == 3 || bits == 4 || bits == 8;
}

}  // namespace

std::size_t Predictor::packed_column_bytes() const {
  if (bits == 3) return d;  // unpacked, one byte per code
  const std::size_t per_byte = 8 / static_cast<std::size_t>(bits);
  return (d + per_byte - 1) / per_byte;
}

Predictor build_predictor(const Matrix& w1, int bits) {
  if (!bits_supported(bits)) {
    throw Error(ErrKind::Validation, "bad-config",
                "predictor bits must be one of {2,3,4,8}");
  }
  Predictor pred;
  pred.bits = bits;
  pred.d = w1.rows;
  pred.h = w1.cols;
  pred.scale.resize(pred.h);
  pred.zero.resize(pred.h);
  pred.codes.assign(pred.h * pred.packed_column_bytes(), 0);
  pred.dequant = Matrix(pred.d, pred.h);

  const std::uint32_t levels = (1u << bits) - 1u;
  const std::size_t col_bytes = pred.packed_column_bytes();

  for (std::size_t n = 0; n < pred.h; ++n) {
    double mn = w1.at(0, n), mx = mn;
    for (std::size_t i = 1; i < pred.d; ++i) {
      mn = std::min(mn, w1.at(i, n));
      mx = std::max(mx, w1.at(i, n));
    }
    const double scale =
        std::max((mx - mn) / static_cast<double>(levels), 1e-12);
    pred.scale[n] = static_cast<float>(scale);
    pred.zero[n] = static_cast<float>(mn);

    std::uint8_t* col = pred.codes.data() + n * col_bytes;
    for (std::size_t i = 0; i < pred.d; ++i) {
      const double q = std::round((w1.at(i, n) -
                                   static_cast<double>(pred.zero[n])) /
                                  static_cast<double>(pred.scale[n]));
      const std::uint32_t code = static_cast<std::uint32_t>(
          std::clamp(q, 0.0, static_cast<double>(levels)));
      if (bits == 3) {
        col[i] = static_cast<std::uint8_t>(code);
      } else {
        const std::size_t per_byte = 8 / static_cast<std::size_t>(bits);
        col[i / per_byte] |= static_cast<std::uint8_t>(
            code << (bits * static_cast<int>(i % per_byte)));
      }
      pred.dequant.at(i, n) =
          static_cast<double>(pred.zero[n]) +
          static_cast<double>(code) * static_cast<double>(pred.scale[n]);
    }
  }
  return pred;
}

Predictor bypass_predictor(const Matrix& w1) {
  Predictor pred;
  pred.bypass = true;
  pred.bits = 8;
  pred.d = w1.rows;
  pred.h = w1.cols;
  pred.dequant = w1;
  return pred;
}

std::vector<std::size_t> predict_flags(const Predictor& pred, const Vector& b1,
                                       std::span<const double> x_row,
                                       const std::vector<NeuronApprox>& approx) {
  if (x_row.size() != pred.d || b1.size() != pred.h ||
      approx.size() != pred.h) {
    throw Error(ErrKind::Validation, "dim-mismatch",
                "predict_flags shape mismatch");
  }
  std::vector<std::size_t> flags;
  for (std::size_t n = 0; n < pred.h; ++n) {
    double z = b1[n];
    for (std::size_t i = 0; i < pred.d; ++i)
      z += x_row[i] * pred.dequant.at(i, n);
    if (!approx[n].in_range(z)) flags.push_back(n);
  }
  return flags;
}

FlagStats flag_stats(const Predictor& pred, const FfnLayer& layer,
                     const Matrix& x, const std::vector<NeuronApprox>& approx) {
  if (x.cols != layer.d()) {
    throw Error(ErrKind::Validation, "dim-mismatch", "flag_stats input cols");
  }
  std::uint64_t tp = 0, fp = 0, fn = 0;
  std::vector<std::uint64_t> tps(x.rows, 0), fps(x.rows, 0), fns(x.rows, 0);
  par::parallel_for(x.rows, [&](std::size_t t) {
    const auto row = x.row(t);
    const auto predicted = predict_flags(pred, layer.b1, row, approx);
    std::vector<bool> is_pred(layer.h(), false);
    for (std::size_t n : predicted) is_pred[n] = true;
    for (std::size_t n = 0; n < layer.h(); ++n) {
      double z = layer.b1[n];
      for (std::size_t i = 0; i < layer.d(); ++i)
        z += row[i] * layer.w1.at(i, n);
      const bool truth = !approx[n].in_range(z);
      if (truth && is_pred[n]) ++tps[t];
      else if (!truth && is_pred[n]) ++fps[t];
      else if (truth && !is_pred[n]) ++fns[t];
    }
  });
  for (std::size_t t = 0; t < x.rows; ++t) {
    tp += tps[t];
    fp += fps[t];
    fn += fns[t];
  }

  FlagStats stats;
  stats.true_out_of_range = tp + fn;
  stats.flagged = tp + fp;
  stats.precision = (tp + fp) ? static_cast<double>(tp) /
                                    static_cast<double>(tp + fp)
                              : 1.0;
  stats.recall = (tp + fn) ? static_cast<double>(tp) /
                                 static_cast<double>(tp + fn)
                           : 1.0;
  stats.false_negative_rate = (tp + fn) ? static_cast<double>(fn) /
                                              static_cast<double>(tp + fn)
                                        : 0.0;
  return stats;
}

}  // namespace ffnfold
