#include "ffnfold/runtime.hpp"

#include "ffnfold/error.hpp"
#include "ffnfold/predictor.hpp"
#include "parallel.hpp"

namespace ffnfold {

InferMode infer_mode_from_string(const std::string& name) {
  if (name == "predictor") return InferMode::Predictor;
  if (name == "oracle-flags") return InferMode::OracleFlags;
  if (name == "no-fix") return InferMode::NoFix;
  throw Error(ErrKind::Validation, "bad-config",
              "unknown inference mode: " + name);
}

std::string to_string(InferMode mode) {
  switch (mode) {
    case InferMode::Predictor: return "predictor";
    case InferMode::OracleFlags: return "oracle-flags";
    case InferMode::NoFix: return "no-fix";
  }
  throw Error(ErrKind::Internal, "bad-config", "unreachable mode tag");
}

double InferenceReport::flagged_fraction(std::size_t h,
                                         std::size_t layers) const {
  if (flagged_count.empty() || h == 0 || layers == 0) return 0.0;
  std::uint64_t total = 0;
  for (auto c : flagged_count) total += c;
  return static_cast<double>(total) /
         (static_cast<double>(flagged_count.size()) * static_cast<double>(h) *
          static_cast<double>(layers));
}

std::uint64_t speculative_flops_per_token(std::size_t d) {
  return 2 * static_cast<std::uint64_t>(d) * d + d;  // x C plus bias adds
}

std::uint64_t fix_flops_per_neuron(std::size_t d) {
  // Exact z (2d) plus (sigma(z) - phi(z)) * w2_row update (2d); the
  // activation itself is counted as one op.
  return 4 * static_cast<std::uint64_t>(d) + 1;
}

std::uint64_t exact_flops_per_token(std::size_t d, std::size_t h) {
  return 4 * static_cast<std::uint64_t>(d) * h + h;
}

Matrix infer_speculative(const FoldedLayer& folded, const Matrix& x) {
  if (x.cols != folded.d()) {
    throw Error(ErrKind::Validation, "dim-mismatch",
                "input cols " + std::to_string(x.cols) + " != folded d " +
                    std::to_string(folded.d()));
  }
  Matrix y = matmul(x, folded.c);
  for (std::size_t i = 0; i < y.rows; ++i)
    for (std::size_t j = 0; j < y.cols; ++j)
      y.at(i, j) += folded.bfold[j] + folded.original.b2[j];
  return y;
}

void fix_results(const FoldedLayer& folded, const Matrix& x, Matrix& y,
                 const std::vector<std::vector<std::size_t>>& flags_per_token) {
  if (flags_per_token.size() != x.rows || y.rows != x.rows ||
      y.cols != folded.d()) {
    throw Error(ErrKind::Validation, "dim-mismatch", "fix_results shapes");
  }
  const auto& layer = folded.original;
  par::parallel_for(x.rows, [&](std::size_t t) {
    const auto xrow = x.row(t);
    auto yrow = y.row(t);
    for (std::size_t n : flags_per_token[t]) {
      if (n >= folded.h()) {
        throw Error(ErrKind::Validation, "bad-config",
                    "flag index out of range");
      }
      double z = layer.b1[n];
      for (std::size_t i = 0; i < layer.d(); ++i)
        z += xrow[i] * layer.w1.at(i, n);
      const NeuronApprox& a = folded.approx[n];
      // The subtracted term is exactly neuron n's contribution in xC+B.
      const double delta =
          activate(layer.act, z) - (a.slope * z + a.intercept);
      const double* w2row = layer.w2.data.data() + n * layer.d();
      for (std::size_t j = 0; j < layer.d(); ++j) yrow[j] += delta * w2row[j];
    }
  });
}

std::vector<std::vector<std::size_t>> oracle_flags(const FoldedLayer& folded,
                                                   const Matrix& x) {
  const auto& layer = folded.original;
  std::vector<std::vector<std::size_t>> flags(x.rows);
  par::parallel_for(x.rows, [&](std::size_t t) {
    const auto xrow = x.row(t);
    for (std::size_t n = 0; n < folded.h(); ++n) {
      double z = layer.b1[n];
      for (std::size_t i = 0; i < layer.d(); ++i)
        z += xrow[i] * layer.w1.at(i, n);
      if (!folded.approx[n].in_range(z)) flags[t].push_back(n);
    }
  });
  return flags;
}

InferenceReport infer(const FoldedLayer& folded, const Matrix& x,
                      InferMode mode) {
  InferenceReport rep;
  rep.output = infer_speculative(folded, x);
  rep.flagged_count.assign(x.rows, 0);
  rep.speculative_flops = x.rows * speculative_flops_per_token(folded.d());
  rep.exact_flops = x.rows * exact_flops_per_token(folded.d(), folded.h());

  if (mode == InferMode::NoFix) return rep;

  std::vector<std::vector<std::size_t>> flags;
  if (mode == InferMode::OracleFlags) {
    flags = oracle_flags(folded, x);
  } else {
    flags.resize(x.rows);
    par::parallel_for(x.rows, [&](std::size_t t) {
      flags[t] = predict_flags(folded.predictor, folded.original.b1, x.row(t),
                               folded.approx);
    });
  }
  std::uint64_t total_flags = 0;
  for (std::size_t t = 0; t < x.rows; ++t) {
    rep.flagged_count[t] = flags[t].size();
    total_flags += flags[t].size();
  }
  rep.fixed_flops = total_flags * fix_flops_per_neuron(folded.d());
  fix_results(folded, x, rep.output, flags);
  return rep;
}

InferenceReport model_infer(const FoldedModel& folded, const Matrix& x,
                            InferMode mode) {
  if (folded.layers.empty()) {
    throw Error(ErrKind::Validation, "bad-shape", "no folded layers");
  }
  InferenceReport total;
  total.output = x;
  total.flagged_count.assign(x.rows, 0);
  for (const auto& layer : folded.layers) {
    InferenceReport rep = infer(layer, total.output, mode);
    total.output = std::move(rep.output);
    for (std::size_t t = 0; t < x.rows; ++t)
      total.flagged_count[t] += rep.flagged_count[t];
    total.speculative_flops += rep.speculative_flops;
    total.fixed_flops += rep.fixed_flops;
    total.exact_flops += rep.exact_flops;
  }
  return total;
}

}  // namespace ffnfold
