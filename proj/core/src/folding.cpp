#include "ffnfold/folding.hpp"

#include <nlohmann/json.hpp>

#include "binio.hpp"
#include "ffnfold/error.hpp"
#include "model_detail.hpp"

namespace ffnfold {

namespace {
constexpr char kFoldedMagic[9] = "FFNFOLDC";
constexpr int kFoldedVersion = 1;
}  // namespace

std::pair<Matrix, Vector> fold_neuron(const Vector& w1_col,
                                      const Vector& w2_row,
                                      const NeuronApprox& approx,
                                      double b1_n) {
  Matrix cn = outer(w1_col, w2_row);
  for (auto& v : cn.data) v *= approx.slope;
  Vector bn(w2_row.size());
  const double shift = approx.slope * b1_n + approx.intercept;
  for (std::size_t j = 0; j < w2_row.size(); ++j) bn[j] = shift * w2_row[j];
  return {std::move(cn), std::move(bn)};
}

FoldedLayer fold_layer(const FfnLayer& layer,
                       const std::vector<NeuronApprox>& approx) {
  layer.validate();
  if (approx.size() != layer.h()) {
    throw Error(ErrKind::Validation, "dim-mismatch",
                "fold_layer: approx count " + std::to_string(approx.size()) +
                    " != h " + std::to_string(layer.h()));
  }
  FoldedLayer folded;
  folded.c = Matrix(layer.d(), layer.d());
  folded.bfold.assign(layer.d(), 0.0);
  folded.approx = approx;
  folded.original = layer;

  for (std::size_t n = 0; n < layer.h(); ++n) {
    const double a = approx[n].slope;
    const double shift = a * layer.b1[n] + approx[n].intercept;
    for (std::size_t i = 0; i < layer.d(); ++i) {
      const double w1in = layer.w1.at(i, n);
      double* crow = folded.c.data.data() + i * layer.d();
      const double* w2row = layer.w2.data.data() + n * layer.d();
      for (std::size_t j = 0; j < layer.d(); ++j)
        crow[j] += a * w1in * w2row[j];
    }
    for (std::size_t j = 0; j < layer.d(); ++j)
      folded.bfold[j] += shift * layer.w2.at(n, j);
  }
  return folded;
}

ParamAccounting folded_params(std::size_t d, std::size_t h,
                              int predictor_bits) {
  ParamAccounting acc;
  acc.original_params = 2 * d * h + h + d;
  acc.folded_params = d * d + d;
  acc.predictor_equiv = static_cast<double>(h) * static_cast<double>(d) *
                        static_cast<double>(predictor_bits) / 32.0;
  acc.compression_ratio =
      1.0 - (static_cast<double>(acc.folded_params) + acc.predictor_equiv) /
                static_cast<double>(acc.original_params);
  return acc;
}

void folded_save(const FoldedModel& folded, const std::string& path) {
  if (folded.layers.empty()) {
    throw Error(ErrKind::Validation, "bad-shape", "no folded layers to save");
  }
  const auto& first = folded.layers.front();
  nlohmann::json header = {
      {"version", kFoldedVersion},
      {"d", first.d()},
      {"h", first.h()},
      {"layers", folded.layers.size()},
      {"act", to_string(first.original.act)},
      {"global_t", folded.config.global_t},
      {"bound_lo", folded.config.bounds.lo},
      {"bound_hi", folded.config.bounds.hi},
      {"predictor_bits", folded.config.predictor_bits},
      {"bypass_predictor", folded.config.bypass_predictor},
      {"step", folded.config.step},
      {"seed", folded.config.seed},
      {"layer_t", folded.plan.layer_t},
      {"neuron_t", folded.plan.neuron_t},
  };

  binio::Writer w(path);
  w.magic(kFoldedMagic);
  w.str(header.dump());
  for (const auto& layer : folded.layers) {
    w.f64_array(layer.c.data.data(), layer.c.data.size());
    w.f64_array(layer.bfold.data(), layer.bfold.size());
    w.f32_array(layer.original.b2.data(), layer.original.b2.size());
    for (const auto& a : layer.approx) {
      w.f64(a.l1);
      w.f64(a.l2);
      w.f64(a.slope);
      w.f64(a.intercept);
      w.f64(a.coverage);
      w.f64(a.residual);
    }
    detail::write_layer_blob(w, layer.original);
    const auto& pred = layer.predictor;
    w.u32(pred.bypass ? 1u : 0u);
    if (!pred.bypass) {
      w.u32(static_cast<std::uint32_t>(pred.bits));
      const std::size_t col_bytes = pred.packed_column_bytes();
      for (std::size_t n = 0; n < pred.h; ++n) {
        w.f32(pred.scale[n]);
        w.f32(pred.zero[n]);
        w.bytes(pred.codes.data() + n * col_bytes, col_bytes);
      }
    }
  }
  w.close();
}

FoldedModel folded_load(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic(kFoldedMagic);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrKind::Io, "bad-header", e.what());
  }
  if (header.value("version", -1) != kFoldedVersion) {
    throw Error(ErrKind::Io, "bad-version", "unsupported artifact version");
  }
  const std::size_t d = header.at("d").get<std::size_t>();
  const std::size_t h = header.at("h").get<std::size_t>();
  const std::size_t n_layers = header.at("layers").get<std::size_t>();
  const Activation act =
      activation_from_string(header.at("act").get<std::string>());

  FoldedModel folded;
  folded.config.global_t = header.at("global_t").get<double>();
  folded.config.bounds.lo = header.at("bound_lo").get<double>();
  folded.config.bounds.hi = header.at("bound_hi").get<double>();
  folded.config.predictor_bits = header.at("predictor_bits").get<int>();
  folded.config.bypass_predictor = header.value("bypass_predictor", false);
  folded.config.step = header.value("step", 0.0);
  folded.config.seed = header.value("seed", std::uint64_t{42});
  folded.plan.global_t = folded.config.global_t;
  folded.plan.bounds = folded.config.bounds;
  folded.plan.layer_t = header.at("layer_t").get<std::vector<double>>();
  folded.plan.neuron_t =
      header.at("neuron_t").get<std::vector<std::vector<double>>>();

  for (std::size_t li = 0; li < n_layers; ++li) {
    FoldedLayer layer;
    layer.c = Matrix(d, d);
    layer.bfold.resize(d);
    r.f64_array(layer.c.data.data(), layer.c.data.size());
    r.f64_array(layer.bfold.data(), layer.bfold.size());
    Vector b2(d);
    r.f32_array(b2.data(), b2.size());
    layer.approx.resize(h);
    for (auto& a : layer.approx) {
      a.l1 = r.f64();
      a.l2 = r.f64();
      a.slope = r.f64();
      a.intercept = r.f64();
      a.coverage = r.f64();
      a.residual = r.f64();
    }
    layer.original = detail::read_layer_blob(r, d, h, act);
    if (layer.original.b2 != b2) {
      throw Error(ErrKind::Io, "bad-shape",
                  "artifact b2 disagrees with retained original layer");
    }
    const std::uint32_t bypass = r.u32();
    if (bypass) {
      layer.predictor = bypass_predictor(layer.original.w1);
    } else {
      Predictor pred;
      pred.bits = static_cast<int>(r.u32());
      if (pred.bits != 2 && pred.bits != 3 && pred.bits != 4 &&
          pred.bits != 8) {
        throw Error(ErrKind::Io, "bad-shape", "bad predictor bit width");
      }
      pred.d = d;
      pred.h = h;
      pred.scale.resize(h);
      pred.zero.resize(h);
      const std::size_t col_bytes = pred.packed_column_bytes();
      pred.codes.resize(h * col_bytes);
      pred.dequant = Matrix(d, h);
      for (std::size_t n = 0; n < h; ++n) {
        pred.scale[n] = r.f32();
        pred.zero[n] = r.f32();
        r.bytes(pred.codes.data() + n * col_bytes, col_bytes);
        for (std::size_t i = 0; i < d; ++i) {
          std::uint32_t code;
          if (pred.bits == 3) {
            code = pred.codes[n * col_bytes + i];
          } else {
            const std::size_t per_byte = 8 / static_cast<std::size_t>(pred.bits);
            const std::uint8_t byte = pred.codes[n * col_bytes + i / per_byte];
            code = (byte >> (pred.bits * static_cast<int>(i % per_byte))) &
                   ((1u << pred.bits) - 1u);
          }
          pred.dequant.at(i, n) =
              static_cast<double>(pred.zero[n]) +
              static_cast<double>(code) * static_cast<double>(pred.scale[n]);
        }
      }
      layer.predictor = std::move(pred);
    }
    folded.layers.push_back(std::move(layer));
  }
  if (!r.at_eof()) {
    throw Error(ErrKind::Io, "bad-shape", "trailing bytes in artifact");
  }
  return folded;
}

}  // namespace ffnfold
