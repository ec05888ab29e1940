#include "ffnfold/model.hpp"

#include <nlohmann/json.hpp>
#include <random>

#include "binio.hpp"
#include "ffnfold/error.hpp"

namespace ffnfold {

namespace {
constexpr char kModelMagic[9] = "FFNFOLD1";
constexpr int kModelVersion = 1;
}  // namespace

void FfnLayer::validate() const {
  const std::size_t dd = w1.rows, hh = w1.cols;
  if (dd < 1 || hh < 1 || w2.rows != hh || w2.cols != dd ||
      b1.size() != hh || b2.size() != dd) {
    throw Error(ErrKind::Validation, "bad-shape",
                "inconsistent FFN layer shapes (d=" + std::to_string(dd) +
                    ", h=" + std::to_string(hh) + ")");
  }
}

void ToyModel::validate() const {
  if (layers.empty()) {
    throw Error(ErrKind::Validation, "bad-shape", "model has no layers");
  }
  for (const auto& l : layers) {
    l.validate();
    if (l.d() != d) {
      throw Error(ErrKind::Validation, "bad-shape",
                  "layer width differs from model d");
    }
  }
}

Matrix ffn_exact(const FfnLayer& layer, const Matrix& x) {
  if (x.cols != layer.d()) {
    throw Error(ErrKind::Validation, "dim-mismatch",
                "input cols " + std::to_string(x.cols) + " != layer d " +
                    std::to_string(layer.d()));
  }
  Matrix z = matmul(x, layer.w1);
  for (std::size_t i = 0; i < z.rows; ++i)
    for (std::size_t j = 0; j < z.cols; ++j)
      z.at(i, j) = activate(layer.act, z.at(i, j) + layer.b1[j]);
  Matrix y = matmul(z, layer.w2);
  for (std::size_t i = 0; i < y.rows; ++i)
    for (std::size_t j = 0; j < y.cols; ++j) y.at(i, j) += layer.b2[j];
  return y;
}

Matrix model_exact(const ToyModel& model, const Matrix& x) {
  Matrix cur = x;
  for (const auto& layer : model.layers) cur = ffn_exact(layer, cur);
  return cur;
}

namespace detail {

void write_layer_blob(binio::Writer& w, const FfnLayer& layer) {
  w.f32_array(layer.w1.data.data(), layer.w1.data.size());
  w.f32_array(layer.b1.data(), layer.b1.size());
  w.f32_array(layer.w2.data.data(), layer.w2.data.size());
  w.f32_array(layer.b2.data(), layer.b2.size());
}

FfnLayer read_layer_blob(binio::Reader& r, std::size_t d, std::size_t h,
                         Activation act) {
  FfnLayer layer;
  layer.act = act;
  layer.w1 = Matrix(d, h);
  layer.b1.resize(h);
  layer.w2 = Matrix(h, d);
  layer.b2.resize(d);
  r.f32_array(layer.w1.data.data(), layer.w1.data.size());
  r.f32_array(layer.b1.data(), layer.b1.size());
  r.f32_array(layer.w2.data.data(), layer.w2.data.size());
  r.f32_array(layer.b2.data(), layer.b2.size());
  return layer;
}

}  // namespace detail

void model_save(const ToyModel& model, const std::string& path) {
  model.validate();
  const std::size_t h = model.layers.front().h();
  for (const auto& l : model.layers) {
    if (l.h() != h) {
      throw Error(ErrKind::Validation, "bad-shape",
                  "model file format requires uniform h across layers");
    }
  }
  nlohmann::json header = {{"version", kModelVersion},
                           {"d", model.d},
                           {"h", h},
                           {"layers", model.layers.size()},
                           {"act", to_string(model.layers.front().act)}};
  binio::Writer w(path);
  w.magic(kModelMagic);
  w.str(header.dump());
  for (const auto& layer : model.layers) detail::write_layer_blob(w, layer);
  w.close();
}

ToyModel model_load(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic(kModelMagic);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrKind::Io, "bad-header", e.what());
  }
  if (header.value("version", -1) != kModelVersion) {
    throw Error(ErrKind::Io, "bad-version",
                "unsupported model file version");
  }
  const std::size_t d = header.at("d").get<std::size_t>();
  const std::size_t h = header.at("h").get<std::size_t>();
  const std::size_t n_layers = header.at("layers").get<std::size_t>();
  if (d < 1 || h < 1 || n_layers < 1) {
    throw Error(ErrKind::Io, "bad-shape", "non-positive dims in header");
  }
  const Activation act =
      activation_from_string(header.at("act").get<std::string>());

  ToyModel model;
  model.d = d;
  model.layers.reserve(n_layers);
  for (std::size_t i = 0; i < n_layers; ++i) {
    model.layers.push_back(detail::read_layer_blob(r, d, h, act));
  }
  if (!r.at_eof()) {
    throw Error(ErrKind::Io, "bad-shape", "trailing bytes after last layer");
  }
  model.validate();
  return model;
}

ToyModel gen_synthetic(std::size_t d, std::size_t h, std::size_t layers,
                       std::uint64_t seed, Activation act) {
  if (d < 1 || h < 1 || layers < 1) {
    throw Error(ErrKind::Validation, "bad-shape",
                "gen_synthetic requires d,h,layers >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(h));

  ToyModel model;
  model.d = d;
  for (std::size_t li = 0; li < layers; ++li) {
    FfnLayer layer;
    layer.act = act;
    layer.w1 = Matrix(d, h);
    layer.w2 = Matrix(h, d);
    layer.b1.assign(h, 0.0);
    layer.b2.assign(d, 0.0);
    // Round through f32 so in-memory weights equal their stored form.
    for (auto& v : layer.w1.data) v = static_cast<float>(gauss(rng) * s1);
    for (auto& v : layer.w2.data) v = static_cast<float>(gauss(rng) * s2);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

}  // namespace ffnfold
