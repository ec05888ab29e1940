#include "ffnfold/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "binio.hpp"
#include "ffnfold/error.hpp"

namespace ffnfold {

namespace {
constexpr char kCalibMagic[9] = "CALIB001";
constexpr char kProfileMagic[9] = "FFNPROF1";

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}
}  // namespace

ActivationProfile profile(const ToyModel& model, const CalibrationSet& calib) {
  model.validate();
  if (calib.x.cols != model.d) {
    throw Error(ErrKind::Validation, "dim-mismatch",
                "calibration cols " + std::to_string(calib.x.cols) +
                    " != model d " + std::to_string(model.d));
  }
  if (calib.tokens() < 2) {
    throw Error(ErrKind::Validation, "bad-shape",
                "calibration needs at least 2 tokens");
  }

  ActivationProfile prof;
  prof.samples.reserve(model.layers.size());
  Matrix cur = calib.x;
  for (const auto& layer : model.layers) {
    Matrix z = matmul(cur, layer.w1);
    for (std::size_t i = 0; i < z.rows; ++i)
      for (std::size_t j = 0; j < z.cols; ++j) z.at(i, j) += layer.b1[j];

    std::vector<std::vector<double>> per_neuron(layer.h());
    for (std::size_t n = 0; n < layer.h(); ++n) {
      auto& s = per_neuron[n];
      s.resize(z.rows);
      for (std::size_t i = 0; i < z.rows; ++i) s[i] = z.at(i, n);
      std::sort(s.begin(), s.end());
    }
    prof.samples.push_back(std::move(per_neuron));

    // Exact propagation to the next layer's input.
    for (std::size_t i = 0; i < z.rows; ++i)
      for (std::size_t j = 0; j < z.cols; ++j)
        z.at(i, j) = activate(layer.act, z.at(i, j));
    Matrix y = matmul(z, layer.w2);
    for (std::size_t i = 0; i < y.rows; ++i)
      for (std::size_t j = 0; j < y.cols; ++j) y.at(i, j) += layer.b2[j];
    cur = std::move(y);
  }
  return prof;
}

double coverage(const std::vector<double>& sorted_samples, double l1,
                double l2) {
  if (sorted_samples.empty()) return 0.0;
  auto lo = std::lower_bound(sorted_samples.begin(), sorted_samples.end(), l1);
  auto hi = std::lower_bound(sorted_samples.begin(), sorted_samples.end(), l2);
  return static_cast<double>(hi - lo) /
         static_cast<double>(sorted_samples.size());
}

SkewReport skew_report(const ActivationProfile& prof, double mass) {
  if (mass <= 0.0 || mass > 1.0) {
    throw Error(ErrKind::Validation, "bad-config",
                "skew mass must lie in (0,1]");
  }
  SkewReport rep;
  for (const auto& layer : prof.samples) {
    std::vector<double> ratios;
    ratios.reserve(layer.size());
    double sum = 0.0;
    for (const auto& s : layer) {
      const std::size_t k = s.size();
      const double span = s.back() - s.front();
      double ratio = 0.0;
      if (span > 0.0) {
        const std::size_t m = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::ceil(mass * static_cast<double>(k) - 1e-9)));
        double best = span;
        for (std::size_t i = 0; i + m <= k; ++i)
          best = std::min(best, s[i + m - 1] - s[i]);
        ratio = best / span;
      }
      ratios.push_back(ratio);
      sum += ratio;
    }
    rep.per_layer_mean.push_back(layer.empty()
                                     ? 0.0
                                     : sum / static_cast<double>(layer.size()));
    rep.per_neuron_ratio.push_back(std::move(ratios));
  }
  return rep;
}

void calibration_save(const CalibrationSet& calib, const std::string& path) {
  binio::Writer w(path);
  w.magic(kCalibMagic);
  w.u32(static_cast<std::uint32_t>(calib.x.rows));
  w.u32(static_cast<std::uint32_t>(calib.x.cols));
  w.f32_array(calib.x.data.data(), calib.x.data.size());
  w.close();
}

CalibrationSet calibration_load(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic(kCalibMagic);
  const std::uint32_t k = r.u32();
  const std::uint32_t d = r.u32();
  if (k < 2 || d < 1) {
    throw Error(ErrKind::Io, "bad-shape", "calibration header k<2 or d<1");
  }
  CalibrationSet calib;
  calib.x = Matrix(k, d);
  r.f32_array(calib.x.data.data(), calib.x.data.size());
  if (!r.at_eof()) {
    throw Error(ErrKind::Io, "bad-shape", "trailing bytes in calibration file");
  }
  return calib;
}

CalibrationSet calibration_load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrKind::Io, "io-error", "cannot open: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrKind::Io, "bad-csv", "non-numeric cell: " + cell);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrKind::Io, "bad-csv", "ragged csv rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) {
    throw Error(ErrKind::Io, "bad-shape", "csv needs at least 2 rows");
  }
  CalibrationSet calib;
  calib.x = Matrix(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      calib.x.at(i, j) = rows[i][j];
  return calib;
}

void profile_save(const ActivationProfile& prof, const std::string& path) {
  binio::Writer w(path);
  w.magic(kProfileMagic);
  w.u32(static_cast<std::uint32_t>(prof.samples.size()));
  for (const auto& layer : prof.samples) {
    w.u32(static_cast<std::uint32_t>(layer.size()));
    for (const auto& s : layer) {
      w.u32(static_cast<std::uint32_t>(s.size()));
      w.f64_array(s.data(), s.size());
    }
  }
  w.close();
}

ActivationProfile profile_load(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic(kProfileMagic);
  ActivationProfile prof;
  const std::uint32_t layers = r.u32();
  prof.samples.resize(layers);
  for (auto& layer : prof.samples) {
    layer.resize(r.u32());
    for (auto& s : layer) {
      s.resize(r.u32());
      r.f64_array(s.data(), s.size());
    }
  }
  if (!r.at_eof()) {
    throw Error(ErrKind::Io, "bad-shape", "trailing bytes in profile file");
  }
  return prof;
}

std::string profile_summary_json(const ActivationProfile& prof) {
  nlohmann::json out;
  out["layers"] = nlohmann::json::array();
  for (const auto& layer : prof.samples) {
    nlohmann::json neurons = nlohmann::json::array();
    for (const auto& s : layer) {
      neurons.push_back({{"min", s.front()},
                         {"q25", quantile(s, 0.25)},
                         {"median", quantile(s, 0.5)},
                         {"q75", quantile(s, 0.75)},
                         {"max", s.back()},
                         {"count", s.size()}});
    }
    out["layers"].push_back(std::move(neurons));
  }
  return out.dump(2);
}

CalibrationSet gen_calibration(std::size_t tokens, std::size_t d,
                               std::uint64_t seed,
                               const std::string& distribution) {
  if (tokens < 2 || d < 1) {
    throw Error(ErrKind::Validation, "bad-shape",
                "gen_calibration requires tokens>=2, d>=1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  CalibrationSet calib;
  calib.x = Matrix(tokens, d);
  if (distribution == "gaussian") {
    for (auto& v : calib.x.data) v = static_cast<float>(gauss(rng));
  } else if (distribution == "mixture") {
    for (auto& v : calib.x.data) {
      const double g = gauss(rng);
      v = static_cast<float>(unit(rng) < 0.7 ? g : 2.0 + 0.5 * g);
    }
  } else {
    throw Error(ErrKind::Validation, "bad-config",
                "unknown calibration distribution: " + distribution);
  }
  return calib;
}

}  // namespace ffnfold
