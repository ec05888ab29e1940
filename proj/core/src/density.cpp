#include "ffnfold/density.hpp"

#include <algorithm>
#include <cmath>

#include "ffnfold/error.hpp"

namespace ffnfold {

KdeModel kde_fit(std::vector<double> samples) {
  if (samples.size() < 2) {
    throw Error(ErrKind::Validation, "insufficient-samples",
                "kde_fit needs at least 2 samples");
  }
  std::sort(samples.begin(), samples.end());
  const std::size_t k = samples.size();
  const double n = static_cast<double>(k);

  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= n;
  const double sd = std::sqrt(var);

  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, k - 1);
    const double frac = pos - static_cast<double>(lo);
    return samples[lo] * (1.0 - frac) + samples[hi] * frac;
  };
  const double iqr = quantile(0.75) - quantile(0.25);

  double sigma = sd;
  if (iqr > 0.0) sigma = std::min(sigma, iqr / 1.34);

  KdeModel kde;
  kde.samples = std::move(samples);
  if (sigma < 1e-12) {
    kde.degenerate = true;
    kde.degenerate_value = kde.samples.front();
    kde.bandwidth = 1e-12;
    return kde;
  }

  const double bw = 1.06 * sigma * std::pow(n, -0.2);
  kde.bandwidth = bw;

  const double lo = kde.samples.front() - 3.0 * bw;
  const double hi = kde.samples.back() + 3.0 * bw;
  const double dx = (hi - lo) / static_cast<double>(kKdeGridPoints - 1);
  kde.grid_x.resize(kKdeGridPoints);
  kde.grid_density.resize(kKdeGridPoints);

  const double inv_bw = 1.0 / bw;
  const double norm = 1.0 / (n * bw * std::sqrt(2.0 * M_PI));
  // Gaussian tails beyond 8 bandwidths contribute below 1e-14 of the peak.
  const double cutoff = 8.0 * bw;
  for (int g = 0; g < kKdeGridPoints; ++g) {
    const double x = lo + dx * static_cast<double>(g);
    auto first = std::lower_bound(kde.samples.begin(), kde.samples.end(),
                                  x - cutoff);
    auto last =
        std::upper_bound(kde.samples.begin(), kde.samples.end(), x + cutoff);
    double acc = 0.0;
    for (auto it = first; it != last; ++it) {
      const double u = (x - *it) * inv_bw;
      acc += std::exp(-0.5 * u * u);
    }
    kde.grid_x[g] = x;
    kde.grid_density[g] = acc * norm;
  }
  return kde;
}

double find_centroid(const KdeModel& kde) {
  if (kde.degenerate) return kde.degenerate_value;
  if (kde.grid_density.empty()) {
    throw Error(ErrKind::Internal, "bad-kde", "unfitted KDE model");
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < kde.grid_density.size(); ++g) {
    if (kde.grid_density[g] > kde.grid_density[best]) best = g;
  }
  return kde.grid_x[best];
}

}  // namespace ffnfold
