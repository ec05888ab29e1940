#pragma once

#include <vector>

namespace ffnfold {

// Gaussian KDE over one neuron's activation-input samples, evaluated on a
// fixed 512-point grid.
struct KdeModel {
  std::vector<double> samples;  // sorted
  double bandwidth = 0.0;
  std::vector<double> grid_x;
  std::vector<double> grid_density;
  bool degenerate = false;
  double degenerate_value = 0.0;
};

inline constexpr int kKdeGridPoints = 512;

// Silverman bandwidth 1.06 * min(std, IQR/1.34) * k^(-1/5); grid spans
// [min - 3h, max + 3h]. Zero-spread input yields a degenerate model.
KdeModel kde_fit(std::vector<double> samples);

// Grid point of maximum density; ties break toward the smaller point.
double find_centroid(const KdeModel& kde);

}  // namespace ffnfold
