#include "ffnfold/range_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ffnfold/density.hpp"
#include "ffnfold/error.hpp"

namespace ffnfold {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Prefix sums over sorted samples with y = sigma(z); makes the OLS fit and
// residual of any contiguous sample run O(1).
struct SampleStats {
  const std::vector<double>& zs;
  std::vector<double> ys;
  std::vector<double> px, pxx, py, pyy, pxy;

  SampleStats(const std::vector<double>& sorted, Activation act) : zs(sorted) {
    const std::size_t k = sorted.size();
    ys.resize(k);
    px.assign(k + 1, 0.0);
    pxx.assign(k + 1, 0.0);
    py.assign(k + 1, 0.0);
    pyy.assign(k + 1, 0.0);
    pxy.assign(k + 1, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      const double z = sorted[i];
      const double y = activate(act, z);
      ys[i] = y;
      px[i + 1] = px[i] + z;
      pxx[i + 1] = pxx[i] + z * z;
      py[i + 1] = py[i] + y;
      pyy[i + 1] = pyy[i] + y * y;
      pxy[i + 1] = pxy[i] + z * y;
    }
  }

  std::size_t lower(double v) const {
    return static_cast<std::size_t>(
        std::lower_bound(zs.begin(), zs.end(), v) - zs.begin());
  }

  // OLS over samples [i, j). Degenerate x variance falls back to the
  // constant fit (slope 0, intercept mean-y) when allowed.
  bool ols(std::size_t i, std::size_t j, bool constant_fallback,
           FitResult* out) const {
    const std::size_t cnt = j - i;
    if (j <= i || cnt < 2) return false;
    const double n = static_cast<double>(cnt);
    const double sx = px[j] - px[i];
    const double sxx = pxx[j] - pxx[i];
    const double sy = py[j] - py[i];
    const double syy = pyy[j] - pyy[i];
    const double sxy = pxy[j] - pxy[i];
    const double denom = n * sxx - sx * sx;
    double a, b;
    if (denom / (n * n) < 1e-12) {
      if (!constant_fallback) {
        throw Error(ErrKind::Validation, "degenerate-range",
                    "x variance below 1e-12; widen the range");
      }
      a = 0.0;
      b = sy / n;
    } else {
      a = (n * sxy - sx * sy) / denom;
      b = (sy - a * sx) / n;
    }
    double ssr = syy - 2.0 * a * sxy - 2.0 * b * sy + a * a * sxx +
                 2.0 * a * b * sx + b * b * n;
    out->slope = a;
    out->intercept = b;
    out->err = std::sqrt(std::max(0.0, ssr));
    return true;
  }

  // Exact refit of the final range: closed-form coefficients plus a direct
  // residual loop (zero to the last bit on affine regimes).
  FitResult refit(std::size_t i, std::size_t j) const {
    const std::size_t cnt = j - i;
    const double n = static_cast<double>(cnt);
    double sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
    for (std::size_t m = i; m < j; ++m) {
      sx += zs[m];
      sxx += zs[m] * zs[m];
      sy += ys[m];
      sxy += zs[m] * ys[m];
    }
    FitResult fit;
    const double denom = n * sxx - sx * sx;
    if (cnt < 2 || denom / (n * n) < 1e-12) {
      fit.slope = 0.0;
      fit.intercept = cnt > 0 ? sy / n : 0.0;
    } else {
      fit.slope = (n * sxy - sx * sy) / denom;
      fit.intercept = (sy - fit.slope * sx) / n;
    }
    double ssr = 0.0;
    for (std::size_t m = i; m < j; ++m) {
      const double r = ys[m] - (fit.slope * zs[m] + fit.intercept);
      ssr += r * r;
    }
    fit.err = std::sqrt(ssr);
    return fit;
  }
};

}  // namespace

FitResult approx_error(const std::vector<double>& sorted_samples,
                       double w2_row_norm, Activation act, double l1,
                       double l2) {
  SampleStats stats(sorted_samples, act);
  const std::size_t i = stats.lower(l1);
  const std::size_t j = stats.lower(l2);
  if (j <= i || j - i < 2) {
    throw Error(ErrKind::Validation, "insufficient-samples",
                "fewer than 2 samples in [l1, l2); widen the range");
  }
  FitResult fit = stats.refit(i, j);
  fit.err *= w2_row_norm;
  return fit;
}

NeuronApprox search_range(const std::vector<double>& sorted_samples,
                          double w2_row_norm, Activation act, double t_in,
                          double step, double centroid) {
  if (sorted_samples.size() < 2) {
    throw Error(ErrKind::Validation, "insufficient-samples",
                "search_range needs at least 2 samples");
  }
  if (t_in <= 0.0 || t_in > 1.0) {
    throw Error(ErrKind::Validation, "bad-config",
                "coverage threshold must lie in (0, 1]");
  }
  if (step <= 0.0) {
    throw Error(ErrKind::Validation, "bad-config", "step must be positive");
  }
  const double k = static_cast<double>(sorted_samples.size());
  const double span = sorted_samples.back() - sorted_samples.front();

  if (span < 1e-12) {
    // All samples (numerically) identical: the constant fit is exact.
    const double c = sorted_samples.front();
    NeuronApprox out;
    out.l1 = c - step;
    out.l2 = c + step;
    out.slope = 0.0;
    out.intercept = activate(act, c);
    out.coverage = 1.0;
    out.residual = 0.0;
    return out;
  }

  SampleStats stats(sorted_samples, act);
  double left = centroid;
  double right = centroid;

  const std::size_t max_iters =
      2 * static_cast<std::size_t>(span / step + 2.0) + 1024;
  std::size_t iters = 0;
  while (true) {
    const std::size_t i = stats.lower(left);
    const std::size_t j = stats.lower(right);
    if (static_cast<double>(j - i) / k >= t_in) break;
    if (++iters > max_iters) {
      throw Error(ErrKind::Internal, "range-search-stall",
                  "expansion failed to reach the coverage target");
    }
    const std::size_t il = stats.lower(left - step);
    const std::size_t jr = stats.lower(right + step);
    FitResult fl, fr;
    // A candidate that captures no new samples cannot raise coverage.
    const double el =
        (il < i && stats.ols(il, j, true, &fl)) ? fl.err : kInf;
    const double er =
        (jr > j && stats.ols(i, jr, true, &fr)) ? fr.err : kInf;
    if (el == kInf && er == kInf) {
      // No candidate yields a fit (side exhausted, gap wider than one
      // step, or fewer than 2 samples so far): step toward the nearest
      // uncovered sample so coverage keeps growing.
      const double gap_left =
          i > 0 ? left - sorted_samples[i - 1] : kInf;
      const double gap_right =
          j < sorted_samples.size() ? sorted_samples[j] - right : kInf;
      if (gap_right <= gap_left) {
        right += step;
      } else {
        left -= step;
      }
      continue;
    }
    if (el <= er) {
      left -= step;
    } else {
      right += step;
    }
  }

  std::size_t i = stats.lower(left);
  std::size_t j = stats.lower(right);
  while (j - i < 2 && j < sorted_samples.size() + 1) {
    right += step;
    j = stats.lower(right);
    if (right > sorted_samples.back() + step) break;
  }

  FitResult fit = stats.refit(i, j);
  NeuronApprox out;
  out.l1 = left;
  out.l2 = right;
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.coverage = static_cast<double>(j - i) / k;
  out.residual = fit.err * w2_row_norm;
  return out;
}

NeuronApprox search_range(const std::vector<double>& sorted_samples,
                          double w2_row_norm, Activation act, double t_in,
                          double step) {
  const double centroid = find_centroid(kde_fit(sorted_samples));
  return search_range(sorted_samples, w2_row_norm, act, t_in, step, centroid);
}

double default_step(const std::vector<double>& sorted_samples) {
  if (sorted_samples.empty()) return 1e-6;
  const double span = sorted_samples.back() - sorted_samples.front();
  return span > 0.0 ? span / 200.0 : 1e-6;
}

}  // namespace ffnfold
