#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ffnfold/density.hpp"
#include "helpers.hpp"

using namespace ffnfold;

namespace {

double density_near(const KdeModel& kde, double x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kde.grid_x.size(); ++i)
    if (std::abs(kde.grid_x[i] - x) < std::abs(kde.grid_x[best] - x)) best = i;
  return kde.grid_density[best];
}

std::vector<double> mixture_samples(std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution pick(0.7);
  std::normal_distribution<double> left(-2.0, 0.1), right(2.0, 0.1);
  std::vector<double> out(k);
  for (auto& v : out) v = pick(rng) ? left(rng) : right(rng);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("kde_fit: standard normal density at the origin") {
  const KdeModel kde = kde_fit(testutil::sorted_normal(10000, 41));
  const double want = 1.0 / std::sqrt(2.0 * std::acos(-1.0));
  CHECK(std::abs(density_near(kde, 0.0) - want) <= 0.1 * want);
}

TEST_CASE("kde_fit: grid and density invariants") {
  const KdeModel kde = kde_fit(testutil::sorted_normal(500, 42));
  REQUIRE(kde.grid_x.size() == kKdeGridPoints);
  CHECK(kde.bandwidth > 0.0);
  for (double d : kde.grid_density) CHECK(d >= 0.0);
  // Trapezoidal mass close to 1.
  double mass = 0.0;
  for (std::size_t i = 1; i < kde.grid_x.size(); ++i)
    mass += 0.5 * (kde.grid_density[i] + kde.grid_density[i - 1]) *
            (kde.grid_x[i] - kde.grid_x[i - 1]);
  CHECK(mass >= 0.98);
  CHECK(mass <= 1.02);
}

TEST_CASE("find_centroid: degenerate all-equal samples") {
  const KdeModel kde = kde_fit(std::vector<double>(25, 1.5));
  CHECK(kde.degenerate);
  CHECK(find_centroid(kde) == 1.5);
}

TEST_CASE("find_centroid: dominant mode of a bimodal mixture") {
  const KdeModel kde = kde_fit(mixture_samples(8000, 43));
  CHECK(std::abs(find_centroid(kde) - (-2.0)) <= 0.1);
}

TEST_CASE("find_centroid: unimodal Gaussian at 3") {
  const KdeModel kde = kde_fit(testutil::sorted_normal(20000, 44, 3.0, 1.0));
  CHECK(std::abs(find_centroid(kde) - 3.0) <= 0.1);
}

TEST_CASE("find_centroid: uniform plateau stays interior") {
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> s(5000);
  for (auto& v : s) v = dist(rng);
  std::sort(s.begin(), s.end());
  const double c = find_centroid(kde_fit(s));
  CHECK(c >= 0.05);
  CHECK(c <= 0.95);
}

TEST_CASE("find_centroid is a grid argmax") {
  const KdeModel kde = kde_fit(mixture_samples(2000, 46));
  const double c = find_centroid(kde);
  const double dc = density_near(kde, c);
  for (double d : kde.grid_density) CHECK(dc >= d);
}

TEST_CASE("shift equivariance within one grid cell") {
  const std::vector<double> base = testutil::sorted_normal(3000, 47);
  std::vector<double> shifted = base;
  const double c = 4.75;
  for (auto& v : shifted) v += c;
  const KdeModel k0 = kde_fit(base);
  const KdeModel k1 = kde_fit(shifted);
  const double cell = k0.grid_x[1] - k0.grid_x[0];
  CHECK(std::abs(find_centroid(k1) - (find_centroid(k0) + c)) <= cell + 1e-9);
}
