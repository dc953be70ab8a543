#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "secperc/nelder_mead.hpp"
#include "secperc/quadrature.hpp"
#include "secperc/rng.hpp"
#include "secperc/statistics.hpp"

namespace secperc {
namespace {

TEST(AdaptiveSimpson, PolynomialsAndSmoothFunctions) {
  const auto cubic = adaptive_simpson([](double x) { return x * x * x - 2.0 * x; }, 0.0, 2.0, 1e-12);
  EXPECT_NEAR(cubic.value, 0.0, 1e-12);
  const auto sine = adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-10);
  EXPECT_NEAR(sine.value, 2.0, 1e-10);
  EXPECT_TRUE(sine.converged);
  const auto gauss = adaptive_simpson([](double x) { return std::exp(-x * x); }, -8.0, 8.0, 1e-11);
  EXPECT_NEAR(gauss.value, std::sqrt(std::numbers::pi), 1e-10);
}

TEST(AdaptiveSimpson, EmptyIntervalAndNonConvergence) {
  EXPECT_EQ(adaptive_simpson([](double) { return 1.0; }, 1.0, 1.0, 1e-9).value, 0.0);
  const auto bad = adaptive_simpson([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0, 1e-14, 12);
  EXPECT_FALSE(bad.converged);
}

TEST(NelderMead, Rosenbrock) {
  auto rosen = [](const std::vector<double>& x) {
    return 100.0 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1.0 - x[0]) * (1.0 - x[0]);
  };
  const auto r = nelder_mead(rosen, {-1.2, 1.0}, {0.5, 0.5});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
  const auto again = nelder_mead(rosen, {-1.2, 1.0}, {0.5, 0.5});
  EXPECT_EQ(r.x, again.x);
}

TEST(Rng, UniformRangeAndDeterminism) {
  Rng a(Seed{5, 6}), b(Seed{5, 6}), c(Seed{5, 7});
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    EXPECT_EQ(x, b.uniform());
    differs |= x != c.uniform();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, GeometricMean) {
  Rng rng(Seed{1, 1});
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.geometric(0.25));
  // mean (1-p)/p = 3, variance (1-p)/p^2 = 12
  EXPECT_NEAR(sum / n, 3.0, 4.0 * std::sqrt(12.0 / n));
}

TEST(ChiSquareGof, ExactCountsGiveZeroStatistic) {
  std::map<std::size_t, std::size_t> counts{{0, 500}, {1, 250}, {2, 250}};
  auto pmf = [](std::size_t k) { return k == 0 ? 0.5 : (k < 3 ? 0.25 : 0.0); };
  const auto r = chi_square_gof(counts, pmf);
  EXPECT_NEAR(r.statistic, 0.0, 1e-9);
  EXPECT_NEAR(r.p_value, 1.0, 1e-9);
  std::map<std::size_t, std::size_t> skewed{{0, 100}, {1, 900}};
  EXPECT_LT(chi_square_gof(skewed, pmf).p_value, 1e-10);
  EXPECT_THROW(chi_square_gof({}, pmf), std::invalid_argument);
}

// With one bin the statistic is the squared one-sample t statistic of the
// per-block residuals.
TEST(BatchMeansGof, SingleBinMatchesTTest) {
  const std::vector<std::size_t> zeros{12, 9, 15, 10, 8, 11, 14, 7};
  std::vector<std::map<std::size_t, std::size_t>> blocks;
  std::vector<double> resid;
  for (auto z : zeros) {
    blocks.push_back({{0, z}, {1, 20 - z}});
    resid.push_back(static_cast<double>(z) - 10.0);
  }
  double mean = 0.0, var = 0.0;
  for (double r : resid) mean += r / 8.0;
  for (double r : resid) var += (r - mean) * (r - mean) / 7.0;
  const double t = mean / std::sqrt(var / 8.0);
  const auto r = batch_means_gof(blocks, [](std::size_t k) { return k < 2 ? 0.5 : 0.0; });
  EXPECT_EQ(r.dof, 1u);
  EXPECT_EQ(r.dof2, 7u);
  EXPECT_NEAR(r.statistic, t * t, 1e-12);
}

TEST(BatchMeansGof, CalibratedOnIndependentSamplesAndPowerful) {
  const double p = 0.25;
  auto pmf = [p](std::size_t k) { return std::pow(1.0 - p, static_cast<double>(k)) * p; };
  int rejected = 0, detected = 0;
  const int reps = 400;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(Seed{static_cast<std::uint64_t>(rep), 3});
    std::vector<std::map<std::size_t, std::size_t>> same(40), other(40);
    for (std::size_t b = 0; b < 40; ++b)
      for (int i = 0; i < 100; ++i) {
        ++same[b][rng.geometric(p)];
        ++other[b][rng.geometric(0.3)];
      }
    rejected += batch_means_gof(same, pmf).p_value < 0.05 ? 1 : 0;
    detected += batch_means_gof(other, pmf).p_value < 0.05 ? 1 : 0;
  }
  EXPECT_GE(rejected, 8);
  EXPECT_LE(rejected, 36);
  EXPECT_GE(detected, reps - 4);
}

TEST(BatchMeansGof, RejectsBadInput) {
  auto pmf = [](std::size_t k) { return k < 2 ? 0.5 : 0.0; };
  EXPECT_THROW(batch_means_gof({}, pmf), std::invalid_argument);
  EXPECT_THROW(batch_means_gof({{{0, 5}, {1, 5}}, {{0, 5}, {1, 5}}}, pmf), std::invalid_argument);
}

}  // namespace
}  // namespace secperc
