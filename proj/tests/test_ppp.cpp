#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "secperc/ppp.hpp"

namespace secperc {
namespace {

TEST(BallVolume, LowDimensions) {
  EXPECT_NEAR(ball_volume(1), 2.0, 1e-14);
  EXPECT_NEAR(ball_volume(2), std::numbers::pi, 1e-14);
  EXPECT_NEAR(ball_volume(3), 4.0 * std::numbers::pi / 3.0, 1e-14);
  EXPECT_NEAR(sphere_surface_area(2), 2.0 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(sphere_surface_area(3), 4.0 * std::numbers::pi, 1e-13);
  // S_d = d * alpha_d
  for (int d = 1; d <= 20; ++d) EXPECT_NEAR(sphere_surface_area(d), d * ball_volume(d), 1e-12 * sphere_surface_area(d));
  EXPECT_THROW(ball_volume(0), std::invalid_argument);
}

TEST(Window, RejectsDegenerateBounds) {
  EXPECT_THROW(Window({0.0}, {0.0}), std::invalid_argument);
  EXPECT_THROW(Window({0.0, 0.0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(Window({}, {}), std::invalid_argument);
  const auto w = Window::from_sides({2.0, 3.0});
  EXPECT_DOUBLE_EQ(w.volume(), 6.0);
  const double hi_face[] = {2.0, 1.0};
  const double lo_face[] = {0.0, 1.0};
  EXPECT_FALSE(w.contains(hi_face));
  EXPECT_TRUE(w.contains(lo_face));
}

TEST(SamplePpp, ZeroIntensityIsEmpty) {
  const auto ps = sample_ppp(PointKind::Red, 0.0, Window::from_sides({10, 10}), Seed{1, 2});
  EXPECT_TRUE(ps.empty());
}

TEST(SamplePpp, RejectsBadIntensity) {
  const auto w = Window::from_sides({10, 10});
  EXPECT_THROW(sample_ppp(PointKind::Black, -1.0, w, Seed{}), std::invalid_argument);
  EXPECT_THROW(sample_ppp(PointKind::Black, 1e300, w, Seed{}), std::overflow_error);
}

TEST(SamplePpp, Deterministic) {
  const auto w = Window::from_sides({7, 5});
  const auto a = sample_ppp(PointKind::Black, 2.0, w, Seed{99, 4});
  const auto b = sample_ppp(PointKind::Black, 2.0, w, Seed{99, 4});
  const auto c = sample_ppp(PointKind::Black, 2.0, w, Seed{99, 5});
  EXPECT_EQ(a.coords(), b.coords());
  EXPECT_NE(a.coords(), c.coords());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(w.contains(a.point(i)));
}

// Count mean and variance over 10^4 seeds both equal intensity * volume = 100.
TEST(SamplePpp, CountLaw) {
  const auto w = Window::from_sides({10, 10});
  const int seeds = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < seeds; ++i) {
    const double n = static_cast<double>(sample_ppp(PointKind::Black, 1.0, w, Seed{7, static_cast<std::uint64_t>(i)}).size());
    sum += n;
    sum2 += n * n;
  }
  const double mean = sum / seeds;
  const double var = (sum2 - seeds * mean * mean) / (seeds - 1);
  EXPECT_NEAR(mean, 100.0, 3.0 * std::sqrt(100.0 / seeds));
  // SE of the sample variance of Poisson(m): sqrt((m + 2 m^2) / n)
  EXPECT_NEAR(var, 100.0, 4.0 * std::sqrt((100.0 + 2.0 * 100.0 * 100.0) / seeds));
}

// Counts in the 2^d sub-boxes pass a chi-square test at level 1e-3.
TEST(SamplePpp, Uniformity) {
  for (int d = 1; d <= 3; ++d) {
    const auto w = Window(std::vector<double>(d, -1.0), std::vector<double>(d, 3.0));
    const auto ps = sample_ppp(PointKind::Black, 200.0 / w.volume() * 40, w, Seed{11, static_cast<std::uint64_t>(d)});
    const int boxes = 1 << d;
    std::vector<double> counts(boxes, 0.0);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      int b = 0;
      for (int a = 0; a < d; ++a) b |= (ps.point(i)[a] >= 1.0 ? 1 : 0) << a;
      counts[b] += 1.0;
    }
    const double expected = static_cast<double>(ps.size()) / boxes;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_GT(boost::math::gamma_q(0.5 * (boxes - 1), 0.5 * chi2), 1e-3) << "d=" << d;
  }
}

TEST(RadialNearest, MedianInTwoDimensions) {
  // P(d1 > x) = exp(-pi x^2)  =>  median sqrt(ln 2 / pi)
  const int n = 100000;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = radial_nearest_distance(2, 1.0, 1, Seed{3, static_cast<std::uint64_t>(i)});
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double median = std::sqrt(std::log(2.0) / std::numbers::pi);
  // sigma of the sample median: 1 / (2 f(m) sqrt(n)), f(m) = 2 pi m e^{-pi m^2}
  const double density = 2.0 * std::numbers::pi * median * 0.5;
  EXPECT_NEAR(v[n / 2], median, 3.0 / (2.0 * density * std::sqrt(static_cast<double>(n))));
  EXPECT_THROW(radial_nearest_distance(2, 0.0, 1, Seed{}), std::invalid_argument);
}

TEST(RadialNearest, OrderStatisticsAreOrdered) {
  Rng rng(Seed{5, 0});
  for (int i = 0; i < 1000; ++i) {
    const auto d = radial_nearest_distances(3, 0.7, 2, rng);
    EXPECT_LE(d[0], d[1]);
    EXPECT_GE(d[0], 0.0);
  }
}

// With intensity 1/alpha_d the nearest distance concentrates at 1 for large d;
// E d1 = Gamma(1 + 1/d) at d = 50.
TEST(RadialNearest, HighDimensionConcentration) {
  const int d = 50, n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += radial_nearest_distance(d, 1.0 / ball_volume(d), 1, Seed{17, static_cast<std::uint64_t>(i)});
  EXPECT_NEAR(sum / n, 1.0, 0.05);
  EXPECT_NEAR(sum / n, std::tgamma(1.0 + 1.0 / d), 0.005);
}

TEST(PointSetIo, CsvAndJson) {
  const auto w = Window::from_sides({4, 4});
  const auto ps = sample_ppp(PointKind::Red, 1.0, w, Seed{1, 1});
  std::ostringstream csv;
  write_csv(csv, ps);
  EXPECT_EQ(csv.str().substr(0, 6), "x1,x2\n");
  const auto j = to_json(ps, Seed{1, 1});
  EXPECT_EQ(j.at("kind"), "red");
  EXPECT_EQ(j.at("seed").at("stream"), 1);
  EXPECT_EQ(point_set_from_json(j), ps);
}

}  // namespace
}  // namespace secperc
