#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gdgs/error.hpp"
#include "gdgs/image_io.hpp"
#include "gdgs/poisson.hpp"
#include "gdgs/sparsity.hpp"
#include "unit/test_util.hpp"

using namespace gdgs;

namespace {

std::vector<double> cauchy_samples(std::size_t n, double x0, double gamma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::cauchy_distribution<double> d(x0, gamma);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

/// Ten evenly spaced thresholds over [0, 0.01], the regime where 8-bit
/// photographs lose their smallest Laplacian levels.
std::vector<double> ten_thresholds() {
  std::vector<double> ts;
  for (int i = 0; i < 10; ++i) ts.push_back(0.01 * i / 9.0);
  return ts;
}

}  // namespace

TEST(FitCauchy, RecoversStandardCauchyScale) {
  const auto s = cauchy_samples(100000, 0.0, 1.0, 1);
  const CauchyFit fit = fit_cauchy_gamma(s);
  EXPECT_GE(fit.gamma, 0.98);
  EXPECT_LE(fit.gamma, 1.02);
  EXPECT_NEAR(fit.x0, 0.0, 0.02);
  const CauchyFit mle = fit_cauchy_gamma(s, true);
  EXPECT_GE(mle.gamma, 0.98);
  EXPECT_LE(mle.gamma, 1.02);
  EXPECT_FALSE(mle.degenerate);
}

TEST(FitCauchy, LocationAndScaleEquivariance) {
  const auto s = cauchy_samples(4001, 0.3, 2.0, 2);
  const CauchyFit base = fit_cauchy_gamma(s);
  std::vector<double> shifted = s, scaled = s;
  for (double& x : shifted) x += 5.0;
  for (double& x : scaled) x *= 3.0;
  const CauchyFit a = fit_cauchy_gamma(shifted);
  const CauchyFit b = fit_cauchy_gamma(scaled);
  EXPECT_NEAR(a.x0, base.x0 + 5.0, 1e-12);
  EXPECT_NEAR(a.gamma, base.gamma, 1e-12);
  EXPECT_NEAR(b.gamma, 3.0 * base.gamma, 1e-12);
  EXPECT_NEAR(b.x0, 3.0 * base.x0, 1e-12);
}

TEST(FitCauchy, QuantilesMatchHandComputedValues) {
  std::vector<double> s;
  for (int i = 1; i <= 17; ++i) s.push_back(i);  // quartiles at 5 and 13
  const CauchyFit fit = fit_cauchy_gamma(s);
  EXPECT_DOUBLE_EQ(fit.x0, 9.0);
  EXPECT_DOUBLE_EQ(fit.gamma, 4.0);
}

TEST(FitCauchy, DegenerateSamplesGiveFloor) {
  std::vector<double> s(40, 2.0);
  s[0] = 100.0;
  const CauchyFit fit = fit_cauchy_gamma(s);
  EXPECT_TRUE(fit.degenerate);
  EXPECT_GT(fit.gamma, 0.0);
  EXPECT_LT(fit.gamma, 1e-12);
}

TEST(FitCauchy, RejectsTooFewOrNonFiniteSamples) {
  EXPECT_THROW(fit_cauchy_gamma(std::vector<double>(15, 1.0)), Error);
  std::vector<double> s(20, 1.0);
  s[3] = std::nan("");
  EXPECT_THROW(fit_cauchy_gamma(s), Error);
}

TEST(Threshold, ExamplesAndIdempotence) {
  FieldImage f(1, 4, 1);
  f.at(0, 0, 0) = 0.5;
  f.at(0, 1, 0) = 0.2;
  f.at(0, 2, 0) = -0.3;
  f.at(0, 3, 0) = 0.0;
  const FieldImage t = threshold(f, 0.3);
  EXPECT_EQ(t.at(0, 0, 0), 0.5);
  EXPECT_EQ(t.at(0, 1, 0), 0.0);
  EXPECT_EQ(t.at(0, 2, 0), -0.3);
  EXPECT_EQ(max_abs_difference(threshold(f, 0.0), f), 0.0);
  EXPECT_EQ(max_abs_difference(threshold(t, 0.3), t), 0.0);
  EXPECT_THROW(threshold(f, -1.0), Error);
}

TEST(Threshold, NonzeroCountMatchesBruteForce) {
  const FieldImage f = testutil::random_image(30, 20, 3, 3, -1.0, 1.0);
  for (double t : {0.1, 0.45, 0.9}) {
    std::size_t expected = 0;
    for (double v : f.data()) expected += std::abs(v) >= t;
    const FieldImage kept = threshold(f, t);
    std::size_t got = 0;
    for (double v : kept.data()) got += v != 0.0;
    EXPECT_EQ(got, expected);
  }
}

TEST(SparsitySweep, ZeroThresholdIsExactAndHugeThresholdGivesPlane) {
  const FieldImage im = testutil::random_image(24, 32, 3, 4);
  const FieldImage lap = discrete_laplacian(im);
  double max_abs = 0.0;
  for (double v : lap.data()) max_abs = std::max(max_abs, std::abs(v));
  const std::vector<double> ts{0.0, max_abs + 1e-9};
  const auto rows = sparsity_sweep(im, ts);
  ASSERT_EQ(rows.size(), 6u);
  for (int c = 0; c < 3; ++c) {
    EXPECT_LE(rows[c].mse, 1e-10);
    EXPECT_GT(rows[c].nonzero_fraction, 0.9);
    const auto& hi = rows[3 + c];
    EXPECT_EQ(hi.nonzero_fraction, 0.0);
    double var = 0.0;
    const double mean = im.channel_mean(c);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 32; ++x) var += std::pow(im.at(y, x, c) - mean, 2);
    EXPECT_NEAR(hi.mse, var / (24.0 * 32.0), 1e-12);
  }
}

TEST(SparsitySweep, NonzeroFractionFallsOnEveryPhotograph) {
  for (const auto& path : testutil::photo_paths()) {
    const FieldImage im = read_png(path);
    const auto rows = sparsity_sweep(im, ten_thresholds());
    ASSERT_EQ(rows.size(), 30u);
    for (std::size_t i = 3; i < rows.size(); ++i) {
      ASSERT_EQ(rows[i - 3].channel, rows[i].channel);
      EXPECT_LE(rows[i].nonzero_fraction, rows[i - 3].nonzero_fraction) << path.filename();
    }
    for (int c = 0; c < 3; ++c) EXPECT_LE(rows[c].mse, 1e-10) << path.filename();
  }
}

TEST(SparsitySweep, QuantizedRampIsNonzeroOnlyAtTheSideColumns) {
  FieldImage im(20, 30, 3);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 30; ++x)
      for (int c = 0; c < 3; ++c) im.at(y, x, c) = (3.0 * x + 17.0 * c + 5.0) / 255.0;
  const std::vector<double> ts{0.0};
  for (const auto& r : sparsity_sweep(im, ts)) EXPECT_EQ(r.nonzero_fraction, 2.0 / 30.0) << "channel " << r.channel;
}

TEST(SparsitySweep, ErrorGrowsWithThresholdOnAstronaut) {
  const FieldImage im = read_png(testutil::data_dir() / "photos" / "astronaut.png");
  const auto rows = sparsity_sweep(im, ten_thresholds());
  for (std::size_t i = 3; i < rows.size(); ++i) EXPECT_GE(rows[i].mse, rows[i - 3].mse) << "row " << i;
}

TEST(CompareDomains, LaplacianIsSparserOnPhotographs) {
  const auto paths = testutil::photo_paths();
  ASSERT_GE(paths.size(), 5u);
  for (const auto& path : paths) {
    const DomainComparison d = compare_domains(read_png(path) * 255.0);
    for (int c = 0; c < 3; ++c) {
      EXPECT_LT(d.laplacian[c].gamma, d.intensity[c].gamma) << path.filename() << " channel " << c;
    }
  }
}

TEST(CompareDomains, ConstantImageWarnsForBothDomains) {
  const DomainComparison d = compare_domains(FieldImage(20, 20, 3, 128.0));
  EXPECT_EQ(d.warnings.size(), 6u);
  for (int c = 0; c < 3; ++c) {
    EXPECT_TRUE(d.intensity[c].degenerate);
    EXPECT_TRUE(d.laplacian[c].degenerate);
  }
}

TEST(CompareDomains, WhiteNoiseHasNoSparsityAdvantage) {
  const FieldImage noise = testutil::random_image(128, 128, 3, 5, 0.0, 255.0);
  const DomainComparison d = compare_domains(noise);
  for (int c = 0; c < 3; ++c) {
    const double ratio = d.intensity[c].gamma / d.laplacian[c].gamma;
    EXPECT_GT(ratio, 0.1);
    EXPECT_LT(ratio, 10.0);
  }
}
