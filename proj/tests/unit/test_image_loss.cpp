#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gdgs/error.hpp"
#include "gdgs/image_loss.hpp"
#include "unit/test_util.hpp"

using namespace gdgs;

namespace {

/// Direct 2D evaluation of mean SSIM: every local statistic is a full
/// window sum with zero padding, no separability.
double ssim_oracle(const FieldImage& x, const FieldImage& y, const SsimConfig& cfg) {
  const int r = cfg.window / 2;
  std::vector<double> g1(cfg.window);
  double norm = 0.0;
  for (int i = 0; i < cfg.window; ++i) {
    g1[i] = std::exp(-double((i - r) * (i - r)) / (2.0 * cfg.sigma * cfg.sigma));
    norm += g1[i];
  }
  double total = 0.0;
  for (int c = 0; c < x.channels(); ++c) {
    for (int py = 0; py < x.height(); ++py) {
      for (int px = 0; px < x.width(); ++px) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            const int yy = py + dy, xx = px + dx;
            if (yy < 0 || xx < 0 || yy >= x.height() || xx >= x.width()) continue;
            const double wgt = g1[dy + r] * g1[dx + r] / (norm * norm);
            const double a = x.at(yy, xx, c), b = y.at(yy, xx, c);
            mx += wgt * a;
            my += wgt * b;
            sxx += wgt * a * a;
            syy += wgt * b * b;
            sxy += wgt * a * b;
          }
        }
        const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
        total += ((2 * mx * my + cfg.c1) * (2 * cxy + cfg.c2)) /
                 ((mx * mx + my * my + cfg.c1) * (vx + vy + cfg.c2));
      }
    }
  }
  return total / static_cast<double>(x.size());
}

/// Central-difference gradient of f at every sample of x.
template <class F>
FieldImage numeric_gradient(FieldImage x, F f, double h = 1e-6) {
  FieldImage g(x.height(), x.width(), x.channels());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    x.data()[i] = v + h;
    const double up = f(x);
    x.data()[i] = v - h;
    const double down = f(x);
    x.data()[i] = v;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST(Ssim, IdenticalImagesGiveOne) {
  const FieldImage a = testutil::random_image(20, 17, 3, 1);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, MatchesDirectWindowOracle) {
  const FieldImage a = testutil::random_image(19, 23, 3, 2);
  const FieldImage b = testutil::random_image(19, 23, 3, 3);
  EXPECT_NEAR(ssim(a, b), ssim_oracle(a, b, {}), 1e-12);
  SsimConfig small;
  small.window = 5;
  small.sigma = 0.8;
  EXPECT_NEAR(ssim(a, b, small), ssim_oracle(a, b, small), 1e-12);
}

TEST(Ssim, IsSymmetricAndBounded) {
  const FieldImage a = testutil::random_image(16, 16, 1, 4);
  const FieldImage b = testutil::random_image(16, 16, 1, 5);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-14);
  EXPECT_LT(ssim(a, b), 1.0);
  EXPECT_GT(ssim(a, b), -1.0);
}

TEST(Ssim, AnalyticGradientMatchesFiniteDifferences) {
  const FieldImage a = testutil::random_image(13, 15, 2, 6);
  const FieldImage b = testutil::random_image(13, 15, 2, 7);
  FieldImage grad;
  ssim(a, b, {}, &grad);
  const FieldImage num = numeric_gradient(a, [&](const FieldImage& x) { return ssim(x, b); });
  EXPECT_LT(max_abs_difference(grad, num), 1e-8);
}

TEST(Ssim, RejectsBadConfigAndShapes) {
  SsimConfig even;
  even.window = 10;
  const FieldImage a(8, 8, 1);
  EXPECT_THROW(ssim(a, a, even), Error);
  EXPECT_THROW(ssim(a, FieldImage(8, 9, 1)), Error);
}

TEST(LossGdgs, ExactMatchIsZeroWithoutSsimTerm) {
  const FieldImage a = testutil::random_image(10, 10, 3, 8);
  LossConfig cfg;
  EXPECT_NEAR(loss_gdgs(a, a, cfg), 0.0, 1e-12);
}

TEST(LossGdgs, MatchesScalarFormula) {
  const FieldImage c = testutil::random_image(9, 11, 3, 9);
  const FieldImage im = testutil::random_image(9, 11, 3, 10);
  LossConfig cfg;
  cfg.lambda = 0.3;
  cfg.beta = 0.7;
  double l1 = 0.0, lg = 0.0;
  for (int y = 0; y < 9; ++y) {
    for (int x = 0; x < 11; ++x) {
      for (int k = 0; k < 3; ++k) {
        auto d = [&](int yy, int xx) { return c.at(yy, xx, k) - im.at(yy, xx, k); };
        l1 += std::abs(d(y, x));
        if (x < 10) lg += std::abs(d(y, x + 1) - d(y, x));
        if (y < 8) lg += std::abs(d(y + 1, x) - d(y, x));
      }
    }
  }
  const double n = 9.0 * 11.0 * 3.0;
  const double expected = 0.7 * l1 / n + 0.7 * lg / n + 0.3 * 0.5 * (1.0 - ssim_oracle(c, im, {}));
  EXPECT_NEAR(loss_gdgs(c, im, cfg), expected, 1e-12);
}

TEST(LossGdgs, BetaZeroEqualsClassicLoss) {
  const FieldImage c = testutil::random_image(12, 12, 3, 11);
  const FieldImage im = testutil::random_image(12, 12, 3, 12);
  LossConfig cfg;
  cfg.beta = 0.0;
  cfg.lambda = 0.2;
  FieldImage g1, g2;
  EXPECT_DOUBLE_EQ(loss_gdgs(c, im, cfg, &g1), loss_3dgs(c, im, 0.2, {}, &g2));
  EXPECT_EQ(max_abs_difference(g1, g2), 0.0);
}

TEST(LossGdgs, GradientMatchesFiniteDifferencesAwayFromKinks) {
  // Residuals of 0.3, 0.4 or 0.5 whose neighbors always differ by at least
  // 0.1 keep every L1 term away from its kink.
  const FieldImage im = testutil::random_image(10, 12, 3, 13);
  FieldImage c = im;
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 12; ++x)
      for (int k = 0; k < 3; ++k) c.at(y, x, k) += 0.3 + 0.1 * ((x + 2 * y + k) % 3);
  for (auto [lambda, beta] : {std::pair{0.0, 0.0}, std::pair{0.2, 0.2}, std::pair{0.5, 1.0}}) {
    LossConfig cfg;
    cfg.lambda = lambda;
    cfg.beta = beta;
    FieldImage grad;
    loss_gdgs(c, im, cfg, &grad);
    const FieldImage num = numeric_gradient(c, [&](const FieldImage& x) { return loss_gdgs(x, im, cfg); }, 1e-7);
    EXPECT_LT(max_abs_difference(grad, num), 1e-7) << lambda << " " << beta;
  }
}

TEST(LossGdgs, RejectsInvalidWeights) {
  const FieldImage a(4, 4, 3);
  LossConfig cfg;
  cfg.lambda = 1.5;
  EXPECT_THROW(loss_gdgs(a, a, cfg), Error);
  cfg.lambda = 0.2;
  cfg.beta = -1.0;
  EXPECT_THROW(loss_gdgs(a, a, cfg), Error);
}

TEST(Psnr, KnownValuesAndCap) {
  const FieldImage a(8, 8, 3, 0.5);
  EXPECT_EQ(psnr(a, a), kPsnrCap);
  EXPECT_NEAR(psnr(a, FieldImage(8, 8, 3, 0.6)), 20.0, 1e-9);  // mse 0.01
  EXPECT_NEAR(psnr(a, FieldImage(8, 8, 3, 0.51)), 40.0, 1e-9);
  EXPECT_NEAR(psnr(a * 255.0, FieldImage(8, 8, 3, 0.6 * 255.0), 255.0), 20.0, 1e-9);
  EXPECT_EQ(psnr(a, FieldImage(8, 8, 3, 0.5 + 1e-12)), kPsnrCap);
}
