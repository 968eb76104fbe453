#include <gtest/gtest.h>

#include "gdgs/gradcheck.hpp"

using namespace gdgs;

TEST(Gradcheck, GradientDomainRendererPasses) {
  const GradcheckReport report = run_gradcheck({});
  ASSERT_EQ(report.groups.size(), kParamGroups.size());
  for (std::size_t i = 0; i < report.groups.size(); ++i) {
    EXPECT_EQ(report.groups[i].name, kParamGroups[i]);
    EXPECT_GT(report.groups[i].checked, 0) << report.groups[i].name;
    EXPECT_LE(report.groups[i].max_rel_error, 1e-3) << report.groups[i].name;
  }
  EXPECT_TRUE(report.passed);
}

TEST(Gradcheck, ClassicRendererPasses) {
  GradcheckConfig cfg;
  cfg.mode = RenderMode::Classic;
  cfg.loss_weights = {{0.0, 0.0}, {0.2, 0.0}};
  const GradcheckReport report = run_gradcheck(cfg);
  EXPECT_TRUE(report.passed);
  for (const auto& g : report.groups) EXPECT_GT(g.checked, 0) << g.name;
}

TEST(Gradcheck, ImpossibleToleranceFails) {
  GradcheckConfig cfg;
  cfg.tolerance = 1e-14;
  cfg.loss_weights = {{0.0, 0.0}};
  EXPECT_FALSE(run_gradcheck(cfg).passed);
}

TEST(Gradcheck, CaseIsDeterministic) {
  const RenderOptions opts = gradcheck_render_options();
  const GradcheckCase a = make_gradcheck_case(3, 16, 2, RenderMode::Gdgs, opts);
  const GradcheckCase b = make_gradcheck_case(3, 16, 2, RenderMode::Gdgs, opts);
  ASSERT_EQ(a.scene.particles.size(), 2u);
  EXPECT_EQ(a.scene.particles[1].center, b.scene.particles[1].center);
  EXPECT_EQ(max_abs_difference(a.target, b.target), 0.0);
}
