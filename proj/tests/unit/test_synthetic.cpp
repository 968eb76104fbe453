#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gdgs/error.hpp"
#include "gdgs/synthetic.hpp"
#include "unit/test_util.hpp"

using namespace gdgs;

namespace {

SyntheticSceneSpec white_sphere_spec() {
  SyntheticSceneSpec s;
  s.width = s.height = 48;
  s.supersample = 2;
  s.cameras.count = 8;
  s.cameras.radius = 5.0;
  s.cameras.elevation_degrees = 15.0;
  s.seed_points = 50;
  Primitive sphere;
  sphere.type = Primitive::Type::Sphere;
  sphere.center = Vec3(0.6, 0.2, -0.4);
  sphere.radius = 0.5;
  sphere.albedo = Color::Ones();
  s.primitives.push_back(sphere);
  return s;
}

}  // namespace

TEST(Generate, SphereSilhouetteTracksProjectedCenter) {
  const SyntheticSceneSpec spec = white_sphere_spec();
  const SyntheticDataset d = generate(spec);
  ASSERT_EQ(d.images.size(), 8u);
  for (std::size_t i = 0; i < d.images.size(); ++i) {
    const Camera& cam = d.cameras[i];
    const Vec3 pc = cam.rotation() * spec.primitives[0].center + cam.translation();
    const Vec2 expected(cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy);
    double mass = 0.0;
    Vec2 centroid = Vec2::Zero();
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const double v = d.images[i].at(y, x, 0);
        mass += v;
        centroid += v * Vec2(x, y);
      }
    }
    ASSERT_GT(mass, 10.0);
    centroid /= mass;
    // The silhouette of a sphere is an ellipse whose center is displaced
    // slightly from the projected center; half a pixel covers it here.
    EXPECT_LT((centroid - expected).norm(), 0.5) << "view " << i;
  }
}

TEST(Generate, ZeroPrimitivesGiveBlackImages) {
  SyntheticSceneSpec spec = white_sphere_spec();
  spec.primitives.clear();
  const SyntheticDataset d = generate(spec);
  for (const auto& img : d.images)
    for (double v : img.data()) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(d.seed_points.empty());
}

TEST(Generate, IsDeterministic) {
  const SyntheticSceneSpec spec = piecewise_constant_spec();
  SyntheticSceneSpec small = spec;
  small.width = small.height = 32;
  small.supersample = 2;
  const SyntheticDataset a = generate(small);
  const SyntheticDataset b = generate(small);
  for (std::size_t i = 0; i < a.images.size(); ++i) EXPECT_EQ(max_abs_difference(a.images[i], b.images[i]), 0.0);
  ASSERT_EQ(a.seed_points.size(), b.seed_points.size());
  for (std::size_t i = 0; i < a.seed_points.size(); ++i) EXPECT_EQ(a.seed_points[i], b.seed_points[i]);
}

TEST(Generate, ImagesInUnitRangeAndSeedPointsInsideBounds) {
  SyntheticSceneSpec spec = textured_spec();
  spec.width = spec.height = 32;
  spec.supersample = 1;
  const SyntheticDataset d = generate(spec);
  for (const auto& img : d.images)
    for (double v : img.data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  EXPECT_EQ(static_cast<int>(d.seed_points.size()), spec.seed_points);
  for (const auto& p : d.seed_points) EXPECT_TRUE(d.bounds.contains(p));
}

TEST(Generate, SeedPointsAreSeenByTrainingCameras) {
  SyntheticSceneSpec spec = piecewise_constant_spec();
  spec.width = spec.height = 32;
  spec.supersample = 1;
  spec.seed_points = 200;
  const SyntheticDataset d = generate(spec);
  for (const auto& p : d.seed_points) {
    bool seen = false;
    for (int i = 0; i < spec.cameras.count && !seen; ++i) {
      if (std::find(spec.holdout.begin(), spec.holdout.end(), i) != spec.holdout.end()) continue;
      const Camera& cam = d.cameras[i];
      const Vec3 pc = cam.rotation() * p + cam.translation();
      const double u = cam.fx * pc.x() / pc.z() + cam.cx, v = cam.fy * pc.y() / pc.z() + cam.cy;
      seen = pc.z() > 0 && u >= -0.5 && v >= -0.5 && u <= spec.width - 0.5 && v <= spec.height - 0.5;
    }
    EXPECT_TRUE(seen);
  }
}

TEST(Generate, DegenerateCameraIsASpecError) {
  SyntheticSceneSpec spec = white_sphere_spec();
  spec.cameras.elevation_degrees = 90.0;
  try {
    generate(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Spec);
  }
}

TEST(SynthSpec, RoundTripsThroughText) {
  const SyntheticSceneSpec a = textured_spec();
  const SyntheticSceneSpec b = synth_spec_from_string(synth_spec_to_string(a));
  EXPECT_EQ(synth_spec_to_string(a), synth_spec_to_string(b));
  EXPECT_EQ(b.primitives.size(), a.primitives.size());
  EXPECT_EQ(b.holdout, a.holdout);
  EXPECT_EQ(b.cameras.arc_degrees, a.cameras.arc_degrees);
}

TEST(SynthSpec, ViolatedInvariantsAreSpecErrors) {
  auto expect_spec_error = [](SyntheticSceneSpec s) {
    try {
      s.validate();
      ADD_FAILURE() << "no error";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Spec) << e.what();
    }
  };
  SyntheticSceneSpec s = white_sphere_spec();
  s.cameras.count = 1;
  expect_spec_error(s);
  s = white_sphere_spec();
  s.width = 16;
  expect_spec_error(s);
  s = white_sphere_spec();
  s.holdout = {0, 0};
  expect_spec_error(s);
  s = white_sphere_spec();
  s.holdout = {9};
  expect_spec_error(s);
  s = white_sphere_spec();
  s.primitives[0].radius = 0.0;
  expect_spec_error(s);
}

TEST(SynthSpec, MalformedTextIsReported) {
  EXPECT_THROW(synth_spec_from_string("{ not json"), Error);
  EXPECT_THROW(synth_spec_from_string(R"({"format": "other"})"), Error);
  std::string text = synth_spec_to_string(white_sphere_spec());
  const auto pos = text.find("\"sphere\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 8, "\"cube\"");
  EXPECT_THROW(synth_spec_from_string(text), Error);
}

TEST(SynthSpec, LoadsFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "gdgs_synth_spec_test.json";
  {
    std::ofstream f(path);
    f << synth_spec_to_string(piecewise_constant_spec());
  }
  EXPECT_EQ(synth_spec_to_string(load_synth_spec(path.string())), synth_spec_to_string(piecewise_constant_spec()));
  std::filesystem::remove(path);
  try {
    load_synth_spec(path.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}
