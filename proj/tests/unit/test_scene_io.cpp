#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "gdgs/error.hpp"
#include "gdgs/scene_io.hpp"
#include "unit/test_util.hpp"

using namespace gdgs;
namespace fs = std::filesystem;

namespace {

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

template <typename M>
bool bit_equal(const M& a, const M& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!bit_equal(a.data()[i], b.data()[i])) return false;
  return true;
}

void expect_identical(const Scene& a, const Scene& b) {
  ASSERT_EQ(a.particles.size(), b.particles.size());
  EXPECT_TRUE(bit_equal(a.bounds.min, b.bounds.min));
  EXPECT_TRUE(bit_equal(a.bounds.max, b.bounds.max));
  EXPECT_TRUE(bit_equal(a.dc_model, b.dc_model));
  for (std::size_t k = 0; k < a.particles.size(); ++k) {
    const auto& p = a.particles[k];
    const auto& q = b.particles[k];
    ASSERT_TRUE(bit_equal(p.center, q.center)) << k;
    ASSERT_TRUE(bit_equal(p.rotation, q.rotation)) << k;
    ASSERT_TRUE(bit_equal(p.log_scale, q.log_scale)) << k;
    ASSERT_TRUE(bit_equal(p.amplitude, q.amplitude)) << k;
    ASSERT_TRUE(bit_equal(p.opacity_logit, q.opacity_logit)) << k;
  }
}

Scene random_scene(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Scene s;
  s.bounds.min = Vec3(-2, -2, -2);
  s.bounds.max = Vec3(2, 2, 2);
  s.dc_model = Color(u(rng), u(rng), u(rng));
  for (int i = 0; i < n; ++i) {
    GaussianParticle p;
    p.center = Vec3(u(rng), u(rng), u(rng)) * 1.7;
    p.rotation = testutil::random_quaternion(rng);
    p.log_scale = Vec3(u(rng), u(rng), u(rng)) - Vec3::Constant(2.0);
    p.amplitude = Color(u(rng), u(rng), u(rng)) * 1e3;
    p.opacity_logit = u(rng) * 7.0;
    s.particles.push_back(p);
  }
  return s;
}

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / ("gdgs_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                                     "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(SceneIo, SingleParticleRoundTrip) {
  const Scene s = random_scene(1, 1);
  expect_identical(s, scene_from_string(scene_to_string(s)));
}

TEST(SceneIo, TenThousandParticlesRoundTripThroughFile) {
  const Scene s = random_scene(10000, 2);
  const fs::path path = temp_dir() / "scene.json";
  save_scene(path, s);
  expect_identical(s, load_scene(path));
  fs::remove_all(path.parent_path());
}

TEST(SceneIo, NanCenterIsParseError) {
  std::string text = scene_to_string(random_scene(3, 3));
  const auto pos = text.find("\"center\":[");
  ASSERT_NE(pos, std::string::npos);
  const auto end = text.find(']', pos);
  text.replace(pos, end - pos + 1, "\"center\":[NaN,0,0]");
  try {
    scene_from_string(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
  }
}

TEST(SceneIo, NullCenterReportsFieldPath) {
  std::string text = scene_to_string(random_scene(3, 4));
  const auto pos = text.rfind("\"center\":[");
  const auto end = text.find(']', pos);
  text.replace(pos, end - pos + 1, "\"center\":[null,0,0]");
  try {
    scene_from_string(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("particles[2].center[0]"), std::string::npos) << e.what();
  }
}

TEST(SceneIo, WrongFormatTagAndMissingFile) {
  EXPECT_THROW(scene_from_string("{\"format\": \"other\"}"), Error);
  try {
    load_scene("/nonexistent/dir/scene.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(CameraIo, RoundTrip) {
  std::vector<CameraEntry> cams;
  cams.push_back({look_at_camera(Vec3(0.1, 0.7, 4.0), Vec3::Zero(), 55.5, 64, 48), std::string("view0.png")});
  cams.push_back({testutil::identity_camera(32, 32, 40.0), std::nullopt});
  const auto back = cameras_from_string(cameras_to_string(cams));
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_TRUE(bit_equal(cams[i].camera.world_to_camera, back[i].camera.world_to_camera));
    EXPECT_TRUE(bit_equal(cams[i].camera.fx, back[i].camera.fx));
    EXPECT_TRUE(bit_equal(cams[i].camera.cx, back[i].camera.cx));
    EXPECT_EQ(cams[i].camera.width, back[i].camera.width);
    EXPECT_EQ(cams[i].image, back[i].image);
  }
}

TEST(CameraIo, InvalidCameraIsParseError) {
  std::vector<CameraEntry> cams{{testutil::identity_camera(32, 32, 40.0), std::nullopt}};
  std::string text = cameras_to_string(cams);
  const auto pos = text.find("\"fx\":");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 5, "\"fx\":-");
  EXPECT_THROW(cameras_from_string(text), Error);
}

TEST(AtomicWrite, ReplacesTargetAndLeavesNoTemporaries) {
  const fs::path dir = temp_dir();
  const fs::path path = dir / "out.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_text_file(path), "second");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1);
  EXPECT_THROW(write_file_atomic(dir / "missing" / "x.txt", "x"), Error);
  fs::remove_all(dir);
}
