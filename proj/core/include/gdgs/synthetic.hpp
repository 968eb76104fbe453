#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdgs/field_image.hpp"
#include "gdgs/scene.hpp"

namespace gdgs {

inline constexpr const char* kSynthFormat = "gdgs-synth-v1";

struct Decal {
  enum class Shape { Disc, Rect };
  Shape shape = Shape::Disc;
  Vec2 center = Vec2::Zero();  // disc, plane (u, v) coordinates
  double radius = 0.0;         // disc
  Vec2 min = Vec2::Zero();     // rect
  Vec2 max = Vec2::Zero();     // rect
  Color albedo = Color::Ones();
};

struct Texture {
  enum class Kind { None, Checker, Stripes };
  Kind kind = Kind::None;
  double period = 0.5;  // plane units
  Color albedo2 = Color::Zero();
};

struct Primitive {
  enum class Type { Plane, Sphere };
  Type type = Type::Plane;
  Vec3 center = Vec3::Zero();
  Color albedo = Color::Constant(0.5);
  // Plane: a rectangle spanned by unit axes u, v with half sizes.
  Vec3 u_axis = Vec3::UnitX();
  Vec3 v_axis = Vec3::UnitY();
  Vec2 half_size = Vec2::Ones();
  Texture texture;
  std::vector<Decal> decals;
  // Sphere: radius, optional second albedo for the upper half (y above center).
  double radius = 0.5;
  bool two_tone = false;
  Color albedo_top = Color::Ones();
};

struct CameraRing {
  int count = 8;
  double radius = 4.0;
  /// Azimuth span of the ring centered on +z; 360 gives a closed ring.
  double arc_degrees = 360.0;
  double elevation_degrees = 0.0;
  double fov_degrees = 40.0;
  Vec3 look_at = Vec3::Zero();
};

struct SyntheticSceneSpec {
  std::string name = "scene";
  std::uint64_t seed = 0;
  int width = 64;
  int height = 64;
  /// Rays per pixel along each axis.
  int supersample = 4;
  Color background = Color::Zero();
  CameraRing cameras;
  std::vector<int> holdout;
  /// Number of surface points seen by the training cameras, returned for
  /// initialization.
  int seed_points = 1000;
  std::vector<Primitive> primitives;

  /// Throws Spec on violated invariants.
  void validate() const;
};

SyntheticSceneSpec synth_spec_from_string(const std::string& text);
std::string synth_spec_to_string(const SyntheticSceneSpec& spec);
SyntheticSceneSpec load_synth_spec(const std::string& path);

struct SyntheticDataset {
  std::vector<Camera> cameras;
  std::vector<FieldImage> images;  // values in [0, 1]
  std::vector<Vec3> seed_points;
  std::vector<Color> seed_colors;
  Aabb bounds;
};

/// Flat-shaded, supersampled ray casting of the primitives from every ring
/// camera, plus seeded surface points hit by rays of the non-held-out
/// cameras. Deterministic for a given spec.
SyntheticDataset generate(const SyntheticSceneSpec& spec);

/// The piecewise-constant benchmark scene: a painted backdrop with flat
/// decals and a sphere.
SyntheticSceneSpec piecewise_constant_spec();

/// Same layout with checker and stripe textures, a harder case for sparse
/// Laplacian representations.
SyntheticSceneSpec textured_spec();

}  // namespace gdgs
