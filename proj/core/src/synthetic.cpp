#include "gdgs/synthetic.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

#include "gdgs/error.hpp"
#include "gdgs/parallel.hpp"
#include "gdgs/scene_io.hpp"
#include "json_util.hpp"

namespace gdgs {

using nlohmann::json;
using namespace json_util;

namespace {

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

[[noreturn]] void spec_error(const std::string& why) { throw Error(ErrorKind::Spec, "synthetic spec: " + why); }

double opt_number(const json& obj, const char* key, double fallback, const std::string& ctx) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, ctx + "." + key);
}

int opt_int(const json& obj, const char* key, int fallback, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) field_error(ctx + "." + key, "expected an integer");
  return it->get<int>();
}

template <int N>
Eigen::Matrix<double, N, 1> opt_vector(const json& obj, const char* key, const Eigen::Matrix<double, N, 1>& fallback,
                                       const std::string& ctx) {
  return obj.contains(key) ? vector_field<N>(obj, key, ctx) : fallback;
}

Decal parse_decal(const json& j, const std::string& ctx) {
  Decal d;
  const json& shape = member(j, "shape", ctx);
  if (!shape.is_string()) field_error(ctx + ".shape", "expected a string");
  const std::string s = shape.get<std::string>();
  if (s == "disc") {
    d.shape = Decal::Shape::Disc;
    d.center = vector_field<2>(j, "center", ctx);
    d.radius = number(member(j, "radius", ctx), ctx + ".radius");
  } else if (s == "rect") {
    d.shape = Decal::Shape::Rect;
    d.min = vector_field<2>(j, "min", ctx);
    d.max = vector_field<2>(j, "max", ctx);
  } else {
    field_error(ctx + ".shape", "expected 'disc' or 'rect'");
  }
  d.albedo = vector_field<3>(j, "albedo", ctx);
  return d;
}

Primitive parse_primitive(const json& j, const std::string& ctx) {
  Primitive p;
  const json& type = member(j, "type", ctx);
  if (!type.is_string()) field_error(ctx + ".type", "expected a string");
  const std::string t = type.get<std::string>();
  p.center = vector_field<3>(j, "center", ctx);
  p.albedo = vector_field<3>(j, "albedo", ctx);
  if (t == "plane") {
    p.type = Primitive::Type::Plane;
    p.u_axis = opt_vector<3>(j, "u_axis", Vec3::UnitX(), ctx);
    p.v_axis = opt_vector<3>(j, "v_axis", Vec3::UnitY(), ctx);
    p.half_size = vector_field<2>(j, "half_size", ctx);
    if (auto it = j.find("texture"); it != j.end()) {
      const std::string tctx = ctx + ".texture";
      const json& kind = member(*it, "kind", tctx);
      const std::string k = kind.is_string() ? kind.get<std::string>() : "";
      if (k == "none") p.texture.kind = Texture::Kind::None;
      else if (k == "checker") p.texture.kind = Texture::Kind::Checker;
      else if (k == "stripes") p.texture.kind = Texture::Kind::Stripes;
      else field_error(tctx + ".kind", "expected 'none', 'checker' or 'stripes'");
      p.texture.period = opt_number(*it, "period", p.texture.period, tctx);
      p.texture.albedo2 = opt_vector<3>(*it, "albedo2", p.texture.albedo2, tctx);
    }
    if (auto it = j.find("decals"); it != j.end()) {
      if (!it->is_array()) field_error(ctx + ".decals", "expected an array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        p.decals.push_back(parse_decal((*it)[i], ctx + ".decals[" + std::to_string(i) + "]"));
      }
    }
  } else if (t == "sphere") {
    p.type = Primitive::Type::Sphere;
    p.radius = number(member(j, "radius", ctx), ctx + ".radius");
    if (j.contains("albedo_top")) {
      p.two_tone = true;
      p.albedo_top = vector_field<3>(j, "albedo_top", ctx);
    }
  } else {
    field_error(ctx + ".type", "expected 'plane' or 'sphere'");
  }
  return p;
}

template <typename Vec>
json arr(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Color color = Color::Zero();
};

Color plane_color(const Primitive& p, double u, double v) {
  Color c = p.albedo;
  switch (p.texture.kind) {
    case Texture::Kind::None: break;
    case Texture::Kind::Checker: {
      const long iu = static_cast<long>(std::floor(u / p.texture.period));
      const long iv = static_cast<long>(std::floor(v / p.texture.period));
      if ((iu + iv) % 2 != 0) c = p.texture.albedo2;
      break;
    }
    case Texture::Kind::Stripes:
      if (static_cast<long>(std::floor(u / p.texture.period)) % 2 != 0) c = p.texture.albedo2;
      break;
  }
  // Later decals paint over earlier ones.
  for (const auto& d : p.decals) {
    const bool inside = d.shape == Decal::Shape::Disc
                            ? (Vec2(u, v) - d.center).squaredNorm() <= d.radius * d.radius
                            : (u >= d.min.x() && u <= d.max.x() && v >= d.min.y() && v <= d.max.y());
    if (inside) c = d.albedo;
  }
  return c;
}

void intersect(const Primitive& p, const Vec3& o, const Vec3& d, Hit& hit) {
  if (p.type == Primitive::Type::Plane) {
    const Vec3 n = p.u_axis.cross(p.v_axis);
    const double denom = n.dot(d);
    if (std::abs(denom) < 1e-12) return;
    const double t = n.dot(p.center - o) / denom;
    if (!(t > 1e-9) || t >= hit.t) return;
    const Vec3 q = o + t * d - p.center;
    const double u = q.dot(p.u_axis), v = q.dot(p.v_axis);
    if (std::abs(u) > p.half_size.x() || std::abs(v) > p.half_size.y()) return;
    hit.t = t;
    hit.color = plane_color(p, u, v);
  } else {
    const Vec3 oc = o - p.center;
    const double b = oc.dot(d);
    const double c = oc.squaredNorm() - p.radius * p.radius;
    const double disc = b * b - c;
    if (disc < 0.0) return;
    const double s = std::sqrt(disc);
    double t = -b - s;
    if (!(t > 1e-9)) t = -b + s;
    if (!(t > 1e-9) || t >= hit.t) return;
    hit.t = t;
    const Vec3 x = o + t * d;
    hit.color = (p.two_tone && x.y() > p.center.y()) ? p.albedo_top : p.albedo;
  }
}

}  // namespace

void SyntheticSceneSpec::validate() const {
  if (cameras.count < 2) spec_error("camera count must be >= 2");
  if (width < 32 || height < 32) spec_error("image size must be at least 32x32");
  if (supersample < 1) spec_error("supersample must be >= 1");
  if (!(cameras.radius > 0.0)) spec_error("camera radius must be positive");
  if (!(cameras.fov_degrees > 0.0 && cameras.fov_degrees < 180.0)) spec_error("fov_degrees must lie in (0, 180)");
  if (!(cameras.arc_degrees >= 0.0 && cameras.arc_degrees <= 360.0)) spec_error("arc_degrees must lie in [0, 360]");
  if (seed_points < 0) spec_error("seed_points must be >= 0");
  std::vector<int> sorted = holdout;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) spec_error("holdout indices repeat");
  for (int h : holdout) {
    if (h < 0 || h >= cameras.count) spec_error("holdout index " + std::to_string(h) + " is out of range");
  }
  if (static_cast<int>(holdout.size()) >= cameras.count) spec_error("at least one view must remain for training");
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    const auto& p = primitives[i];
    const std::string ctx = "primitives[" + std::to_string(i) + "]";
    if (p.type == Primitive::Type::Sphere && !(p.radius > 0.0)) spec_error(ctx + ": sphere radius must be positive");
    if (p.type == Primitive::Type::Plane) {
      if (!(p.half_size.minCoeff() > 0.0)) spec_error(ctx + ": plane half_size must be positive");
      if (std::abs(p.u_axis.norm() - 1.0) > 1e-9 || std::abs(p.v_axis.norm() - 1.0) > 1e-9 ||
          std::abs(p.u_axis.dot(p.v_axis)) > 1e-9) {
        spec_error(ctx + ": plane axes must be orthonormal");
      }
      if (p.texture.kind != Texture::Kind::None && !(p.texture.period > 0.0)) {
        spec_error(ctx + ": texture period must be positive");
      }
    }
  }
}

SyntheticSceneSpec synth_spec_from_string(const std::string& text) {
  const json doc = parse_document(text, "synthetic spec");
  check_format(doc, kSynthFormat);
  SyntheticSceneSpec s;
  if (auto it = doc.find("name"); it != doc.end() && it->is_string()) s.name = it->get<std::string>();
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) field_error("seed", "expected a non-negative integer");
    s.seed = it->get<std::uint64_t>();
  }
  s.width = opt_int(doc, "width", s.width, "document");
  s.height = opt_int(doc, "height", s.height, "document");
  s.supersample = opt_int(doc, "supersample", s.supersample, "document");
  s.background = opt_vector<3>(doc, "background", s.background, "document");
  s.seed_points = opt_int(doc, "seed_points", s.seed_points, "document");
  if (auto it = doc.find("cameras"); it != doc.end()) {
    const std::string ctx = "cameras";
    s.cameras.count = opt_int(*it, "count", s.cameras.count, ctx);
    s.cameras.radius = opt_number(*it, "radius", s.cameras.radius, ctx);
    s.cameras.arc_degrees = opt_number(*it, "arc_degrees", s.cameras.arc_degrees, ctx);
    s.cameras.elevation_degrees = opt_number(*it, "elevation_degrees", s.cameras.elevation_degrees, ctx);
    s.cameras.fov_degrees = opt_number(*it, "fov_degrees", s.cameras.fov_degrees, ctx);
    s.cameras.look_at = opt_vector<3>(*it, "look_at", s.cameras.look_at, ctx);
  }
  if (auto it = doc.find("holdout"); it != doc.end()) {
    if (!it->is_array()) field_error("holdout", "expected an array of integers");
    for (const auto& v : *it) {
      if (!v.is_number_integer()) field_error("holdout", "expected an array of integers");
      s.holdout.push_back(v.get<int>());
    }
  }
  if (auto it = doc.find("primitives"); it != doc.end()) {
    if (!it->is_array()) field_error("primitives", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      s.primitives.push_back(parse_primitive((*it)[i], "primitives[" + std::to_string(i) + "]"));
    }
  }
  s.validate();
  return s;
}

std::string synth_spec_to_string(const SyntheticSceneSpec& s) {
  json doc;
  doc["format"] = kSynthFormat;
  doc["name"] = s.name;
  doc["seed"] = s.seed;
  doc["width"] = s.width;
  doc["height"] = s.height;
  doc["supersample"] = s.supersample;
  doc["background"] = arr(s.background);
  doc["seed_points"] = s.seed_points;
  doc["cameras"] = {{"count", s.cameras.count},
                    {"radius", s.cameras.radius},
                    {"arc_degrees", s.cameras.arc_degrees},
                    {"elevation_degrees", s.cameras.elevation_degrees},
                    {"fov_degrees", s.cameras.fov_degrees},
                    {"look_at", arr(s.cameras.look_at)}};
  doc["holdout"] = s.holdout;
  json prims = json::array();
  for (const auto& p : s.primitives) {
    json j{{"center", arr(p.center)}, {"albedo", arr(p.albedo)}};
    if (p.type == Primitive::Type::Plane) {
      j["type"] = "plane";
      j["u_axis"] = arr(p.u_axis);
      j["v_axis"] = arr(p.v_axis);
      j["half_size"] = arr(p.half_size);
      if (p.texture.kind != Texture::Kind::None) {
        j["texture"] = {{"kind", p.texture.kind == Texture::Kind::Checker ? "checker" : "stripes"},
                        {"period", p.texture.period},
                        {"albedo2", arr(p.texture.albedo2)}};
      }
      json decals = json::array();
      for (const auto& d : p.decals) {
        json dj{{"albedo", arr(d.albedo)}};
        if (d.shape == Decal::Shape::Disc) {
          dj["shape"] = "disc";
          dj["center"] = arr(d.center);
          dj["radius"] = d.radius;
        } else {
          dj["shape"] = "rect";
          dj["min"] = arr(d.min);
          dj["max"] = arr(d.max);
        }
        decals.push_back(dj);
      }
      j["decals"] = decals;
    } else {
      j["type"] = "sphere";
      j["radius"] = p.radius;
      if (p.two_tone) j["albedo_top"] = arr(p.albedo_top);
    }
    prims.push_back(j);
  }
  doc["primitives"] = prims;
  return doc.dump(2) + "\n";
}

SyntheticSceneSpec load_synth_spec(const std::string& path) { return synth_spec_from_string(read_text_file(path)); }

SyntheticDataset generate(const SyntheticSceneSpec& spec) {
  spec.validate();
  SyntheticDataset out;
  const auto& ring = spec.cameras;
  const double focal = 0.5 * spec.width / std::tan(0.5 * deg2rad(ring.fov_degrees));
  const double elev = deg2rad(ring.elevation_degrees);
  for (int i = 0; i < ring.count; ++i) {
    double az;
    if (ring.arc_degrees >= 360.0) {
      az = 2.0 * std::numbers::pi * i / ring.count;
    } else {
      az = deg2rad(-0.5 * ring.arc_degrees + ring.arc_degrees * i / (ring.count - 1));
    }
    const Vec3 eye = ring.look_at + ring.radius * Vec3(std::sin(az) * std::cos(elev), std::sin(elev),
                                                       std::cos(az) * std::cos(elev));
    out.cameras.push_back(look_at_camera(eye, ring.look_at, focal, spec.width, spec.height));
  }

  out.images.resize(out.cameras.size());
  const int ss = spec.supersample;
  parallel_for(out.cameras.size(), [&](std::size_t i) {
    const Camera& cam = out.cameras[i];
    const Mat3 rt = cam.rotation().transpose();
    const Vec3 origin = cam.position();
    FieldImage img(spec.height, spec.width, kColorChannels);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        Color acc = Color::Zero();
        for (int sy = 0; sy < ss; ++sy) {
          for (int sx = 0; sx < ss; ++sx) {
            const double px = x + (sx + 0.5) / ss - 0.5;
            const double py = y + (sy + 0.5) / ss - 0.5;
            const Vec3 dir = (rt * Vec3((px - cam.cx) / cam.fx, (py - cam.cy) / cam.fy, 1.0)).normalized();
            Hit hit;
            hit.color = spec.background;
            for (const auto& p : spec.primitives) intersect(p, origin, dir, hit);
            acc += hit.color;
          }
        }
        acc /= static_cast<double>(ss * ss);
        for (int c = 0; c < kColorChannels; ++c) img.at(y, x, c) = std::clamp(acc[c], 0.0, 1.0);
      }
    }
    out.images[i] = std::move(img);
  });

  // Bounds enclose every primitive, padded by 10% of the diagonal.
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& p : spec.primitives) {
    if (p.type == Primitive::Type::Plane) {
      for (int a = -1; a <= 1; a += 2) {
        for (int b = -1; b <= 1; b += 2) {
          const Vec3 corner = p.center + a * p.half_size.x() * p.u_axis + b * p.half_size.y() * p.v_axis;
          lo = lo.cwiseMin(corner);
          hi = hi.cwiseMax(corner);
        }
      }
    } else {
      lo = lo.cwiseMin(p.center - Vec3::Constant(p.radius));
      hi = hi.cwiseMax(p.center + Vec3::Constant(p.radius));
    }
  }
  if (spec.primitives.empty()) {
    lo = ring.look_at - Vec3::Ones();
    hi = ring.look_at + Vec3::Ones();
  }
  const double pad = 0.1 * (hi - lo).norm();
  out.bounds.min = lo - Vec3::Constant(pad);
  out.bounds.max = hi + Vec3::Constant(pad);

  // Seed points imitate a structure-from-motion cloud: surface hits of rays
  // through random pixels of the training cameras.
  std::vector<int> training;
  for (int i = 0; i < ring.count; ++i) {
    if (std::find(spec.holdout.begin(), spec.holdout.end(), i) == spec.holdout.end()) training.push_back(i);
  }
  if (!spec.primitives.empty() && spec.seed_points > 0) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<std::size_t> pick(0, training.size() - 1);
    std::uniform_real_distribution<double> ux(-0.5, spec.width - 0.5), uy(-0.5, spec.height - 0.5);
    const int max_attempts = 50 * spec.seed_points;
    for (int attempt = 0; attempt < max_attempts && static_cast<int>(out.seed_points.size()) < spec.seed_points;
         ++attempt) {
      const Camera& cam = out.cameras[training[pick(rng)]];
      const double px = ux(rng), py = uy(rng);
      const Vec3 origin = cam.position();
      const Vec3 dir = (cam.rotation().transpose() * Vec3((px - cam.cx) / cam.fx, (py - cam.cy) / cam.fy, 1.0)).normalized();
      Hit hit;
      for (const auto& p : spec.primitives) intersect(p, origin, dir, hit);
      if (!std::isfinite(hit.t)) continue;
      out.seed_points.push_back(origin + hit.t * dir);
      out.seed_colors.push_back(hit.color);
    }
  }
  return out;
}

SyntheticSceneSpec piecewise_constant_spec() {
  SyntheticSceneSpec s;
  s.name = "blocks";
  s.seed = 1;
  s.width = 64;
  s.height = 64;
  s.supersample = 4;
  s.cameras.count = 8;
  s.cameras.radius = 4.0;
  s.cameras.arc_degrees = 40.0;
  s.cameras.elevation_degrees = 10.0;
  s.cameras.fov_degrees = 40.0;
  s.holdout = {2, 5};
  s.seed_points = 1500;

  Primitive backdrop;
  backdrop.type = Primitive::Type::Plane;
  backdrop.center = Vec3(0.0, 0.0, -0.5);
  backdrop.half_size = Vec2(3.0, 3.0);
  backdrop.albedo = Color(0.55, 0.6, 0.65);
  Decal disc;
  disc.shape = Decal::Shape::Disc;
  disc.center = Vec2(-0.55, 0.45);
  disc.radius = 0.38;
  disc.albedo = Color(0.85, 0.3, 0.2);
  Decal rect;
  rect.shape = Decal::Shape::Rect;
  rect.min = Vec2(0.15, -0.75);
  rect.max = Vec2(0.85, -0.2);
  rect.albedo = Color(0.2, 0.35, 0.8);
  backdrop.decals = {disc, rect};
  s.primitives.push_back(backdrop);

  Primitive sphere;
  sphere.type = Primitive::Type::Sphere;
  sphere.center = Vec3(-0.45, -0.5, 0.1);
  sphere.radius = 0.3;
  sphere.albedo = Color(0.95, 0.85, 0.3);
  s.primitives.push_back(sphere);
  return s;
}

SyntheticSceneSpec textured_spec() {
  SyntheticSceneSpec s = piecewise_constant_spec();
  s.name = "textured";
  auto& backdrop = s.primitives.front();
  backdrop.texture.kind = Texture::Kind::Checker;
  backdrop.texture.period = 0.25;
  backdrop.texture.albedo2 = Color(0.35, 0.4, 0.45);
  s.primitives.back().two_tone = true;
  s.primitives.back().albedo_top = Color(0.4, 0.8, 0.4);
  return s;
}

}  // namespace gdgs
