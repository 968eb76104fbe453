#include "gdgs/scene_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gdgs/error.hpp"
#include "json_util.hpp"

namespace gdgs {

using nlohmann::json;
using namespace json_util;

std::string scene_to_string(const Scene& scene) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"format\": \"" << kSceneFormat << "\",\n";
  out << "  \"dc_model\": " << to_array(scene.dc_model).dump() << ",\n";
  json bounds{{"min", to_array(scene.bounds.min)}, {"max", to_array(scene.bounds.max)}};
  out << "  \"bounds\": " << bounds.dump() << ",\n";
  out << "  \"particles\": [";
  for (std::size_t k = 0; k < scene.particles.size(); ++k) {
    const auto& p = scene.particles[k];
    json j{{"center", to_array(p.center)},
           {"rotation", to_array(p.rotation)},
           {"log_scale", to_array(p.log_scale)},
           {"amplitude", to_array(p.amplitude)},
           {"opacity_logit", p.opacity_logit}};
    out << (k == 0 ? "\n    " : ",\n    ") << j.dump();
  }
  out << "\n  ]\n}\n";
  return out.str();
}

Scene scene_from_string(const std::string& text) {
  const json doc = parse_document(text, "scene");
  check_format(doc, kSceneFormat);
  Scene scene;
  scene.dc_model = vector_field<3>(doc, "dc_model", "scene");
  const json& b = member(doc, "bounds", "scene");
  scene.bounds.min = vector_field<3>(b, "min", "bounds");
  scene.bounds.max = vector_field<3>(b, "max", "bounds");
  const json& ps = member(doc, "particles", "scene");
  if (!ps.is_array()) field_error("particles", "expected an array");
  scene.particles.reserve(ps.size());
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const std::string ctx = "particles[" + std::to_string(k) + "]";
    GaussianParticle p;
    p.center = vector_field<3>(ps[k], "center", ctx);
    p.rotation = vector_field<4>(ps[k], "rotation", ctx);
    p.log_scale = vector_field<3>(ps[k], "log_scale", ctx);
    p.amplitude = vector_field<3>(ps[k], "amplitude", ctx);
    p.opacity_logit = number(member(ps[k], "opacity_logit", ctx), ctx + ".opacity_logit");
    scene.particles.push_back(p);
  }
  try {
    scene.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, std::string("scene invariant violated: ") + e.what());
  }
  return scene;
}

void save_scene(const std::filesystem::path& path, const Scene& scene) {
  write_file_atomic(path, scene_to_string(scene));
}

Scene load_scene(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return scene_from_string(text);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Parse) throw;
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

std::string cameras_to_string(const std::vector<CameraEntry>& cameras) {
  std::ostringstream out;
  out << "{\n  \"format\": \"" << kCamerasFormat << "\",\n  \"cameras\": [";
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const Camera& c = cameras[i].camera;
    json w2c = json::array();
    for (int r = 0; r < 4; ++r)
      for (int col = 0; col < 4; ++col) w2c.push_back(c.world_to_camera(r, col));
    json j{{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy},
           {"width", c.width}, {"height", c.height}, {"world_to_camera", w2c}};
    if (cameras[i].image) j["image"] = *cameras[i].image;
    out << (i == 0 ? "\n    " : ",\n    ") << j.dump();
  }
  out << "\n  ]\n}\n";
  return out.str();
}

std::vector<CameraEntry> cameras_from_string(const std::string& text) {
  const json doc = parse_document(text, "cameras");
  check_format(doc, kCamerasFormat);
  const json& cams = member(doc, "cameras", "document");
  if (!cams.is_array()) field_error("cameras", "expected an array");
  std::vector<CameraEntry> out;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const std::string ctx = "cameras[" + std::to_string(i) + "]";
    const json& j = cams[i];
    CameraEntry e;
    e.camera.fx = number(member(j, "fx", ctx), ctx + ".fx");
    e.camera.fy = number(member(j, "fy", ctx), ctx + ".fy");
    e.camera.cx = number(member(j, "cx", ctx), ctx + ".cx");
    e.camera.cy = number(member(j, "cy", ctx), ctx + ".cy");
    const json& w = member(j, "width", ctx);
    const json& h = member(j, "height", ctx);
    if (!w.is_number_integer() || !h.is_number_integer()) field_error(ctx, "width/height must be integers");
    e.camera.width = w.get<int>();
    e.camera.height = h.get<int>();
    const json& m = member(j, "world_to_camera", ctx);
    if (!m.is_array() || m.size() != 16) field_error(ctx + ".world_to_camera", "expected 16 numbers");
    for (int k = 0; k < 16; ++k) {
      e.camera.world_to_camera(k / 4, k % 4) =
          number(m[k], ctx + ".world_to_camera[" + std::to_string(k) + "]");
    }
    if (auto it = j.find("image"); it != j.end()) {
      if (!it->is_string()) field_error(ctx + ".image", "expected a string");
      e.image = it->get<std::string>();
    }
    try {
      e.camera.validate();
    } catch (const Error& err) {
      field_error(ctx, err.what());
    }
    out.push_back(std::move(e));
  }
  return out;
}

void save_cameras(const std::filesystem::path& path, const std::vector<CameraEntry>& cameras) {
  write_file_atomic(path, cameras_to_string(cameras));
}

std::vector<CameraEntry> load_cameras(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return cameras_from_string(text);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Parse) throw;
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "failed reading " + path.string());
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorKind::Io, "failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move output into place: " + path.string());
  }
}

}  // namespace gdgs
