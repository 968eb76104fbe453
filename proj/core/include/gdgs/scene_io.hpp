#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gdgs/scene.hpp"

namespace gdgs {

inline constexpr const char* kSceneFormat = "gdgs-scene-v1";
inline constexpr const char* kCamerasFormat = "gdgs-cams-v1";

/// Scene document. One particle per line; doubles written with round-trip
/// precision so save/load is bit-exact.
std::string scene_to_string(const Scene& scene);
Scene scene_from_string(const std::string& text);

void save_scene(const std::filesystem::path& path, const Scene& scene);
Scene load_scene(const std::filesystem::path& path);

/// Camera plus the optional image file name it was captured with.
struct CameraEntry {
  Camera camera;
  std::optional<std::string> image;
};

std::string cameras_to_string(const std::vector<CameraEntry>& cameras);
std::vector<CameraEntry> cameras_from_string(const std::string& text);

void save_cameras(const std::filesystem::path& path, const std::vector<CameraEntry>& cameras);
std::vector<CameraEntry> load_cameras(const std::filesystem::path& path);

/// Reads a whole file; throws Io on failure.
std::string read_text_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace gdgs
