#pragma once

#include <filesystem>

#include "gdgs/field_image.hpp"

namespace gdgs {

/// Portable float map. Writes little-endian, bottom row first ("PF" for 3
/// channels, "Pf" for 1). Reads either endianness. Samples are stored as
/// 32-bit floats.
void write_pfm(const std::filesystem::path& path, const FieldImage& image);
FieldImage read_pfm(const std::filesystem::path& path);

/// 8-bit preview mapping: byte = clamp(round(value * gain + offset), 0, 255).
struct PreviewMapping {
  double gain = 255.0;
  double offset = 0.0;

  /// value*128+128: signed Laplacian fields shifted around mid-gray.
  static PreviewMapping signed_field() { return {128.0, 128.0}; }
  /// value*255: images normalized to [0, 1].
  static PreviewMapping unit_range() { return {255.0, 0.0}; }
};

/// 1- or 3-channel 8-bit PNG.
void write_png(const std::filesystem::path& path, const FieldImage& image,
               PreviewMapping mapping = PreviewMapping::unit_range());

/// Reads an 8-bit gray/RGB(A) PNG into [0, 1], always returning 3 channels.
FieldImage read_png(const std::filesystem::path& path);

}  // namespace gdgs
