#include "gdgs/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "gdgs/error.hpp"
#include "gdgs/scene_io.hpp"

namespace gdgs {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const FieldImage& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw Error(ErrorKind::InvalidArgument, "PFM supports 1 or 3 channels");
  }
  std::ostringstream out;
  out << (image.channels() == 3 ? "PF" : "Pf") << "\n"
      << image.width() << " " << image.height() << "\n-1.0\n";
  std::string bytes = out.str();
  const std::size_t row_len = static_cast<std::size_t>(image.width()) * image.channels();
  std::vector<float> row(row_len);
  for (int y = image.height() - 1; y >= 0; --y) {
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < image.channels(); ++c)
        row[static_cast<std::size_t>(x) * image.channels() + c] = static_cast<float>(image.at(y, x, c));
    if constexpr (std::endian::native == std::endian::big) {
      for (float& f : row) {
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        u = byteswap32(u);
        std::memcpy(&f, &u, 4);
      }
    }
    bytes.append(reinterpret_cast<const char*>(row.data()), row_len * sizeof(float));
  }
  write_file_atomic(path, bytes);
}

FieldImage read_pfm(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  std::istringstream in(bytes);
  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  if (!in || (magic != "PF" && magic != "Pf") || width <= 0 || height <= 0 || scale == 0.0) {
    throw Error(ErrorKind::Parse, path.string() + ": malformed PFM header");
  }
  in.get();  // single whitespace after the scale
  const int channels = magic == "PF" ? 3 : 1;
  const auto offset = static_cast<std::size_t>(in.tellg());
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() < offset + count * sizeof(float)) {
    throw Error(ErrorKind::Parse, path.string() + ": truncated PFM data");
  }
  const bool file_little = scale < 0.0;
  const bool swap = file_little != (std::endian::native == std::endian::little);
  FieldImage image(height, width, channels);
  const char* src = bytes.data() + offset;
  for (int row = 0; row < height; ++row) {
    const int y = height - 1 - row;
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        std::uint32_t u;
        std::memcpy(&u, src, 4);
        src += 4;
        if (swap) u = byteswap32(u);
        float f;
        std::memcpy(&f, &u, 4);
        image.at(y, x, c) = f;
      }
    }
  }
  return image;
}

void write_png(const std::filesystem::path& path, const FieldImage& image, PreviewMapping mapping) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw Error(ErrorKind::InvalidArgument, "PNG output supports 1 or 3 channels");
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    FilePtr fp(std::fopen(tmp.c_str(), "wb"));
    if (!fp) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      png_destroy_write_struct(&png, &info);
      throw Error(ErrorKind::Io, "libpng initialization failed");
    }
    std::vector<png_byte> pixels(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) {
      const double v = std::round(image.data()[i] * mapping.gain + mapping.offset);
      pixels[i] = static_cast<png_byte>(std::clamp(v, 0.0, 255.0));
    }
    std::vector<png_bytep> rows(image.height());
    for (int y = 0; y < image.height(); ++y) {
      rows[y] = pixels.data() + static_cast<std::size_t>(y) * image.width() * image.channels();
    }
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw Error(ErrorKind::Io, "libpng failed writing " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, image.width(), image.height(), 8,
                 image.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move output into place: " + path.string());
  }
}

FieldImage read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(ErrorKind::Io, "cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorKind::Parse, path.string() + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Io, "libpng initialization failed");
  }
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Parse, path.string() + ": corrupt PNG");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  pixels.resize(row_bytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  FieldImage image(static_cast<int>(height), static_cast<int>(width), 3);
  for (png_uint_32 y = 0; y < height; ++y)
    for (png_uint_32 x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c)
        image.at(static_cast<int>(y), static_cast<int>(x), c) = rows[y][x * 3 + c] / 255.0;
  return image;
}

}  // namespace gdgs
