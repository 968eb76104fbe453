#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gdgs {

/// H x W x C grid of signed doubles, interleaved row-major: (y, x, c).
class FieldImage {
 public:
  FieldImage() = default;
  FieldImage(int height, int width, int channels, double fill = 0.0);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int y, int x, int c) noexcept { return data_[index(y, x, c)]; }
  double at(int y, int x, int c) const noexcept { return data_[index(y, x, c)]; }

  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const FieldImage& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  bool all_finite() const noexcept;
  double channel_mean(int c) const noexcept;
  std::vector<double> channel_means() const;

  /// Single-channel copy of channel c (row-major plane).
  std::vector<double> channel_plane(int c) const;
  void set_channel_plane(int c, std::span<const double> plane);

  FieldImage& operator+=(const FieldImage& other);
  FieldImage& operator-=(const FieldImage& other);
  FieldImage& operator*=(double s) noexcept;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

FieldImage operator+(FieldImage a, const FieldImage& b);
FieldImage operator-(FieldImage a, const FieldImage& b);
FieldImage operator*(FieldImage a, double s);

/// Throws ShapeMismatch when a and b differ in any dimension.
void require_same_shape(const FieldImage& a, const FieldImage& b, const char* what);

double max_abs_difference(const FieldImage& a, const FieldImage& b);
double mean_squared_error(const FieldImage& a, const FieldImage& b);

}  // namespace gdgs
