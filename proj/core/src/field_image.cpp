#include "gdgs/field_image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gdgs/error.hpp"

namespace gdgs {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidParticle: return "invalid-particle";
    case ErrorKind::NumericalDegeneracy: return "numerical-degeneracy";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::ContractViolation: return "contract-violation";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::Spec: return "spec";
  }
  return "unknown";
}

FieldImage::FieldImage(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels < 0) {
    throw Error(ErrorKind::InvalidArgument, "FieldImage dimensions must be non-negative");
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

bool FieldImage::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double FieldImage::channel_mean(int c) const noexcept {
  if (pixel_count() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = c; i < data_.size(); i += channels_) sum += data_[i];
  return sum / static_cast<double>(pixel_count());
}

std::vector<double> FieldImage::channel_means() const {
  std::vector<double> means(channels_);
  for (int c = 0; c < channels_; ++c) means[c] = channel_mean(c);
  return means;
}

std::vector<double> FieldImage::channel_plane(int c) const {
  std::vector<double> plane(pixel_count());
  for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = data_[i * channels_ + c];
  return plane;
}

void FieldImage::set_channel_plane(int c, std::span<const double> plane) {
  if (plane.size() != pixel_count()) {
    throw Error(ErrorKind::ShapeMismatch, "channel plane size does not match image");
  }
  for (std::size_t i = 0; i < plane.size(); ++i) data_[i * channels_ + c] = plane[i];
}

FieldImage& FieldImage::operator+=(const FieldImage& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

FieldImage& FieldImage::operator-=(const FieldImage& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

FieldImage& FieldImage::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

FieldImage operator+(FieldImage a, const FieldImage& b) { return a += b; }
FieldImage operator-(FieldImage a, const FieldImage& b) { return a -= b; }
FieldImage operator*(FieldImage a, double s) { return a *= s; }

void require_same_shape(const FieldImage& a, const FieldImage& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(ErrorKind::ShapeMismatch,
                std::string(what) + ": shape mismatch " + std::to_string(a.height()) + "x" +
                    std::to_string(a.width()) + "x" + std::to_string(a.channels()) + " vs " +
                    std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                    std::to_string(b.channels()));
  }
}

double max_abs_difference(const FieldImage& a, const FieldImage& b) {
  require_same_shape(a, b, "max_abs_difference");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double mean_squared_error(const FieldImage& a, const FieldImage& b) {
  require_same_shape(a, b, "mean_squared_error");
  if (a.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

}  // namespace gdgs
