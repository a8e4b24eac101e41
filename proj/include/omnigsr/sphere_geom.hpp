// Coordinate conversions between normalized equirectangular coordinates,
// spherical coordinates and 3D unit vectors, plus the inverse gnomonic
// projection used to lay sampling kernels on the sphere.
//
// Conventions:
//   NormPoint.y in [0,1], 0 = top row (north pole)
//   NormPoint.x in [0,1], 0 = left column (lon = -pi)
//   lat = (0.5 - y) * pi, lon = (x - 0.5) * 2pi wrapped into [-pi, pi)

#ifndef OMNIGSR_SPHERE_GEOM_HPP
#define OMNIGSR_SPHERE_GEOM_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace omnigsr {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Wraps an angle into [-pi, pi).
double WrapLongitude(double lon);

struct NormPoint {
  double y = 0.5;
  double x = 0.5;

  bool InRange() const { return y >= 0.0 && y <= 1.0 && x >= 0.0 && x <= 1.0; }
  friend bool operator==(const NormPoint&, const NormPoint&) = default;
};

class SphericalPoint {
 public:
  SphericalPoint() = default;
  // Throws DomainError if lat is outside [-pi/2, pi/2] or either value is
  // not finite. Longitude is wrapped.
  SphericalPoint(double lat, double lon);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

  friend bool operator==(const SphericalPoint&, const SphericalPoint&) = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

// Offset on the tangent plane, in radians: u to the right (east), v up
// (north).
struct TangentOffset {
  double u = 0.0;
  double v = 0.0;

  bool Valid() const;
};

using Vec3 = std::array<double, 3>;

SphericalPoint NormToSph(NormPoint p);
NormPoint SphToNorm(const SphericalPoint& s);
Vec3 SphToVec(const SphericalPoint& s);
SphericalPoint VecToSph(const Vec3& v);

// Great-circle distance in radians.
double GreatCircleDistance(const SphericalPoint& a, const SphericalPoint& b);

// Inverse gnomonic projection of `off` around `center`. Returns `center`
// unchanged when the offset is zero.
SphericalPoint GnomonicInverse(const SphericalPoint& center,
                               const TangentOffset& off);

// Decoded 8-bit RGB image. Used both for equirectangular sources and GSR
// frames.
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int width, int height);
  Image(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  const std::uint8_t* Row(int y) const {
    return pixels_.data() + static_cast<std::size_t>(y) * width_ * kChannels;
  }
  std::uint8_t* Row(int y) {
    return pixels_.data() + static_cast<std::size_t>(y) * width_ * kChannels;
  }
  const std::uint8_t* At(int x, int y) const { return Row(y) + x * kChannels; }
  std::uint8_t* At(int x, int y) { return Row(y) + x * kChannels; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// An equirectangular image. A width that is not twice the height is
// accepted; `aspect_warning()` reports it.
class EquirectImage {
 public:
  EquirectImage() = default;
  explicit EquirectImage(Image image);

  const Image& image() const { return image_; }
  int width() const { return image_.width(); }
  int height() const { return image_.height(); }
  bool aspect_warning() const { return image_.width() != 2 * image_.height(); }

 private:
  Image image_;
};

using Rgb = std::array<double, 3>;

// Bilinear interpolation with pixel centers at ((i+0.5)/W, (j+0.5)/H).
// Columns wrap modulo W, rows clamp at the poles.
Rgb BilinearSample(const EquirectImage& img, NormPoint p);

// Same, without the range check on `p` (x is wrapped, y clamped). Hot path
// for patch extraction.
Rgb BilinearSampleUnchecked(const EquirectImage& img, double y, double x);

// BT.601 luma of a real-valued RGB triple.
inline double Luma(const Rgb& c) {
  return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
}

// Round half away from zero, clamped to [0, 255].
std::uint8_t Quantize(double v);

}  // namespace omnigsr

#endif  // OMNIGSR_SPHERE_GEOM_HPP
