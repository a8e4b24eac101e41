#include "omnigsr/sphere_geom.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace omnigsr {

double WrapLongitude(double lon) {
  if (lon >= -kPi && lon < kPi) return lon;
  double w = std::fmod(lon + kPi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  w -= kPi;
  // fmod can land exactly on the excluded end after the shift.
  if (w >= kPi) w -= kTwoPi;
  return w;
}

SphericalPoint::SphericalPoint(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon)) {
    throw DomainError("spherical coordinates must be finite");
  }
  if (lat < -kPi / 2 || lat > kPi / 2) {
    throw DomainError("latitude out of range: " + std::to_string(lat));
  }
  lat_ = lat;
  lon_ = WrapLongitude(lon);
}

bool TangentOffset::Valid() const {
  return std::isfinite(u) && std::isfinite(v) && std::abs(u) < kPi / 2 &&
         std::abs(v) < kPi / 2;
}

SphericalPoint NormToSph(NormPoint p) {
  if (!p.InRange()) {
    throw DomainError("normalized point out of range: (" + std::to_string(p.y) +
                      ", " + std::to_string(p.x) + ")");
  }
  return SphericalPoint((0.5 - p.y) * kPi, (p.x - 0.5) * kTwoPi);
}

NormPoint SphToNorm(const SphericalPoint& s) {
  NormPoint p;
  p.y = 0.5 - s.lat() / kPi;
  p.x = s.lon() / kTwoPi + 0.5;
  return p;
}

Vec3 SphToVec(const SphericalPoint& s) {
  const double cl = std::cos(s.lat());
  return {cl * std::cos(s.lon()), cl * std::sin(s.lon()), std::sin(s.lat())};
}

SphericalPoint VecToSph(const Vec3& v) {
  const double horiz = std::hypot(v[0], v[1]);
  const double lat = std::atan2(v[2], horiz);
  const double lon = horiz > 0.0 ? std::atan2(v[1], v[0]) : 0.0;
  return SphericalPoint(lat, lon);
}

double GreatCircleDistance(const SphericalPoint& a, const SphericalPoint& b) {
  const Vec3 p = SphToVec(a);
  const Vec3 q = SphToVec(b);
  const Vec3 c = {p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2],
                  p[0] * q[1] - p[1] * q[0]};
  const double cross = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
  const double dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
  return std::atan2(cross, dot);
}

SphericalPoint GnomonicInverse(const SphericalPoint& center,
                               const TangentOffset& off) {
  const double rho = std::sqrt(off.u * off.u + off.v * off.v);
  if (rho == 0.0) return center;
  const double c = std::atan(rho);
  const double sin_c = std::sin(c);
  const double cos_c = std::cos(c);
  const double sin_lat0 = std::sin(center.lat());
  const double cos_lat0 = std::cos(center.lat());
  const double s =
      std::clamp(cos_c * sin_lat0 + off.v * sin_c * cos_lat0 / rho, -1.0, 1.0);
  const double lat = std::asin(s);
  const double lon =
      center.lon() + std::atan2(off.u * sin_c,
                                rho * cos_lat0 * cos_c - off.v * sin_lat0 * sin_c);
  return SphericalPoint(lat, lon);
}

Image::Image(int width, int height)
    : width_(width),
      height_(height),
      pixels_(static_cast<std::size_t>(width) * height * kChannels, 0) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("image dimensions must be positive");
  }
}

Image::Image(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * height * kChannels) {
    throw std::invalid_argument("pixel buffer length does not match " +
                                std::to_string(width) + "x" +
                                std::to_string(height) + "x3");
  }
}

EquirectImage::EquirectImage(Image image) : image_(std::move(image)) {
  if (image_.empty()) throw std::invalid_argument("empty equirectangular image");
}

Rgb BilinearSampleUnchecked(const EquirectImage& img, double y, double x) {
  const int w = img.width();
  const int h = img.height();
  const double fx = x * w - 0.5;
  const double fy = y * h - 0.5;
  const double x0f = std::floor(fx);
  const double y0f = std::floor(fy);
  const double ax = fx - x0f;
  const double ay = fy - y0f;

  long ix0 = static_cast<long>(x0f) % w;
  if (ix0 < 0) ix0 += w;
  const long ix1 = ix0 + 1 == w ? 0 : ix0 + 1;
  const long iy0 = std::clamp(static_cast<long>(y0f), 0L, static_cast<long>(h - 1));
  const long iy1 =
      std::clamp(static_cast<long>(y0f) + 1, 0L, static_cast<long>(h - 1));

  const Image& im = img.image();
  const std::uint8_t* p00 = im.At(static_cast<int>(ix0), static_cast<int>(iy0));
  const std::uint8_t* p10 = im.At(static_cast<int>(ix1), static_cast<int>(iy0));
  const std::uint8_t* p01 = im.At(static_cast<int>(ix0), static_cast<int>(iy1));
  const std::uint8_t* p11 = im.At(static_cast<int>(ix1), static_cast<int>(iy1));

  Rgb out;
  for (int ch = 0; ch < 3; ++ch) {
    const double top = p00[ch] + ax * (p10[ch] - p00[ch]);
    const double bottom = p01[ch] + ax * (p11[ch] - p01[ch]);
    out[ch] = top + ay * (bottom - top);
  }
  return out;
}

Rgb BilinearSample(const EquirectImage& img, NormPoint p) {
  if (!p.InRange()) {
    throw DomainError("sample point out of range: (" + std::to_string(p.y) +
                      ", " + std::to_string(p.x) + ")");
  }
  return BilinearSampleUnchecked(img, p.y, p.x);
}

std::uint8_t Quantize(double v) {
  const double c = std::clamp(v, 0.0, 255.0);
  return static_cast<std::uint8_t>(std::lround(c));
}

}  // namespace omnigsr
