// Conversion of an equirectangular image and a scanpath set into a GSR
// sequence: at every time instant, one gaze-centered mini-patch per scanpath,
// tiled row-major into a sqrt(N) x sqrt(N) grid whose cell assignment is
// fixed over time.

#ifndef OMNIGSR_GSR_CONVERT_HPP
#define OMNIGSR_GSR_CONVERT_HPP

#include <string>
#include <utility>
#include <vector>

#include "omnigsr/scanpath.hpp"
#include "omnigsr/sphere_geom.hpp"

namespace omnigsr {

inline constexpr const char* kSoftwareVersion = "omnigsr 0.1.0";

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class PatchSampling { kTangent, kErpCrop };

struct Pitch {
  // fov_deg <= 0 means source-matched: one tangent step per source pixel at
  // the equator (2*pi / image width).
  double fov_deg = 0.0;

  static Pitch SourceMatched() { return {}; }
  static Pitch FixedFov(double deg) { return {deg}; }
  bool source_matched() const { return fov_deg <= 0.0; }
  friend bool operator==(const Pitch&, const Pitch&) = default;
};

struct GsrConfig {
  int patch_h = 32;
  int patch_w = 32;
  int n = 49;
  Pitch pitch;
  PatchSampling sampling = PatchSampling::kTangent;

  // Throws ConfigError unless n is a positive perfect square, the patch is
  // at least 2x2 and a fixed FoV keeps every kernel offset below pi/2.
  void Validate() const;
  int grid() const;
  int frame_height() const { return grid() * patch_h; }
  int frame_width() const { return grid() * patch_w; }
  // Tangent-plane step between neighboring patch pixels, in radians.
  double StepRadians(int image_width) const;

  friend bool operator==(const GsrConfig&, const GsrConfig&) = default;
};

std::string_view SamplingName(PatchSampling s);
PatchSampling ParseSampling(std::string_view name);

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Row-major cell of scanpath `path_index` in an n-patch grid.
Cell CellOf(int path_index, int n);

struct GsrMetadata {
  std::string image_sha256;
  std::string scanpath_sha256;
  GsrConfig config;
  std::string software = kSoftwareVersion;

  friend bool operator==(const GsrMetadata&, const GsrMetadata&) = default;
};

struct GsrSequence {
  std::vector<Image> frames;
  GsrMetadata meta;

  int length() const { return static_cast<int>(frames.size()); }
  // Copies the patch of scanpath n out of frame t.
  Image Patch(int n, int t) const;
};

// Content hash of a decoded image (dimensions and pixels).
std::string ImageHash(const Image& img);

// Mini-patch around `center`, quantized to 8 bits.
Image ExtractPatch(const EquirectImage& img, NormPoint center,
                   const GsrConfig& cfg);

// Real-valued RGB samples (row-major, 3 per pixel) before quantization.
std::vector<double> ExtractPatchReal(const EquirectImage& img, NormPoint center,
                                     const GsrConfig& cfg);

// `image_sha256` may be passed when the caller already knows it.
GsrSequence Convert(const EquirectImage& img, const ScanpathSet& paths,
                    const GsrConfig& cfg, int threads = 1,
                    std::string image_sha256 = {});

}  // namespace omnigsr

#endif  // OMNIGSR_GSR_CONVERT_HPP
