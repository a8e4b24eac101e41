#include "omnigsr/gsr_convert.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "omnigsr/util.hpp"

namespace omnigsr {
namespace {

// Per-pixel tangent-plane quantities shared by every patch of one config.
struct KernelTap {
  double u = 0.0;
  double v = 0.0;
  double rho = 0.0;
  double sin_c = 0.0;
  double cos_c = 0.0;
};

std::vector<KernelTap> BuildKernel(const GsrConfig& cfg, int image_width) {
  const double step = cfg.StepRadians(image_width);
  std::vector<KernelTap> taps;
  taps.reserve(static_cast<std::size_t>(cfg.patch_h) * cfg.patch_w);
  for (int r = 0; r < cfg.patch_h; ++r) {
    for (int c = 0; c < cfg.patch_w; ++c) {
      KernelTap k;
      k.u = (c - (cfg.patch_w - 1) / 2.0) * step;
      k.v = ((cfg.patch_h - 1) / 2.0 - r) * step;
      k.rho = std::sqrt(k.u * k.u + k.v * k.v);
      const double angle = std::atan(k.rho);
      k.sin_c = std::sin(angle);
      k.cos_c = std::cos(angle);
      taps.push_back(k);
    }
  }
  return taps;
}

double Wrap01(double x) {
  x -= std::floor(x);
  return x >= 1.0 ? 0.0 : x;
}

// Writes P_h*P_w RGB samples into `out` via `sink(index, rgb)`.
template <typename Sink>
void SamplePatch(const EquirectImage& img, NormPoint center, const GsrConfig& cfg,
                 const std::vector<KernelTap>& kernel, Sink&& sink) {
  if (cfg.sampling == PatchSampling::kErpCrop) {
    const double h = img.height();
    const double w = img.width();
    std::size_t i = 0;
    for (int r = 0; r < cfg.patch_h; ++r) {
      const double y =
          std::clamp(center.y + (r - (cfg.patch_h - 1) / 2.0) / h, 0.0, 1.0);
      for (int c = 0; c < cfg.patch_w; ++c, ++i) {
        const double x = Wrap01(center.x + (c - (cfg.patch_w - 1) / 2.0) / w);
        sink(i, BilinearSampleUnchecked(img, y, x));
      }
    }
    return;
  }

  const SphericalPoint c0 = NormToSph(center);
  const double sin_lat0 = std::sin(c0.lat());
  const double cos_lat0 = std::cos(c0.lat());
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    const KernelTap& k = kernel[i];
    if (k.rho == 0.0) {
      sink(i, BilinearSampleUnchecked(img, center.y, center.x));
      continue;
    }
    // Same evaluation order as GnomonicInverse so both routes agree bitwise.
    const double arg =
        std::clamp(k.cos_c * sin_lat0 + k.v * k.sin_c * cos_lat0 / k.rho, -1.0, 1.0);
    const double lat = std::asin(arg);
    const double lon =
        c0.lon() + std::atan2(k.u * k.sin_c, k.rho * cos_lat0 * k.cos_c -
                                                 k.v * sin_lat0 * k.sin_c);
    const NormPoint p = SphToNorm(SphericalPoint(lat, lon));
    sink(i, BilinearSampleUnchecked(img, p.y, p.x));
  }
}

void CheckCenter(NormPoint center) {
  if (!center.InRange()) throw DomainError("patch center out of range");
}

}  // namespace

void GsrConfig::Validate() const {
  if (n < 1) throw ConfigError("n must be >= 1");
  const int g = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (g * g != n) {
    throw ConfigError("n = " + std::to_string(n) + " is not a perfect square");
  }
  if (patch_h < 2 || patch_w < 2) throw ConfigError("patch dimensions must be >= 2");
  if (!pitch.source_matched()) {
    if (!std::isfinite(pitch.fov_deg) || pitch.fov_deg >= 180.0) {
      throw ConfigError("fixed FoV must be finite and below 180 degrees");
    }
    const double step = pitch.fov_deg * kPi / 180.0 / patch_w;
    const double reach = std::max(patch_w - 1, patch_h - 1) / 2.0 * step;
    if (reach >= kPi / 2) {
      throw ConfigError("fixed FoV too wide for the gnomonic kernel");
    }
  }
}

int GsrConfig::grid() const {
  return static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
}

double GsrConfig::StepRadians(int image_width) const {
  if (pitch.source_matched()) return kTwoPi / image_width;
  return pitch.fov_deg * kPi / 180.0 / patch_w;
}

std::string_view SamplingName(PatchSampling s) {
  return s == PatchSampling::kTangent ? "tangent" : "erp_crop";
}

PatchSampling ParseSampling(std::string_view name) {
  if (name == "tangent") return PatchSampling::kTangent;
  if (name == "erp_crop" || name == "erp") return PatchSampling::kErpCrop;
  throw std::invalid_argument("unknown sampling mode: " + std::string(name));
}

Cell CellOf(int path_index, int n) {
  if (n < 1 || path_index < 0 || path_index >= n) {
    throw std::out_of_range("path index " + std::to_string(path_index) +
                            " out of range for n = " + std::to_string(n));
  }
  const int g = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return {path_index / g, path_index % g};
}

Image GsrSequence::Patch(int n, int t) const {
  const GsrConfig& cfg = meta.config;
  const Cell cell = CellOf(n, cfg.n);
  const Image& frame = frames.at(static_cast<std::size_t>(t));
  Image out(cfg.patch_w, cfg.patch_h);
  for (int r = 0; r < cfg.patch_h; ++r) {
    const std::uint8_t* src = frame.At(cell.col * cfg.patch_w, cell.row * cfg.patch_h + r);
    std::memcpy(out.Row(r), src, static_cast<std::size_t>(cfg.patch_w) * 3);
  }
  return out;
}

std::string ImageHash(const Image& img) {
  const std::string header =
      "rgb8:" + std::to_string(img.width()) + "x" + std::to_string(img.height()) + ":";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), img.pixels().begin(), img.pixels().end());
  return Sha256Hex(bytes);
}

std::vector<double> ExtractPatchReal(const EquirectImage& img, NormPoint center,
                                     const GsrConfig& cfg) {
  cfg.Validate();
  CheckCenter(center);
  const auto kernel = cfg.sampling == PatchSampling::kTangent
                          ? BuildKernel(cfg, img.width())
                          : std::vector<KernelTap>{};
  std::vector<double> out(static_cast<std::size_t>(cfg.patch_h) * cfg.patch_w * 3);
  SamplePatch(img, center, cfg, kernel, [&](std::size_t i, const Rgb& rgb) {
    out[3 * i] = rgb[0];
    out[3 * i + 1] = rgb[1];
    out[3 * i + 2] = rgb[2];
  });
  return out;
}

Image ExtractPatch(const EquirectImage& img, NormPoint center,
                   const GsrConfig& cfg) {
  const std::vector<double> real = ExtractPatchReal(img, center, cfg);
  std::vector<std::uint8_t> px(real.size());
  std::transform(real.begin(), real.end(), px.begin(), Quantize);
  return Image(cfg.patch_w, cfg.patch_h, std::move(px));
}

GsrSequence Convert(const EquirectImage& img, const ScanpathSet& paths,
                    const GsrConfig& cfg, int threads, std::string image_sha256) {
  cfg.Validate();
  if (static_cast<int>(paths.count()) != cfg.n) {
    throw ConfigError("scanpath count " + std::to_string(paths.count()) +
                      " does not match n = " + std::to_string(cfg.n) +
                      " (expected a " + std::to_string(cfg.grid()) + "x" +
                      std::to_string(cfg.grid()) + " grid)");
  }
  const int t_len = paths.length();
  if (t_len < 1) throw ConfigError("scanpaths are empty");
  for (const Scanpath& p : paths.paths) {
    if (static_cast<int>(p.points.size()) != t_len) {
      throw ConfigError("scanpaths differ in length");
    }
    for (const NormPoint& q : p.points) CheckCenter(q);
  }

  GsrSequence seq;
  seq.meta.image_sha256 =
      image_sha256.empty() ? ImageHash(img.image()) : std::move(image_sha256);
  seq.meta.scanpath_sha256 = ScanpathHash(paths);
  seq.meta.config = cfg;
  seq.frames.assign(static_cast<std::size_t>(t_len),
                    Image(cfg.frame_width(), cfg.frame_height()));

  const auto kernel = cfg.sampling == PatchSampling::kTangent
                          ? BuildKernel(cfg, img.width())
                          : std::vector<KernelTap>{};
  const std::size_t jobs = static_cast<std::size_t>(cfg.n) * t_len;
  ParallelFor(jobs, threads, [&](std::size_t job) {
    const int n = static_cast<int>(job / t_len);
    const int t = static_cast<int>(job % t_len);
    const Cell cell = CellOf(n, cfg.n);
    Image& frame = seq.frames[static_cast<std::size_t>(t)];
    const NormPoint center = paths.paths[static_cast<std::size_t>(n)].points[t];
    SamplePatch(img, center, cfg, kernel, [&](std::size_t i, const Rgb& rgb) {
      const int r = static_cast<int>(i) / cfg.patch_w;
      const int c = static_cast<int>(i) % cfg.patch_w;
      std::uint8_t* px = frame.At(cell.col * cfg.patch_w + c, cell.row * cfg.patch_h + r);
      px[0] = Quantize(rgb[0]);
      px[1] = Quantize(rgb[1]);
      px[2] = Quantize(rgb[2]);
    });
  });
  return seq;
}

}  // namespace omnigsr
