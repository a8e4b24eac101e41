// Full-reference metrics on 8-bit RGB images (computed on BT.601 luma),
// temporal pooling of per-patch / per-frame score matrices, and the
// WS-PSNR and S-PSNR baselines on whole equirectangular pairs.

#ifndef OMNIGSR_FR_METRICS_HPP
#define OMNIGSR_FR_METRICS_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omnigsr/gsr_convert.hpp"
#include "omnigsr/sphere_geom.hpp"

namespace omnigsr {

inline constexpr double kPsnrCapDb = 100.0;
inline constexpr int kDefaultSphericalPoints = 655362;

class PairingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Metric { kPsnr, kSsim };
enum class ScoreMode { kPerPatch, kPerFrame };

std::string_view MetricName(Metric m);
Metric ParseMetric(std::string_view name);
std::string_view ModeName(ScoreMode m);
ScoreMode ParseMode(std::string_view name);

// Row-major rows x cols (rows = N sequences, cols = T instants).
struct ScoreMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  ScoreMatrix() = default;
  ScoreMatrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c) {}
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

struct PoolingMethod {
  enum class Kind { kAM, kGW };
  Kind kind = Kind::kAM;
  // GW only; unset means T / 2.
  std::optional<double> sigma;

  static PoolingMethod AM() { return {}; }
  static PoolingMethod GW(std::optional<double> s = std::nullopt) {
    return {Kind::kGW, s};
  }
};

// Parses "am", "gw" or "gw:SIGMA".
PoolingMethod ParsePooling(std::string_view text);
std::string PoolingName(const PoolingMethod& p);

// Ascending half-Gaussian weights for t = 1..T, peaking at 1 for t = T.
std::vector<double> GaussianWeights(int t_len, double sigma);

double Pool(const ScoreMatrix& m, const PoolingMethod& p);

double LumaMse(const Image& a, const Image& b);
double MseToPsnr(double mse);
double Psnr(const Image& a, const Image& b);
double Ssim(const Image& a, const Image& b);

double WsPsnr(const Image& ref, const Image& dist);
double SPsnr(const Image& ref, const Image& dist,
             int k_points = kDefaultSphericalPoints);

// Fibonacci sphere lattice, k points as (lat, lon).
std::vector<SphericalPoint> FibonacciLattice(int k);

struct QualityReport {
  Metric metric = Metric::kPsnr;
  ScoreMode mode = ScoreMode::kPerPatch;
  PoolingMethod pooling;
  double pooled = 0.0;
  ScoreMatrix matrix;
  // Raw luma MSE per entry, PSNR only.
  std::optional<ScoreMatrix> mse;
};

// Throws PairingError when T, frame size, grid or scanpath hash differ.
void CheckPairable(const GsrMetadata& ref, int ref_t, const GsrMetadata& dist,
                   int dist_t);

QualityReport ScoreSequences(const GsrSequence& ref, const GsrSequence& dist,
                             Metric metric, ScoreMode mode,
                             const PoolingMethod& pooling, int threads = 1);

}  // namespace omnigsr

#endif  // OMNIGSR_FR_METRICS_HPP
