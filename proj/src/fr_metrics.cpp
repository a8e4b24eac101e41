#include "omnigsr/fr_metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "omnigsr/util.hpp"

namespace omnigsr {
namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kSsimC2 = (0.03 * 255.0) * (0.03 * 255.0);

// Fixed-tree pairwise summation; the result depends only on the values and
// their order.
double PairwiseSum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return PairwiseSum(v.first(half)) + PairwiseSum(v.subspan(half));
}

void RequireSameSize(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw PairingError("image dimensions differ: " + std::to_string(a.width()) +
                       "x" + std::to_string(a.height()) + " vs " +
                       std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

std::vector<double> LumaPlane(const Image& img) {
  std::vector<double> y(static_cast<std::size_t>(img.width()) * img.height());
  const auto px = img.pixels();
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = 0.299 * px[3 * i] + 0.587 * px[3 * i + 1] + 0.114 * px[3 * i + 2];
  }
  return y;
}

// Sum of squared luma differences per row.
std::vector<double> RowSquaredErrors(const Image& a, const Image& b) {
  const int w = a.width();
  std::vector<double> rows(static_cast<std::size_t>(a.height()));
  std::vector<double> line(static_cast<std::size_t>(w));
  for (int y = 0; y < a.height(); ++y) {
    const std::uint8_t* pa = a.Row(y);
    const std::uint8_t* pb = b.Row(y);
    for (int x = 0; x < w; ++x) {
      const double la = 0.299 * pa[3 * x] + 0.587 * pa[3 * x + 1] + 0.114 * pa[3 * x + 2];
      const double lb = 0.299 * pb[3 * x] + 0.587 * pb[3 * x + 1] + 0.114 * pb[3 * x + 2];
      const double e = la - lb;
      line[static_cast<std::size_t>(x)] = e * e;
    }
    rows[static_cast<std::size_t>(y)] = PairwiseSum(line);
  }
  return rows;
}

std::array<double, kSsimWindow> GaussianKernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    k[i] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Valid-region separable Gaussian filter.
std::vector<double> FilterValid(const std::vector<double>& src, int w, int h,
                                const std::array<double, kSsimWindow>& k) {
  const int ow = w - kSsimWindow + 1;
  const int oh = h - kSsimWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    const double* row = src.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[i] * row[x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) {
        s += k[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      }
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

double ScorePair(const Image& a, const Image& b, Metric metric, double* mse_out) {
  if (metric == Metric::kSsim) return Ssim(a, b);
  const double mse = LumaMse(a, b);
  if (mse_out) *mse_out = mse;
  return MseToPsnr(mse);
}

}  // namespace

std::string_view MetricName(Metric m) { return m == Metric::kPsnr ? "psnr" : "ssim"; }

Metric ParseMetric(std::string_view name) {
  if (name == "psnr" || name == "g-psnr") return Metric::kPsnr;
  if (name == "ssim" || name == "g-ssim") return Metric::kSsim;
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

std::string_view ModeName(ScoreMode m) {
  return m == ScoreMode::kPerPatch ? "per_patch" : "per_frame";
}

ScoreMode ParseMode(std::string_view name) {
  if (name == "per_patch" || name == "per-patch") return ScoreMode::kPerPatch;
  if (name == "per_frame" || name == "per-frame") return ScoreMode::kPerFrame;
  throw std::invalid_argument("unknown scoring mode: " + std::string(name));
}

PoolingMethod ParsePooling(std::string_view text) {
  if (text == "am") return PoolingMethod::AM();
  if (text == "gw") return PoolingMethod::GW();
  if (text.starts_with("gw:")) {
    const std::string num(text.substr(3));
    std::size_t used = 0;
    double sigma = 0.0;
    try {
      sigma = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != num.size() || !(sigma > 0.0) || !std::isfinite(sigma)) {
      throw std::invalid_argument("GW sigma must be a positive number: " + num);
    }
    return PoolingMethod::GW(sigma);
  }
  throw std::invalid_argument("unknown pooling: " + std::string(text));
}

std::string PoolingName(const PoolingMethod& p) {
  if (p.kind == PoolingMethod::Kind::kAM) return "am";
  return p.sigma ? "gw:" + FormatG9(*p.sigma) : "gw";
}

std::vector<double> GaussianWeights(int t_len, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("GW sigma must be > 0");
  std::vector<double> w(static_cast<std::size_t>(t_len));
  for (int t = 1; t <= t_len; ++t) {
    const double d = t - t_len;
    w[static_cast<std::size_t>(t - 1)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
  }
  return w;
}

double Pool(const ScoreMatrix& m, const PoolingMethod& p) {
  if (m.rows < 1 || m.cols < 1 || m.values.empty()) {
    throw std::invalid_argument("cannot pool an empty score matrix");
  }
  std::vector<double> weights;
  if (p.kind == PoolingMethod::Kind::kAM) {
    weights.assign(static_cast<std::size_t>(m.cols), 1.0);
  } else {
    weights = GaussianWeights(m.cols, p.sigma.value_or(m.cols / 2.0));
  }
  const double weight_sum = PairwiseSum(weights);
  std::vector<double> per_row(static_cast<std::size_t>(m.rows));
  std::vector<double> terms(static_cast<std::size_t>(m.cols));
  for (int r = 0; r < m.rows; ++r) {
    for (int t = 0; t < m.cols; ++t) terms[t] = weights[t] * m.at(r, t);
    per_row[static_cast<std::size_t>(r)] = PairwiseSum(terms) / weight_sum;
  }
  return PairwiseSum(per_row) / m.rows;
}

double LumaMse(const Image& a, const Image& b) {
  RequireSameSize(a, b);
  const std::vector<double> rows = RowSquaredErrors(a, b);
  return PairwiseSum(rows) / (static_cast<double>(a.width()) * a.height());
}

double MseToPsnr(double mse) {
  if (mse <= 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double Psnr(const Image& a, const Image& b) { return MseToPsnr(LumaMse(a, b)); }

double Ssim(const Image& a, const Image& b) {
  RequireSameSize(a, b);
  const int w = a.width();
  const int h = a.height();
  if (std::min(w, h) < kSsimWindow) {
    throw std::invalid_argument("SSIM needs images of at least 11x11 pixels");
  }
  const auto k = GaussianKernel();
  const std::vector<double> ya = LumaPlane(a);
  const std::vector<double> yb = LumaPlane(b);
  std::vector<double> aa(ya.size()), bb(ya.size()), ab(ya.size());
  for (std::size_t i = 0; i < ya.size(); ++i) {
    aa[i] = ya[i] * ya[i];
    bb[i] = yb[i] * yb[i];
    ab[i] = ya[i] * yb[i];
  }
  const auto mu_a = FilterValid(ya, w, h, k);
  const auto mu_b = FilterValid(yb, w, h, k);
  const auto e_aa = FilterValid(aa, w, h, k);
  const auto e_bb = FilterValid(bb, w, h, k);
  const auto e_ab = FilterValid(ab, w, h, k);

  std::vector<double> map(mu_a.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double var_a = e_aa[i] - ma * ma;
    const double var_b = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    map[i] = ((2.0 * ma * mb + kSsimC1) * (2.0 * cov + kSsimC2)) /
             ((ma * ma + mb * mb + kSsimC1) * (var_a + var_b + kSsimC2));
  }
  return PairwiseSum(map) / static_cast<double>(map.size());
}

double WsPsnr(const Image& ref, const Image& dist) {
  RequireSameSize(ref, dist);
  const int h = ref.height();
  const std::vector<double> rows = RowSquaredErrors(ref, dist);
  std::vector<double> weights(static_cast<std::size_t>(h));
  std::vector<double> weighted(static_cast<std::size_t>(h));
  for (int j = 0; j < h; ++j) {
    weights[j] = std::cos((j + 0.5 - h / 2.0) * kPi / h);
    weighted[j] = rows[j] * weights[j];
  }
  const double wmse =
      PairwiseSum(weighted) / (static_cast<double>(ref.width()) * PairwiseSum(weights));
  return MseToPsnr(wmse);
}

std::vector<SphericalPoint> FibonacciLattice(int k) {
  std::vector<SphericalPoint> pts;
  pts.reserve(static_cast<std::size_t>(std::max(k, 0)));
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < k; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / k;
    pts.emplace_back(std::asin(z), std::fmod(golden * i, kTwoPi));
  }
  return pts;
}

double SPsnr(const Image& ref, const Image& dist, int k_points) {
  RequireSameSize(ref, dist);
  if (k_points < 100) throw std::invalid_argument("S-PSNR needs at least 100 points");
  const EquirectImage a(ref);
  const EquirectImage b(dist);
  const std::vector<SphericalPoint> lattice = FibonacciLattice(k_points);
  std::vector<double> err(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const NormPoint p = SphToNorm(lattice[i]);
    const double e = Luma(BilinearSampleUnchecked(a, p.y, p.x)) -
                     Luma(BilinearSampleUnchecked(b, p.y, p.x));
    err[i] = e * e;
  }
  return MseToPsnr(PairwiseSum(err) / static_cast<double>(err.size()));
}

void CheckPairable(const GsrMetadata& ref, int ref_t, const GsrMetadata& dist,
                   int dist_t) {
  const GsrConfig& a = ref.config;
  const GsrConfig& b = dist.config;
  if (ref_t != dist_t) {
    throw PairingError("sequence lengths differ: " + std::to_string(ref_t) +
                       " vs " + std::to_string(dist_t));
  }
  if (a.n != b.n) {
    throw PairingError("grids differ: " + std::to_string(a.grid()) + "x" +
                       std::to_string(a.grid()) + " vs " + std::to_string(b.grid()) +
                       "x" + std::to_string(b.grid()));
  }
  if (a.patch_h != b.patch_h || a.patch_w != b.patch_w) {
    throw PairingError("patch sizes differ");
  }
  if (a.sampling != b.sampling || !(a.pitch == b.pitch)) {
    throw PairingError("sampling settings differ");
  }
  if (ref.scanpath_sha256 != dist.scanpath_sha256) {
    throw PairingError("scanpath hashes differ; reference and distorted GSRs "
                       "must be built from the same scanpaths");
  }
}

QualityReport ScoreSequences(const GsrSequence& ref, const GsrSequence& dist,
                             Metric metric, ScoreMode mode,
                             const PoolingMethod& pooling, int threads) {
  CheckPairable(ref.meta, ref.length(), dist.meta, dist.length());
  const int t_len = ref.length();
  if (t_len < 1) throw PairingError("empty GSR sequences");
  for (int t = 0; t < t_len; ++t) {
    RequireSameSize(ref.frames[t], dist.frames[t]);
  }

  QualityReport report;
  report.metric = metric;
  report.mode = mode;
  report.pooling = pooling;
  const int rows = mode == ScoreMode::kPerPatch ? ref.meta.config.n : 1;
  report.matrix = ScoreMatrix(rows, t_len);
  ScoreMatrix mse(rows, t_len);

  ParallelFor(static_cast<std::size_t>(rows) * t_len, threads, [&](std::size_t job) {
    const int r = static_cast<int>(job / t_len);
    const int t = static_cast<int>(job % t_len);
    double raw = 0.0;
    double score = 0.0;
    if (mode == ScoreMode::kPerPatch) {
      score = ScorePair(ref.Patch(r, t), dist.Patch(r, t), metric, &raw);
    } else {
      score = ScorePair(ref.frames[t], dist.frames[t], metric, &raw);
    }
    report.matrix.at(r, t) = score;
    mse.at(r, t) = raw;
  });
  if (metric == Metric::kPsnr) report.mse = std::move(mse);
  report.pooled = Pool(report.matrix, pooling);
  return report;
}

}  // namespace omnigsr
