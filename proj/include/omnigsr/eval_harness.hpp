// Dataset-level evaluation: manifest ingestion, reference-grouped repeated
// splits, SRCC/PLCC (optionally after a 4-parameter logistic mapping) and
// mean/std aggregation over repeats.

#ifndef OMNIGSR_EVAL_HARNESS_HPP
#define OMNIGSR_EVAL_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omnigsr/fr_metrics.hpp"
#include "omnigsr/gsr_convert.hpp"
#include "omnigsr/scanpath.hpp"

namespace omnigsr {

class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// 1-based ranks; tied values share the mean of their rank span.
std::vector<double> AverageRanks(std::span<const double> v);

double Pearson(std::span<const double> x, std::span<const double> y);
double Srcc(std::span<const double> x, std::span<const double> y);

struct Logistic4 {
  double b1 = 1.0;
  double b2 = 0.0;
  double b3 = 0.0;
  double b4 = 1.0;

  double operator()(double s) const;
};

struct LogisticFit {
  Logistic4 params;
  int iterations = 0;
  bool converged = false;
};

// Damped Gauss-Newton fit of y ~ logistic4(x). Returns nullopt when the fit
// diverges (non-finite parameters or residuals).
std::optional<LogisticFit> FitLogistic4(std::span<const double> x,
                                        std::span<const double> y);

enum class PlccMapping { kNone, kLogistic4 };

struct PlccResult {
  double value = 0.0;
  // Logistic mapping failed and the unmapped correlation was reported.
  bool fell_back = false;
};

PlccResult Plcc(std::span<const double> x, std::span<const double> y,
                PlccMapping mapping = PlccMapping::kNone);

struct SplitPartition {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

struct SplitPlan {
  std::uint64_t seed = 0;
  std::vector<SplitPartition> repeats;
};

struct SplitSizes {
  int train = 0;
  int val = 0;
  int test = 0;
};

// 70/10/20 rule: round, round, remainder; test borrows from train if empty.
SplitSizes SplitSizesFor(int references);

// Partitions the distinct reference ids for each repeat.
SplitPlan MakeSplits(std::vector<std::string> reference_ids, std::uint64_t seed,
                     int repeats = 5);

struct ManifestRow {
  std::filesystem::path dist_path;
  std::filesystem::path ref_path;
  std::string reference_id;
  double mos = 0.0;
  std::optional<ViewingCondition> condition;
  std::optional<std::filesystem::path> scanpath_file;
};

struct DatasetManifest {
  std::vector<ManifestRow> rows;
};

// Header: dist_path,ref_path,reference_id,mos,start_y,start_x,duration_s,
// scanpath_file (last four optional). Relative paths resolve against
// `base_dir`.
DatasetManifest ParseManifest(const std::string& csv,
                              const std::filesystem::path& base_dir = {});
DatasetManifest LoadManifest(const std::filesystem::path& file);

enum class EvalMetric { kGPsnr, kGSsim, kWsPsnr, kSPsnr };
std::string_view EvalMetricName(EvalMetric m);
EvalMetric ParseEvalMetric(std::string_view name);

struct PipelineConfig {
  EvalMetric metric = EvalMetric::kGPsnr;
  ScoreMode mode = ScoreMode::kPerPatch;
  PoolingMethod pooling;
  GsrConfig gsr;
  GeneratorConfig generator;
  LoadOptions scanpath_options;
  int repeats = 5;
  std::uint64_t split_seed = 0;
  PlccMapping plcc_mapping = PlccMapping::kNone;
  int spsnr_points = kDefaultSphericalPoints;
  std::optional<std::filesystem::path> cache_dir;
  int threads = 1;
};

struct RepeatResult {
  double srcc = 0.0;
  double plcc = 0.0;
  bool plcc_fell_back = false;
  int test_rows = 0;
};

struct EvalResult {
  std::vector<RepeatResult> repeats;
  double srcc_mean = 0.0;
  double srcc_std = 0.0;
  double plcc_mean = 0.0;
  double plcc_std = 0.0;
  // Predicted score per manifest row; NaN for rows never in a test split.
  std::vector<double> row_scores;
};

// Mean and sample (n-1) standard deviation; std is 0 for a single value.
std::pair<double, double> MeanStd(std::span<const double> v);

// Scores one manifest row with the configured pipeline.
double ScoreRow(const ManifestRow& row, const PipelineConfig& cfg);

// Throws std::runtime_error listing every missing file before any scoring.
EvalResult Evaluate(const DatasetManifest& manifest, const PipelineConfig& cfg);

std::string EvalResultToJson(const EvalResult& result, const PipelineConfig& cfg);

}  // namespace omnigsr

#endif  // OMNIGSR_EVAL_HARNESS_HPP
