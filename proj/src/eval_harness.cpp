#include "omnigsr/eval_harness.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <functional>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "omnigsr/io.hpp"
#include "omnigsr/util.hpp"

namespace omnigsr {
namespace {

using nlohmann::json;

void RequirePaired(std::span<const double> x, std::span<const double> y,
                   std::size_t min_len) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("correlation inputs differ in length");
  }
  if (x.size() < min_len) {
    throw std::invalid_argument("correlation needs at least " +
                                std::to_string(min_len) + " samples");
  }
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double SumSquares(const Logistic4& f, std::span<const double> x,
                  std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = f(x[i]) - y[i];
    s += r * r;
  }
  return s;
}

bool Finite(const Logistic4& f) {
  return std::isfinite(f.b1) && std::isfinite(f.b2) && std::isfinite(f.b3) &&
         std::isfinite(f.b4) && f.b4 != 0.0;
}

// --- CSV ---------------------------------------------------------------

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string Trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double ParseDouble(const std::string& s, const std::string& what, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !std::isfinite(v)) {
    throw FormatError("manifest line " + std::to_string(line) + ": bad " + what +
                      " '" + s + "'");
  }
  return v;
}

// --- scoring -----------------------------------------------------------

std::string CacheKey(const std::string& file_sha, const std::string& scan_sha,
                     const GsrConfig& cfg) {
  GsrMetadata probe;
  probe.config = cfg;
  return Sha256Hex(file_sha + "|" + scan_sha + "|" + MetaToJson(probe, 0));
}

void AtomicWrite(const fs::path& dest, const std::function<void(const fs::path&)>& write) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp = dest;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) +
         "_" + std::to_string(counter++);
  write(tmp);
  fs::rename(tmp, dest);
}

GsrSequence ConvertCached(const fs::path& image_file, const ScanpathSet& paths,
                          const PipelineConfig& cfg) {
  if (!cfg.cache_dir) {
    const EquirectImage img(ReadPng(image_file));
    return Convert(img, paths, cfg.gsr, 1);
  }
  const std::vector<std::uint8_t> bytes = ReadFileBytes(image_file);
  const fs::path entry =
      *cfg.cache_dir / (CacheKey(Sha256Hex(bytes), ScanpathHash(paths), cfg.gsr) + ".gsr");
  if (fs::exists(entry) && fs::exists(RawMetaPath(entry))) {
    try {
      return ReadGsr(entry);
    } catch (const std::exception&) {
      // Unreadable entry: rebuild it below.
    }
  }
  const EquirectImage img(ReadPng(image_file));
  GsrSequence seq = Convert(img, paths, cfg.gsr, 1);
  fs::create_directories(*cfg.cache_dir);
  AtomicWrite(RawMetaPath(entry), [&](const fs::path& p) {
    WriteTextFile(p, MetaToJson(seq.meta, seq.length()));
  });
  AtomicWrite(entry, [&](const fs::path& p) { WriteFileBytes(p, EncodeGsr1(seq.frames)); });
  return seq;
}

ScanpathSet RowScanpaths(const ManifestRow& row, const PipelineConfig& cfg) {
  const ViewingCondition cond = row.condition.value_or(kDefaultViewingCondition);
  if (row.scanpath_file) {
    ScanpathSet set = LoadScanpaths(*row.scanpath_file, cfg.scanpath_options);
    if (row.condition && set.length() != row.condition->duration_s) {
      throw FormatError(row.scanpath_file->string() + ": path length " +
                        std::to_string(set.length()) +
                        " disagrees with the manifest duration_s " +
                        std::to_string(row.condition->duration_s));
    }
    return set;
  }
  return Generate(cond, cfg.gsr.n, cfg.generator, 1);
}

}  // namespace

// --- correlation -------------------------------------------------------

std::vector<double> AverageRanks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double mean_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  RequirePaired(x, y, 2);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedCorrelation("correlation is undefined for a constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double Srcc(std::span<const double> x, std::span<const double> y) {
  RequirePaired(x, y, 2);
  const std::vector<double> rx = AverageRanks(x);
  const std::vector<double> ry = AverageRanks(y);
  return Pearson(rx, ry);
}

double Logistic4::operator()(double s) const {
  return (b1 - b2) / (1.0 + std::exp(-(s - b3) / std::abs(b4))) + b2;
}

std::optional<LogisticFit> FitLogistic4(std::span<const double> x,
                                        std::span<const double> y) {
  RequirePaired(x, y, 3);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mx) * (v - mx);
  const double sd = std::sqrt(var / (n - 1.0));
  if (sd == 0.0) throw UndefinedCorrelation("cannot fit a constant predictor");

  LogisticFit fit;
  fit.params.b1 = *std::max_element(y.begin(), y.end());
  fit.params.b2 = *std::min_element(y.begin(), y.end());
  fit.params.b3 = Median(std::vector<double>(x.begin(), x.end()));
  fit.params.b4 = sd / 4.0;

  double sse = SumSquares(fit.params, x, y);
  double damping = 1e-3;
  constexpr int kMaxIterations = 200;
  constexpr double kRelTol = 1e-10;

  for (fit.iterations = 1; fit.iterations <= kMaxIterations; ++fit.iterations) {
    const Logistic4& p = fit.params;
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    const double scale = std::abs(p.b4);
    const double sign = p.b4 < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = (x[i] - p.b3) / scale;
      const double g = 1.0 / (1.0 + std::exp(-z));
      const double slope = (p.b1 - p.b2) * g * (1.0 - g);
      Eigen::Vector4d row;
      row << g, 1.0 - g, -slope / scale, -slope * z * sign / scale;
      const double r = p(x[i]) - y[i];
      jtj.noalias() += row * row.transpose();
      jtr += row * r;
    }
    if (sse == 0.0 || jtr.norm() == 0.0) {
      fit.converged = true;
      break;
    }

    Eigen::Matrix4d lhs = jtj;
    for (int k = 0; k < 4; ++k) lhs(k, k) += damping * std::max(jtj(k, k), 1e-12);
    const Eigen::Vector4d step = lhs.ldlt().solve(-jtr);
    Logistic4 trial{p.b1 + step[0], p.b2 + step[1], p.b3 + step[2], p.b4 + step[3]};
    const double trial_sse = Finite(trial) ? SumSquares(trial, x, y)
                                           : std::numeric_limits<double>::infinity();
    if (std::isfinite(trial_sse) && trial_sse < sse) {
      const double rel = (sse - trial_sse) / std::max(sse, 1e-300);
      fit.params = trial;
      sse = trial_sse;
      damping *= 0.5;
      if (rel < kRelTol) {
        fit.converged = true;
        break;
      }
    } else {
      damping *= 2.0;
      if (!std::isfinite(damping)) break;
    }
  }
  fit.iterations = std::min(fit.iterations, kMaxIterations);
  if (!Finite(fit.params) || !std::isfinite(sse)) return std::nullopt;
  return fit;
}

PlccResult Plcc(std::span<const double> x, std::span<const double> y,
                PlccMapping mapping) {
  if (mapping == PlccMapping::kNone) return {Pearson(x, y), false};
  RequirePaired(x, y, 3);
  const std::optional<LogisticFit> fit = FitLogistic4(x, y);
  if (fit) {
    std::vector<double> mapped(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mapped[i] = fit->params(x[i]);
    try {
      return {Pearson(mapped, y), false};
    } catch (const UndefinedCorrelation&) {
      // Flat fitted curve; fall through to the unmapped value.
    }
  }
  return {Pearson(x, y), true};
}

// --- splits ------------------------------------------------------------

SplitSizes SplitSizesFor(int references) {
  SplitSizes s;
  s.train = static_cast<int>(std::lround(0.7 * references));
  s.val = static_cast<int>(std::lround(0.1 * references));
  s.test = references - s.train - s.val;
  while (s.test < 1 && s.train > 0) {
    --s.train;
    ++s.test;
  }
  return s;
}

SplitPlan MakeSplits(std::vector<std::string> reference_ids, std::uint64_t seed,
                     int repeats) {
  std::sort(reference_ids.begin(), reference_ids.end());
  reference_ids.erase(std::unique(reference_ids.begin(), reference_ids.end()),
                      reference_ids.end());
  const int count = static_cast<int>(reference_ids.size());
  if (count < 3) {
    throw std::invalid_argument("splitting needs at least 3 distinct references, got " +
                                std::to_string(count));
  }
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  const SplitSizes sizes = SplitSizesFor(count);

  SplitPlan plan;
  plan.seed = seed;
  for (int r = 0; r < repeats; ++r) {
    std::vector<std::string> ids = reference_ids;
    Rng rng(MixSeed(seed, static_cast<std::uint64_t>(r)));
    for (std::size_t i = ids.size() - 1; i > 0; --i) {
      std::swap(ids[i], ids[rng.Below(i + 1)]);
    }
    SplitPartition part;
    part.train.assign(ids.begin(), ids.begin() + sizes.train);
    part.val.assign(ids.begin() + sizes.train, ids.begin() + sizes.train + sizes.val);
    part.test.assign(ids.begin() + sizes.train + sizes.val, ids.end());
    plan.repeats.push_back(std::move(part));
  }
  return plan;
}

// --- manifest ----------------------------------------------------------

DatasetManifest ParseManifest(const std::string& csv, const fs::path& base_dir) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("manifest is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::map<std::string, std::size_t> col;
  {
    const auto header = SplitCsvLine(line);
    for (std::size_t i = 0; i < header.size(); ++i) col[Trim(header[i])] = i;
  }
  for (const char* required : {"dist_path", "ref_path", "reference_id", "mos"}) {
    if (!col.count(required)) {
      throw FormatError(std::string("manifest header lacks column ") + required);
    }
  }
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };

  DatasetManifest manifest;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    const auto cells = SplitCsvLine(line);
    auto get = [&](const char* name) -> std::string {
      const auto it = col.find(name);
      if (it == col.end() || it->second >= cells.size()) return {};
      return Trim(cells[it->second]);
    };
    ManifestRow row;
    row.dist_path = resolve(get("dist_path"));
    row.ref_path = resolve(get("ref_path"));
    row.reference_id = get("reference_id");
    if (row.reference_id.empty()) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": empty reference_id");
    }
    if (get("dist_path").empty() || get("ref_path").empty()) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": empty image path");
    }
    row.mos = ParseDouble(get("mos"), "mos", line_no);

    const std::string sy = get("start_y");
    const std::string sx = get("start_x");
    const std::string dur = get("duration_s");
    const int present = !sy.empty() + !sx.empty() + !dur.empty();
    if (present == 3) {
      ViewingCondition cond;
      cond.start = {ParseDouble(sy, "start_y", line_no), ParseDouble(sx, "start_x", line_no)};
      const double d = ParseDouble(dur, "duration_s", line_no);
      if (d != std::floor(d) || d < 1.0) {
        throw FormatError("manifest line " + std::to_string(line_no) +
                          ": duration_s must be a positive integer");
      }
      cond.duration_s = static_cast<int>(d);
      if (!cond.start.InRange()) {
        throw FormatError("manifest line " + std::to_string(line_no) +
                          ": start point out of range");
      }
      row.condition = cond;
    } else if (present != 0) {
      throw FormatError("manifest line " + std::to_string(line_no) +
                        ": start_y, start_x and duration_s must be given together");
    }
    const std::string sp = get("scanpath_file");
    if (!sp.empty()) row.scanpath_file = resolve(sp);
    manifest.rows.push_back(std::move(row));
  }
  if (manifest.rows.empty()) throw FormatError("manifest has no rows");
  return manifest;
}

DatasetManifest LoadManifest(const fs::path& file) {
  return ParseManifest(ReadTextFile(file), file.parent_path());
}

// --- evaluation --------------------------------------------------------

std::string_view EvalMetricName(EvalMetric m) {
  switch (m) {
    case EvalMetric::kGPsnr: return "g-psnr";
    case EvalMetric::kGSsim: return "g-ssim";
    case EvalMetric::kWsPsnr: return "ws-psnr";
    case EvalMetric::kSPsnr: return "s-psnr";
  }
  return "g-psnr";
}

EvalMetric ParseEvalMetric(std::string_view name) {
  if (name == "g-psnr") return EvalMetric::kGPsnr;
  if (name == "g-ssim") return EvalMetric::kGSsim;
  if (name == "ws-psnr") return EvalMetric::kWsPsnr;
  if (name == "s-psnr") return EvalMetric::kSPsnr;
  throw std::invalid_argument("unknown evaluation metric: " + std::string(name));
}

std::pair<double, double> MeanStd(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of an empty set");
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

double ScoreRow(const ManifestRow& row, const PipelineConfig& cfg) {
  switch (cfg.metric) {
    case EvalMetric::kWsPsnr:
      return WsPsnr(ReadPng(row.ref_path), ReadPng(row.dist_path));
    case EvalMetric::kSPsnr:
      return SPsnr(ReadPng(row.ref_path), ReadPng(row.dist_path), cfg.spsnr_points);
    case EvalMetric::kGPsnr:
    case EvalMetric::kGSsim: {
      const ScanpathSet paths = RowScanpaths(row, cfg);
      const GsrSequence ref = ConvertCached(row.ref_path, paths, cfg);
      const GsrSequence dist = ConvertCached(row.dist_path, paths, cfg);
      const Metric metric = cfg.metric == EvalMetric::kGPsnr ? Metric::kPsnr : Metric::kSsim;
      return ScoreSequences(ref, dist, metric, cfg.mode, cfg.pooling, 1).pooled;
    }
  }
  throw std::logic_error("unhandled metric");
}

EvalResult Evaluate(const DatasetManifest& manifest, const PipelineConfig& cfg) {
  std::set<fs::path> missing;
  const bool uses_scanpaths =
      cfg.metric == EvalMetric::kGPsnr || cfg.metric == EvalMetric::kGSsim;
  for (const ManifestRow& row : manifest.rows) {
    if (!fs::exists(row.dist_path)) missing.insert(row.dist_path);
    if (!fs::exists(row.ref_path)) missing.insert(row.ref_path);
    if (uses_scanpaths && row.scanpath_file && !fs::exists(*row.scanpath_file)) {
      missing.insert(*row.scanpath_file);
    }
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " missing file(s):";
    for (const fs::path& p : missing) msg += "\n  " + p.string();
    throw std::runtime_error(msg);
  }
  if (uses_scanpaths) cfg.gsr.Validate();

  std::vector<std::string> ids;
  for (const ManifestRow& row : manifest.rows) ids.push_back(row.reference_id);
  const SplitPlan plan = MakeSplits(ids, cfg.split_seed, cfg.repeats);

  std::set<std::string> tested;
  for (const SplitPartition& part : plan.repeats) {
    tested.insert(part.test.begin(), part.test.end());
  }
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    if (tested.count(manifest.rows[i].reference_id)) todo.push_back(i);
  }

  EvalResult result;
  result.row_scores.assign(manifest.rows.size(), std::numeric_limits<double>::quiet_NaN());
  ParallelFor(todo.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t i = todo[k];
    result.row_scores[i] = ScoreRow(manifest.rows[i], cfg);
  });

  std::vector<double> srccs, plccs;
  for (const SplitPartition& part : plan.repeats) {
    const std::set<std::string> test(part.test.begin(), part.test.end());
    std::vector<double> pred, mos;
    for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
      if (test.count(manifest.rows[i].reference_id)) {
        pred.push_back(result.row_scores[i]);
        mos.push_back(manifest.rows[i].mos);
      }
    }
    RepeatResult rep;
    rep.test_rows = static_cast<int>(pred.size());
    rep.srcc = Srcc(pred, mos);
    const PlccResult plcc = Plcc(pred, mos, cfg.plcc_mapping);
    rep.plcc = plcc.value;
    rep.plcc_fell_back = plcc.fell_back;
    srccs.push_back(rep.srcc);
    plccs.push_back(rep.plcc);
    result.repeats.push_back(rep);
  }
  std::tie(result.srcc_mean, result.srcc_std) = MeanStd(srccs);
  std::tie(result.plcc_mean, result.plcc_std) = MeanStd(plccs);
  return result;
}

std::string EvalResultToJson(const EvalResult& result, const PipelineConfig& cfg) {
  json doc;
  json config;
  config["metric"] = std::string(EvalMetricName(cfg.metric));
  config["pooling"] = PoolingName(cfg.pooling);
  config["repeats"] = cfg.repeats;
  config["seed"] = std::to_string(cfg.split_seed);
  config["plcc_mapping"] = cfg.plcc_mapping == PlccMapping::kNone ? "none" : "logistic4";
  if (cfg.metric == EvalMetric::kGPsnr || cfg.metric == EvalMetric::kGSsim) {
    config["mode"] = std::string(ModeName(cfg.mode));
    config["grid"] = cfg.gsr.grid();
    config["patch"] = {cfg.gsr.patch_h, cfg.gsr.patch_w};
    config["sampling"] = std::string(SamplingName(cfg.gsr.sampling));
    config["pitch"] = cfg.gsr.pitch.source_matched() ? json("auto")
                                                     : json(RoundG9(cfg.gsr.pitch.fov_deg));
    config["scanpath_model"] = std::string(ModelName(cfg.generator.model));
    config["scanpath_seed"] = std::to_string(cfg.generator.seed);
  }
  if (cfg.metric == EvalMetric::kSPsnr) config["spsnr_points"] = cfg.spsnr_points;
  doc["config"] = std::move(config);

  json reps = json::array();
  for (std::size_t r = 0; r < result.repeats.size(); ++r) {
    const RepeatResult& rep = result.repeats[r];
    json entry;
    entry["repeat"] = r;
    entry["srcc"] = RoundG9(rep.srcc);
    entry["plcc"] = RoundG9(rep.plcc);
    entry["plcc_fell_back"] = rep.plcc_fell_back;
    entry["test_rows"] = rep.test_rows;
    reps.push_back(std::move(entry));
  }
  doc["repeats"] = std::move(reps);
  doc["srcc_mean"] = RoundG9(result.srcc_mean);
  doc["srcc_std"] = RoundG9(result.srcc_std);
  doc["plcc_mean"] = RoundG9(result.plcc_mean);
  doc["plcc_std"] = RoundG9(result.plcc_std);
  return doc.dump(2) + "\n";
}

}  // namespace omnigsr
