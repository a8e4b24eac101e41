#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "omnigsr/eval_harness.hpp"
#include "omnigsr/fr_metrics.hpp"
#include "omnigsr/gsr_convert.hpp"
#include "omnigsr/io.hpp"
#include "omnigsr/scanpath.hpp"
#include "omnigsr/util.hpp"

namespace omnigsr::cli {
namespace {

namespace fs = std::filesystem;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

NormPoint ParseStart(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("--start expects Y,X");
  try {
    std::size_t a = 0, b = 0;
    const std::string ys = text.substr(0, comma);
    const std::string xs = text.substr(comma + 1);
    NormPoint p{std::stod(ys, &a), std::stod(xs, &b)};
    if (a != ys.size() || b != xs.size()) throw UsageError("--start expects Y,X");
    return p;
  } catch (const std::logic_error&) {
    throw UsageError("--start expects Y,X");
  }
}

Pitch ParsePitch(const std::string& text) {
  if (text == "auto") return Pitch::SourceMatched();
  try {
    std::size_t used = 0;
    const double deg = std::stod(text, &used);
    if (used == text.size() && deg > 0.0) return Pitch::FixedFov(deg);
  } catch (const std::logic_error&) {
  }
  throw UsageError("--pitch expects auto or a positive FoV in degrees");
}

// "32" or "HxW".
std::pair<int, int> ParsePatch(const std::string& text) {
  try {
    const auto x = text.find('x');
    if (x == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
  } catch (const std::logic_error&) {
    throw UsageError("--patch expects N or HxW");
  }
}

PoolingMethod ParsePoolFlag(const std::string& text) {
  try {
    return ParsePooling(text);
  } catch (const std::invalid_argument&) {
    throw UsageError("--pool expects am, gw or gw:SIGMA");
  }
}

struct LoaderFlags {
  bool flip_y = false;
  bool flip_x = false;
  bool lonlat = false;

  void Add(CLI::App* app) {
    app->add_flag("--flip-y", flip_y, "Mirror scanpath y coordinates");
    app->add_flag("--flip-x", flip_x, "Mirror scanpath x coordinates");
    app->add_flag("--lonlat", lonlat, "Scanpath points are (lat_deg, lon_deg)");
  }
  LoadOptions Options() const { return {flip_y, flip_x, lonlat}; }
};

struct ScanpathArgs {
  std::string image;
  std::string start = "0.5,0.5";
  int duration = 20;
  int n = 49;
  std::uint64_t seed = 0;
  std::string model = "markov";
  std::string out;
  double step_mean = 20.0;
  double step_std = 10.0;
  double momentum = 0.6;
  double equator_pull = 0.15;
  int threads = 1;
};

int RunScanpath(const ScanpathArgs& a, std::ostream& out) {
  if (!a.image.empty() && !fs::exists(a.image)) {
    throw std::runtime_error("image not found: " + a.image);
  }
  ViewingCondition cond;
  cond.start = ParseStart(a.start);
  cond.duration_s = a.duration;
  GeneratorConfig gen;
  gen.model = ParseModel(a.model);
  gen.seed = a.seed;
  gen.step_mean_deg_per_s = a.step_mean;
  gen.step_std_deg = a.step_std;
  gen.momentum = a.momentum;
  gen.equator_pull = a.equator_pull;
  const ScanpathSet set = Generate(cond, a.n, gen, a.threads);
  SaveScanpaths(set, a.out);
  out << "wrote " << set.count() << " scanpaths of length " << set.length() << " to "
      << a.out << "\n";
  return kExitOk;
}

struct ConvertArgs {
  std::string image;
  std::string paths;
  std::string patch = "32";
  std::string pitch = "auto";
  std::string sampling = "tangent";
  std::string out;
  LoaderFlags loader;
  int threads = 1;
};

int RunConvert(const ConvertArgs& a, std::ostream& out) {
  const auto [ph, pw] = ParsePatch(a.patch);
  GsrConfig cfg;
  cfg.patch_h = ph;
  cfg.patch_w = pw;
  cfg.pitch = ParsePitch(a.pitch);
  cfg.sampling = ParseSampling(a.sampling);

  const ScanpathSet paths = LoadScanpaths(a.paths, a.loader.Options());
  const int n = static_cast<int>(paths.count());
  const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (root * root != n) {
    const int lo = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
    throw ConfigError(std::to_string(n) + " scanpaths cannot fill a square grid; "
                      "expected sqrt(N) x sqrt(N) paths, e.g. " +
                      std::to_string(lo * lo) + " (" + std::to_string(lo) + "x" +
                      std::to_string(lo) + ") or " + std::to_string((lo + 1) * (lo + 1)) +
                      " (" + std::to_string(lo + 1) + "x" + std::to_string(lo + 1) + ")");
  }
  cfg.n = n;
  const EquirectImage img(ReadPng(a.image));
  if (img.aspect_warning()) {
    std::fprintf(stderr, "warning: %s is %dx%d, not 2:1 equirectangular\n",
                 a.image.c_str(), img.width(), img.height());
  }
  const GsrSequence seq = Convert(img, paths, cfg, a.threads);
  WriteGsr(a.out, seq);
  out << "wrote " << seq.length() << " frames of " << cfg.frame_width() << "x"
      << cfg.frame_height() << " (grid " << cfg.grid() << "x" << cfg.grid() << ") to "
      << a.out << "\n";
  return kExitOk;
}

struct ScoreArgs {
  std::string ref;
  std::string dist;
  std::string metric = "psnr";
  std::string mode = "per-patch";
  std::string pool = "am";
  std::string out;
  int threads = 1;
};

int RunScore(const ScoreArgs& a, std::ostream& out) {
  const Metric metric = ParseMetric(a.metric);
  const ScoreMode mode = ParseMode(a.mode);
  const PoolingMethod pooling = ParsePoolFlag(a.pool);
  const GsrSequence ref = ReadGsr(a.ref);
  const GsrSequence dist = ReadGsr(a.dist);
  const QualityReport report = ScoreSequences(ref, dist, metric, mode, pooling, a.threads);
  if (!a.out.empty()) WriteTextFile(a.out, ReportToJson(report));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", report.pooled);
  out << buf << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string manifest;
  std::string metric = "g-psnr";
  std::string mode = "per-patch";
  std::string pool = "am";
  int repeats = 5;
  std::uint64_t seed = 0;
  std::string cache;
  std::string out;
  std::string patch = "32";
  int n = 49;
  std::string pitch = "auto";
  std::string sampling = "tangent";
  std::string model = "markov";
  std::uint64_t scanpath_seed = 0;
  std::string plcc_mapping = "none";
  int spsnr_points = kDefaultSphericalPoints;
  LoaderFlags loader;
  int threads = 1;
};

int RunEval(const EvalArgs& a, std::ostream& out) {
  PipelineConfig cfg;
  cfg.metric = ParseEvalMetric(a.metric);
  cfg.mode = ParseMode(a.mode);
  cfg.pooling = ParsePoolFlag(a.pool);
  cfg.repeats = a.repeats;
  cfg.split_seed = a.seed;
  const auto [ph, pw] = ParsePatch(a.patch);
  cfg.gsr.patch_h = ph;
  cfg.gsr.patch_w = pw;
  cfg.gsr.n = a.n;
  cfg.gsr.pitch = ParsePitch(a.pitch);
  cfg.gsr.sampling = ParseSampling(a.sampling);
  cfg.generator.model = ParseModel(a.model);
  cfg.generator.seed = a.scanpath_seed;
  cfg.scanpath_options = a.loader.Options();
  if (a.plcc_mapping == "logistic4") {
    cfg.plcc_mapping = PlccMapping::kLogistic4;
  } else if (a.plcc_mapping != "none") {
    throw UsageError("--plcc-mapping expects none or logistic4");
  }
  cfg.spsnr_points = a.spsnr_points;
  cfg.threads = a.threads;
  std::string cache = a.cache;
  if (cache.empty()) {
    if (const char* env = std::getenv("GSR_CACHE_DIR")) cache = env;
  }
  if (!cache.empty()) cfg.cache_dir = fs::path(cache);

  const DatasetManifest manifest = LoadManifest(a.manifest);
  const EvalResult result = Evaluate(manifest, cfg);
  WriteTextFile(a.out, EvalResultToJson(result, cfg));
  char buf[160];
  std::snprintf(buf, sizeof(buf), "SRCC %.4f +/- %.4f  PLCC %.4f +/- %.4f\n",
                result.srcc_mean, result.srcc_std, result.plcc_mean, result.plcc_std);
  out << buf;
  return kExitOk;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generative scanpath representations for 360-degree image quality"};
  app.require_subcommand(1);

  ScanpathArgs sp;
  auto* scan = app.add_subcommand("scanpath", "Generate scanpaths for a viewing condition");
  scan->add_option("--image", sp.image, "Equirectangular image (optional)");
  scan->add_option("--start", sp.start, "Starting point Y,X in [0,1]")->capture_default_str();
  scan->add_option("--duration", sp.duration, "Exploration time in seconds")->capture_default_str();
  scan->add_option("--n", sp.n, "Number of scanpaths")->capture_default_str();
  scan->add_option("--seed", sp.seed, "Master seed")->capture_default_str();
  scan->add_option("--model", sp.model, "markov|random|fixed")
      ->check(CLI::IsMember({"markov", "random", "fixed", "markov_walk",
                             "uniform_random", "fixed_center"}))
      ->capture_default_str();
  scan->add_option("--step-mean", sp.step_mean, "Mean gaze shift, deg/s")->capture_default_str();
  scan->add_option("--step-std", sp.step_std, "Gaze shift spread, deg")->capture_default_str();
  scan->add_option("--momentum", sp.momentum, "Heading persistence in [0,1)")->capture_default_str();
  scan->add_option("--equator-pull", sp.equator_pull, "Pull toward the equator")->capture_default_str();
  scan->add_option("--threads", sp.threads, "Worker threads")->capture_default_str();
  scan->add_option("--out", sp.out, "Output scanpath JSON")->required();

  ConvertArgs cv;
  auto* conv = app.add_subcommand("convert", "Convert an image into a GSR sequence");
  conv->add_option("--image", cv.image, "Equirectangular PNG")->required()->check(CLI::ExistingFile);
  conv->add_option("--paths", cv.paths, "Scanpath JSON")->required()->check(CLI::ExistingFile);
  conv->add_option("--patch", cv.patch, "Mini-patch size N or HxW")->capture_default_str();
  conv->add_option("--pitch", cv.pitch, "auto or FoV per patch in degrees")->capture_default_str();
  conv->add_option("--sampling", cv.sampling, "tangent|erp")
      ->check(CLI::IsMember({"tangent", "erp", "erp_crop"}))
      ->capture_default_str();
  conv->add_option("--out", cv.out, "Output directory, or FILE.gsr for the raw form")->required();
  conv->add_option("--threads", cv.threads, "Worker threads")->capture_default_str();
  cv.loader.Add(conv);

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "Score a reference/distorted GSR pair");
  score->add_option("--ref", sc.ref, "Reference GSR")->required()->check(CLI::ExistingPath);
  score->add_option("--dist", sc.dist, "Distorted GSR")->required()->check(CLI::ExistingPath);
  score->add_option("--metric", sc.metric, "psnr|ssim")
      ->check(CLI::IsMember({"psnr", "ssim"}))
      ->capture_default_str();
  score->add_option("--mode", sc.mode, "per-patch|per-frame")
      ->check(CLI::IsMember({"per-patch", "per-frame", "per_patch", "per_frame"}))
      ->capture_default_str();
  score->add_option("--pool", sc.pool, "am|gw[:SIGMA]")->capture_default_str();
  score->add_option("--out", sc.out, "QualityReport JSON");
  score->add_option("--threads", sc.threads, "Worker threads")->capture_default_str();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Evaluate a metric against a subjective dataset");
  eval->add_option("--manifest", ev.manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--metric", ev.metric, "g-psnr|g-ssim|ws-psnr|s-psnr")
      ->check(CLI::IsMember({"g-psnr", "g-ssim", "ws-psnr", "s-psnr"}))
      ->capture_default_str();
  eval->add_option("--mode", ev.mode, "per-patch|per-frame")
      ->check(CLI::IsMember({"per-patch", "per-frame", "per_patch", "per_frame"}))
      ->capture_default_str();
  eval->add_option("--pool", ev.pool, "am|gw[:SIGMA]")->capture_default_str();
  eval->add_option("--repeats", ev.repeats, "Number of random splits")->capture_default_str();
  eval->add_option("--seed", ev.seed, "Split seed")->capture_default_str();
  eval->add_option("--cache", ev.cache, "GSR cache directory (default $GSR_CACHE_DIR)");
  eval->add_option("--out", ev.out, "Results JSON")->required();
  eval->add_option("--patch", ev.patch, "Mini-patch size N or HxW")->capture_default_str();
  eval->add_option("--n", ev.n, "Scanpaths per GSR")->capture_default_str();
  eval->add_option("--pitch", ev.pitch, "auto or FoV per patch in degrees")->capture_default_str();
  eval->add_option("--sampling", ev.sampling, "tangent|erp")
      ->check(CLI::IsMember({"tangent", "erp", "erp_crop"}))
      ->capture_default_str();
  eval->add_option("--model", ev.model, "markov|random|fixed")
      ->check(CLI::IsMember({"markov", "random", "fixed", "markov_walk",
                             "uniform_random", "fixed_center"}))
      ->capture_default_str();
  eval->add_option("--scanpath-seed", ev.scanpath_seed, "Scanpath generator seed")
      ->capture_default_str();
  eval->add_option("--plcc-mapping", ev.plcc_mapping, "none|logistic4")->capture_default_str();
  eval->add_option("--spsnr-points", ev.spsnr_points, "S-PSNR lattice size")->capture_default_str();
  eval->add_option("--threads", ev.threads, "Worker threads")->capture_default_str();
  ev.loader.Add(eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (scan->parsed()) return RunScanpath(sp, out);
    if (conv->parsed()) return RunConvert(cv, out);
    if (score->parsed()) return RunScore(sc, out);
    if (eval->parsed()) return RunEval(ev, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace omnigsr::cli
