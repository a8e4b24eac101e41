#include "omnigsr/scanpath.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "omnigsr/util.hpp"

namespace omnigsr {
namespace {

using nlohmann::json;

constexpr double kDeg = kPi / 180.0;

struct Tangent2 {
  double east = 0.0;
  double north = 0.0;
};

Vec3 EastAxis(double lon) { return {-std::sin(lon), std::cos(lon), 0.0}; }

Vec3 NorthAxis(double lat, double lon) {
  return {-std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon),
          std::cos(lat)};
}

double Dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

NormPoint StoredPoint(const SphericalPoint& s) {
  NormPoint p = SphToNorm(s);
  p.y = std::clamp(RoundG9(p.y), 0.0, 1.0);
  p.x = std::clamp(RoundG9(p.x), 0.0, 1.0);
  return p;
}

Tangent2 RandomDirection(Rng& rng) {
  const double a = kTwoPi * rng.Uniform();
  return {std::cos(a), std::sin(a)};
}

Scanpath MarkovWalk(const ViewingCondition& cond, const GeneratorConfig& cfg,
                    Rng& rng) {
  Scanpath path;
  path.points.reserve(cond.duration_s);
  path.points.push_back(cond.start);

  SphericalPoint pos = NormToSph(cond.start);
  Tangent2 heading = RandomDirection(rng);
  for (int t = 1; t < cond.duration_s; ++t) {
    const Tangent2 r = RandomDirection(rng);
    Tangent2 d{cfg.momentum * heading.east + (1.0 - cfg.momentum) * r.east,
               cfg.momentum * heading.north + (1.0 - cfg.momentum) * r.north -
                   cfg.equator_pull * std::sin(pos.lat())};
    double norm = std::hypot(d.east, d.north);
    if (norm < 1e-12) {
      d = r;
      norm = 1.0;
    }
    d.east /= norm;
    d.north /= norm;

    const double step_deg = std::min(
        179.0, std::abs(cfg.step_mean_deg_per_s + cfg.step_std_deg * rng.Normal()));
    const double s = step_deg * kDeg;

    const Vec3 p = SphToVec(pos);
    const Vec3 e = EastAxis(pos.lon());
    const Vec3 n = NorthAxis(pos.lat(), pos.lon());
    Vec3 dir, next, moving;
    for (int k = 0; k < 3; ++k) dir[k] = d.east * e[k] + d.north * n[k];
    for (int k = 0; k < 3; ++k) {
      next[k] = std::cos(s) * p[k] + std::sin(s) * dir[k];
      moving[k] = -std::sin(s) * p[k] + std::cos(s) * dir[k];
    }
    pos = VecToSph(next);

    // Carry the direction of travel over to the new point's local frame.
    const Tangent2 carried{Dot(moving, EastAxis(pos.lon())),
                           Dot(moving, NorthAxis(pos.lat(), pos.lon()))};
    const double cn = std::hypot(carried.east, carried.north);
    heading = cn > 1e-12 ? Tangent2{carried.east / cn, carried.north / cn} : d;

    path.points.push_back(StoredPoint(pos));
  }
  return path;
}

Scanpath UniformRandom(const ViewingCondition& cond, Rng& rng) {
  Scanpath path;
  path.points.reserve(cond.duration_s);
  path.points.push_back(cond.start);
  for (int t = 1; t < cond.duration_s; ++t) {
    const double lon = -kPi + kTwoPi * rng.Uniform();
    const double z = std::clamp(2.0 * rng.Uniform() - 1.0, -1.0, 1.0);
    path.points.push_back(StoredPoint(SphericalPoint(std::asin(z), lon)));
  }
  return path;
}

double ParseCoordinate(const json& v, std::size_t path, std::size_t point) {
  if (!v.is_number()) {
    throw FormatError("path " + std::to_string(path) + " point " +
                      std::to_string(point) + ": coordinate is not a number");
  }
  return v.get<double>();
}

}  // namespace

void ViewingCondition::Validate() const {
  if (!start.InRange()) throw DomainError("start point out of range");
  if (duration_s < 1) throw DomainError("duration_s must be >= 1");
}

std::string_view ModelName(GeneratorModel m) {
  switch (m) {
    case GeneratorModel::kMarkovWalk: return "markov_walk";
    case GeneratorModel::kUniformRandom: return "uniform_random";
    case GeneratorModel::kFixedCenter: return "fixed_center";
    case GeneratorModel::kExternal: return "external";
  }
  return "external";
}

GeneratorModel ParseModel(std::string_view name) {
  if (name == "markov_walk" || name == "markov") return GeneratorModel::kMarkovWalk;
  if (name == "uniform_random" || name == "random") return GeneratorModel::kUniformRandom;
  if (name == "fixed_center" || name == "fixed") return GeneratorModel::kFixedCenter;
  if (name == "external" || name == "human") return GeneratorModel::kExternal;
  throw std::invalid_argument("unknown scanpath model: " + std::string(name));
}

void GeneratorConfig::Validate() const {
  const bool finite = std::isfinite(step_mean_deg_per_s) &&
                      std::isfinite(step_std_deg) && std::isfinite(momentum) &&
                      std::isfinite(equator_pull);
  if (!finite) throw DomainError("generator parameters must be finite");
  if (step_mean_deg_per_s < 0.0) throw DomainError("step_mean_deg_per_s must be >= 0");
  if (step_std_deg < 0.0) throw DomainError("step_std_deg must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0) throw DomainError("momentum must be in [0, 1)");
  if (equator_pull < 0.0) throw DomainError("equator_pull must be >= 0");
  if (model == GeneratorModel::kExternal) {
    throw DomainError("the external model cannot generate scanpaths");
  }
}

ScanpathSet Generate(const ViewingCondition& cond, int n,
                     const GeneratorConfig& cfg, int threads) {
  if (n < 1) throw DomainError("n must be ≥ 1");
  cond.Validate();
  cfg.Validate();

  ScanpathSet set;
  set.master_seed = cfg.seed;
  set.model = cfg.model;
  set.condition = cond;
  set.paths.resize(static_cast<std::size_t>(n));
  ParallelFor(set.paths.size(), threads, [&](std::size_t i) {
    Rng rng(MixSeed(cfg.seed, i));
    switch (cfg.model) {
      case GeneratorModel::kMarkovWalk:
        set.paths[i] = MarkovWalk(cond, cfg, rng);
        break;
      case GeneratorModel::kUniformRandom:
        set.paths[i] = UniformRandom(cond, rng);
        break;
      case GeneratorModel::kFixedCenter:
      case GeneratorModel::kExternal:
        set.paths[i].points.assign(cond.duration_s, cond.start);
        break;
    }
  });
  return set;
}

std::string ScanpathsToJson(const ScanpathSet& set) {
  json doc;
  doc["version"] = 1;
  doc["duration_s"] = set.length();
  doc["start"] = {set.condition.start.y, set.condition.start.x};
  doc["model"] = std::string(ModelName(set.model));
  doc["seed"] = std::to_string(set.master_seed);
  json paths = json::array();
  for (const Scanpath& p : set.paths) {
    json pts = json::array();
    for (const NormPoint& q : p.points) pts.push_back({q.y, q.x});
    paths.push_back({{"points", std::move(pts)}});
  }
  doc["paths"] = std::move(paths);
  return doc.dump() + "\n";
}

ScanpathSet ScanpathsFromJson(std::string_view text, const LoadOptions& opts) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed scanpath JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("scanpath JSON must be an object");
  if (doc.contains("version") && doc["version"] != 1) {
    throw FormatError("unsupported scanpath file version");
  }
  if (!doc.contains("paths") || !doc["paths"].is_array() || doc["paths"].empty()) {
    throw FormatError("scanpath JSON needs a nonempty \"paths\" array");
  }

  auto convert = [&](double a, double b) {
    NormPoint p;
    if (opts.lonlat) {
      p.y = 0.5 - a / 180.0;
      p.x = b / 360.0 + 0.5;
    } else {
      p.y = a;
      p.x = b;
    }
    if (opts.flip_y) p.y = 1.0 - p.y;
    if (opts.flip_x) p.x = 1.0 - p.x;
    return p;
  };

  ScanpathSet set;
  const json& paths = doc["paths"];
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const json& entry = paths[i];
    const json* pts = nullptr;
    if (entry.is_object() && entry.contains("points")) pts = &entry["points"];
    if (entry.is_array()) pts = &entry;
    if (pts == nullptr || !pts->is_array() || pts->empty()) {
      throw FormatError("path " + std::to_string(i) + ": missing points");
    }
    Scanpath path;
    for (std::size_t j = 0; j < pts->size(); ++j) {
      const json& pt = (*pts)[j];
      if (!pt.is_array() || pt.size() != 2) {
        throw FormatError("path " + std::to_string(i) + " point " +
                          std::to_string(j) + ": expected a [y, x] pair");
      }
      const NormPoint p =
          convert(ParseCoordinate(pt[0], i, j), ParseCoordinate(pt[1], i, j));
      if (!p.InRange()) {
        throw FormatError("path " + std::to_string(i) + " point " +
                          std::to_string(j) + ": point out of range");
      }
      path.points.push_back(p);
    }
    if (!set.paths.empty() && path.points.size() != set.paths.front().points.size()) {
      throw FormatError("path " + std::to_string(i) + ": length " +
                        std::to_string(path.points.size()) + " differs from " +
                        std::to_string(set.paths.front().points.size()));
    }
    set.paths.push_back(std::move(path));
  }

  set.condition.duration_s = set.length();
  if (doc.contains("duration_s")) {
    if (!doc["duration_s"].is_number_integer() ||
        doc["duration_s"].get<long long>() != set.length()) {
      throw FormatError("duration_s does not match the path length");
    }
  }
  if (doc.contains("start")) {
    const json& s = doc["start"];
    if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number()) {
      throw FormatError("start must be a [y, x] pair");
    }
    set.condition.start = convert(s[0].get<double>(), s[1].get<double>());
    if (!set.condition.start.InRange()) throw FormatError("start: point out of range");
  } else {
    set.condition.start = set.paths.front().points.front();
  }
  if (doc.contains("model")) {
    try {
      set.model = ParseModel(doc["model"].get<std::string>());
    } catch (const std::exception&) {
      throw FormatError("unknown model tag in scanpath JSON");
    }
  }
  if (doc.contains("seed")) {
    const json& s = doc["seed"];
    try {
      set.master_seed = s.is_string() ? std::stoull(s.get<std::string>())
                                      : s.get<std::uint64_t>();
    } catch (const std::exception&) {
      throw FormatError("seed must be an unsigned 64-bit integer");
    }
  }
  return set;
}

void SaveScanpaths(const ScanpathSet& set, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << ScanpathsToJson(set);
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

ScanpathSet LoadScanpaths(const std::filesystem::path& file,
                          const LoadOptions& opts) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ScanpathsFromJson(ss.str(), opts);
}

std::string ScanpathHash(const ScanpathSet& set) {
  return Sha256Hex(ScanpathsToJson(set));
}

}  // namespace omnigsr
