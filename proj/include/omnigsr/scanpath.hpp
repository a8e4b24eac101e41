// Scanpath generation conditioned on a viewing condition (start point and
// exploration time), and the scanpath JSON file format.

#ifndef OMNIGSR_SCANPATH_HPP
#define OMNIGSR_SCANPATH_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "omnigsr/sphere_geom.hpp"

namespace omnigsr {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ViewingCondition {
  NormPoint start{0.5, 0.5};
  int duration_s = 20;  // one gaze point per second

  // Throws DomainError on an out-of-range start or duration < 1.
  void Validate() const;
};

// Defaults used when a dataset carries no viewing conditions.
inline constexpr ViewingCondition kDefaultViewingCondition{{0.5, 0.5}, 20};

struct Scanpath {
  std::vector<NormPoint> points;
  friend bool operator==(const Scanpath&, const Scanpath&) = default;
};

enum class GeneratorModel { kMarkovWalk, kUniformRandom, kFixedCenter, kExternal };

std::string_view ModelName(GeneratorModel m);
// Accepts the canonical names and the CLI short forms markov|random|fixed.
GeneratorModel ParseModel(std::string_view name);

struct ScanpathSet {
  std::vector<Scanpath> paths;
  std::uint64_t master_seed = 0;
  GeneratorModel model = GeneratorModel::kExternal;
  ViewingCondition condition;

  std::size_t count() const { return paths.size(); }
  int length() const {
    return paths.empty() ? 0 : static_cast<int>(paths.front().points.size());
  }

  friend bool operator==(const ScanpathSet& a, const ScanpathSet& b) {
    return a.paths == b.paths && a.master_seed == b.master_seed &&
           a.model == b.model && a.condition.start == b.condition.start &&
           a.condition.duration_s == b.condition.duration_s;
  }
};

struct GeneratorConfig {
  GeneratorModel model = GeneratorModel::kMarkovWalk;
  std::uint64_t seed = 0;
  double step_mean_deg_per_s = 20.0;
  double step_std_deg = 10.0;
  double momentum = 0.6;
  double equator_pull = 0.15;

  void Validate() const;
};

// Generates `n` scanpaths of length cond.duration_s, each starting exactly
// at cond.start. Path i draws from its own stream MixSeed(seed, i), so the
// result does not depend on `threads`. Coordinates are stored at the
// 9-significant-digit precision of the JSON format, which makes in-memory
// sets and reloaded files interchangeable.
ScanpathSet Generate(const ViewingCondition& cond, int n,
                     const GeneratorConfig& cfg, int threads = 1);

struct LoadOptions {
  bool flip_y = false;
  bool flip_x = false;
  // Points are (lat_deg, lon_deg) pairs instead of normalized (y, x).
  bool lonlat = false;
};

std::string ScanpathsToJson(const ScanpathSet& set);
ScanpathSet ScanpathsFromJson(std::string_view text,
                              const LoadOptions& opts = {});

void SaveScanpaths(const ScanpathSet& set, const std::filesystem::path& file);
ScanpathSet LoadScanpaths(const std::filesystem::path& file,
                          const LoadOptions& opts = {});

// SHA-256 of the canonical JSON encoding.
std::string ScanpathHash(const ScanpathSet& set);

}  // namespace omnigsr

#endif  // OMNIGSR_SCANPATH_HPP
