#include "omnigsr/scanpath.hpp"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "omnigsr/io.hpp"
#include "test_support.hpp"

namespace omnigsr {
namespace {

GeneratorConfig Markov(std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  return cfg;
}

TEST(Scanpath, SingleInstantIsJustTheStart) {
  const ViewingCondition cond{{0.3, 0.8}, 1};
  for (auto model : {GeneratorModel::kMarkovWalk, GeneratorModel::kUniformRandom,
                     GeneratorModel::kFixedCenter}) {
    GeneratorConfig cfg;
    cfg.model = model;
    const ScanpathSet set = Generate(cond, 5, cfg);
    ASSERT_EQ(set.count(), 5u);
    for (const Scanpath& p : set.paths) {
      ASSERT_EQ(p.points.size(), 1u);
      EXPECT_EQ(p.points[0], cond.start);
    }
  }
}

TEST(Scanpath, FixedCenterNeverMoves) {
  GeneratorConfig cfg;
  cfg.model = GeneratorModel::kFixedCenter;
  const ScanpathSet set = Generate({{0.5, 0.5}, 20}, 3, cfg);
  for (const Scanpath& p : set.paths) {
    ASSERT_EQ(p.points.size(), 20u);
    for (const NormPoint& q : p.points) EXPECT_EQ(q, (NormPoint{0.5, 0.5}));
  }
}

TEST(Scanpath, RejectsZeroPaths) {
  EXPECT_THROW(Generate(kDefaultViewingCondition, 0, Markov(1)), DomainError);
}

TEST(Scanpath, RejectsBadConfig) {
  GeneratorConfig cfg;
  cfg.momentum = 1.0;
  EXPECT_THROW(Generate(kDefaultViewingCondition, 2, cfg), DomainError);
  cfg = GeneratorConfig{};
  cfg.step_std_deg = NAN;
  EXPECT_THROW(Generate(kDefaultViewingCondition, 2, cfg), DomainError);
  EXPECT_THROW(Generate({{0.5, 0.5}, 0}, 2, GeneratorConfig{}), DomainError);
}

TEST(Scanpath, MarkovIsDeterministic) {
  const ScanpathSet a = Generate(kDefaultViewingCondition, 49, Markov(42));
  const ScanpathSet b = Generate(kDefaultViewingCondition, 49, Markov(42));
  EXPECT_EQ(a, b);
  EXPECT_EQ(ScanpathsToJson(a), ScanpathsToJson(b));
  const ScanpathSet c = Generate(kDefaultViewingCondition, 49, Markov(43));
  EXPECT_NE(ScanpathsToJson(a), ScanpathsToJson(c));
}

TEST(Scanpath, ThreadCountDoesNotChangeOutput) {
  const std::string seq = ScanpathsToJson(Generate(kDefaultViewingCondition, 64, Markov(9), 1));
  for (int threads : {2, 4, 16}) {
    EXPECT_EQ(ScanpathsToJson(Generate(kDefaultViewingCondition, 64, Markov(9), threads)), seq);
  }
}

TEST(Scanpath, AdaptsToEveryCondition) {
  for (double y : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    for (double x : {0.0, 0.25, 0.999, 1.0}) {
      for (int t : {1, 2, 7, 30}) {
        const ViewingCondition cond{{y, x}, t};
        const ScanpathSet set = Generate(cond, 4, Markov(7));
        for (const Scanpath& p : set.paths) {
          ASSERT_EQ(static_cast<int>(p.points.size()), t);
          EXPECT_EQ(p.points[0], cond.start);
          for (const NormPoint& q : p.points) EXPECT_TRUE(q.InRange());
        }
      }
    }
  }
}

TEST(Scanpath, PathsAreDistinct) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ScanpathSet set = Generate(kDefaultViewingCondition, 2, Markov(seed));
    EXPECT_NE(set.paths[0], set.paths[1]) << "seed " << seed;
  }
}

TEST(Scanpath, MeanStepMatchesConfiguredSpeed) {
  const ScanpathSet set = Generate(kDefaultViewingCondition, 10000, Markov(2024));
  double total = 0.0;
  long steps = 0;
  for (const Scanpath& p : set.paths) {
    for (std::size_t t = 1; t < p.points.size(); ++t) {
      total += GreatCircleDistance(NormToSph(p.points[t - 1]), NormToSph(p.points[t]));
      ++steps;
    }
  }
  const double mean_deg = total / steps * 180.0 / kPi;
  EXPECT_NEAR(mean_deg, 20.0, 0.15 * 20.0);
}

double MeanAbsLat(const ScanpathSet& set) {
  double total = 0.0;
  long count = 0;
  for (const Scanpath& p : set.paths) {
    for (const NormPoint& q : p.points) {
      total += std::abs(NormToSph(q).lat());
      ++count;
    }
  }
  return total / count;
}

TEST(Scanpath, EquatorPullReducesLatitude) {
  const ViewingCondition cond{{0.5, 0.5}, 50};
  GeneratorConfig pulled = Markov(77);
  GeneratorConfig free = Markov(77);
  free.equator_pull = 0.0;
  const double with_pull = MeanAbsLat(Generate(cond, 10000, pulled));
  const double baseline = MeanAbsLat(Generate(cond, 10000, free));
  EXPECT_LT(with_pull, baseline);
}

TEST(Scanpath, UniformRandomIsAreaUniform) {
  GeneratorConfig cfg;
  cfg.model = GeneratorModel::kUniformRandom;
  cfg.seed = 5;
  const ScanpathSet set = Generate({{0.5, 0.5}, 101}, 400, cfg);
  // E[sin(lat)] = 0 and E[sin^2(lat)] = 1/3 for an area-uniform sphere.
  double s1 = 0.0, s2 = 0.0;
  long n = 0;
  for (const Scanpath& p : set.paths) {
    for (std::size_t t = 1; t < p.points.size(); ++t) {
      const double z = std::sin(NormToSph(p.points[t]).lat());
      s1 += z;
      s2 += z * z;
      ++n;
    }
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0 / 3.0, 0.01);
}

TEST(Scanpath, SaveLoadRoundTrip) {
  const auto dir = testing::TempDir("scanpath_roundtrip");
  for (auto model : {GeneratorModel::kMarkovWalk, GeneratorModel::kUniformRandom,
                     GeneratorModel::kFixedCenter}) {
    GeneratorConfig cfg;
    cfg.model = model;
    cfg.seed = 0xFFFFFFFFFFFFFFF1ULL;
    const ScanpathSet set = Generate({{0.2, 0.7}, 12}, 9, cfg);
    const auto file = dir / "paths.json";
    SaveScanpaths(set, file);
    const ScanpathSet back = LoadScanpaths(file);
    EXPECT_EQ(back, set);
    const std::string first = ReadTextFile(file);
    SaveScanpaths(back, file);
    EXPECT_EQ(ReadTextFile(file), first);
  }
}

TEST(Scanpath, LoadsSmallFile) {
  const ScanpathSet set = ScanpathsFromJson(
      R"({"version":1,"paths":[{"points":[[0.5,0.5],[0.4,0.6],[0.3,0.7]]},
                               {"points":[[0.5,0.5],[0.5,0.1],[0.6,0.0]]}]})");
  EXPECT_EQ(set.count(), 2u);
  EXPECT_EQ(set.length(), 3);
  EXPECT_EQ(set.model, GeneratorModel::kExternal);
  EXPECT_EQ(set.condition.start, (NormPoint{0.5, 0.5}));
}

TEST(Scanpath, LoaderErrorsNameTheOffendingPoint) {
  try {
    ScanpathsFromJson(R"({"paths":[{"points":[[0.5,0.5]]},{"points":[[0.1,1.2]]}]})");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("point out of range"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("path 1 point 0"), std::string::npos);
  }
  EXPECT_THROW(ScanpathsFromJson("{not json"), FormatError);
  EXPECT_THROW(ScanpathsFromJson(R"({"paths":[{"points":[[0.5,0.5]]},{"points":[[0.5,0.5],[0.5,0.5]]}]})"),
               FormatError);
  EXPECT_THROW(ScanpathsFromJson(R"({"duration_s":3,"paths":[{"points":[[0.5,0.5]]}]})"),
               FormatError);
}

TEST(Scanpath, LoaderAxisOptions) {
  const char* text = R"({"paths":[{"points":[[0.2,0.1],[0.9,0.75]]}]})";
  LoadOptions flip;
  flip.flip_y = true;
  flip.flip_x = true;
  const ScanpathSet f = ScanpathsFromJson(text, flip);
  EXPECT_DOUBLE_EQ(f.paths[0].points[0].y, 0.8);
  EXPECT_DOUBLE_EQ(f.paths[0].points[0].x, 0.9);

  LoadOptions ll;
  ll.lonlat = true;
  const ScanpathSet g = ScanpathsFromJson(R"({"paths":[{"points":[[45,90],[-90,-180]]}]})", ll);
  EXPECT_DOUBLE_EQ(g.paths[0].points[0].y, 0.25);
  EXPECT_DOUBLE_EQ(g.paths[0].points[0].x, 0.75);
  EXPECT_DOUBLE_EQ(g.paths[0].points[1].y, 1.0);
  EXPECT_DOUBLE_EQ(g.paths[0].points[1].x, 0.0);
}

}  // namespace
}  // namespace omnigsr
