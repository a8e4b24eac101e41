#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "omnigsr/io.hpp"
#include "test_support.hpp"

namespace omnigsr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome RunCli(std::vector<std::string> args) {
  args.insert(args.begin(), "omnigsr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::Run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Writes a small ERP pair and a 49-path scanpath file under `dir`.
struct Fixture {
  fs::path dir;
  fs::path ref;
  fs::path dist;
  fs::path paths;

  explicit Fixture(const std::string& name) : dir(testing::TempDir(name)) {
    ref = dir / "ref.png";
    dist = dir / "dist.png";
    paths = dir / "paths.json";
    const Image img = testing::MakeSphereTexture(256, 128, 11);
    WritePng(ref, img);
    WritePng(dist, testing::BlurErp(img, 1.5));
    EXPECT_EQ(RunCli({"scanpath", "--seed", "3", "--out", paths.string()}).code, 0);
  }

  fs::path Convert(const fs::path& image, const std::string& out_name,
                   std::vector<std::string> extra = {}) const {
    std::vector<std::string> args = {"convert", "--image", image.string(), "--paths",
                                     paths.string(), "--out", (dir / out_name).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const Outcome o = RunCli(args);
    EXPECT_EQ(o.code, 0) << o.err;
    return dir / out_name;
  }
};

TEST(CliScanpath, SameSeedSameFile) {
  const fs::path dir = testing::TempDir("cli_scanpath");
  ASSERT_EQ(RunCli({"scanpath", "--seed", "7", "--out", (dir / "a.json").string()}).code, 0);
  ASSERT_EQ(RunCli({"scanpath", "--seed", "7", "--out", (dir / "b.json").string()}).code, 0);
  EXPECT_EQ(ReadFileBytes(dir / "a.json"), ReadFileBytes(dir / "b.json"));
}

TEST(CliScanpath, HeaderCarriesViewingCondition) {
  const fs::path file = testing::TempDir("cli_header") / "p.json";
  ASSERT_EQ(RunCli({"scanpath", "--start", "0.5,0.5", "--duration", "20", "--out",
                    file.string()})
                .code,
            0);
  const json doc = json::parse(ReadTextFile(file));
  EXPECT_EQ(doc["start"], json::array({0.5, 0.5}));
  EXPECT_EQ(doc["duration_s"], 20);
  EXPECT_EQ(doc["paths"].size(), 49u);
  EXPECT_EQ(doc["paths"][0]["points"].size(), 20u);
}

TEST(CliScanpath, ZeroPathsIsRuntimeError) {
  const fs::path file = testing::TempDir("cli_zero") / "p.json";
  const Outcome o = RunCli({"scanpath", "--n", "0", "--out", file.string()});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("n must be ≥ 1"), std::string::npos) << o.err;
}

TEST(CliScanpath, BadFlagsAreUsageErrors) {
  EXPECT_EQ(RunCli({"scanpath", "--bogus", "--out", "x.json"}).code, 2);
  EXPECT_EQ(RunCli({"scanpath"}).code, 2);
  EXPECT_EQ(RunCli({"scanpath", "--model", "teleport", "--out", "x.json"}).code, 2);
  EXPECT_EQ(RunCli({"scanpath", "--start", "half", "--out", "x.json"}).code, 2);
  EXPECT_EQ(RunCli({}).code, 2);
}

TEST(CliConvert, DefaultsGive224Frames) {
  const Fixture f("cli_convert");
  const fs::path out = f.Convert(f.ref, "ref_gsr");
  const json meta = json::parse(ReadTextFile(out / "meta.json"));
  EXPECT_EQ(meta["grid"], json::array({7, 7}));
  EXPECT_EQ(meta["t"], 20);
  EXPECT_EQ(meta["image_sha256"].get<std::string>().size(), 64u);
  EXPECT_EQ(meta["scanpath_sha256"].get<std::string>().size(), 64u);
  const Image frame = ReadPng(out / "frame_0020.png");
  EXPECT_EQ(frame.width(), 224);
  EXPECT_EQ(frame.height(), 224);
}

TEST(CliConvert, DirectoryAndRawDecodeIdentically) {
  const Fixture f("cli_forms");
  const GsrSequence a = ReadGsr(f.Convert(f.ref, "dir_form"));
  const GsrSequence b = ReadGsr(f.Convert(f.ref, "raw_form.gsr"));
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t t = 0; t < a.frames.size(); ++t) EXPECT_EQ(a.frames[t], b.frames[t]);
  EXPECT_EQ(a.meta, b.meta);
}

TEST(CliConvert, ErpSamplingPath) {
  const Fixture f("cli_erp");
  const GsrSequence tan = ReadGsr(f.Convert(f.ref, "tan.gsr"));
  const GsrSequence erp = ReadGsr(f.Convert(f.ref, "erp.gsr", {"--sampling", "erp"}));
  EXPECT_EQ(erp.meta.config.sampling, PatchSampling::kErpCrop);
  EXPECT_EQ(erp.frames[0].width(), 224);
  EXPECT_NE(erp.frames[5], tan.frames[5]);
}

TEST(CliConvert, NonSquarePathCountNamesGrid) {
  const Fixture f("cli_nonsquare");
  const fs::path paths = f.dir / "p48.json";
  ASSERT_EQ(RunCli({"scanpath", "--n", "48", "--out", paths.string()}).code, 0);
  const Outcome o = RunCli({"convert", "--image", f.ref.string(), "--paths", paths.string(),
                            "--out", (f.dir / "x.gsr").string()});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("7x7"), std::string::npos) << o.err;
}

TEST(CliConvert, IsByteStable) {
  const Fixture f("cli_convert_stable");
  const auto a = ReadFileBytes(f.Convert(f.ref, "a.gsr", {"--threads", "1"}));
  const auto b = ReadFileBytes(f.Convert(f.ref, "b.gsr", {"--threads", "4"}));
  EXPECT_EQ(a, b);
}

TEST(CliScore, IdenticalInputsHitTheCap) {
  const Fixture f("cli_score_same");
  const fs::path ref = f.Convert(f.ref, "ref.gsr");
  const Outcome o = RunCli({"score", "--ref", ref.string(), "--dist", ref.string()});
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out, "100.000000\n");
}

TEST(CliScore, ReportShapeAndPooling) {
  const Fixture f("cli_score");
  const fs::path ref = f.Convert(f.ref, "ref.gsr");
  const fs::path dist = f.Convert(f.dist, "dist.gsr");
  const fs::path am_file = f.dir / "am.json";
  const Outcome am = RunCli({"score", "--ref", ref.string(), "--dist", dist.string(),
                             "--pool", "am", "--out", am_file.string()});
  ASSERT_EQ(am.code, 0) << am.err;
  const Outcome gw = RunCli({"score", "--ref", ref.string(), "--dist", dist.string(),
                             "--pool", "gw:1e9"});
  ASSERT_EQ(gw.code, 0) << gw.err;
  EXPECT_NEAR(std::stod(am.out), std::stod(gw.out), 1e-6);

  const json report = json::parse(ReadTextFile(am_file));
  EXPECT_EQ(report["matrix"].size(), 49u);
  EXPECT_EQ(report["matrix"][0].size(), 20u);
  EXPECT_EQ(report["metric"], "psnr");

  const Outcome ssim = RunCli({"score", "--ref", ref.string(), "--dist", dist.string(),
                               "--metric", "ssim", "--mode", "per-frame"});
  ASSERT_EQ(ssim.code, 0) << ssim.err;
  EXPECT_GT(std::stod(ssim.out), 0.0);
  EXPECT_LT(std::stod(ssim.out), 1.0);
}

TEST(CliScore, RefusesMismatchedPairs) {
  const Fixture f("cli_score_mismatch");
  const fs::path ref = f.Convert(f.ref, "ref.gsr");
  const fs::path other_paths = f.dir / "other.json";
  ASSERT_EQ(RunCli({"scanpath", "--seed", "99", "--out", other_paths.string()}).code, 0);
  const fs::path dist = f.dir / "dist.gsr";
  ASSERT_EQ(RunCli({"convert", "--image", f.dist.string(), "--paths", other_paths.string(),
                    "--out", dist.string()})
                .code,
            0);
  const Outcome o = RunCli({"score", "--ref", ref.string(), "--dist", dist.string()});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("scanpath"), std::string::npos) << o.err;
  EXPECT_EQ(RunCli({"score", "--ref", ref.string(), "--dist", dist.string(), "--pool", "max"})
                .code,
            2);
}

// Four references, three blur levels each.
fs::path WriteManifest(const fs::path& dir) {
  std::ofstream csv(dir / "manifest.csv");
  csv << "dist_path,ref_path,reference_id,mos\n";
  for (int r = 0; r < 4; ++r) {
    const Image ref = testing::MakeSphereTexture(128, 64, 100 + r);
    const std::string ref_name = "ref" + std::to_string(r) + ".png";
    WritePng(dir / ref_name, ref);
    for (int l = 1; l <= 3; ++l) {
      const std::string name = "d" + std::to_string(r) + "_" + std::to_string(l) + ".png";
      WritePng(dir / name, testing::BlurErp(ref, 0.7 * l));
      csv << name << "," << ref_name << ",ref" << r << "," << (5 - l) << "\n";
    }
  }
  return dir / "manifest.csv";
}

TEST(CliEval, RepeatsCacheAndBaselines) {
  const fs::path dir = testing::TempDir("cli_eval");
  const fs::path manifest = WriteManifest(dir);
  const std::vector<std::string> common = {"eval", "--manifest", manifest.string(),
                                           "--repeats", "5", "--patch", "8", "--n", "9",
                                           "--cache", (dir / "cache").string()};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = common;
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
  };
  const Outcome first = RunCli(with({"--out", (dir / "r1.json").string()}));
  ASSERT_EQ(first.code, 0) << first.err;
  const json r1 = json::parse(ReadTextFile(dir / "r1.json"));
  EXPECT_EQ(r1["repeats"].size(), 5u);
  EXPECT_FALSE(fs::is_empty(dir / "cache"));

  const Outcome second = RunCli(with({"--threads", "4", "--out", (dir / "r2.json").string()}));
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(ReadFileBytes(dir / "r1.json"), ReadFileBytes(dir / "r2.json"));

  const Outcome ws = RunCli(with({"--metric", "ws-psnr", "--out", (dir / "ws.json").string()}));
  ASSERT_EQ(ws.code, 0) << ws.err;
  const json wsj = json::parse(ReadTextFile(dir / "ws.json"));
  EXPECT_FALSE(wsj["config"].contains("scanpath_seed"));
  EXPECT_FALSE(wsj["config"].contains("grid"));
}

TEST(CliEval, MissingFilesListedUpFront) {
  const fs::path dir = testing::TempDir("cli_eval_missing");
  {
    std::ofstream csv(dir / "m.csv");
    csv << "dist_path,ref_path,reference_id,mos\n"
           "a.png,b.png,r0,1\nc.png,b.png,r0,2\n";
  }
  const Outcome o = RunCli({"eval", "--manifest", (dir / "m.csv").string(), "--out",
                            (dir / "r.json").string()});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("a.png"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("c.png"), std::string::npos) << o.err;
  EXPECT_FALSE(fs::exists(dir / "r.json"));
}

}  // namespace
}  // namespace omnigsr
