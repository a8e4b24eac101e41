#include "omnigsr/io.hpp"

#include <gtest/gtest.h>

#include "omnigsr/util.hpp"
#include "test_support.hpp"

namespace omnigsr {
namespace {

GsrSequence SmallSequence(std::uint64_t seed) {
  GeneratorConfig gen;
  gen.seed = seed;
  GsrConfig cfg;
  cfg.n = 9;
  cfg.patch_h = 12;
  cfg.patch_w = 16;
  const EquirectImage img(testing::MakeSphereTexture(128, 64, seed));
  return Convert(img, Generate({{0.5, 0.5}, 4}, 9, gen), cfg);
}

TEST(Png, RoundTrip) {
  const auto dir = testing::TempDir("png");
  const Image img = testing::RandomImage(31, 17, 3);
  WritePng(dir / "a.png", img);
  EXPECT_EQ(ReadPng(dir / "a.png"), img);
  EXPECT_THROW(ReadPng(dir / "missing.png"), std::runtime_error);
}

TEST(Gsr1, HeaderLayout) {
  const GsrSequence seq = SmallSequence(1);
  const auto bytes = EncodeGsr1(seq.frames);
  ASSERT_EQ(bytes.size(), 20u + 4u * 36 * 48 * 3);
  EXPECT_EQ(bytes[0], 'G');
  EXPECT_EQ(bytes[3], '1');
  EXPECT_EQ(bytes[4], 4);   // T
  EXPECT_EQ(bytes[8], 36);  // height
  EXPECT_EQ(bytes[12], 48); // width
  EXPECT_EQ(bytes[16], 3);
  EXPECT_EQ(bytes[17], 0);
  EXPECT_EQ(bytes[20], seq.frames[0].pixels()[0]);
}

TEST(Gsr1, RejectsCorruptInput) {
  const auto bytes = EncodeGsr1(SmallSequence(2).frames);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(DecodeGsr1(truncated), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(DecodeGsr1(bad_magic), FormatError);
}

TEST(Gsr1, WriteReadWriteIsByteIdentical) {
  const auto dir = testing::TempDir("gsr1");
  const GsrSequence seq = SmallSequence(3);
  WriteGsr(dir / "a.gsr", seq);
  const GsrSequence back = ReadGsr(dir / "a.gsr");
  WriteGsr(dir / "b.gsr", back);
  EXPECT_EQ(ReadFileBytes(dir / "a.gsr"), ReadFileBytes(dir / "b.gsr"));
  EXPECT_EQ(ReadTextFile(RawMetaPath(dir / "a.gsr")), ReadTextFile(RawMetaPath(dir / "b.gsr")));
  EXPECT_EQ(back.meta, seq.meta);
}

TEST(GsrContainer, DirectoryAndRawAgree) {
  const auto dir = testing::TempDir("container");
  const GsrSequence seq = SmallSequence(4);
  WriteGsr(dir / "seq", seq);
  WriteGsr(dir / "seq.gsr", seq);
  EXPECT_TRUE(std::filesystem::exists(dir / "seq" / "frame_0001.png"));
  EXPECT_TRUE(std::filesystem::exists(dir / "seq" / "frame_0004.png"));
  const GsrSequence a = ReadGsr(dir / "seq");
  const GsrSequence b = ReadGsr(dir / "seq.gsr");
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t t = 0; t < a.frames.size(); ++t) EXPECT_EQ(a.frames[t], b.frames[t]);
  EXPECT_EQ(a.meta, seq.meta);
}

TEST(GsrContainer, ValidatesFramesAgainstMeta) {
  const auto dir = testing::TempDir("container_bad");
  const GsrSequence seq = SmallSequence(5);
  WriteGsr(dir / "seq", seq);
  std::filesystem::remove(dir / "seq" / "frame_0004.png");
  EXPECT_THROW(ReadGsr(dir / "seq"), FormatError);

  WriteGsr(dir / "seq2", seq);
  WritePng(dir / "seq2" / "frame_0002.png", testing::RandomImage(10, 10, 1));
  EXPECT_THROW(ReadGsr(dir / "seq2"), FormatError);

  WriteGsr(dir / "x.gsr", seq);
  std::filesystem::remove(RawMetaPath(dir / "x.gsr"));
  EXPECT_THROW(ReadGsr(dir / "x.gsr"), FormatError);
}

TEST(Meta, JsonFields) {
  const GsrSequence seq = SmallSequence(6);
  const std::string text = MetaToJson(seq.meta, seq.length());
  for (const char* key : {"\"grid\"", "\"patch\"", "\"pitch\"", "\"sampling\"",
                          "\"image_sha256\"", "\"scanpath_sha256\"", "\"t\"", "\"version\""}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
  int t = 0;
  const GsrMetadata back = MetaFromJson(text, &t);
  EXPECT_EQ(t, 4);
  EXPECT_EQ(back, seq.meta);
  EXPECT_THROW(MetaFromJson("{}", &t), FormatError);
}

TEST(Report, CanonicalJson) {
  QualityReport r;
  r.matrix = ScoreMatrix(2, 3);
  r.matrix.values = {1.0 / 3, 2, 3, 4, 5, 6};
  r.pooling = PoolingMethod::GW();
  r.pooled = 3.5;
  const std::string text = ReportToJson(r);
  EXPECT_NE(text.find("0.333333333"), std::string::npos);
  EXPECT_EQ(text.find("0.3333333333"), std::string::npos);
  EXPECT_LT(text.find("\"matrix\""), text.find("\"metric\""));
  EXPECT_LT(text.find("\"metric\""), text.find("\"pooled\""));
  EXPECT_NE(text.find("\"sigma\": 1.5"), std::string::npos);
  EXPECT_EQ(text, ReportToJson(r));
}

TEST(Util, Sha256KnownVector) {
  EXPECT_EQ(Sha256Hex(std::string_view("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Util, RoundG9) {
  EXPECT_EQ(FormatG9(1.0 / 3), "0.333333333");
  EXPECT_EQ(RoundG9(RoundG9(0.123456789123)), RoundG9(0.123456789123));
}

}  // namespace
}  // namespace omnigsr
