#include "omnigsr/io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "omnigsr/scanpath.hpp"
#include "omnigsr/util.hpp"

namespace omnigsr {
namespace {

using nlohmann::json;

constexpr std::uint8_t kGsr1Magic[4] = {'G', 'S', 'R', '1'};
constexpr std::size_t kGsr1HeaderSize = 4 + 4 * 3 + 4;

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t GetU32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

std::string FrameName(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04d.png", index);
  return buf;
}

json Matrix(const ScoreMatrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols; ++c) row.push_back(RoundG9(m.at(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

void ValidateFrames(const GsrSequence& seq, int declared_t, const fs::path& where) {
  if (seq.length() != declared_t) {
    throw FormatError(where.string() + ": expected " + std::to_string(declared_t) +
                      " frames, found " + std::to_string(seq.length()));
  }
  const GsrConfig& cfg = seq.meta.config;
  for (const Image& f : seq.frames) {
    if (f.width() != cfg.frame_width() || f.height() != cfg.frame_height()) {
      throw FormatError(where.string() + ": frame is " + std::to_string(f.width()) +
                        "x" + std::to_string(f.height()) + ", metadata implies " +
                        std::to_string(cfg.frame_width()) + "x" +
                        std::to_string(cfg.frame_height()));
    }
  }
}

}  // namespace

Image ReadPng(const fs::path& file) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, file.c_str())) {
    throw std::runtime_error("cannot read PNG " + file.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw std::runtime_error("cannot decode PNG " + file.string() + ": " + msg);
  }
  return Image(static_cast<int>(image.width), static_cast<int>(image.height),
               std::move(px));
}

void WritePng(const fs::path& file, const Image& img) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, file.c_str(), 0, img.pixels().data(), 0,
                               nullptr)) {
    throw std::runtime_error("cannot write PNG " + file.string() + ": " + image.message);
  }
}

std::vector<std::uint8_t> ReadFileBytes(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const fs::path& file, std::span<const std::uint8_t> bytes) {
  std::ofstream out(file, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

void WriteTextFile(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

std::string ReadTextFile(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string MetaToJson(const GsrMetadata& meta, int t_len) {
  const GsrConfig& cfg = meta.config;
  json doc;
  doc["version"] = 1;
  doc["t"] = t_len;
  doc["grid"] = {cfg.grid(), cfg.grid()};
  doc["patch"] = {cfg.patch_h, cfg.patch_w};
  if (cfg.pitch.source_matched()) {
    doc["pitch"] = "auto";
  } else {
    doc["pitch"] = RoundG9(cfg.pitch.fov_deg);
  }
  doc["sampling"] = std::string(SamplingName(cfg.sampling));
  doc["image_sha256"] = meta.image_sha256;
  doc["scanpath_sha256"] = meta.scanpath_sha256;
  doc["software"] = meta.software;
  return doc.dump(2) + "\n";
}

GsrMetadata MetaFromJson(const std::string& text, int* t_len) {
  GsrMetadata meta;
  try {
    const json doc = json::parse(text);
    if (doc.at("version") != 1) throw FormatError("unsupported meta.json version");
    const auto grid = doc.at("grid").get<std::vector<int>>();
    const auto patch = doc.at("patch").get<std::vector<int>>();
    if (grid.size() != 2 || patch.size() != 2 || grid[0] != grid[1]) {
      throw FormatError("meta.json grid/patch must be square [g,g] and [h,w]");
    }
    meta.config.n = grid[0] * grid[1];
    meta.config.patch_h = patch[0];
    meta.config.patch_w = patch[1];
    const json& pitch = doc.at("pitch");
    meta.config.pitch = pitch.is_string() ? Pitch::SourceMatched()
                                          : Pitch::FixedFov(pitch.get<double>());
    meta.config.sampling = ParseSampling(doc.at("sampling").get<std::string>());
    meta.image_sha256 = doc.at("image_sha256").get<std::string>();
    meta.scanpath_sha256 = doc.at("scanpath_sha256").get<std::string>();
    meta.software = doc.value("software", std::string());
    if (t_len) *t_len = doc.at("t").get<int>();
    meta.config.Validate();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed meta.json: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid meta.json: ") + e.what());
  }
  return meta;
}

std::vector<std::uint8_t> EncodeGsr1(std::span<const Image> frames) {
  if (frames.empty()) throw std::invalid_argument("GSR1 needs at least one frame");
  const int w = frames.front().width();
  const int h = frames.front().height();
  std::vector<std::uint8_t> out(kGsr1Magic, kGsr1Magic + 4);
  PutU32(out, static_cast<std::uint32_t>(frames.size()));
  PutU32(out, static_cast<std::uint32_t>(h));
  PutU32(out, static_cast<std::uint32_t>(w));
  out.push_back(3);
  out.insert(out.end(), 3, 0);
  out.reserve(out.size() + frames.size() * static_cast<std::size_t>(w) * h * 3);
  for (const Image& f : frames) {
    if (f.width() != w || f.height() != h) {
      throw std::invalid_argument("GSR1 frames must share dimensions");
    }
    out.insert(out.end(), f.pixels().begin(), f.pixels().end());
  }
  return out;
}

std::vector<Image> DecodeGsr1(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kGsr1HeaderSize || std::memcmp(bytes.data(), kGsr1Magic, 4) != 0) {
    throw FormatError("not a GSR1 file");
  }
  const std::uint32_t t = GetU32(bytes, 4);
  const std::uint32_t h = GetU32(bytes, 8);
  const std::uint32_t w = GetU32(bytes, 12);
  if (bytes[16] != 3) throw FormatError("GSR1 channel count must be 3");
  if (t == 0 || h == 0 || w == 0) throw FormatError("GSR1 header has a zero dimension");
  const std::size_t frame_bytes = static_cast<std::size_t>(h) * w * 3;
  if (bytes.size() != kGsr1HeaderSize + frame_bytes * t) {
    throw FormatError("GSR1 payload size does not match its header");
  }
  std::vector<Image> frames;
  frames.reserve(t);
  for (std::uint32_t i = 0; i < t; ++i) {
    const auto* begin = bytes.data() + kGsr1HeaderSize + frame_bytes * i;
    frames.emplace_back(static_cast<int>(w), static_cast<int>(h),
                        std::vector<std::uint8_t>(begin, begin + frame_bytes));
  }
  return frames;
}

bool IsRawGsrPath(const fs::path& path) { return path.extension() == ".gsr"; }

fs::path RawMetaPath(const fs::path& raw_file) {
  fs::path p = raw_file;
  p += ".meta.json";
  return p;
}

void WriteGsrDirectory(const fs::path& dir, const GsrSequence& seq) {
  fs::create_directories(dir);
  for (int t = 0; t < seq.length(); ++t) {
    WritePng(dir / FrameName(t + 1), seq.frames[t]);
  }
  WriteTextFile(dir / "meta.json", MetaToJson(seq.meta, seq.length()));
}

void WriteGsrRaw(const fs::path& file, const GsrSequence& seq) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  WriteFileBytes(file, EncodeGsr1(seq.frames));
  WriteTextFile(RawMetaPath(file), MetaToJson(seq.meta, seq.length()));
}

void WriteGsr(const fs::path& path, const GsrSequence& seq) {
  if (IsRawGsrPath(path)) {
    WriteGsrRaw(path, seq);
  } else {
    WriteGsrDirectory(path, seq);
  }
}

GsrSequence ReadGsr(const fs::path& path) {
  GsrSequence seq;
  int t_len = 0;
  if (IsRawGsrPath(path)) {
    const fs::path meta = RawMetaPath(path);
    if (!fs::exists(meta)) {
      throw FormatError(path.string() + ": missing metadata sidecar " + meta.string());
    }
    seq.meta = MetaFromJson(ReadTextFile(meta), &t_len);
    seq.frames = DecodeGsr1(ReadFileBytes(path));
  } else {
    seq.meta = MetaFromJson(ReadTextFile(path / "meta.json"), &t_len);
    for (int t = 1; t <= t_len; ++t) {
      const fs::path frame = path / FrameName(t);
      if (!fs::exists(frame)) throw FormatError("missing frame " + frame.string());
      seq.frames.push_back(ReadPng(frame));
    }
    if (fs::exists(path / FrameName(t_len + 1))) {
      throw FormatError(path.string() + ": more frames than meta.json declares");
    }
  }
  ValidateFrames(seq, t_len, path);
  return seq;
}

std::string ReportToJson(const QualityReport& report) {
  json doc;
  doc["metric"] = std::string(MetricName(report.metric));
  doc["mode"] = std::string(ModeName(report.mode));
  json pooling;
  pooling["kind"] = report.pooling.kind == PoolingMethod::Kind::kAM ? "am" : "gw";
  if (report.pooling.kind == PoolingMethod::Kind::kGW) {
    pooling["sigma"] = RoundG9(report.pooling.sigma.value_or(report.matrix.cols / 2.0));
  }
  doc["pooling"] = std::move(pooling);
  doc["pooled"] = RoundG9(report.pooled);
  doc["matrix"] = Matrix(report.matrix);
  if (report.mse) doc["mse"] = Matrix(*report.mse);
  return doc.dump(1) + "\n";
}

}  // namespace omnigsr
