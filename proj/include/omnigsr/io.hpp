// On-disk formats: PNG images, GSR containers (PNG frame directory or the
// single-file GSR1 raw form), and canonical JSON encodings of GSR metadata
// and quality reports.
//
// GSR1 layout (little endian):
//   'G' 'S' 'R' '1' | u32 T | u32 height | u32 width | u8 channels (3) |
//   u8 pad x3 | T * height * width * 3 bytes of RGB8, frames in time order
//
// A raw file `X.gsr` is accompanied by `X.gsr.meta.json` holding the same
// metadata as meta.json in the directory form.

#ifndef OMNIGSR_IO_HPP
#define OMNIGSR_IO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "omnigsr/fr_metrics.hpp"
#include "omnigsr/gsr_convert.hpp"
#include "omnigsr/sphere_geom.hpp"

namespace omnigsr {

namespace fs = std::filesystem;

Image ReadPng(const fs::path& file);
void WritePng(const fs::path& file, const Image& img);

std::vector<std::uint8_t> ReadFileBytes(const fs::path& file);
void WriteFileBytes(const fs::path& file, std::span<const std::uint8_t> bytes);
void WriteTextFile(const fs::path& file, const std::string& text);
std::string ReadTextFile(const fs::path& file);

std::string MetaToJson(const GsrMetadata& meta, int t_len);
// Returns the metadata and stores the declared frame count in `t_len`.
GsrMetadata MetaFromJson(const std::string& text, int* t_len);

std::vector<std::uint8_t> EncodeGsr1(std::span<const Image> frames);
std::vector<Image> DecodeGsr1(std::span<const std::uint8_t> bytes);

// True when `path` names the single-file raw form (".gsr" suffix).
bool IsRawGsrPath(const fs::path& path);
fs::path RawMetaPath(const fs::path& raw_file);

void WriteGsrDirectory(const fs::path& dir, const GsrSequence& seq);
void WriteGsrRaw(const fs::path& file, const GsrSequence& seq);
// Directory or raw form, chosen by IsRawGsrPath.
void WriteGsr(const fs::path& path, const GsrSequence& seq);
// Validates frame count and frame dimensions against the metadata.
GsrSequence ReadGsr(const fs::path& path);

std::string ReportToJson(const QualityReport& report);

}  // namespace omnigsr

#endif  // OMNIGSR_IO_HPP
