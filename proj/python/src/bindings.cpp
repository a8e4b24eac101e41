#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "omnigsr/eval_harness.hpp"
#include "omnigsr/fr_metrics.hpp"
#include "omnigsr/gsr_convert.hpp"
#include "omnigsr/io.hpp"
#include "omnigsr/scanpath.hpp"

namespace py = pybind11;

namespace omnigsr {
namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image ToImage(const U8Array& arr) {
  if (arr.ndim() != 3 || arr.shape(2) != 3) {
    throw py::value_error("expected an HxWx3 uint8 array");
  }
  const int h = static_cast<int>(arr.shape(0));
  const int w = static_cast<int>(arr.shape(1));
  std::vector<std::uint8_t> px(arr.data(), arr.data() + arr.size());
  return Image(w, h, std::move(px));
}

U8Array FromImage(const Image& img) {
  U8Array out({img.height(), img.width(), 3});
  std::memcpy(out.mutable_data(), img.pixels().data(), img.pixels().size());
  return out;
}

U8Array FramesArray(const std::vector<Image>& frames) {
  if (frames.empty()) return U8Array(std::vector<py::ssize_t>{0, 0, 0, 3});
  const Image& f0 = frames.front();
  U8Array out({static_cast<int>(frames.size()), f0.height(), f0.width(), 3});
  std::uint8_t* dst = out.mutable_data();
  for (const Image& f : frames) {
    std::memcpy(dst, f.pixels().data(), f.pixels().size());
    dst += f.pixels().size();
  }
  return out;
}

F64Array PointsArray(const ScanpathSet& set) {
  const int n = static_cast<int>(set.count());
  const int t = set.length();
  F64Array out({n, t, 2});
  double* dst = out.mutable_data();
  for (const Scanpath& p : set.paths) {
    for (const NormPoint& q : p.points) {
      *dst++ = q.y;
      *dst++ = q.x;
    }
  }
  return out;
}

ScanpathSet FromPoints(const F64Array& arr) {
  if (arr.ndim() != 3 || arr.shape(2) != 2) {
    throw py::value_error("expected an (N, T, 2) array of (y, x) points");
  }
  ScanpathSet set;
  set.model = GeneratorModel::kExternal;
  const double* src = arr.data();
  for (py::ssize_t n = 0; n < arr.shape(0); ++n) {
    Scanpath p;
    for (py::ssize_t t = 0; t < arr.shape(1); ++t, src += 2) {
      const NormPoint q{src[0], src[1]};
      if (!q.InRange()) {
        throw py::value_error("path " + std::to_string(n) + " point " + std::to_string(t) +
                              ": point out of range");
      }
      p.points.push_back(q);
    }
    set.paths.push_back(std::move(p));
  }
  if (!set.paths.empty() && !set.paths[0].points.empty()) {
    set.condition.start = set.paths[0].points[0];
    set.condition.duration_s = set.length();
  }
  return set;
}

GsrConfig MakeConfig(int n, const py::object& patch, std::optional<double> fov_deg,
                     const std::string& sampling) {
  GsrConfig cfg;
  cfg.n = n;
  if (py::isinstance<py::int_>(patch)) {
    cfg.patch_h = cfg.patch_w = patch.cast<int>();
  } else {
    const auto hw = patch.cast<std::pair<int, int>>();
    cfg.patch_h = hw.first;
    cfg.patch_w = hw.second;
  }
  if (fov_deg) cfg.pitch = Pitch::FixedFov(*fov_deg);
  cfg.sampling = ParseSampling(sampling);
  return cfg;
}

py::dict MetaDict(const GsrSequence& seq) {
  return py::module_::import("json").attr("loads")(MetaToJson(seq.meta, seq.length()));
}

}  // namespace
}  // namespace omnigsr

PYBIND11_MODULE(_omnigsr, m) {
  using namespace omnigsr;
  m.doc() = "Native core of the omnigsr package";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<PairingError>(m, "PairingError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<ScanpathSet>(m, "ScanpathSet")
      .def_property_readonly("points", &PointsArray, "(N, T, 2) array of (y, x)")
      .def_property_readonly("count", [](const ScanpathSet& s) { return s.count(); })
      .def_property_readonly("length", &ScanpathSet::length)
      .def_property_readonly("model", [](const ScanpathSet& s) { return std::string(ModelName(s.model)); })
      .def_property_readonly("sha256", &ScanpathHash)
      .def("to_json", &ScanpathsToJson)
      .def("save", [](const ScanpathSet& s, const std::filesystem::path& f) { SaveScanpaths(s, f); })
      .def("__eq__", [](const ScanpathSet& a, const ScanpathSet& b) { return a == b; })
      .def("__len__", [](const ScanpathSet& s) { return s.count(); });

  m.def(
      "generate_scanpaths",
      [](int n, std::pair<double, double> start, int duration, std::uint64_t seed,
         const std::string& model, double step_mean, double step_std, double momentum,
         double equator_pull, int threads) {
        ViewingCondition cond{{start.first, start.second}, duration};
        GeneratorConfig gen;
        gen.model = ParseModel(model);
        gen.seed = seed;
        gen.step_mean_deg_per_s = step_mean;
        gen.step_std_deg = step_std;
        gen.momentum = momentum;
        gen.equator_pull = equator_pull;
        py::gil_scoped_release release;
        return Generate(cond, n, gen, threads);
      },
      py::arg("n") = 49, py::arg("start") = std::pair<double, double>{0.5, 0.5},
      py::arg("duration") = 20, py::arg("seed") = 0, py::arg("model") = "markov",
      py::arg("step_mean") = 20.0, py::arg("step_std") = 10.0, py::arg("momentum") = 0.6,
      py::arg("equator_pull") = 0.15, py::arg("threads") = 1);

  m.def("scanpaths_from_points", &FromPoints, py::arg("points"));
  m.def(
      "load_scanpaths",
      [](const std::filesystem::path& f, bool flip_y, bool flip_x, bool lonlat) {
        return LoadScanpaths(f, {flip_y, flip_x, lonlat});
      },
      py::arg("path"), py::arg("flip_y") = false, py::arg("flip_x") = false,
      py::arg("lonlat") = false);

  py::class_<GsrSequence>(m, "GsrSequence")
      .def_property_readonly("frames", [](const GsrSequence& s) { return FramesArray(s.frames); },
                             "(T, H, W, 3) uint8 array")
      .def_property_readonly("meta", &MetaDict)
      .def_property_readonly("length", &GsrSequence::length)
      .def("patch", [](const GsrSequence& s, int n, int t) { return FromImage(s.Patch(n, t)); },
           py::arg("n"), py::arg("t"))
      .def("save", [](const GsrSequence& s, const std::filesystem::path& p) { WriteGsr(p, s); });

  m.def(
      "convert",
      [](const U8Array& image, const ScanpathSet& paths, const py::object& patch,
         std::optional<double> fov_deg, const std::string& sampling, int threads) {
        const GsrConfig cfg =
            MakeConfig(static_cast<int>(paths.count()), patch, fov_deg, sampling);
        const EquirectImage img(ToImage(image));
        py::gil_scoped_release release;
        return Convert(img, paths, cfg, threads);
      },
      py::arg("image"), py::arg("paths"), py::arg("patch") = 32, py::arg("fov_deg") = py::none(),
      py::arg("sampling") = "tangent", py::arg("threads") = 1);

  m.def("read_gsr", [](const std::filesystem::path& p) { return ReadGsr(p); }, py::arg("path"));
  m.def("read_png", [](const std::filesystem::path& p) { return FromImage(ReadPng(p)); },
        py::arg("path"));
  m.def("write_png",
        [](const std::filesystem::path& p, const U8Array& img) { WritePng(p, ToImage(img)); },
        py::arg("path"), py::arg("image"));

  m.def(
      "score",
      [](const GsrSequence& ref, const GsrSequence& dist, const std::string& metric,
         const std::string& mode, const std::string& pool, int threads) {
        const Metric mt = ParseMetric(metric);
        const ScoreMode md = ParseMode(mode);
        const PoolingMethod pm = ParsePooling(pool);
        QualityReport rep;
        {
          py::gil_scoped_release release;
          rep = ScoreSequences(ref, dist, mt, md, pm, threads);
        }
        F64Array matrix({rep.matrix.rows, rep.matrix.cols});
        std::memcpy(matrix.mutable_data(), rep.matrix.values.data(),
                    rep.matrix.values.size() * sizeof(double));
        py::dict out;
        out["pooled"] = rep.pooled;
        out["matrix"] = matrix;
        return out;
      },
      py::arg("ref"), py::arg("dist"), py::arg("metric") = "psnr", py::arg("mode") = "per-patch",
      py::arg("pool") = "am", py::arg("threads") = 1);

  m.def("psnr", [](const U8Array& a, const U8Array& b) { return Psnr(ToImage(a), ToImage(b)); });
  m.def("ssim", [](const U8Array& a, const U8Array& b) { return Ssim(ToImage(a), ToImage(b)); });
  m.def("ws_psnr",
        [](const U8Array& ref, const U8Array& dist) { return WsPsnr(ToImage(ref), ToImage(dist)); });
  m.def(
      "s_psnr",
      [](const U8Array& ref, const U8Array& dist, int points) {
        return SPsnr(ToImage(ref), ToImage(dist), points);
      },
      py::arg("ref"), py::arg("dist"), py::arg("points") = kDefaultSphericalPoints);

  m.def(
      "pool",
      [](const F64Array& scores, const std::string& method) {
        if (scores.ndim() != 2) throw py::value_error("expected a 2-D (N, T) score array");
        ScoreMatrix mat(static_cast<int>(scores.shape(0)), static_cast<int>(scores.shape(1)));
        std::memcpy(mat.values.data(), scores.data(), mat.values.size() * sizeof(double));
        return Pool(mat, ParsePooling(method));
      },
      py::arg("scores"), py::arg("method") = "am");

  m.def("srcc", [](const std::vector<double>& x, const std::vector<double>& y) { return Srcc(x, y); });
  m.def(
      "plcc",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::string& mapping) {
        PlccMapping mp;
        if (mapping == "none") {
          mp = PlccMapping::kNone;
        } else if (mapping == "logistic4") {
          mp = PlccMapping::kLogistic4;
        } else {
          throw py::value_error("mapping must be 'none' or 'logistic4'");
        }
        return Plcc(x, y, mp).value;
      },
      py::arg("x"), py::arg("y"), py::arg("mapping") = "none");

  m.def(
      "make_splits",
      [](std::vector<std::string> ids, std::uint64_t seed, int repeats) {
        const SplitPlan plan = MakeSplits(std::move(ids), seed, repeats);
        py::list out;
        for (const SplitPartition& part : plan.repeats) {
          py::dict d;
          d["train"] = part.train;
          d["val"] = part.val;
          d["test"] = part.test;
          out.append(d);
        }
        return out;
      },
      py::arg("reference_ids"), py::arg("seed") = 0, py::arg("repeats") = 5);

  m.def(
      "evaluate",
      [](const std::filesystem::path& manifest, const std::string& metric, const std::string& mode,
         const std::string& pool, int repeats, std::uint64_t seed, int n, const py::object& patch,
         std::uint64_t scanpath_seed, std::optional<std::filesystem::path> cache, int threads) {
        PipelineConfig cfg;
        cfg.metric = ParseEvalMetric(metric);
        cfg.mode = ParseMode(mode);
        cfg.pooling = ParsePooling(pool);
        cfg.repeats = repeats;
        cfg.split_seed = seed;
        cfg.gsr = MakeConfig(n, patch, std::nullopt, "tangent");
        cfg.generator.seed = scanpath_seed;
        cfg.cache_dir = std::move(cache);
        cfg.threads = threads;
        std::string text;
        {
          py::gil_scoped_release release;
          text = EvalResultToJson(Evaluate(LoadManifest(manifest), cfg), cfg);
        }
        return py::module_::import("json").attr("loads")(text);
      },
      py::arg("manifest"), py::arg("metric") = "g-psnr", py::arg("mode") = "per-patch",
      py::arg("pool") = "am", py::arg("repeats") = 5, py::arg("seed") = 0, py::arg("n") = 49,
      py::arg("patch") = 32, py::arg("scanpath_seed") = 0, py::arg("cache") = py::none(),
      py::arg("threads") = 1);
}
