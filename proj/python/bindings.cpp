// Thin Python layer over the core library. Frames cross the boundary as
// uint8 numpy arrays of shape (H, W) or (M, H, W).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spadcorr/accumulator.hpp"
#include "spadcorr/errors.hpp"
#include "spadcorr/hot_pixels.hpp"
#include "spadcorr/projections.hpp"
#include "spadcorr/reconstruct.hpp"
#include "spadcorr/scene_io.hpp"
#include "spadcorr/simulator.hpp"
#include "spadcorr/snr.hpp"
#include "spadcorr/spdf.hpp"
#include "spadcorr/width.hpp"

namespace py = pybind11;
using namespace spadcorr;

namespace {

using FrameArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

FrameBuffer to_frame(const SensorGeometry& g, const std::uint8_t* data, std::uint64_t index) {
  bool binary = true;
  const std::size_t n = g.pixel_count();
  for (std::size_t k = 0; k < n && binary; ++k) binary = data[k] <= 1;
  FrameBuffer f(g, binary ? 1 : 8, index);
  std::copy(data, data + n, f.mutable_values().begin());
  return f;
}

void check_shape(const SensorGeometry& g, const py::buffer_info& info, py::ssize_t ndim) {
  if (info.ndim != ndim || info.shape[ndim - 2] != g.height() || info.shape[ndim - 1] != g.width()) {
    throw ConfigError("frame array shape does not match the sensor (" + std::to_string(g.height()) + ", " +
                      std::to_string(g.width()) + ")");
  }
}

py::array_t<double> image_values(const ProjectionImage& img) {
  py::array_t<double> out({img.height, img.width});
  std::copy(img.values.begin(), img.values.end(), out.mutable_data());
  return out;
}

AccumulationMode parse_mode(const std::string& mode) {
  if (mode == "full") return AccumulationMode::Full;
  if (mode == "projection") return AccumulationMode::ProjectionOnly;
  throw ConfigError("mode must be 'full' or 'projection'");
}

}  // namespace

PYBIND11_MODULE(_spadcorr, m) {
  m.doc() = "Coincidence imaging with SPAD frames";

  auto base = py::register_exception<Error>(m, "SpadcorrError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<UnsupportedOperation>(m, "UnsupportedOperation", base.ptr());
  py::register_exception<ResourceError>(m, "ResourceError", base.ptr());
  py::register_exception<OutOfRangeError>(m, "OutOfRangeError", base.ptr());

  py::class_<SensorGeometry>(m, "SensorGeometry")
      .def_static("centered", py::overload_cast<int, int>(&SensorGeometry::centered), py::arg("width"),
                  py::arg("height"))
      .def_static("centered", py::overload_cast<int, int, int, int>(&SensorGeometry::centered), py::arg("width"),
                  py::arg("height"), py::arg("half_width"), py::arg("half_height"))
      .def_property_readonly("width", &SensorGeometry::width)
      .def_property_readonly("height", &SensorGeometry::height)
      .def_property_readonly("half_width", &SensorGeometry::half_width)
      .def_property_readonly("half_height", &SensorGeometry::half_height)
      .def_property_readonly("roi_size", &SensorGeometry::roi_size)
      .def_property_readonly("origin", [](const SensorGeometry& g) { return py::make_tuple(g.origin().col, g.origin().row); })
      .def("__eq__", [](const SensorGeometry& a, const SensorGeometry& b) { return a == b; })
      .def("__repr__", [](const SensorGeometry& g) {
        return "SensorGeometry(" + std::to_string(g.width()) + "x" + std::to_string(g.height()) + ", roi " +
               std::to_string(g.roi().width) + "x" + std::to_string(g.roi().height) + ")";
      });

  py::class_<SceneConfig>(m, "SceneConfig")
      .def(py::init<>())
      .def_readwrite("mean_pairs_per_frame", &SceneConfig::mean_pairs_per_frame)
      .def_readwrite("detection_efficiency", &SceneConfig::detection_efficiency)
      .def_readwrite("correlation_width", &SceneConfig::correlation_width)
      .def_readwrite("psf_broadening", &SceneConfig::psf_broadening)
      .def_readwrite("dark_count_prob", &SceneConfig::dark_count_prob)
      .def_readwrite("crosstalk_prob", &SceneConfig::crosstalk_prob)
      .def_readwrite("hot_pixel_fraction", &SceneConfig::hot_pixel_fraction)
      .def_readwrite("bit_depth", &SceneConfig::bit_depth)
      .def("set_disk", [](SceneConfig& c, double radius) { c.illumination = DiskIllumination{radius}; },
           py::arg("radius"))
      .def("set_ring",
           [](SceneConfig& c, double radius, double thickness) { c.illumination = RingIllumination{radius, thickness}; },
           py::arg("radius"), py::arg("thickness"))
      .def("set_half_plane",
           [](SceneConfig& c, const SensorGeometry& g, const std::string& axis, int edge, bool negative) {
             if (axis != "x" && axis != "y") throw ConfigError("axis must be 'x' or 'y'");
             c.object_mask = make_half_plane_mask(g, axis[0], edge, negative);
           },
           py::arg("geometry"), py::arg("axis"), py::arg("edge"), py::arg("negative_side") = false)
      .def("illuminated_pixels", [](const SceneConfig& c) { return illuminated_pixel_count(c.illumination); });

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readwrite("geometry", &ExperimentConfig::geometry)
      .def_readwrite("scene", &ExperimentConfig::scene)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def("to_json", &experiment_json);
  m.def("load_experiment", &load_experiment, py::arg("path"));
  m.def("parse_experiment", &parse_experiment, py::arg("text"), py::arg("base_dir") = ".");

  py::class_<Simulator>(m, "Simulator")
      .def(py::init([](const SceneConfig& c, const SensorGeometry& g, std::uint64_t seed) {
             return Simulator(c, g, RngPolicy{seed});
           }),
           py::arg("scene"), py::arg("geometry"), py::arg("seed") = 0)
      .def("frames",
           [](const Simulator& sim, std::uint64_t count, std::uint64_t first, unsigned workers) {
             const auto& g = sim.geometry();
             py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(count), static_cast<py::ssize_t>(g.height()),
                                            static_cast<py::ssize_t>(g.width())});
             std::uint8_t* dst = out.mutable_data();
             {
               py::gil_scoped_release release;
               generate_stream(
                   sim, count,
                   [&](const FrameBuffer& f) {
                     std::copy(f.values().begin(), f.values().end(), dst);
                     dst += f.values().size();
                     return true;
                   },
                   StreamOptions{std::max(1u, workers), 4096, first});
             }
             return out;
           },
           py::arg("count"), py::arg("first") = 0, py::arg("workers") = 1)
      .def_property_readonly("hot_pixels", &Simulator::hot_pixels)
      .def_property_readonly("warnings", &Simulator::warnings);

  py::class_<ProjectionImage>(m, "ProjectionImage")
      .def_property_readonly("values", &image_values)
      .def_readonly("x_min", &ProjectionImage::x_min)
      .def_readonly("y_min", &ProjectionImage::y_min)
      .def_readonly("frames", &ProjectionImage::frames)
      .def_property_readonly("kind", [](const ProjectionImage& i) { return to_string(i.kind); })
      .def("at", [](const ProjectionImage& i, int x, int y) { return i.at(x, y); }, py::arg("x"), py::arg("y"));

  py::class_<JpdAccumulator>(m, "JpdAccumulator")
      .def(py::init([](const SensorGeometry& g, const std::string& mode,
                       const std::vector<std::pair<int, int>>& column_pairs,
                       const std::vector<std::pair<int, int>>& row_pairs,
                       const std::vector<std::pair<int, int>>& references) {
             AccumulatorOptions o;
             o.mode = parse_mode(mode);
             o.plan.column_pairs = column_pairs;
             o.plan.row_pairs = row_pairs;
             for (const auto& [x, y] : references) o.plan.references.push_back({x, y});
             return JpdAccumulator(g, o);
           }),
           py::arg("geometry"), py::arg("mode") = "projection", py::arg("column_pairs") = std::vector<std::pair<int, int>>{},
           py::arg("row_pairs") = std::vector<std::pair<int, int>>{},
           py::arg("references") = std::vector<std::pair<int, int>>{})
      .def("accumulate",
           [](JpdAccumulator& acc, const FrameArray& frames) {
             const auto info = frames.request();
             const auto& g = acc.geometry();
             const bool stack = info.ndim == 3;
             check_shape(g, info, stack ? 3 : 2);
             const py::ssize_t count = stack ? info.shape[0] : 1;
             const auto* data = static_cast<const std::uint8_t*>(info.ptr);
             for (py::ssize_t k = 0; k < count; ++k) {
               const FrameBuffer f = to_frame(g, data + k * static_cast<py::ssize_t>(g.pixel_count()),
                                              acc.empty() ? 0 : acc.last_frame() + 1);
               acc.accumulate(f.bit_depth() == 1 ? f : preprocess(f, HotPixelMap{}));
             }
           },
           py::arg("frames"), "Accumulate one (H, W) frame or a (M, H, W) stack; values above 1 are clamped.")
      .def("extend", &JpdAccumulator::extend)
      .def_static("merge", &JpdAccumulator::merge)
      .def("save", &JpdAccumulator::save)
      .def_static("load", &JpdAccumulator::load)
      .def_property_readonly("frames", &JpdAccumulator::frames)
      .def_property_readonly("cross_terms", &JpdAccumulator::cross_terms)
      .def_property_readonly("geometry", &JpdAccumulator::geometry)
      .def_property_readonly("mode", [](const JpdAccumulator& a) {
        return a.mode() == AccumulationMode::Full ? "full" : "projection";
      })
      .def("same_counts", &JpdAccumulator::same_counts);

  m.def("reconstruct_file",
        [](const std::filesystem::path& path, const std::string& mode, unsigned workers,
           std::optional<std::filesystem::path> hotmap, std::optional<std::uint64_t> max_frames) {
          ReconstructOptions o;
          o.accumulator.mode = parse_mode(mode);
          o.workers = workers;
          o.max_frames = max_frames;
          if (hotmap) o.hot_pixels = load_hot_pixel_map(*hotmap);
          py::gil_scoped_release release;
          return reconstruct_file(path, o);
        },
        py::arg("path"), py::arg("mode") = "projection", py::arg("workers") = 1, py::arg("hotmap") = py::none(),
        py::arg("max_frames") = py::none());

  m.def("gamma", [](const JpdAccumulator& acc) {
    const DenseJpd j = gamma(acc);
    const auto s = static_cast<py::ssize_t>(j.size());
    py::array_t<double> out({s, s});
    std::copy(j.values.begin(), j.values.end(), out.mutable_data());
    return out;
  });
  m.def("antidiagonal_image", &antidiagonal_image, py::arg("acc"), py::arg("mask_origin") = true);
  m.def("sum_projection", &sum_projection);
  m.def("minus_projection", &minus_projection);
  m.def("column_pair_projection", &column_pair_projection, py::arg("acc"), py::arg("x1"), py::arg("x2"));
  m.def("row_pair_projection", &row_pair_projection, py::arg("acc"), py::arg("y1"), py::arg("y2"));
  m.def("intensity_image", &intensity_image);
  m.def("conditional_image",
        [](const JpdAccumulator& acc, std::pair<int, int> ref, bool normalize, bool mask) {
          return conditional_image(acc, PixelCoord{ref.first, ref.second}, ConditionalOptions{normalize, mask});
        },
        py::arg("acc"), py::arg("reference"), py::arg("normalize") = false, py::arg("mask_crosstalk") = true);

  py::class_<RegionMasks>(m, "RegionMasks")
      .def_readonly("description", &RegionMasks::description)
      .def_property_readonly("signal_pixels", [](const RegionMasks& r) { return r.signal.size(); })
      .def_property_readonly("noise_pixels", [](const RegionMasks& r) { return r.noise.size(); });
  m.def("default_masks", [](const SceneConfig& c, const SensorGeometry& g) { return default_masks(c, g); });
  m.def("split_masks", [](const SceneConfig& c, const SensorGeometry& g) { return split_masks(c, g); });

  py::class_<SnrMeasurement>(m, "SnrMeasurement")
      .def_readonly("snr", &SnrMeasurement::snr)
      .def_readonly("snr_err", &SnrMeasurement::snr_err)
      .def_readonly("signal_mean", &SnrMeasurement::signal_mean)
      .def_readonly("noise_std", &SnrMeasurement::noise_std)
      .def_readonly("frames", &SnrMeasurement::frames);
  m.def("measure_snr", &measure_snr, py::arg("image"), py::arg("masks"));

  py::class_<SnrParameters>(m, "SnrParameters")
      .def(py::init([](double eta, double m_pairs, double n, double s) { return SnrParameters{eta, m_pairs, n, s}; }),
           py::arg("eta"), py::arg("mean_pairs"), py::arg("noise_events"), py::arg("illuminated_pixels"))
      .def_readwrite("eta", &SnrParameters::eta)
      .def_readwrite("mean_pairs", &SnrParameters::mean_pairs)
      .def_readwrite("noise_events", &SnrParameters::noise_events)
      .def_readwrite("illuminated_pixels", &SnrParameters::illuminated_pixels);
  m.def("snr_parameters", &snr_parameters, py::arg("scene"), py::arg("geometry"));
  m.def("predict_snr", &predict_snr, py::arg("params"), py::arg("frames"));
  m.def("predict_ideal_snr", &predict_ideal_snr, py::arg("params"), py::arg("frames"));
  m.def("ideal_coefficient", &ideal_coefficient, py::arg("params"));

  m.def("estimate_correlation_width", [](const ProjectionImage& img) {
    const CorrelationWidth w = estimate_correlation_width(img);
    py::dict d;
    d["sigma"] = w.sigma;
    d["sigma_x"] = w.sigma_x;
    d["sigma_y"] = w.sigma_y;
    d["x0"] = w.x0;
    d["y0"] = w.y0;
    return d;
  });

  m.def("read_spdf", [](const std::filesystem::path& path) {
    SpdfReader reader(path);
    const auto& h = reader.header();
    py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(h.frame_count), static_cast<py::ssize_t>(h.height),
                                   static_cast<py::ssize_t>(h.width)});
    FrameBuffer f = reader.make_frame();
    std::uint8_t* dst = out.mutable_data();
    while (reader.next(f)) dst = std::copy(f.values().begin(), f.values().end(), dst);
    return out;
  });
  m.def("write_spdf",
        [](const std::filesystem::path& path, const FrameArray& frames, int bit_depth) {
          const auto info = frames.request();
          if (info.ndim != 3) throw ConfigError("frames must have shape (M, H, W)");
          const auto g = SensorGeometry::centered(static_cast<int>(info.shape[2]), static_cast<int>(info.shape[1]));
          SpdfWriter writer(path, g.width(), g.height(), bit_depth);
          const auto* data = static_cast<const std::uint8_t*>(info.ptr);
          for (py::ssize_t k = 0; k < info.shape[0]; ++k) {
            FrameBuffer f(g, bit_depth, static_cast<std::uint64_t>(k));
            const auto* src = data + k * static_cast<py::ssize_t>(g.pixel_count());
            for (std::size_t i = 0; i < g.pixel_count(); ++i) {
              if (src[i] > f.max_value()) throw OutOfRangeError("pixel value exceeds the bit depth");
            }
            std::copy(src, src + g.pixel_count(), f.mutable_values().begin());
            writer.write(f);
          }
          writer.close();
        },
        py::arg("path"), py::arg("frames"), py::arg("bit_depth") = 1);
}
