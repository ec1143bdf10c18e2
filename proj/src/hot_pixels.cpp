#include "spadcorr/hot_pixels.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "spadcorr/errors.hpp"

namespace spadcorr {

bool HotPixelMap::contains(std::uint32_t sensor_index) const {
  return std::binary_search(pixels.begin(), pixels.end(), sensor_index);
}

double HotPixelMap::flagged_fraction() const noexcept {
  const double n = static_cast<double>(width) * static_cast<double>(height);
  return n > 0 ? static_cast<double>(pixels.size()) / n : 0.0;
}

HotPixelCalibrator::HotPixelCalibrator(int width, int height, int threshold)
    : width_(width), height_(height), threshold_(threshold),
      flagged_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0) {
  if (threshold < 0 || threshold > 255) throw ConfigError("hot pixel threshold must lie in [0,255]");
}

void HotPixelCalibrator::add(const FrameBuffer& dark_frame) {
  if (dark_frame.bit_depth() != 8) {
    throw IoError(IoError::Kind::BitDepthMismatch, "hot pixel calibration requires 8-bit frames");
  }
  if (dark_frame.geometry().width() != width_ || dark_frame.geometry().height() != height_) {
    throw ConfigError("calibration frame size differs from the calibrator's");
  }
  const auto values = dark_frame.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > threshold_) flagged_[i] = 1;
  }
  ++frames_;
}

HotPixelMap HotPixelCalibrator::result() const {
  HotPixelMap map;
  map.width = width_;
  map.height = height_;
  map.threshold = threshold_;
  map.calibration_frames = frames_;
  for (std::size_t i = 0; i < flagged_.size(); ++i) {
    if (flagged_[i] != 0) map.pixels.push_back(static_cast<std::uint32_t>(i));
  }
  return map;
}

HotPixelMap calibrate_hot_pixels(std::span<const FrameBuffer> dark_frames, int threshold) {
  if (dark_frames.empty()) throw ConfigError("hot pixel calibration needs at least one frame");
  const auto& g = dark_frames.front().geometry();
  HotPixelCalibrator cal(g.width(), g.height(), threshold);
  for (const auto& f : dark_frames) cal.add(f);
  return cal.result();
}

void preprocess_into(const FrameBuffer& frame, const HotPixelMap& map, FrameBuffer& out) {
  const auto& g = frame.geometry();
  if (!(out.geometry() == g) || out.bit_depth() != 1) {
    throw ConfigError("preprocess output must be a 1-bit frame of the same geometry");
  }
  if (!(map.width == 0 && map.height == 0) && (map.width != g.width() || map.height != g.height())) {
    throw ConfigError("hot pixel map geometry does not match the frame");
  }
  const auto in = frame.values();
  auto dst = out.mutable_values();
  for (std::size_t i = 0; i < in.size(); ++i) dst[i] = in[i] != 0 ? 1 : 0;
  for (auto idx : map.pixels) dst[idx] = 0;
  out.set_frame_index(frame.frame_index());
}

FrameBuffer preprocess(const FrameBuffer& frame, const HotPixelMap& map) {
  FrameBuffer out(frame.geometry(), 1, frame.frame_index());
  preprocess_into(frame, map, out);
  return out;
}

void save_hot_pixel_map(const std::filesystem::path& path, const HotPixelMap& map) {
  nlohmann::json j;
  j["format"] = "spadcorr-hot-pixel-map";
  j["width"] = map.width;
  j["height"] = map.height;
  j["threshold"] = map.threshold;
  j["calibration_frames"] = map.calibration_frames;
  j["flagged_fraction"] = map.flagged_fraction();
  auto& px = j["pixels"] = nlohmann::json::array();
  for (auto idx : map.pixels) {
    px.push_back({static_cast<int>(idx % static_cast<std::uint32_t>(map.width)),
                  static_cast<int>(idx / static_cast<std::uint32_t>(map.width))});
  }
  std::ofstream out(path);
  if (!out) throw IoError(IoError::Kind::Open, "cannot create " + path.string());
  out << j.dump(1) << '\n';
}

HotPixelMap load_hot_pixel_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoError::Kind::Open, "cannot open hot pixel map " + path.string());
  HotPixelMap map;
  try {
    const auto j = nlohmann::json::parse(in);
    map.width = j.at("width").get<int>();
    map.height = j.at("height").get<int>();
    map.threshold = j.at("threshold").get<int>();
    map.calibration_frames = j.at("calibration_frames").get<std::uint64_t>();
    for (const auto& p : j.at("pixels")) {
      const int col = p.at(0).get<int>();
      const int row = p.at(1).get<int>();
      if (col < 0 || row < 0 || col >= map.width || row >= map.height) {
        throw IoError(IoError::Kind::Format, "hot pixel outside the sensor");
      }
      map.pixels.push_back(static_cast<std::uint32_t>(row * map.width + col));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(IoError::Kind::Format, "malformed hot pixel map " + path.string() + ": " + e.what());
  }
  std::sort(map.pixels.begin(), map.pixels.end());
  map.pixels.erase(std::unique(map.pixels.begin(), map.pixels.end()), map.pixels.end());
  return map;
}

}  // namespace spadcorr
