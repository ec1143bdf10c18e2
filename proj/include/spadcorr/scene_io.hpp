#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spadcorr/scene.hpp"
#include "spadcorr/snr.hpp"

namespace spadcorr {

enum class MaskStyle { Default, Split, Rect };

/// Everything a config file describes: sensor, scene, seed and SNR masks.
struct ExperimentConfig {
  SensorGeometry geometry = SensorGeometry::centered(64, 64);
  SceneConfig scene;
  std::uint64_t seed = 0;
  MaskStyle mask_style = MaskStyle::Default;
  std::vector<Roi> signal_rects;
  std::vector<Roi> noise_rects;
  /// Human-readable origin of the object / stray maps, for manifests.
  std::string object_source = "none";
  std::string stray_source = "none";
};

/// Parses an INI config (see configs/README.md for the schema). Relative map
/// paths are resolved against the config file's directory. Unknown sections or
/// keys raise ConfigError; missing map files raise IoError.
ExperimentConfig load_experiment(const std::filesystem::path& path);
ExperimentConfig parse_experiment(const std::string& text, const std::filesystem::path& base_dir = ".");

RegionMasks experiment_masks(const ExperimentConfig& config);

/// Resolved configuration as a JSON object (for manifests).
std::string experiment_json(const ExperimentConfig& config);

/// "col0,row0,width,height" rectangles separated by ';'.
std::vector<Roi> parse_rects(const std::string& text);

}  // namespace spadcorr
