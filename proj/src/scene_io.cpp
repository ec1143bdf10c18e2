#include "spadcorr/scene_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "spadcorr/errors.hpp"
#include "spadcorr/pgm.hpp"

namespace spadcorr {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"sensor", {"width", "height", "roi_half_width", "roi_half_height"}},
      {"scene",
       {"mean_pairs_per_frame", "detection_efficiency", "correlation_width", "psf_broadening", "dark_count_prob",
        "crosstalk_prob", "hot_pixel_fraction", "bit_depth"}},
      {"illumination", {"type", "radius", "thickness"}},
      {"object", {"type", "axis", "edge", "negative_side", "path"}},
      {"stray", {"type", "path", "scale", "rect", "prob"}},
      {"masks", {"type", "signal", "noise"}},
      {"run", {"seed"}},
  };
  return keys;
}

template <typename T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto child = tree.get_child_optional(key);
  if (!child) return fallback;
  // The defaulted ptree getter swallows conversion failures, so convert explicitly.
  const auto value = child->get_value_optional<T>();
  if (!value) throw ConfigError("invalid value for '" + key + "': '" + child->data() + "'");
  return *value;
}

template <typename T>
T require(const pt::ptree& tree, const std::string& key) {
  if (!tree.get_child_optional(key)) throw ConfigError("missing required key '" + key + "'");
  return get<T>(tree, key, T{});
}

void check_schema(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
  }
}

std::string rects_to_string(const std::vector<Roi>& rects) {
  std::ostringstream out;
  for (std::size_t k = 0; k < rects.size(); ++k) {
    if (k) out << ';';
    out << rects[k].col0 << ',' << rects[k].row0 << ',' << rects[k].width << ',' << rects[k].height;
  }
  return out.str();
}

}  // namespace

std::vector<Roi> parse_rects(const std::string& text) {
  std::vector<Roi> out;
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(";"));
  for (auto part : parts) {
    boost::trim(part);
    if (part.empty()) continue;
    std::vector<std::string> f;
    boost::split(f, part, boost::is_any_of(","));
    if (f.size() != 4) throw ConfigError("rectangle '" + part + "' must be col0,row0,width,height");
    try {
      out.push_back({std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3])});
    } catch (const std::exception&) {
      throw ConfigError("rectangle '" + part + "' has non-integer fields");
    }
    if (out.back().width <= 0 || out.back().height <= 0) throw ConfigError("rectangle '" + part + "' is empty");
  }
  return out;
}

ExperimentConfig parse_experiment(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config parse error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  check_schema(tree);
  // read_ini drops sections without keys; catch misspelled empty ones too.
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      boost::trim(line);
      if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
        const auto name = boost::trim_copy(line.substr(1, line.size() - 2));
        if (!schema().contains(name)) throw ConfigError("unknown config section [" + name + "]");
      }
    }
  }

  ExperimentConfig cfg;
  const int width = get(tree, "sensor.width", 64);
  const int height = get(tree, "sensor.height", 64);
  if (tree.get_child_optional("sensor.roi_half_width") || tree.get_child_optional("sensor.roi_half_height")) {
    const int hw = get(tree, "sensor.roi_half_width", (width - 1) / 2);
    const int hh = get(tree, "sensor.roi_half_height", (height - 1) / 2);
    cfg.geometry = SensorGeometry::centered(width, height, hw, hh);
  } else {
    cfg.geometry = SensorGeometry::centered(width, height);
  }
  const auto& g = cfg.geometry;

  SceneConfig& s = cfg.scene;
  s.mean_pairs_per_frame = get(tree, "scene.mean_pairs_per_frame", s.mean_pairs_per_frame);
  s.detection_efficiency = get(tree, "scene.detection_efficiency", s.detection_efficiency);
  s.correlation_width = get(tree, "scene.correlation_width", s.correlation_width);
  s.psf_broadening = get(tree, "scene.psf_broadening", s.psf_broadening);
  s.dark_count_prob = get(tree, "scene.dark_count_prob", s.dark_count_prob);
  s.crosstalk_prob = get(tree, "scene.crosstalk_prob", s.crosstalk_prob);
  s.hot_pixel_fraction = get(tree, "scene.hot_pixel_fraction", s.hot_pixel_fraction);
  s.bit_depth = get(tree, "scene.bit_depth", s.bit_depth);

  const auto ill_type = get<std::string>(tree, "illumination.type", "disk");
  if (ill_type == "disk") {
    s.illumination = DiskIllumination{get(tree, "illumination.radius", 20.0)};
  } else if (ill_type == "ring") {
    s.illumination = RingIllumination{require<double>(tree, "illumination.radius"),
                                      require<double>(tree, "illumination.thickness")};
  } else {
    throw ConfigError("illumination.type must be disk or ring, got '" + ill_type + "'");
  }

  const auto obj_type = get<std::string>(tree, "object.type", "none");
  if (obj_type == "halfplane") {
    const auto axis = get<std::string>(tree, "object.axis", "x");
    if (axis != "x" && axis != "y") throw ConfigError("object.axis must be x or y");
    const int edge = require<int>(tree, "object.edge");
    const bool negative = get(tree, "object.negative_side", false);
    s.object_mask = make_half_plane_mask(g, axis[0], edge, negative);
    cfg.object_source = "halfplane " + axis + (negative ? " <= " : " >= ") + std::to_string(edge);
  } else if (obj_type == "pgm") {
    const auto path = base_dir / require<std::string>(tree, "object.path");
    s.object_mask = read_pgm_map(path);
    cfg.object_source = path.string();
  } else if (obj_type != "none") {
    throw ConfigError("object.type must be none, halfplane or pgm, got '" + obj_type + "'");
  }

  const auto stray_type = get<std::string>(tree, "stray.type", "none");
  if (stray_type == "pgm") {
    const auto path = base_dir / require<std::string>(tree, "stray.path");
    s.stray_light = read_pgm_map(path);
    const double scale = get(tree, "stray.scale", 1.0);
    for (auto& v : s.stray_light.values()) v = static_cast<float>(v * scale);
    cfg.stray_source = path.string();
  } else if (stray_type == "rect") {
    const auto rects = parse_rects(require<std::string>(tree, "stray.rect"));
    const auto prob = static_cast<float>(require<double>(tree, "stray.prob"));
    s.stray_light = PixelMap(g.width(), g.height(), 0.0f);
    for (const auto& rect : rects) {
      const PixelMap one = make_rect_map(g, rect, prob);
      for (std::size_t k = 0; k < one.values().size(); ++k) {
        s.stray_light.values()[k] = std::max(s.stray_light.values()[k], one.values()[k]);
      }
    }
    cfg.stray_source = "rect " + rects_to_string(rects);
  } else if (stray_type != "none") {
    throw ConfigError("stray.type must be none, pgm or rect, got '" + stray_type + "'");
  }

  const auto mask_type = get<std::string>(tree, "masks.type", "default");
  if (mask_type == "default") {
    cfg.mask_style = MaskStyle::Default;
  } else if (mask_type == "split") {
    cfg.mask_style = MaskStyle::Split;
  } else if (mask_type == "rect") {
    cfg.mask_style = MaskStyle::Rect;
    cfg.signal_rects = parse_rects(require<std::string>(tree, "masks.signal"));
    cfg.noise_rects = parse_rects(require<std::string>(tree, "masks.noise"));
  } else {
    throw ConfigError("masks.type must be default, split or rect, got '" + mask_type + "'");
  }

  cfg.seed = get<std::uint64_t>(tree, "run.seed", 0);
  validate(s, g);
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoError::Kind::Open, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment(text.str(), path.parent_path());
}

RegionMasks experiment_masks(const ExperimentConfig& config) {
  switch (config.mask_style) {
    case MaskStyle::Split:
      return split_masks(config.scene, config.geometry);
    case MaskStyle::Rect:
      return rect_masks(config.geometry, config.signal_rects, config.noise_rects);
    case MaskStyle::Default:
      break;
  }
  return default_masks(config.scene, config.geometry);
}

std::string experiment_json(const ExperimentConfig& config) {
  const auto& g = config.geometry;
  const auto& s = config.scene;
  nlohmann::ordered_json j;
  j["sensor"] = {{"width", g.width()},
                 {"height", g.height()},
                 {"origin", {g.origin().col, g.origin().row}},
                 {"roi", {g.roi().col0, g.roi().row0, g.roi().width, g.roi().height}}};
  nlohmann::ordered_json ill;
  std::visit(
      [&ill](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiskIllumination>) {
          ill = {{"type", "disk"}, {"radius", v.radius}};
        } else {
          ill = {{"type", "ring"}, {"radius", v.radius}, {"thickness", v.thickness}};
        }
      },
      s.illumination);
  j["scene"] = {{"mean_pairs_per_frame", s.mean_pairs_per_frame},
                {"detection_efficiency", s.detection_efficiency},
                {"correlation_width", s.correlation_width},
                {"psf_broadening", s.psf_broadening},
                {"dark_count_prob", s.dark_count_prob},
                {"crosstalk_prob", s.crosstalk_prob},
                {"hot_pixel_fraction", s.hot_pixel_fraction},
                {"bit_depth", s.bit_depth},
                {"illumination", ill},
                {"object", config.object_source},
                {"stray", config.stray_source}};
  const char* style = config.mask_style == MaskStyle::Split ? "split"
                      : config.mask_style == MaskStyle::Rect ? "rect"
                                                              : "default";
  j["masks"] = {{"type", style}, {"signal", rects_to_string(config.signal_rects)},
                {"noise", rects_to_string(config.noise_rects)}};
  j["seed"] = config.seed;
  return j.dump();
}

}  // namespace spadcorr
