#include "spadcorr/snr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "spadcorr/errors.hpp"

namespace spadcorr {

namespace {

bool transparent_pair(const SceneConfig& config, const SensorGeometry& g, PixelCoord r) {
  return transmission(config, g, r) >= 1.0 && transmission(config, g, -r) >= 1.0;
}

// Pixels whose whole footprint sits well inside the illuminated area.
bool illuminated(const Illumination& illumination, PixelCoord r, double margin) {
  const double rho = std::hypot(r.x, r.y);
  return std::visit(
      [rho, margin](const auto& ill) {
        using T = std::decay_t<decltype(ill)>;
        if constexpr (std::is_same_v<T, DiskIllumination>) {
          return rho <= ill.radius - margin;
        } else {
          return std::abs(rho - ill.radius) <= std::max(ill.thickness - margin, 0.5);
        }
      },
      illumination);
}

bool in_centre_block(PixelCoord r) { return std::abs(r.x) <= 1 && std::abs(r.y) <= 1; }

struct Stats {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

Stats stats_over(const ProjectionImage& image, const std::vector<PixelCoord>& pixels) {
  Stats s;
  s.n = pixels.size();
  double sum = 0.0;
  for (const auto& p : pixels) {
    if (!image.contains(p.x, p.y)) throw OutOfRangeError("mask pixel " + to_string(p) + " outside the image");
    sum += image.at(p.x, p.y);
  }
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (const auto& p : pixels) {
    const double d = image.at(p.x, p.y) - s.mean;
    ss += d * d;
  }
  s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

std::uint64_t key(PixelCoord p) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) | static_cast<std::uint32_t>(p.y);
}

}  // namespace

void validate_masks(const RegionMasks& masks, const SensorGeometry& geometry) {
  if (masks.signal.empty() || masks.noise.empty()) throw ConfigError("signal and noise masks must be nonempty");
  std::unordered_set<std::uint64_t> signal;
  for (const auto& p : masks.signal) {
    if (!geometry.in_roi(p)) throw ConfigError("signal mask pixel " + to_string(p) + " outside the roi");
    signal.insert(key(p));
  }
  for (const auto& p : masks.noise) {
    if (!geometry.in_roi(p)) throw ConfigError("noise mask pixel " + to_string(p) + " outside the roi");
    if (signal.contains(key(p))) throw ConfigError("signal and noise masks overlap at " + to_string(p));
  }
}

RegionMasks default_masks(const SceneConfig& config, const SensorGeometry& geometry, double margin) {
  RegionMasks masks;
  masks.description = "default: transparent illuminated region vs unilluminated corners";
  const double dark_radius = illumination_extent(config.illumination) + margin;
  const int hw = geometry.half_width();
  const int hh = geometry.half_height();
  for (int y = -hh; y <= hh; ++y) {
    for (int x = -hw; x <= hw; ++x) {
      const PixelCoord r{x, y};
      if (std::hypot(x, y) > dark_radius) {
        masks.noise.push_back(r);
      } else if (!in_centre_block(r) && illuminated(config.illumination, r, 1.0) &&
                 transparent_pair(config, geometry, r)) {
        masks.signal.push_back(r);
      }
    }
  }
  return masks;
}

RegionMasks split_masks(const SceneConfig& config, const SensorGeometry& geometry, double margin) {
  RegionMasks masks;
  masks.description = "split: two mirror halves of the transparent illuminated region";
  const int hw = geometry.half_width();
  const int hh = geometry.half_height();
  for (int y = -hh; y <= hh; ++y) {
    for (int x = -hw; x <= hw; ++x) {
      const PixelCoord r{x, y};
      if (in_centre_block(r) || !illuminated(config.illumination, r, margin) ||
          !transparent_pair(config, geometry, r)) {
        continue;
      }
      const bool first_half = x < 0 || (x == 0 && y < 0);
      (first_half ? masks.signal : masks.noise).push_back(r);
    }
  }
  return masks;
}

RegionMasks rect_masks(const SensorGeometry& geometry, const std::vector<Roi>& signal_rects,
                       const std::vector<Roi>& noise_rects) {
  RegionMasks masks;
  masks.description = "rectangles";
  const auto fill = [&geometry](const std::vector<Roi>& rects, std::vector<PixelCoord>& out) {
    std::unordered_set<std::uint64_t> seen;
    for (const auto& rect : rects) {
      for (int row = rect.row0; row < rect.row0 + rect.height; ++row) {
        for (int col = rect.col0; col < rect.col0 + rect.width; ++col) {
          const PixelCoord p = geometry.to_centered(ArrayPixel{col, row});
          if (seen.insert(key(p)).second) out.push_back(p);
        }
      }
    }
  };
  fill(signal_rects, masks.signal);
  fill(noise_rects, masks.noise);
  validate_masks(masks, geometry);
  return masks;
}

SnrMeasurement measure_snr(const ProjectionImage& image, const RegionMasks& masks) {
  if (masks.signal.size() < kMinMaskPixels || masks.noise.size() < kMinMaskPixels) {
    throw ConfigError("masks need at least " + std::to_string(kMinMaskPixels) + " pixels each (signal " +
                      std::to_string(masks.signal.size()) + ", noise " + std::to_string(masks.noise.size()) + ")");
  }
  const Stats sig = stats_over(image, masks.signal);
  const Stats noi = stats_over(image, masks.noise);

  SnrMeasurement m;
  m.signal_mean = sig.mean;
  m.signal_sd = sig.sd;
  m.noise_std = noi.sd;
  m.signal_pixels = sig.n;
  m.noise_pixels = noi.n;
  m.frames = image.frames;
  if (noi.sd == 0.0) {
    m.infinite = true;
    m.snr = std::numeric_limits<double>::infinity();
    return m;
  }
  const double se_mean = sig.sd / std::sqrt(static_cast<double>(sig.n));
  const double se_std = noi.sd / std::sqrt(2.0 * static_cast<double>(noi.n - 1));
  if (sig.mean <= 0.0) {
    m.snr = 0.0;
    m.snr_err = se_mean / noi.sd;
    return m;
  }
  m.snr = sig.mean / noi.sd;
  m.snr_err = m.snr * std::hypot(se_mean / sig.mean, se_std / noi.sd);
  return m;
}

SnrMeasurement jackknife_snr(const std::vector<JpdAccumulator>& blocks, const RegionMasks& masks) {
  if (blocks.size() < 2) throw ConfigError("jackknife needs at least two blocks");
  JpdAccumulator all = blocks.front();
  for (std::size_t k = 1; k < blocks.size(); ++k) all.pool(blocks[k]);
  SnrMeasurement full = measure_snr(antidiagonal_image(all), masks);
  if (full.infinite) return full;

  const auto n = static_cast<double>(blocks.size());
  std::vector<double> loo;
  loo.reserve(blocks.size());
  for (std::size_t leave = 0; leave < blocks.size(); ++leave) {
    std::optional<JpdAccumulator> pooled;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      if (k == leave) continue;
      if (!pooled) {
        pooled = blocks[k];
      } else {
        pooled->pool(blocks[k]);
      }
    }
    loo.push_back(measure_snr(antidiagonal_image(*pooled), masks).snr);
  }
  const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  full.snr_err = std::sqrt((n - 1.0) / n * ss);
  return full;
}

SnrParameters snr_parameters(const SceneConfig& config, const SensorGeometry& geometry) {
  SnrParameters p;
  p.eta = config.detection_efficiency;
  p.mean_pairs = config.mean_pairs_per_frame;
  p.illuminated_pixels = illuminated_pixel_count(config.illumination);
  double stray = 0.0;
  if (!config.stray_light.empty()) {
    const double extent = illumination_extent(config.illumination);
    for (int row = 0; row < geometry.height(); ++row) {
      for (int col = 0; col < geometry.width(); ++col) {
        const PixelCoord r = geometry.to_centered(ArrayPixel{col, row});
        if (std::hypot(r.x, r.y) <= extent) stray += config.stray_light.at(ArrayPixel{col, row});
      }
    }
  }
  p.noise_events = config.dark_count_prob * p.illuminated_pixels + stray;
  return p;
}

double genuine_per_frame(const SnrParameters& p) noexcept { return 2.0 * p.eta * p.eta * p.mean_pairs; }

double accidental_per_frame(const SnrParameters& p) noexcept {
  const double events = 2.0 * p.eta * p.eta * p.mean_pairs + 2.0 * p.eta * p.mean_pairs + p.noise_events;
  return events * events;
}

namespace {

void check_parameters(const SnrParameters& p, double frames) {
  if (!(p.illuminated_pixels >= 1.0)) throw ConfigError("s must be >= 1");
  if (!(p.eta > 0.0 && p.eta <= 1.0)) throw ConfigError("eta must lie in (0,1]");
  if (!(p.mean_pairs > 0.0)) throw ConfigError("<m> must be > 0");
  if (!(p.noise_events >= 0.0)) throw ConfigError("<n> must be >= 0");
  if (!(frames >= 0.0)) throw ConfigError("M must be >= 0");
}

}  // namespace

double predict_snr(const SnrParameters& p, double frames) {
  check_parameters(p, frames);
  const double ng = genuine_per_frame(p);
  if (ng == 0.0) return 0.0;
  const double s = p.illuminated_pixels;
  return std::sqrt(ng / s) / std::sqrt(1.0 + 2.0 * accidental_per_frame(p) / (s * ng)) * std::sqrt(frames);
}

double predict_ideal_snr(const SnrParameters& p, double frames) {
  check_parameters(p, frames);
  return ideal_coefficient(p) * std::sqrt(frames);
}

double ideal_coefficient(const SnrParameters& p) {
  check_parameters(p, 0.0);
  return p.eta * std::sqrt(2.0 * p.mean_pairs / p.illuminated_pixels);
}

ScalingFit fit_sqrt_scaling(const std::vector<ScalingPoint>& points) {
  if (points.size() < 3) throw ConfigError("scaling fit needs at least 3 points");
  for (const auto& pt : points) {
    if (!(pt.snr_err > 0.0)) throw ConfigError("scaling fit needs positive uncertainties");
    if (!(pt.frames > 0.0)) throw ConfigError("scaling fit needs M > 0");
  }
  const bool all_equal = std::all_of(points.begin(), points.end(),
                                     [&](const ScalingPoint& pt) { return pt.frames == points.front().frames; });
  if (all_equal) throw DomainError("scaling fit is singular: all M are equal");

  ScalingFit fit;
  fit.points = points.size();
  double swxx = 0.0;
  double swxy = 0.0;
  double sw = 0.0;
  double swy = 0.0;
  for (const auto& pt : points) {
    const double w = 1.0 / (pt.snr_err * pt.snr_err);
    const double x = std::sqrt(pt.frames);
    swxx += w * x * x;
    swxy += w * x * pt.snr;
    sw += w;
    swy += w * pt.snr;
  }
  fit.a = swxy / swxx;
  fit.a_err = 1.0 / std::sqrt(swxx);
  const double ybar = swy / sw;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& pt : points) {
    const double w = 1.0 / (pt.snr_err * pt.snr_err);
    const double r = pt.snr - fit.a * std::sqrt(pt.frames);
    ss_res += w * r * r;
    ss_tot += w * (pt.snr - ybar) * (pt.snr - ybar);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

  // ln y = ln c + b ln M, weights (y / sigma)^2 from error propagation.
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  for (const auto& pt : points) {
    if (!(pt.snr > 0.0)) throw DomainError("free-exponent fit needs positive SNR values");
    const double w = (pt.snr / pt.snr_err) * (pt.snr / pt.snr_err);
    const double u = std::log(pt.frames);
    const double v = std::log(pt.snr);
    s0 += w;
    s1 += w * u;
    s2 += w * u * u;
    t0 += w * v;
    t1 += w * u * v;
  }
  const double det = s0 * s2 - s1 * s1;
  fit.exponent = (s0 * t1 - s1 * t0) / det;
  fit.prefactor = std::exp((s2 * t0 - s1 * t1) / det);
  fit.exponent_err = std::sqrt(s0 / det);
  return fit;
}

std::string to_json(const SnrReport& report) {
  nlohmann::ordered_json j;
  j["frames"] = report.frames;
  j["masks"] = report.masks;
  if (report.measured) {
    const auto& m = *report.measured;
    j["measured"] = {{"snr", m.infinite ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(m.snr)},
                     {"snr_err", m.snr_err},
                     {"infinite", m.infinite},
                     {"signal_mean", m.signal_mean},
                     {"signal_sd", m.signal_sd},
                     {"noise_std", m.noise_std},
                     {"signal_pixels", m.signal_pixels},
                     {"noise_pixels", m.noise_pixels}};
  }
  j["parameters"] = {{"eta", report.parameters.eta},
                     {"mean_pairs", report.parameters.mean_pairs},
                     {"noise_events", report.parameters.noise_events},
                     {"illuminated_pixels", report.parameters.illuminated_pixels}};
  j["n_genuine"] = report.n_genuine;
  j["n_accidental"] = report.n_accidental;
  j["predicted_snr"] = report.predicted_snr;
  j["ideal_snr"] = report.ideal_snr;
  j["a_ideal"] = report.a_ideal;
  if (report.fit) {
    const auto& f = *report.fit;
    j["fit"] = {{"a", f.a},         {"a_err", f.a_err},       {"r2", f.r2},          {"exponent", f.exponent},
                {"exponent_err", f.exponent_err}, {"prefactor", f.prefactor}, {"points", f.points}};
  }
  return j.dump(2);
}

void write_snr_report(const std::filesystem::path& path, const SnrReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError(IoError::Kind::Open, "cannot write " + path.string());
  out << to_json(report) << '\n';
  if (!out) throw IoError(IoError::Kind::Write, "failed writing " + path.string());
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError(IoError::Kind::Open, "cannot write " + path.string());
  out.precision(10);
  out << "M,snr,snr_err,predicted\n";
  for (const auto& r : rows) out << r.frames << ',' << r.snr << ',' << r.snr_err << ',' << r.predicted << '\n';
  if (!out) throw IoError(IoError::Kind::Write, "failed writing " + path.string());
}

}  // namespace spadcorr
