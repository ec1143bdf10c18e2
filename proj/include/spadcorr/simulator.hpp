#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "spadcorr/frame.hpp"
#include "spadcorr/rng.hpp"
#include "spadcorr/scene.hpp"

namespace spadcorr {

/// One entangled pair in the detection plane.
struct PairEvent {
  PixelCoord r1;
  PixelCoord r2;
};

/// Photons lost before detection, accumulated per frame / stream.
struct LossCounters {
  std::uint64_t pairs = 0;
  std::uint64_t off_sensor = 0;
  std::uint64_t absorbed = 0;
  std::uint64_t undetected = 0;
  std::uint64_t detected = 0;
  std::uint64_t genuine_coincidences = 0;  // pairs with both photons detected

  LossCounters& operator+=(const LossCounters& o) noexcept;
};

/// Draws r1 from the illumination profile and r2 = -r1 + delta, delta an
/// isotropic Gaussian of std sigma rounded to the nearest pixel.
PairEvent sample_pair(const SceneConfig& config, std::mt19937_64& rng);

/// Each photon survives independently with probability T(r); returns the
/// survivors (0, 1 or 2). Off-sensor photons must be removed beforehand.
std::vector<PixelCoord> apply_object(const PairEvent& event, const SceneConfig& config,
                                     const SensorGeometry& geometry, std::mt19937_64& rng);

/// Precomputed generator for one scene. Immutable after construction and safe
/// to share across threads.
class Simulator {
 public:
  Simulator(SceneConfig config, SensorGeometry geometry, RngPolicy policy);

  [[nodiscard]] const SceneConfig& config() const noexcept { return config_; }
  [[nodiscard]] const SensorGeometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] const RngPolicy& policy() const noexcept { return policy_; }
  [[nodiscard]] const std::vector<std::uint32_t>& hot_pixels() const noexcept { return hot_pixels_; }
  [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Converts the photons that reached the sensor into a frame: detection with
  /// efficiency eta, then dark counts, stray light, crosstalk and hot pixels.
  /// `out` is cleared first; its frame index selects the noise substreams.
  void detect_frame(std::span<const PixelCoord> photons, FrameBuffer& out,
                    LossCounters* counters = nullptr) const;

  /// Generates frame `index` into `out` (reused buffer).
  void generate_frame(std::uint64_t index, FrameBuffer& out, LossCounters* counters = nullptr) const;
  [[nodiscard]] FrameBuffer generate_frame(std::uint64_t index) const;

  /// A zeroed frame with this simulator's geometry and bit depth.
  [[nodiscard]] FrameBuffer make_frame(std::uint64_t index = 0) const;

 private:
  void detect_photons(std::span<const PixelCoord> photons, FrameBuffer& out, LossCounters* counters,
                      std::vector<std::uint8_t>* detected) const;
  void add_dark_counts(FrameBuffer& out, std::vector<std::uint32_t>& fired) const;
  void add_stray_light(FrameBuffer& out, std::vector<std::uint32_t>& fired) const;
  void add_crosstalk(FrameBuffer& out, const std::vector<std::uint32_t>& fired) const;

  SceneConfig config_;
  SensorGeometry geometry_;
  RngPolicy policy_;
  std::vector<std::string> warnings_;
  std::vector<std::uint32_t> hot_pixels_;
  std::vector<std::uint32_t> stray_support_;  // sensor indices with p > 0
  float stray_max_ = 0.0f;
};

/// Receives frames in index order. Returning false stops the stream.
using FrameSink = std::function<bool(const FrameBuffer&)>;

struct StreamOptions {
  unsigned workers = 1;
  std::uint64_t chunk_frames = 4096;
  std::uint64_t first_frame = 0;
};

/// Generates frames [first, first + count) and delivers them in order. Frames
/// are produced in parallel chunks; the output does not depend on `workers`.
/// Returns the aggregated loss counters.
LossCounters generate_stream(const Simulator& simulator, std::uint64_t count, const FrameSink& sink,
                             const StreamOptions& options = {});

}  // namespace spadcorr
