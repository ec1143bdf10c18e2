#pragma once

#include <cstdint>
#include <random>

namespace spadcorr {

/// Independent random streams used while generating one frame. Keeping them
/// separate means e.g. adding stray light leaves the pair realisations intact.
enum class RngStage : std::uint32_t {
  Pairs = 1,
  DarkCounts = 2,
  StrayLight = 3,
  Crosstalk = 4,
  HotPixels = 5,
  Detection = 6,
};

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-frame substream derivation: frame l under master seed S always sees the
/// same generator state, whichever thread produces it.
struct RngPolicy {
  std::uint64_t master_seed = 0;

  [[nodiscard]] std::uint64_t substream_seed(std::uint64_t frame_index, RngStage stage) const noexcept {
    return mix64(mix64(master_seed ^ mix64(frame_index)) + static_cast<std::uint64_t>(stage));
  }

  [[nodiscard]] std::mt19937_64 substream(std::uint64_t frame_index, RngStage stage) const {
    return std::mt19937_64(substream_seed(frame_index, stage));
  }

  /// Stream for run-level quantities (e.g. the hot pixel set), not tied to a frame.
  [[nodiscard]] std::mt19937_64 run_stream(RngStage stage) const {
    return std::mt19937_64(mix64(master_seed + 0x5bd1e995ULL * static_cast<std::uint64_t>(stage)));
  }
};

}  // namespace spadcorr
