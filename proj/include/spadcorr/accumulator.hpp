#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "spadcorr/frame.hpp"

namespace spadcorr {

enum class AccumulationMode : std::uint8_t {
  /// Dense s x s counters for C and A.
  Full = 0,
  /// Only the planned projections, accumulated without the dense array.
  ProjectionOnly = 1,
};

/// Pixel pairs excluded from the sum / minus projections.
enum class PairFilter : std::uint8_t {
  None = 0,
  /// r_i == r_j: the self-product I(r)^2, not a two-pixel coincidence.
  Diagonal = 1,
  /// |r_i - r_j|_inf <= 1: the 3x3 crosstalk block.
  Crosstalk = 2,
};

[[nodiscard]] constexpr bool pair_excluded(PairFilter filter, int dx, int dy) noexcept {
  switch (filter) {
    case PairFilter::None:
      return false;
    case PairFilter::Diagonal:
      return dx == 0 && dy == 0;
    case PairFilter::Crosstalk:
      return dx >= -1 && dx <= 1 && dy >= -1 && dy <= 1;
  }
  return false;
}

/// What a PROJECTION_ONLY accumulator records besides singles, the
/// anti-diagonal and the sum/minus histograms.
struct ProjectionPlan {
  PairFilter sum_filter = PairFilter::Crosstalk;
  PairFilter minus_filter = PairFilter::Diagonal;
  /// (x1, x2) column pairs, centred coordinates.
  std::vector<std::pair<int, int>> column_pairs;
  /// (y1, y2) row pairs, centred coordinates.
  std::vector<std::pair<int, int>> row_pairs;
  /// Reference pixels R for conditional images Gamma(., R).
  std::vector<PixelCoord> references;

  bool operator==(const ProjectionPlan&) const = default;
};

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{256} << 20;

struct AccumulatorOptions {
  AccumulationMode mode = AccumulationMode::ProjectionOnly;
  ProjectionPlan plan;
  /// FULL mode refuses ROIs whose dense counters exceed this.
  std::size_t memory_budget_bytes = kDefaultMemoryBudget;
};

/// Same-frame (C) and previous-frame (A) integer counters over one index space.
struct CoincidenceCounts {
  std::vector<std::uint64_t> same;
  std::vector<std::uint64_t> previous;

  void resize(std::size_t n) {
    same.assign(n, 0);
    previous.assign(n, 0);
  }
  void add(const CoincidenceCounts& other);
  bool operator==(const CoincidenceCounts&) const = default;
};

/// Streaming estimator state for Gamma_M = C/frames - A/cross_terms.
///
/// C counts I_l(r_i) I_l(r_j) over every accumulated frame; A counts
/// I_l(r_i) I_{l-1}(r_j) for every frame that has a predecessor (the previous
/// accumulated frame, or the priming frame for the first one). Counters are
/// exact integers; normalisation happens only at query time.
class JpdAccumulator {
 public:
  explicit JpdAccumulator(const SensorGeometry& geometry, AccumulatorOptions options = {});

  /// Dense counter bytes a FULL accumulator would need for `geometry`.
  static std::size_t full_mode_bytes(const SensorGeometry& geometry) noexcept;

  /// Registers the frame preceding this accumulator's range without counting
  /// it, so the first accumulated frame contributes a cross term.
  void prime(const FrameBuffer& previous);
  void prime_active(std::uint64_t frame_index, std::span<const std::uint32_t> active);

  /// Adds one preprocessed (binary) frame. Frames must arrive in index order.
  void accumulate(const FrameBuffer& frame);
  /// Same as accumulate() given the sorted ROI indices of the lit pixels.
  void accumulate_active(std::uint64_t frame_index, std::span<const std::uint32_t> active);

  /// Combines accumulators over consecutive frame ranges; `b` must have been
  /// primed with the last frame of `a`. Exact: equals single-pass accumulation.
  static JpdAccumulator merge(const JpdAccumulator& a, const JpdAccumulator& b);
  /// In-place merge: *this = merge(*this, next).
  void extend(const JpdAccumulator& next);

  /// Adds the counters of `other` without any continuity check. Used to pool
  /// blocks for resampling; the result is still an unbiased estimator.
  void pool(const JpdAccumulator& other);

  [[nodiscard]] const SensorGeometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] const AccumulatorOptions& options() const noexcept { return options_; }
  [[nodiscard]] AccumulationMode mode() const noexcept { return options_.mode; }
  [[nodiscard]] std::size_t roi_size() const noexcept { return s_; }

  [[nodiscard]] std::uint64_t frames() const noexcept { return frames_; }
  [[nodiscard]] std::uint64_t cross_terms() const noexcept { return cross_terms_; }
  [[nodiscard]] bool empty() const noexcept { return frames_ == 0; }
  [[nodiscard]] std::uint64_t first_frame() const noexcept { return first_frame_; }
  [[nodiscard]] std::uint64_t last_frame() const noexcept { return last_frame_; }
  [[nodiscard]] bool primed() const noexcept { return primed_; }
  [[nodiscard]] std::uint64_t prime_frame() const noexcept { return prime_frame_; }

  /// Per-pixel sum of frames over the ROI.
  [[nodiscard]] const std::vector<std::uint64_t>& singles() const noexcept { return singles_; }
  /// FULL mode: row-major [i * s + j] counters.
  [[nodiscard]] const CoincidenceCounts& dense() const;
  /// PROJECTION_ONLY mode counters.
  [[nodiscard]] const CoincidenceCounts& antidiagonal_counts() const;
  [[nodiscard]] const CoincidenceCounts& sum_counts() const;
  [[nodiscard]] const CoincidenceCounts& minus_counts() const;
  [[nodiscard]] const CoincidenceCounts& column_counts(std::size_t plan_index) const;
  [[nodiscard]] const CoincidenceCounts& row_counts(std::size_t plan_index) const;
  [[nodiscard]] const CoincidenceCounts& conditional_counts(std::size_t plan_index) const;

  /// Width / height of the sum and minus histograms: offsets span
  /// [-2 * half, 2 * half] on each axis.
  [[nodiscard]] int offset_grid_width() const noexcept { return 4 * geometry_.half_width() + 1; }
  [[nodiscard]] int offset_grid_height() const noexcept { return 4 * geometry_.half_height() + 1; }
  [[nodiscard]] std::size_t offset_index(int dx, int dy) const noexcept {
    return static_cast<std::size_t>(dy + 2 * geometry_.half_height()) *
               static_cast<std::size_t>(offset_grid_width()) +
           static_cast<std::size_t>(dx + 2 * geometry_.half_width());
  }

  /// Counter equality (ignores the memory budget).
  [[nodiscard]] bool same_counts(const JpdAccumulator& other) const;

  void save(const std::filesystem::path& path) const;
  static JpdAccumulator load(const std::filesystem::path& path);
  [[nodiscard]] std::vector<std::uint8_t> serialize() const;
  static JpdAccumulator deserialize(std::span<const std::uint8_t> bytes);

 private:
  void require_mode(AccumulationMode mode, const char* what) const;
  void check_frame(const FrameBuffer& frame) const;
  void accumulate_full(std::span<const std::uint32_t> active);
  void accumulate_projections(std::span<const std::uint32_t> active);
  void add_counters(const JpdAccumulator& other);

  SensorGeometry geometry_;
  AccumulatorOptions options_;
  std::size_t s_;
  std::vector<int> xs_;  // centred coordinates of ROI indices
  std::vector<int> ys_;
  std::vector<std::size_t> reference_index_;

  std::uint64_t frames_ = 0;
  std::uint64_t cross_terms_ = 0;
  std::uint64_t first_frame_ = 0;
  std::uint64_t last_frame_ = 0;
  bool primed_ = false;
  std::uint64_t prime_frame_ = 0;
  std::vector<std::uint32_t> prime_active_;
  bool has_previous_ = false;
  std::vector<std::uint32_t> previous_active_;

  std::vector<std::uint8_t> current_mask_;  // scratch bitmaps over the ROI
  std::vector<std::uint8_t> previous_mask_;
  std::vector<std::uint32_t> scratch_;

  std::vector<std::uint64_t> singles_;
  CoincidenceCounts dense_;
  CoincidenceCounts antidiagonal_;
  CoincidenceCounts sum_;
  CoincidenceCounts minus_;
  std::vector<CoincidenceCounts> columns_;
  std::vector<CoincidenceCounts> rows_;
  std::vector<CoincidenceCounts> conditionals_;
};

}  // namespace spadcorr
