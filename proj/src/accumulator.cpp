#include "spadcorr/accumulator.hpp"

#include <algorithm>

#include "binary_io.hpp"
#include "spadcorr/errors.hpp"

namespace spadcorr {

namespace {

constexpr std::array<std::uint8_t, 4> kSnapshotMagic{'S', 'P', 'J', 'A'};
constexpr std::uint16_t kSnapshotVersion = 1;

void add_into(std::vector<std::uint64_t>& dst, const std::vector<std::uint64_t>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

void CoincidenceCounts::add(const CoincidenceCounts& other) {
  add_into(same, other.same);
  add_into(previous, other.previous);
}

std::size_t JpdAccumulator::full_mode_bytes(const SensorGeometry& geometry) noexcept {
  const std::size_t s = geometry.roi_size();
  return 2 * s * s * sizeof(std::uint64_t);
}

JpdAccumulator::JpdAccumulator(const SensorGeometry& geometry, AccumulatorOptions options)
    : geometry_(geometry), options_(std::move(options)), s_(geometry.roi_size()) {
  xs_.resize(s_);
  ys_.resize(s_);
  for (std::size_t i = 0; i < s_; ++i) {
    const PixelCoord c = geometry_.roi_coord(i);
    xs_[i] = c.x;
    ys_[i] = c.y;
  }
  singles_.assign(s_, 0);
  current_mask_.assign(s_, 0);
  previous_mask_.assign(s_, 0);

  if (options_.mode == AccumulationMode::Full) {
    const std::size_t need = full_mode_bytes(geometry_);
    if (need > options_.memory_budget_bytes) {
      throw ResourceError("FULL mode needs " + std::to_string(need >> 20) + " MiB of counters for a " +
                          std::to_string(geometry_.roi().width) + "x" +
                          std::to_string(geometry_.roi().height) + " roi (budget " +
                          std::to_string(options_.memory_budget_bytes >> 20) +
                          " MiB); use PROJECTION_ONLY mode or a smaller roi");
    }
    dense_.resize(s_ * s_);
    return;
  }

  const auto& plan = options_.plan;
  antidiagonal_.resize(s_);
  const auto grid = static_cast<std::size_t>(offset_grid_width()) * static_cast<std::size_t>(offset_grid_height());
  sum_.resize(grid);
  minus_.resize(grid);
  const int hw = geometry_.half_width();
  const int hh = geometry_.half_height();
  for (const auto& [x1, x2] : plan.column_pairs) {
    if (std::abs(x1) > hw || std::abs(x2) > hw) {
      throw OutOfRangeError("column pair (" + std::to_string(x1) + "," + std::to_string(x2) + ") outside the roi");
    }
    columns_.emplace_back().resize(static_cast<std::size_t>(geometry_.roi().height) * geometry_.roi().height);
  }
  for (const auto& [y1, y2] : plan.row_pairs) {
    if (std::abs(y1) > hh || std::abs(y2) > hh) {
      throw OutOfRangeError("row pair (" + std::to_string(y1) + "," + std::to_string(y2) + ") outside the roi");
    }
    rows_.emplace_back().resize(static_cast<std::size_t>(geometry_.roi().width) * geometry_.roi().width);
  }
  for (const PixelCoord r : plan.references) {
    if (!geometry_.in_roi(r)) throw OutOfRangeError("reference pixel " + to_string(r) + " outside the roi");
    reference_index_.push_back(geometry_.roi_index(r));
    conditionals_.emplace_back().resize(s_);
  }
}

void JpdAccumulator::require_mode(AccumulationMode mode, const char* what) const {
  if (options_.mode != mode) {
    throw UnsupportedOperation(std::string(what) +
                               (mode == AccumulationMode::Full ? " requires FULL mode"
                                                               : " requires PROJECTION_ONLY mode"));
  }
}

const CoincidenceCounts& JpdAccumulator::dense() const {
  require_mode(AccumulationMode::Full, "dense counters");
  return dense_;
}
const CoincidenceCounts& JpdAccumulator::antidiagonal_counts() const {
  require_mode(AccumulationMode::ProjectionOnly, "streamed anti-diagonal");
  return antidiagonal_;
}
const CoincidenceCounts& JpdAccumulator::sum_counts() const {
  require_mode(AccumulationMode::ProjectionOnly, "streamed sum projection");
  return sum_;
}
const CoincidenceCounts& JpdAccumulator::minus_counts() const {
  require_mode(AccumulationMode::ProjectionOnly, "streamed minus projection");
  return minus_;
}
const CoincidenceCounts& JpdAccumulator::column_counts(std::size_t plan_index) const {
  require_mode(AccumulationMode::ProjectionOnly, "streamed column pair");
  return columns_.at(plan_index);
}
const CoincidenceCounts& JpdAccumulator::row_counts(std::size_t plan_index) const {
  require_mode(AccumulationMode::ProjectionOnly, "streamed row pair");
  return rows_.at(plan_index);
}
const CoincidenceCounts& JpdAccumulator::conditional_counts(std::size_t plan_index) const {
  require_mode(AccumulationMode::ProjectionOnly, "streamed conditional");
  return conditionals_.at(plan_index);
}

void JpdAccumulator::check_frame(const FrameBuffer& frame) const {
  if (!(frame.geometry() == geometry_)) throw ConfigError("frame geometry does not match the accumulator");
  if (!frame.is_binary()) {
    throw DomainError("accumulate expects preprocessed binary frames (values in {0,1})");
  }
}

void JpdAccumulator::prime(const FrameBuffer& previous) {
  check_frame(previous);
  scratch_.clear();
  collect_active_roi(previous, scratch_);
  const std::vector<std::uint32_t> active = scratch_;
  prime_active(previous.frame_index(), active);
}

void JpdAccumulator::prime_active(std::uint64_t frame_index, std::span<const std::uint32_t> active) {
  if (frames_ != 0 || primed_) throw UnsupportedOperation("prime must precede every accumulated frame");
  primed_ = true;
  prime_frame_ = frame_index;
  prime_active_.assign(active.begin(), active.end());
  previous_active_ = prime_active_;
  has_previous_ = true;
  for (auto i : previous_active_) previous_mask_[i] = 1;
}

void JpdAccumulator::accumulate(const FrameBuffer& frame) {
  check_frame(frame);
  scratch_.clear();
  collect_active_roi(frame, scratch_);
  const std::vector<std::uint32_t> active = scratch_;
  accumulate_active(frame.frame_index(), active);
}

void JpdAccumulator::accumulate_active(std::uint64_t frame_index, std::span<const std::uint32_t> active) {
  if (frames_ > 0 ? frame_index != last_frame_ + 1 : (primed_ && frame_index != prime_frame_ + 1)) {
    throw ConfigError("frames must arrive in index order (got " + std::to_string(frame_index) + ")");
  }
  for (auto i : active) {
    if (i >= s_) throw OutOfRangeError("active pixel index outside the roi");
  }
  if (frames_ == 0) first_frame_ = frame_index;

  for (auto i : active) ++singles_[i];
  if (options_.mode == AccumulationMode::Full) {
    accumulate_full(active);
  } else {
    accumulate_projections(active);
  }

  if (has_previous_) ++cross_terms_;
  ++frames_;
  last_frame_ = frame_index;
  has_previous_ = true;
  previous_active_.assign(active.begin(), active.end());
}

void JpdAccumulator::accumulate_full(std::span<const std::uint32_t> active) {
  const std::size_t s = s_;
  std::uint64_t* c = dense_.same.data();
  std::uint64_t* a = dense_.previous.data();
  for (auto i : active) {
    std::uint64_t* crow = c + static_cast<std::size_t>(i) * s;
    for (auto j : active) ++crow[j];
    if (has_previous_) {
      std::uint64_t* arow = a + static_cast<std::size_t>(i) * s;
      for (auto j : previous_active_) ++arow[j];
    }
  }
}

void JpdAccumulator::accumulate_projections(std::span<const std::uint32_t> active) {
  const auto& plan = options_.plan;
  const std::span<const std::uint32_t> prev =
      has_previous_ ? std::span<const std::uint32_t>(previous_active_) : std::span<const std::uint32_t>();
  for (auto i : active) current_mask_[i] = 1;

  for (auto i : active) {
    const std::size_t m = s_ - 1 - i;
    antidiagonal_.same[i] += current_mask_[m];
    antidiagonal_.previous[i] += previous_mask_[m];
  }

  const auto histogram = [&](std::span<const std::uint32_t> others, std::vector<std::uint64_t>& sums,
                             std::vector<std::uint64_t>& minus) {
    for (auto i : active) {
      const int xi = xs_[i];
      const int yi = ys_[i];
      for (auto j : others) {
        const int dx = xi - xs_[j];
        const int dy = yi - ys_[j];
        if (!pair_excluded(plan.sum_filter, dx, dy)) ++sums[offset_index(xi + xs_[j], yi + ys_[j])];
        if (!pair_excluded(plan.minus_filter, dx, dy)) ++minus[offset_index(dx, dy)];
      }
    }
  };
  histogram(active, sum_.same, minus_.same);
  histogram(prev, sum_.previous, minus_.previous);

  const int hh = geometry_.half_height();
  const int hw = geometry_.half_width();
  const auto h = static_cast<std::size_t>(geometry_.roi().height);
  const auto w = static_cast<std::size_t>(geometry_.roi().width);
  for (std::size_t k = 0; k < plan.column_pairs.size(); ++k) {
    const auto [x1, x2] = plan.column_pairs[k];
    auto& counts = columns_[k];
    for (auto i : active) {
      if (xs_[i] != x1) continue;
      const auto row = static_cast<std::size_t>(ys_[i] + hh) * h;
      for (auto j : active) {
        if (xs_[j] == x2) ++counts.same[row + static_cast<std::size_t>(ys_[j] + hh)];
      }
      for (auto j : prev) {
        if (xs_[j] == x2) ++counts.previous[row + static_cast<std::size_t>(ys_[j] + hh)];
      }
    }
  }
  for (std::size_t k = 0; k < plan.row_pairs.size(); ++k) {
    const auto [y1, y2] = plan.row_pairs[k];
    auto& counts = rows_[k];
    for (auto i : active) {
      if (ys_[i] != y1) continue;
      const auto row = static_cast<std::size_t>(xs_[i] + hw) * w;
      for (auto j : active) {
        if (ys_[j] == y2) ++counts.same[row + static_cast<std::size_t>(xs_[j] + hw)];
      }
      for (auto j : prev) {
        if (ys_[j] == y2) ++counts.previous[row + static_cast<std::size_t>(xs_[j] + hw)];
      }
    }
  }
  for (std::size_t k = 0; k < reference_index_.size(); ++k) {
    const std::size_t ref = reference_index_[k];
    auto& counts = conditionals_[k];
    if (current_mask_[ref] != 0) {
      for (auto i : active) ++counts.same[i];
    }
    if (previous_mask_[ref] != 0) {
      for (auto i : active) ++counts.previous[i];
    }
  }

  for (auto j : prev) previous_mask_[j] = 0;
  for (auto i : active) {
    previous_mask_[i] = 1;
    current_mask_[i] = 0;
  }
}

void JpdAccumulator::add_counters(const JpdAccumulator& other) {
  if (!(geometry_ == other.geometry_) || options_.mode != other.options_.mode ||
      !(options_.plan == other.options_.plan)) {
    throw ConfigError("accumulators differ in geometry, mode or projection plan");
  }
  add_into(singles_, other.singles_);
  if (options_.mode == AccumulationMode::Full) {
    dense_.add(other.dense_);
  } else {
    antidiagonal_.add(other.antidiagonal_);
    sum_.add(other.sum_);
    minus_.add(other.minus_);
    for (std::size_t k = 0; k < columns_.size(); ++k) columns_[k].add(other.columns_[k]);
    for (std::size_t k = 0; k < rows_.size(); ++k) rows_[k].add(other.rows_[k]);
    for (std::size_t k = 0; k < conditionals_.size(); ++k) conditionals_[k].add(other.conditionals_[k]);
  }
  frames_ += other.frames_;
  cross_terms_ += other.cross_terms_;
}

void JpdAccumulator::pool(const JpdAccumulator& other) { add_counters(other); }

JpdAccumulator JpdAccumulator::merge(const JpdAccumulator& a, const JpdAccumulator& b) {
  JpdAccumulator out = a;
  out.extend(b);
  return out;
}

void JpdAccumulator::extend(const JpdAccumulator& next) {
  if (next.empty()) {
    add_counters(next);  // validates compatibility; adds nothing
    return;
  }
  if (empty()) {
    JpdAccumulator copy = next;
    copy.add_counters(*this);
    *this = std::move(copy);
    return;
  }
  if (next.first_frame_ != last_frame_ + 1) {
    throw ConfigError("merge requires consecutive ranges (first ends at " + std::to_string(last_frame_) +
                      ", second starts at " + std::to_string(next.first_frame_) + ")");
  }
  if (!next.primed_ || next.prime_frame_ != last_frame_ || next.prime_active_ != previous_active_) {
    throw ConfigError("merge requires the second accumulator to be primed with the last frame of the first");
  }
  add_counters(next);
  last_frame_ = next.last_frame_;
  for (auto i : previous_active_) previous_mask_[i] = 0;
  previous_active_ = next.previous_active_;
  for (auto i : previous_active_) previous_mask_[i] = 1;
}

bool JpdAccumulator::same_counts(const JpdAccumulator& o) const {
  return geometry_ == o.geometry_ && options_.mode == o.options_.mode && options_.plan == o.options_.plan &&
         frames_ == o.frames_ && cross_terms_ == o.cross_terms_ && singles_ == o.singles_ &&
         dense_ == o.dense_ && antidiagonal_ == o.antidiagonal_ && sum_ == o.sum_ && minus_ == o.minus_ &&
         columns_ == o.columns_ && rows_ == o.rows_ && conditionals_ == o.conditionals_;
}

// Snapshot layout (little-endian): magic "SPJA", u16 version, geometry
// (u16 width, u16 height, i32 origin col/row, i32 roi col0/row0/width/height),
// u8 mode, u64 memory budget, plan, stream state, then every counter vector
// as u64 length + u64 values in declaration order.
std::vector<std::uint8_t> JpdAccumulator::serialize() const {
  detail::ByteWriter w;
  w.put_bytes(kSnapshotMagic);
  w.put(kSnapshotVersion);
  w.put(static_cast<std::uint16_t>(geometry_.width()));
  w.put(static_cast<std::uint16_t>(geometry_.height()));
  w.put(static_cast<std::int32_t>(geometry_.origin().col));
  w.put(static_cast<std::int32_t>(geometry_.origin().row));
  const Roi& roi = geometry_.roi();
  for (int v : {roi.col0, roi.row0, roi.width, roi.height}) w.put(static_cast<std::int32_t>(v));
  w.put(static_cast<std::uint8_t>(options_.mode));
  w.put(static_cast<std::uint64_t>(options_.memory_budget_bytes));
  const auto& plan = options_.plan;
  w.put(static_cast<std::uint8_t>(plan.sum_filter));
  w.put(static_cast<std::uint8_t>(plan.minus_filter));
  for (const auto* pairs : {&plan.column_pairs, &plan.row_pairs}) {
    w.put(static_cast<std::uint32_t>(pairs->size()));
    for (const auto& [p, q] : *pairs) {
      w.put(static_cast<std::int32_t>(p));
      w.put(static_cast<std::int32_t>(q));
    }
  }
  w.put(static_cast<std::uint32_t>(plan.references.size()));
  for (const auto& r : plan.references) {
    w.put(static_cast<std::int32_t>(r.x));
    w.put(static_cast<std::int32_t>(r.y));
  }
  w.put(frames_);
  w.put(cross_terms_);
  w.put(first_frame_);
  w.put(last_frame_);
  w.put(static_cast<std::uint8_t>(primed_));
  w.put(prime_frame_);
  w.put_vector(prime_active_);
  w.put(static_cast<std::uint8_t>(has_previous_));
  w.put_vector(previous_active_);
  w.put_vector(singles_);
  const auto put_counts = [&w](const CoincidenceCounts& c) {
    w.put_vector(c.same);
    w.put_vector(c.previous);
  };
  put_counts(dense_);
  put_counts(antidiagonal_);
  put_counts(sum_);
  put_counts(minus_);
  for (const auto* group : {&columns_, &rows_, &conditionals_}) {
    for (const auto& c : *group) put_counts(c);
  }
  return w.bytes();
}

JpdAccumulator JpdAccumulator::deserialize(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  const auto magic = r.get_bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kSnapshotMagic.begin())) {
    throw IoError(IoError::Kind::MagicMismatch, "not an accumulator snapshot (bad magic)");
  }
  if (r.get<std::uint16_t>() != kSnapshotVersion) throw IoError(IoError::Kind::Format, "unsupported snapshot version");
  const int width = r.get<std::uint16_t>();
  const int height = r.get<std::uint16_t>();
  const ArrayPixel origin{r.get<std::int32_t>(), r.get<std::int32_t>()};
  Roi roi;
  roi.col0 = r.get<std::int32_t>();
  roi.row0 = r.get<std::int32_t>();
  roi.width = r.get<std::int32_t>();
  roi.height = r.get<std::int32_t>();
  AccumulatorOptions options;
  const auto mode = r.get<std::uint8_t>();
  if (mode > 1) throw IoError(IoError::Kind::Format, "invalid accumulator mode");
  options.mode = static_cast<AccumulationMode>(mode);
  options.memory_budget_bytes = static_cast<std::size_t>(r.get<std::uint64_t>());
  const auto filter = [&r] {
    const auto f = r.get<std::uint8_t>();
    if (f > 2) throw IoError(IoError::Kind::Format, "invalid pair filter");
    return static_cast<PairFilter>(f);
  };
  options.plan.sum_filter = filter();
  options.plan.minus_filter = filter();
  for (auto* pairs : {&options.plan.column_pairs, &options.plan.row_pairs}) {
    const auto n = r.get<std::uint32_t>();
    for (std::uint32_t k = 0; k < n; ++k) {
      const int p = r.get<std::int32_t>();
      const int q = r.get<std::int32_t>();
      pairs->emplace_back(p, q);
    }
  }
  const auto nref = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < nref; ++k) {
    const int x = r.get<std::int32_t>();
    const int y = r.get<std::int32_t>();
    options.plan.references.push_back({x, y});
  }

  JpdAccumulator acc(SensorGeometry(width, height, origin, roi), options);
  acc.frames_ = r.get<std::uint64_t>();
  acc.cross_terms_ = r.get<std::uint64_t>();
  acc.first_frame_ = r.get<std::uint64_t>();
  acc.last_frame_ = r.get<std::uint64_t>();
  acc.primed_ = r.get<std::uint8_t>() != 0;
  acc.prime_frame_ = r.get<std::uint64_t>();
  acc.prime_active_ = r.get_vector<std::uint32_t>();
  acc.has_previous_ = r.get<std::uint8_t>() != 0;
  acc.previous_active_ = r.get_vector<std::uint32_t>();
  for (auto i : acc.previous_active_) {
    if (i >= acc.s_) throw IoError(IoError::Kind::Format, "snapshot pixel index outside the roi");
    acc.previous_mask_[i] = 1;
  }
  const auto get_exact = [&r](std::vector<std::uint64_t>& dst) {
    auto v = r.get_vector<std::uint64_t>();
    if (v.size() != dst.size()) throw IoError(IoError::Kind::Format, "snapshot counter size mismatch");
    dst = std::move(v);
  };
  const auto get_counts = [&](CoincidenceCounts& c) {
    get_exact(c.same);
    get_exact(c.previous);
  };
  get_exact(acc.singles_);
  get_counts(acc.dense_);
  get_counts(acc.antidiagonal_);
  get_counts(acc.sum_);
  get_counts(acc.minus_);
  for (auto* group : {&acc.columns_, &acc.rows_, &acc.conditionals_}) {
    for (auto& c : *group) get_counts(c);
  }
  if (!r.at_end()) throw IoError(IoError::Kind::Format, "trailing bytes in snapshot");
  return acc;
}

void JpdAccumulator::save(const std::filesystem::path& path) const {
  detail::write_file(path.string(), serialize());
}

JpdAccumulator JpdAccumulator::load(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  return deserialize(bytes);
}

}  // namespace spadcorr
