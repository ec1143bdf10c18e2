#include "spadcorr/reconstruct.hpp"

#include <algorithm>
#include <future>

#include "spadcorr/errors.hpp"
#include "spadcorr/spdf.hpp"

namespace spadcorr {

namespace {

// Turns raw payload bytes into sorted ROI indices of lit pixels.
class ActiveExtractor {
 public:
  ActiveExtractor(const FrameFileHeader& header, const SensorGeometry& geometry,
                  const std::optional<HotPixelMap>& hot)
      : header_(header), geometry_(geometry), hot_(hot) {
    if (hot_ && !hot_->pixels.empty() &&
        (hot_->width != geometry.width() || hot_->height != geometry.height())) {
      throw ConfigError("hot pixel map size does not match the frames");
    }
  }

  void operator()(std::span<const std::uint8_t> payload, FrameBuffer& raw, FrameBuffer& clean,
                  std::vector<std::uint32_t>& out) const {
    out.clear();
    if (header_.bit_depth == 1 && (!hot_ || hot_->pixels.empty())) {
      collect_active_roi_packed(payload, geometry_, out);
      return;
    }
    unpack_frame(payload, raw);
    preprocess_into(raw, hot_ ? *hot_ : HotPixelMap{}, clean);
    collect_active_roi(clean, out);
  }

  [[nodiscard]] FrameBuffer make_raw() const { return FrameBuffer(geometry_, header_.bit_depth); }
  [[nodiscard]] FrameBuffer make_clean() const { return FrameBuffer(geometry_, 1); }

 private:
  FrameFileHeader header_;
  SensorGeometry geometry_;
  std::optional<HotPixelMap> hot_;
};

struct Chunk {
  std::uint64_t first = 0;
  std::uint64_t count = 0;
  std::vector<std::uint8_t> bytes;
  std::optional<std::vector<std::uint32_t>> prime;
};

}  // namespace

JpdAccumulator reconstruct_file(const std::filesystem::path& path, const ReconstructOptions& options,
                                const CheckpointSink& on_checkpoint) {
  std::optional<SpdfReader> reader;
  if (options.geometry) {
    reader.emplace(path, *options.geometry);
  } else {
    reader.emplace(path);
  }
  const SensorGeometry geometry = reader->geometry();
  const FrameFileHeader header = reader->header();
  JpdAccumulator total(geometry, options.accumulator);
  const ActiveExtractor extract(header, geometry, options.hot_pixels);

  unsigned workers = std::max(1u, options.workers);
  if (options.accumulator.mode == AccumulationMode::Full) {
    const std::size_t per = JpdAccumulator::full_mode_bytes(geometry);
    const auto fit = per == 0 ? workers : static_cast<unsigned>(options.accumulator.memory_budget_bytes / per);
    workers = std::clamp(fit, 1u, workers);
  }

  const std::uint64_t end = std::min(header.frame_count, options.max_frames.value_or(header.frame_count));
  std::vector<std::uint64_t> checkpoints = options.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  auto next_checkpoint = checkpoints.begin();
  while (next_checkpoint != checkpoints.end() && *next_checkpoint == 0) ++next_checkpoint;

  const std::size_t stride = header.frame_stride();
  const std::uint64_t chunk_frames = std::max<std::uint64_t>(1, options.chunk_frames);

  const auto run_chunk = [&](const Chunk& chunk) {
    JpdAccumulator acc(geometry, options.accumulator);
    FrameBuffer raw = extract.make_raw();
    FrameBuffer clean = extract.make_clean();
    std::vector<std::uint32_t> active;
    if (chunk.prime) acc.prime_active(chunk.first - 1, *chunk.prime);
    for (std::uint64_t k = 0; k < chunk.count; ++k) {
      extract(std::span(chunk.bytes).subspan(k * stride, stride), raw, clean, active);
      acc.accumulate_active(chunk.first + k, active);
    }
    return acc;
  };

  FrameBuffer raw = extract.make_raw();
  FrameBuffer clean = extract.make_clean();
  std::optional<std::vector<std::uint32_t>> last_active;
  std::uint64_t next = 0;
  while (next < end) {
    std::vector<Chunk> batch;
    std::vector<std::uint64_t> batch_checkpoints;
    for (unsigned w = 0; w < workers && next < end; ++w) {
      std::uint64_t last = std::min(end, next + chunk_frames);
      if (next_checkpoint != checkpoints.end() && *next_checkpoint < last) last = *next_checkpoint;
      Chunk chunk;
      chunk.first = next;
      chunk.count = last - next;
      chunk.bytes.resize(chunk.count * stride);
      for (std::uint64_t k = 0; k < chunk.count; ++k) {
        std::span<const std::uint8_t> payload;
        if (!reader->next_raw(payload)) throw IoError(IoError::Kind::Truncated, "stream ended early");
        std::copy(payload.begin(), payload.end(), chunk.bytes.begin() + static_cast<std::ptrdiff_t>(k * stride));
      }
      chunk.prime = last_active;
      last_active.emplace();
      extract(std::span(chunk.bytes).subspan((chunk.count - 1) * stride, stride), raw, clean, *last_active);
      batch.push_back(std::move(chunk));
      next = last;
      if (next_checkpoint != checkpoints.end() && *next_checkpoint == next) {
        batch_checkpoints.push_back(next);
        ++next_checkpoint;
      }
    }

    std::vector<JpdAccumulator> results;
    if (batch.size() == 1) {
      results.push_back(run_chunk(batch.front()));
    } else {
      std::vector<std::future<JpdAccumulator>> futures;
      for (const auto& chunk : batch) futures.push_back(std::async(std::launch::async, run_chunk, std::cref(chunk)));
      for (auto& f : futures) results.push_back(f.get());
    }
    for (std::size_t k = 0; k < results.size(); ++k) {
      total.extend(results[k]);
      const std::uint64_t done = batch[k].first + batch[k].count;
      if (on_checkpoint && std::find(batch_checkpoints.begin(), batch_checkpoints.end(), done) != batch_checkpoints.end()) {
        on_checkpoint(done, total);
      }
    }
  }
  return total;
}

JpdAccumulator accumulate_frames(std::span<const FrameBuffer> frames, const AccumulatorOptions& options,
                                 const HotPixelMap* hot_pixels) {
  if (frames.empty()) throw ConfigError("no frames to accumulate");
  JpdAccumulator acc(frames.front().geometry(), options);
  for (const auto& f : frames) {
    if (hot_pixels != nullptr || !f.is_binary()) {
      acc.accumulate(preprocess(f, hot_pixels ? *hot_pixels : HotPixelMap{}));
    } else {
      acc.accumulate(f);
    }
  }
  return acc;
}

}  // namespace spadcorr
