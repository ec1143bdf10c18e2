#include "spadcorr/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <numbers>

#include "spadcorr/errors.hpp"

namespace spadcorr {

LossCounters& LossCounters::operator+=(const LossCounters& o) noexcept {
  pairs += o.pairs;
  off_sensor += o.off_sensor;
  absorbed += o.absorbed;
  undetected += o.undetected;
  detected += o.detected;
  genuine_coincidences += o.genuine_coincidences;
  return *this;
}

namespace {

PixelCoord round_to_pixel(double x, double y) {
  return {static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))};
}

std::pair<double, double> sample_illumination(const Illumination& illumination, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double rho = 0.0;
  std::visit(
      [&](const auto& ill) {
        using T = std::decay_t<decltype(ill)>;
        if constexpr (std::is_same_v<T, DiskIllumination>) {
          rho = ill.radius * std::sqrt(unit(rng));
        } else {
          // Gaussian radial profile times the rho Jacobian, by rejection.
          std::normal_distribution<double> radial(ill.radius, ill.thickness);
          const double rho_max = ill.radius + 8.0 * ill.thickness;
          for (;;) {
            rho = radial(rng);
            if (rho <= 0.0 || rho >= rho_max) continue;
            if (unit(rng) * rho_max < rho) break;
          }
        }
      },
      illumination);
  const double theta = 2.0 * std::numbers::pi * unit(rng);
  return {rho * std::cos(theta), rho * std::sin(theta)};
}

bool survives(PixelCoord p, const SceneConfig& config, const SensorGeometry& geometry,
              std::mt19937_64& rng) {
  const double t = transmission(config, geometry, p);
  if (t >= 1.0) return true;
  if (t <= 0.0) return false;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < t;
}

}  // namespace

PairEvent sample_pair(const SceneConfig& config, std::mt19937_64& rng) {
  const auto [x, y] = sample_illumination(config.illumination, rng);
  const PixelCoord r1 = round_to_pixel(x, y);
  const double sigma =
      config.correlation_width + config.psf_broadening * std::hypot(double(r1.x), double(r1.y));
  std::normal_distribution<double> spread(0.0, sigma);
  const double dx = spread(rng);
  const double dy = spread(rng);
  return {r1, -r1 + round_to_pixel(dx, dy)};
}

std::vector<PixelCoord> apply_object(const PairEvent& event, const SceneConfig& config,
                                     const SensorGeometry& geometry, std::mt19937_64& rng) {
  std::vector<PixelCoord> out;
  out.reserve(2);
  for (const PixelCoord p : {event.r1, event.r2}) {
    if (survives(p, config, geometry, rng)) out.push_back(p);
  }
  return out;
}

Simulator::Simulator(SceneConfig config, SensorGeometry geometry, RngPolicy policy)
    : config_(std::move(config)), geometry_(geometry), policy_(policy) {
  warnings_ = validate(config_, geometry_);

  const auto n = geometry_.pixel_count();
  const auto hot_count =
      static_cast<std::size_t>(std::llround(config_.hot_pixel_fraction * static_cast<double>(n)));
  if (hot_count > 0) {
    std::vector<std::uint32_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<std::uint32_t>(i);
    auto rng = policy_.run_stream(RngStage::HotPixels);
    hot_pixels_.reserve(hot_count);
    std::sample(all.begin(), all.end(), std::back_inserter(hot_pixels_), hot_count, rng);
  }

  if (!config_.stray_light.empty()) {
    const auto& v = config_.stray_light.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] > 0.0f) {
        stray_support_.push_back(static_cast<std::uint32_t>(i));
        stray_max_ = std::max(stray_max_, v[i]);
      }
    }
  }
}

FrameBuffer Simulator::make_frame(std::uint64_t index) const {
  return FrameBuffer(geometry_, config_.bit_depth, index);
}

void Simulator::add_dark_counts(FrameBuffer& out, std::vector<std::uint32_t>& fired) const {
  const double p = config_.dark_count_prob;
  if (p <= 0.0) return;
  auto rng = policy_.substream(out.frame_index(), RngStage::DarkCounts);
  const auto n = geometry_.pixel_count();
  auto values = out.mutable_values();
  if (p >= 1.0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (values[i] == 0) fired.push_back(static_cast<std::uint32_t>(i));
      out.increment(i);
    }
    return;
  }
  std::geometric_distribution<std::uint64_t> skip(p);
  for (std::uint64_t i = skip(rng); i < n; i += 1 + skip(rng)) {
    if (values[i] == 0) fired.push_back(static_cast<std::uint32_t>(i));
    out.increment(i);
  }
}

void Simulator::add_stray_light(FrameBuffer& out, std::vector<std::uint32_t>& fired) const {
  if (stray_support_.empty()) return;
  auto rng = policy_.substream(out.frame_index(), RngStage::StrayLight);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  const auto& prob = config_.stray_light.values();
  auto values = out.mutable_values();
  // Thinning: candidate pixels at rate stray_max_, kept with p / stray_max_.
  const auto visit = [&](std::uint32_t idx) {
    const float p = prob[idx];
    if (p < stray_max_ && unit(rng) * stray_max_ >= p) return;
    if (values[idx] == 0) fired.push_back(idx);
    out.increment(idx);
  };
  if (stray_max_ >= 1.0f) {
    for (auto idx : stray_support_) visit(idx);
    return;
  }
  std::geometric_distribution<std::uint64_t> skip(stray_max_);
  for (std::uint64_t k = skip(rng); k < stray_support_.size(); k += 1 + skip(rng)) {
    visit(stray_support_[k]);
  }
}

void Simulator::add_crosstalk(FrameBuffer& out, const std::vector<std::uint32_t>& fired) const {
  const double p = config_.crosstalk_prob;
  if (p <= 0.0 || fired.empty()) return;
  static constexpr std::array<std::array<int, 2>, 8> kNeighbours{
      {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
  auto rng = policy_.substream(out.frame_index(), RngStage::Crosstalk);
  thread_local std::vector<std::uint32_t> triggered;
  triggered.clear();
  const std::uint64_t trials = 8 * fired.size();
  const auto w = static_cast<std::uint32_t>(geometry_.width());
  const auto try_trigger = [&](std::uint64_t t) {
    const std::uint32_t src = fired[t / 8];
    const auto& d = kNeighbours[t % 8];
    const ArrayPixel a{static_cast<int>(src % w) + d[0], static_cast<int>(src / w) + d[1]};
    if (geometry_.in_sensor(a)) triggered.push_back(static_cast<std::uint32_t>(geometry_.sensor_index(a)));
  };
  if (p >= 1.0) {
    for (std::uint64_t t = 0; t < trials; ++t) try_trigger(t);
  } else {
    std::geometric_distribution<std::uint64_t> skip(p);
    for (std::uint64_t t = skip(rng); t < trials; t += 1 + skip(rng)) try_trigger(t);
  }
  // Applied after sampling so triggered pixels do not cascade.
  for (auto idx : triggered) out.increment(idx);
}

void Simulator::detect_frame(std::span<const PixelCoord> photons, FrameBuffer& out,
                             LossCounters* counters) const {
  detect_photons(photons, out, counters, nullptr);
}

void Simulator::detect_photons(std::span<const PixelCoord> photons, FrameBuffer& out,
                               LossCounters* counters, std::vector<std::uint8_t>* detected) const {
  if (!(out.geometry() == geometry_)) throw ConfigError("frame geometry does not match the simulator");
  out.clear();
  thread_local std::vector<std::uint32_t> fired;
  fired.clear();
  auto values = out.mutable_values();

  if (detected != nullptr) detected->assign(photons.size(), 0);
  const double eta = config_.detection_efficiency;
  if (eta > 0.0 && !photons.empty()) {
    auto rng = policy_.substream(out.frame_index(), RngStage::Detection);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < photons.size(); ++k) {
      if (eta >= 1.0 || unit(rng) < eta) {
        const auto idx = geometry_.sensor_index(photons[k]);
        if (detected != nullptr) (*detected)[k] = 1;
        if (values[idx] == 0) fired.push_back(static_cast<std::uint32_t>(idx));
        out.increment(idx);
        if (counters != nullptr) ++counters->detected;
      } else if (counters != nullptr) {
        ++counters->undetected;
      }
    }
  } else if (counters != nullptr) {
    counters->undetected += photons.size();
  }

  add_dark_counts(out, fired);
  add_stray_light(out, fired);
  add_crosstalk(out, fired);
  for (auto idx : hot_pixels_) values[idx] = out.max_value();
}

void Simulator::generate_frame(std::uint64_t index, FrameBuffer& out, LossCounters* counters) const {
  out.set_frame_index(index);
  thread_local std::vector<PixelCoord> photons;
  thread_local std::vector<std::size_t> paired;  // index of first photon of fully surviving pairs
  photons.clear();
  paired.clear();

  auto rng = policy_.substream(index, RngStage::Pairs);
  std::poisson_distribution<int> pair_count(config_.mean_pairs_per_frame);
  const int n = pair_count(rng);
  LossCounters local;
  local.pairs = static_cast<std::uint64_t>(n);
  for (int k = 0; k < n; ++k) {
    const PairEvent ev = sample_pair(config_, rng);
    const std::size_t before = photons.size();
    for (const PixelCoord p : {ev.r1, ev.r2}) {
      if (!geometry_.in_sensor(p)) {
        ++local.off_sensor;
      } else if (survives(p, config_, geometry_, rng)) {
        photons.push_back(p);
      } else {
        ++local.absorbed;
      }
    }
    if (photons.size() == before + 2) paired.push_back(before);
  }

  thread_local std::vector<std::uint8_t> detected;
  detect_photons(photons, out, &local, counters != nullptr ? &detected : nullptr);
  if (counters == nullptr) return;
  for (auto first : paired) {
    if (detected[first] != 0 && detected[first + 1] != 0) ++local.genuine_coincidences;
  }
  *counters += local;
}

FrameBuffer Simulator::generate_frame(std::uint64_t index) const {
  FrameBuffer frame = make_frame(index);
  generate_frame(index, frame);
  return frame;
}

LossCounters generate_stream(const Simulator& simulator, std::uint64_t count, const FrameSink& sink,
                             const StreamOptions& options) {
  LossCounters total;
  const std::uint64_t chunk = std::max<std::uint64_t>(1, options.chunk_frames);
  const unsigned workers = std::max(1u, options.workers);
  const std::uint64_t end = options.first_frame + count;

  if (workers == 1) {
    FrameBuffer frame = simulator.make_frame();
    for (std::uint64_t i = options.first_frame; i < end; ++i) {
      simulator.generate_frame(i, frame, &total);
      if (!sink(frame)) break;
    }
    return total;
  }

  struct Chunk {
    std::vector<FrameBuffer> frames;
    LossCounters counters;
  };
  const auto produce = [&simulator](std::uint64_t first, std::uint64_t last) {
    Chunk c;
    c.frames.reserve(last - first);
    for (std::uint64_t i = first; i < last; ++i) {
      c.frames.push_back(simulator.make_frame(i));
      simulator.generate_frame(i, c.frames.back(), &c.counters);
    }
    return c;
  };
  // Out-of-order production, in-order delivery: one batch of `workers` chunks
  // in flight, drained front to back.
  for (std::uint64_t next = options.first_frame; next < end;) {
    std::vector<std::future<Chunk>> batch;
    for (unsigned w = 0; w < workers && next < end; ++w) {
      const std::uint64_t last = std::min(end, next + chunk);
      batch.push_back(std::async(std::launch::async, produce, next, last));
      next = last;
    }
    for (auto& f : batch) {
      Chunk c = f.get();
      total += c.counters;
      for (const auto& frame : c.frames) {
        if (!sink(frame)) return total;
      }
    }
  }
  return total;
}

}  // namespace spadcorr
