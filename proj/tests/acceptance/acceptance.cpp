// Acceptance suite: one function per criterion, each printing a single
// PASS/FAIL line. Usage: spadcorr_acceptance <n>|all

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>

#include "../support/oracle.hpp"
#include "spadcorr/accumulator.hpp"
#include "spadcorr/hot_pixels.hpp"
#include "spadcorr/projections.hpp"
#include "spadcorr/reconstruct.hpp"
#include "spadcorr/simulator.hpp"
#include "spadcorr/snr.hpp"
#include "spadcorr/spdf.hpp"
#include "spadcorr/width.hpp"

using namespace spadcorr;

namespace {

using Clock = std::chrono::steady_clock;

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Streams simulated frames (preprocessed when a hot map is given) into `acc`,
// calling `on_prefix` whenever the accumulated count reaches a checkpoint.
LossCounters simulate_into(const Simulator& sim, std::uint64_t frames, JpdAccumulator& acc,
                           const HotPixelMap* hot = nullptr, const std::vector<std::uint64_t>& checkpoints = {},
                           const std::function<void(std::uint64_t)>& on_prefix = {}) {
  FrameBuffer clean(sim.geometry(), 1);
  std::uint64_t done = 0;
  auto next = checkpoints.begin();
  StreamOptions opts;
  opts.workers = worker_count();
  return generate_stream(
      sim, frames,
      [&](const FrameBuffer& f) {
        if (hot != nullptr || f.bit_depth() != 1) {
          preprocess_into(f, hot ? *hot : HotPixelMap{}, clean);
          clean.set_frame_index(f.frame_index());
          acc.accumulate(clean);
        } else {
          acc.accumulate(f);
        }
        ++done;
        if (next != checkpoints.end() && *next == done) {
          on_prefix(done);
          ++next;
        }
        return true;
      },
      opts);
}

struct RegionStats {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

RegionStats region_stats(const ProjectionImage& img, const std::function<bool(PixelCoord)>& in_region) {
  std::vector<double> v;
  for (int y = img.y_min; y < img.y_min + img.height; ++y) {
    for (int x = img.x_min; x < img.x_min + img.width; ++x) {
      if (in_region({x, y})) v.push_back(img.at(x, y));
    }
  }
  RegionStats s;
  s.n = v.size();
  if (v.size() < 2) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return s;
}

// 1. Streaming counters equal the brute-force double loop.
Outcome criterion1() {
  const auto t0 = Clock::now();
  const auto g = SensorGeometry::centered(16, 16);
  SceneConfig cfg;
  cfg.mean_pairs_per_frame = 1.5;
  cfg.detection_efficiency = 0.5;
  cfg.correlation_width = 0.5;
  cfg.illumination = DiskIllumination{6.0};
  cfg.dark_count_prob = 0.02;
  cfg.crosstalk_prob = 0.05;
  cfg.bit_depth = 1;
  const Simulator sim(cfg, g, RngPolicy{101});
  constexpr std::uint64_t kFrames = 10000;

  AccumulatorOptions full;
  full.mode = AccumulationMode::Full;
  JpdAccumulator acc(g, full);
  testing::BruteForceJpd oracle(g.roi_size());
  FrameBuffer f = sim.make_frame();
  for (std::uint64_t l = 0; l < kFrames; ++l) {
    sim.generate_frame(l, f);
    acc.accumulate(f);
    oracle.add(testing::roi_bits(f));
  }
  const auto& d = acc.dense();
  const bool c_equal = d.same == oracle.c;
  const bool a_equal = d.previous == oracle.a;
  const DenseJpd gm = gamma(acc);
  double worst = 0.0;
  const std::size_t s = g.roi_size();
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) worst = std::max(worst, std::abs(gm.values[i * s + j] - oracle.gamma(i, j)));
  }
  std::uint64_t nonzero = 0;
  for (auto v : oracle.c) nonzero += v != 0;
  const double secs = seconds_since(t0);
  const bool pass = c_equal && a_equal && acc.frames() == kFrames && acc.cross_terms() == kFrames - 1 &&
                    worst < 1e-15 && nonzero > s && secs < 60.0;
  return {pass, fmt("C equal=%d A equal=%d (%llu nonzero C entries), max|Gamma-oracle|=%.2e, M=%llu, %.1fs", c_equal,
                    a_equal, static_cast<unsigned long long>(nonzero), worst,
                    static_cast<unsigned long long>(acc.frames()), secs)};
}

// 2. 4-way chunked accumulation merges to the single-pass counters.
Outcome criterion2() {
  const auto t0 = Clock::now();
  constexpr std::uint64_t kFrames = 10000;
  bool all_equal = true;
  int checks = 0;
  for (const auto mode : {AccumulationMode::Full, AccumulationMode::ProjectionOnly}) {
    const auto g = mode == AccumulationMode::Full ? SensorGeometry::centered(16, 16) : SensorGeometry::centered(64, 64);
    SceneConfig cfg;
    cfg.mean_pairs_per_frame = 2.0;
    cfg.detection_efficiency = 0.4;
    cfg.illumination = DiskIllumination{g.half_width() * 0.8};
    cfg.dark_count_prob = 0.003;
    cfg.crosstalk_prob = 0.02;
    cfg.bit_depth = 1;
    const Simulator sim(cfg, g, RngPolicy{202});
    AccumulatorOptions opts;
    opts.mode = mode;
    if (mode == AccumulationMode::ProjectionOnly) {
      opts.plan.column_pairs = {{-5, 5}, {3, 3}};
      opts.plan.row_pairs = {{-2, 7}};
      opts.plan.references = {{-6, 4}, {0, 0}};
    }
    std::vector<FrameBuffer> frames;
    frames.reserve(kFrames);
    for (std::uint64_t l = 0; l < kFrames; ++l) frames.push_back(sim.generate_frame(l));

    JpdAccumulator single(g, opts);
    for (const auto& f : frames) single.accumulate(f);

    const std::uint64_t bounds[] = {0, 1700, 5000, 5001, kFrames};
    std::vector<JpdAccumulator> parts;
    for (int k = 0; k < 4; ++k) {
      JpdAccumulator part(g, opts);
      if (bounds[k] > 0) part.prime(frames[bounds[k] - 1]);
      for (auto l = bounds[k]; l < bounds[k + 1]; ++l) part.accumulate(frames[l]);
      parts.push_back(std::move(part));
    }
    const auto& [a, b, c, d] = std::tie(parts[0], parts[1], parts[2], parts[3]);
    using J = JpdAccumulator;
    const J left = J::merge(J::merge(J::merge(a, b), c), d);
    const J right = J::merge(a, J::merge(b, J::merge(c, d)));
    const J pairs = J::merge(J::merge(a, b), J::merge(c, d));
    const J mixed = J::merge(J::merge(a, J::merge(b, c)), d);
    for (const J* m : {&left, &right, &pairs, &mixed}) {
      all_equal = all_equal && m->same_counts(single) && m->cross_terms() == kFrames - 1;
      ++checks;
    }
    const J restored = J::deserialize(left.serialize());
    all_equal = all_equal && restored.same_counts(single);
    ++checks;
  }
  const double secs = seconds_since(t0);
  return {all_equal && secs < 60.0,
          fmt("%d merge orders/snapshots over FULL 15x15 and PROJECTION_ONLY 63x63 equal single pass: %s, %.1fs",
              checks, all_equal ? "yes" : "no", secs)};
}

// 3. Half-plane object: mirrored dark region, SNR with default masks.
Outcome criterion3() {
  const auto t0 = Clock::now();
  const auto g = SensorGeometry::centered(64, 64);
  constexpr int kEdge = 8;
  SceneConfig cfg;
  cfg.mean_pairs_per_frame = 1.0;
  cfg.detection_efficiency = 0.3;
  cfg.correlation_width = 1.1;
  cfg.illumination = DiskIllumination{24.0};
  cfg.dark_count_prob = 1e-3;
  cfg.object_mask = make_half_plane_mask(g, 'x', kEdge);
  cfg.bit_depth = 1;
  const Simulator sim(cfg, g, RngPolicy{303});
  JpdAccumulator acc(g);
  simulate_into(sim, 1'000'000, acc);

  const ProjectionImage img = antidiagonal_image(acc);
  const SnrMeasurement snr = measure_snr(img, default_masks(cfg, g));
  const double r_in = 22.0;
  const auto inside = [r_in](PixelCoord r) { return std::hypot(r.x, r.y) <= r_in; };
  const RegionStats mirrored = region_stats(img, [&](PixelCoord r) { return inside(r) && r.x <= -(kEdge + 3); });
  const RegionStats lit =
      region_stats(img, [&](PixelCoord r) { return inside(r) && std::abs(r.x) <= kEdge - 3 && std::abs(r.y) > 1; });
  const double secs = seconds_since(t0);
  const bool dark = std::abs(mirrored.mean) < 3.0 * mirrored.se;
  const bool bright = lit.mean > 10.0 * lit.se;
  const bool pass = snr.snr >= 3.0 && dark && bright && secs < 600.0;
  return {pass, fmt("SNR=%.2f(%.2f) >= 3; mirrored region mean %.2e +- %.2e (n=%zu), transparent strip mean %.2e +- "
                    "%.2e; M=1e6, %.1fs",
                    snr.snr, snr.snr_err, mirrored.mean, mirrored.se, mirrored.n, lit.mean, lit.se, secs)};
}

// 4. Correlation width from the sum projection.
Outcome criterion4() {
  const auto t0 = Clock::now();
  const auto g = SensorGeometry::centered(64, 64);
  SceneConfig cfg;
  cfg.mean_pairs_per_frame = 2.0;
  cfg.detection_efficiency = 0.3;
  cfg.correlation_width = 1.1;
  cfg.illumination = DiskIllumination{24.0};
  cfg.dark_count_prob = 1e-4;
  cfg.bit_depth = 1;
  const Simulator sim(cfg, g, RngPolicy{404});
  JpdAccumulator acc(g);
  simulate_into(sim, 100'000, acc);
  const CorrelationWidth w = estimate_correlation_width(sum_projection(acc));
  const double secs = seconds_since(t0);
  const bool pass = std::abs(w.sigma - 1.1) <= 0.1 && secs < 300.0;
  return {pass, fmt("sigma=%.3f (x %.3f, y %.3f) vs 1.1 +- 0.1; peak at (%.2f, %.2f); M=1e5, %.1fs", w.sigma, w.sigma_x,
                    w.sigma_y, w.x0, w.y0, secs)};
}

// 5. SNR grows as sqrt(M) over prefix snapshots of one stream.
Outcome criterion5() {
  const auto t0 = Clock::now();
  const auto g = SensorGeometry::centered(64, 64);
  SceneConfig cfg;
  cfg.mean_pairs_per_frame = 1.0;
  cfg.detection_efficiency = 0.3;
  cfg.correlation_width = 1.1;
  cfg.illumination = DiskIllumination{24.0};
  cfg.dark_count_prob = 1e-3;
  cfg.bit_depth = 1;
  const Simulator sim(cfg, g, RngPolicy{505});
  const std::vector<std::uint64_t> grid{10'000, 30'000, 100'000, 300'000, 1'000'000};
  std::vector<std::vector<std::uint8_t>> snapshots;
  JpdAccumulator acc(g);
  simulate_into(sim, grid.back(), acc, nullptr, grid, [&](std::uint64_t) { snapshots.push_back(acc.serialize()); });

  const RegionMasks masks = split_masks(cfg, g);
  std::vector<ScalingPoint> points;
  std::ostringstream trace;
  for (const auto& bytes : snapshots) {
    const JpdAccumulator prefix = JpdAccumulator::deserialize(bytes);
    const SnrMeasurement m = measure_snr(antidiagonal_image(prefix), masks);
    points.push_back({static_cast<double>(prefix.frames()), m.snr, m.snr_err});
    trace << fmt(" %.0e:%.2f", static_cast<double>(prefix.frames()), m.snr);
  }
  const ScalingFit fit = fit_sqrt_scaling(points);
  const double secs = seconds_since(t0);
  const bool pass = fit.exponent >= 0.45 && fit.exponent <= 0.55 && fit.r2 >= 0.7 && secs < 900.0;
  return {pass, fmt("exponent=%.3f(%.3f) in [0.45,0.55], a=%.3e r2=%.3f >= 0.7; SNR%s; %.1fs", fit.exponent,
                    fit.exponent_err, fit.a, fit.r2, trace.str().c_str(), secs)};
}

// 6. Measured SNR vs the analytic model in three accidental regimes.
Outcome criterion6() {
  const auto t0 = Clock::now();
  const auto g = SensorGeometry::centered(64, 64);
  struct Regime {
    const char* name;
    double m;
    double n;
  };
  const Regime regimes[] = {{"low", 2.0, 0.0}, {"medium", 20.0, 10.0}, {"high", 20.0, 60.0}};
  constexpr double kFrames = 100'000;
  bool pass = true;
  std::ostringstream out;
  std::uint64_t seed = 600;
  for (const auto& r : regimes) {
    SceneConfig cfg;
    cfg.mean_pairs_per_frame = r.m;
    cfg.detection_efficiency = 0.1;
    cfg.correlation_width = 0.05;
    cfg.illumination = DiskIllumination{20.0};
    cfg.dark_count_prob = r.n / illuminated_pixel_count(cfg.illumination);
    cfg.bit_depth = 1;
    const Simulator sim(cfg, g, RngPolicy{++seed});
    JpdAccumulator acc(g);
    simulate_into(sim, static_cast<std::uint64_t>(kFrames), acc);
    const SnrMeasurement m = measure_snr(antidiagonal_image(acc), split_masks(cfg, g));
    const SnrParameters p = snr_parameters(cfg, g);
    const double predicted = predict_snr(p, kFrames);
    const double rel = std::abs(m.snr - predicted) / predicted;
    const double na_ratio = 2.0 * accidental_per_frame(p) / (p.illuminated_pixels * genuine_per_frame(p));
    pass = pass && rel <= 0.25;
    out << fmt(" %s(2Na/sNg=%.2f): measured %.2f(%.2f) predicted %.2f dev %.0f%%;", r.name, na_ratio, m.snr,
               m.snr_err, predicted, 100 * rel);
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 600.0, fmt("within 25%% at M=1e5:%s %.1fs", out.str().c_str(), secs)};
}

// 7. Ideal-scheme coefficient and the non-ideal fitted coefficient.
Outcome criterion7() {
  const auto t0 = Clock::now();
  SnrParameters ideal;
  ideal.eta = 0.026;
  ideal.illuminated_pixels = 17600;
  ideal.mean_pairs = 1e-4;
  const double a_t = ideal_coefficient(ideal);
  const bool factor2 = a_t >= 0.5e-6 && a_t <= 2e-6;
  const bool limit = std::abs(predict_ideal_snr(ideal, 1e6) - a_t * 1e3) <= 1e-12;

  // Matching camera (eta, beam radius 75 px) with multi-pair frames.
  const auto g = SensorGeometry::centered(151, 151);
  SceneConfig cfg;
  cfg.detection_efficiency = 0.026;
  cfg.illumination = DiskIllumination{75.0};
  cfg.mean_pairs_per_frame = 6.75;
  cfg.correlation_width = 0.05;
  cfg.dark_count_prob = 1e-4;
  cfg.bit_depth = 1;
  const Simulator sim(cfg, g, RngPolicy{707});
  const std::vector<std::uint64_t> grid{100'000, 300'000, 1'000'000};
  const RegionMasks masks = split_masks(cfg, g);
  std::vector<ScalingPoint> points;
  JpdAccumulator acc(g);
  simulate_into(sim, grid.back(), acc, nullptr, grid, [&](std::uint64_t) {
    const SnrMeasurement m = measure_snr(antidiagonal_image(acc), masks);
    points.push_back({static_cast<double>(acc.frames()), m.snr, m.snr_err});
  });
  const ScalingFit fit = fit_sqrt_scaling(points);
  const double predicted_a = predict_snr(snr_parameters(cfg, g), 1.0);
  const bool ratio = fit.a >= 10.0 * a_t;
  const double secs = seconds_since(t0);
  return {factor2 && limit && ratio,
          fmt("a_t=%.3e (factor-2 window [5e-7,2e-6]: %s); N_a=0 limit matches: %s; non-ideal fitted a=%.3e(%.1e) "
              "(model %.3e) = %.0fx a_t (>=10x: %s); %.1fs",
              a_t, factor2 ? "inside" : "OUTSIDE", limit ? "yes" : "no", fit.a, fit.a_err, predicted_a, fit.a / a_t,
              ratio ? "yes" : "no", secs)};
}

// 8. Stray classical light: visible in intensity, absent from Gamma, lowers SNR.
Outcome criterion8() {
  const auto t0 = Clock::now();
  const auto g = SensorGeometry::centered(64, 64);
  SceneConfig base;
  base.mean_pairs_per_frame = 2.0;
  base.detection_efficiency = 0.1;
  base.correlation_width = 0.05;
  base.illumination = DiskIllumination{20.0};
  base.dark_count_prob = 0.005;
  base.bit_depth = 1;
  // Lure on the x > 0 half, partly outside the beam; its mirror stays clean.
  const Roi lure{g.origin().col + 3, g.origin().row - 12, 14, 24};
  SceneConfig lured = base;
  lured.stray_light = make_rect_map(g, lure, 0.01f);
  const auto in_lure = [&](PixelCoord r) {
    const ArrayPixel a = g.to_array(r);
    return a.col >= lure.col0 && a.col < lure.col0 + lure.width && a.row >= lure.row0 &&
           a.row < lure.row0 + lure.height;
  };

  constexpr std::uint64_t kFrames = 1'000'000;
  JpdAccumulator clean_acc(g);
  JpdAccumulator lured_acc(g);
  simulate_into(Simulator(base, g, RngPolicy{808}), kFrames, clean_acc);
  simulate_into(Simulator(lured, g, RngPolicy{808}), kFrames, lured_acc);

  const ProjectionImage int_lured = intensity_image(lured_acc);
  const ProjectionImage int_clean = intensity_image(clean_acc);
  ProjectionImage int_diff = int_lured;
  for (std::size_t k = 0; k < int_diff.values.size(); ++k) int_diff.values[k] -= int_clean.values[k];
  const RegionStats lure_intensity = region_stats(int_diff, in_lure);

  const ProjectionImage ad_lured = antidiagonal_image(lured_acc);
  const ProjectionImage ad_clean = antidiagonal_image(clean_acc);
  ProjectionImage ad_diff = ad_lured;
  for (std::size_t k = 0; k < ad_diff.values.size(); ++k) ad_diff.values[k] -= ad_clean.values[k];
  const RegionStats shift = region_stats(ad_diff, in_lure);
  const RegionStats signal = region_stats(ad_clean, [&](PixelCoord r) {
    return in_lure(r) && std::hypot(r.x, r.y) <= 19.0;
  });

  const RegionMasks masks = split_masks(base, g);
  const SnrMeasurement snr_clean = measure_snr(ad_clean, masks);
  const SnrMeasurement snr_lured = measure_snr(ad_lured, masks);
  const double secs = seconds_since(t0);
  const bool visible = lure_intensity.mean > 10.0 * lure_intensity.se;
  const bool absent = std::abs(shift.mean) < 3.0 * shift.se;
  const bool lower = snr_lured.snr < snr_clean.snr;
  return {visible && absent && lower && secs < 600.0,
          fmt("lure intensity +%.2e (%.0f SE); Gamma shift over lure %.2e +- %.2e (%.1f SE, signal there %.2e); SNR "
              "%.2f(%.2f) -> %.2f(%.2f); %.1fs",
              lure_intensity.mean, lure_intensity.mean / lure_intensity.se, shift.mean, shift.se,
              shift.mean / shift.se, signal.mean, snr_clean.snr, snr_clean.snr_err, snr_lured.snr, snr_lured.snr_err,
              secs)};
}

// 9. Hot pixels and crosstalk.
Outcome criterion9() {
  const auto t0 = Clock::now();
  const auto g = SensorGeometry::centered(64, 64);
  SceneConfig cfg;
  cfg.mean_pairs_per_frame = 4.0;
  cfg.detection_efficiency = 0.4;
  cfg.correlation_width = 0.5;
  cfg.illumination = DiskIllumination{24.0};
  cfg.dark_count_prob = 1e-4;
  cfg.crosstalk_prob = 0.02;
  cfg.hot_pixel_fraction = 0.02;
  cfg.bit_depth = 8;
  constexpr std::uint64_t kSeed = 909;

  // Dark calibration run: same sensor, no light.
  SceneConfig dark = cfg;
  dark.detection_efficiency = 0.0;
  dark.dark_count_prob = 0.0;
  const Simulator dark_sim(dark, g, RngPolicy{kSeed});
  HotPixelCalibrator calibrator(g.width(), g.height());
  for (std::uint64_t l = 0; l < 20; ++l) calibrator.add(dark_sim.generate_frame(l));
  const HotPixelMap hot = calibrator.result();

  AccumulatorOptions opts;
  std::vector<PixelCoord> hot_refs;
  for (auto idx : hot.pixels) {
    const PixelCoord r = g.to_centered(ArrayPixel{static_cast<int>(idx % g.width()), static_cast<int>(idx / g.width())});
    if (g.in_roi(r) && std::hypot(r.x, r.y) < 20.0 && hot_refs.size() < 5) hot_refs.push_back(r);
  }
  std::vector<PixelCoord> refs;
  for (const PixelCoord r : {PixelCoord{-12, 7}, PixelCoord{9, 10}, PixelCoord{5, -14}, PixelCoord{-3, -6}}) {
    const auto idx = static_cast<std::uint32_t>(g.sensor_index(r));
    const auto idx_m = static_cast<std::uint32_t>(g.sensor_index(-r));
    if (!hot.contains(idx) && !hot.contains(idx_m)) refs.push_back(r);
  }
  opts.plan.references = hot_refs;
  opts.plan.references.insert(opts.plan.references.end(), refs.begin(), refs.end());

  const Simulator sim(cfg, g, RngPolicy{kSeed});
  JpdAccumulator acc(g, opts);
  simulate_into(sim, 1'000'000, acc, &hot);

  // (a) hot-pixel conditionals vanish identically.
  bool hot_zero = !hot_refs.empty();
  for (const auto& r : hot_refs) {
    const auto img = conditional_image(acc, r, {.normalize = false, .mask_crosstalk = false});
    hot_zero = hot_zero && std::all_of(img.values.begin(), img.values.end(), [](double v) { return v == 0.0; });
  }

  // (b) minus-coordinate peak confined to the 8 direct neighbours.
  const ProjectionImage minus = minus_projection(acc);
  double min_neighbour = std::numeric_limits<double>::infinity();
  double max_outside = 0.0;
  std::vector<double> ring;
  for (int y = minus.y_min; y < minus.y_min + minus.height; ++y) {
    for (int x = minus.x_min; x < minus.x_min + minus.width; ++x) {
      const int cheb = std::max(std::abs(x), std::abs(y));
      const double v = minus.at(x, y);
      if (cheb == 1) min_neighbour = std::min(min_neighbour, v);
      if (cheb >= 2) max_outside = std::max(max_outside, std::abs(v));
      if (cheb >= 2 && cheb <= 8) ring.push_back(v);
    }
  }
  double ring_mean = std::accumulate(ring.begin(), ring.end(), 0.0) / static_cast<double>(ring.size());
  double ring_ss = 0.0;
  for (double v : ring) ring_ss += (v - ring_mean) * (v - ring_mean);
  const double ring_std = std::sqrt(ring_ss / static_cast<double>(ring.size() - 1));
  const bool confined = min_neighbour > 5.0 * ring_std && max_outside < 0.05 * min_neighbour;

  // (c) crosstalk dominates raw conditionals; masking leaves the peak at -R.
  int contaminated = 0;
  int clean_peaks = 0;
  for (const auto& r : refs) {
    const auto raw = conditional_image(acc, r, {.normalize = false, .mask_crosstalk = false});
    const auto masked = mask_crosstalk(raw, r);
    const auto argmax = [](const ProjectionImage& img) {
      const auto k = static_cast<std::size_t>(std::max_element(img.values.begin(), img.values.end()) - img.values.begin());
      return PixelCoord{img.x_min + static_cast<int>(k % static_cast<std::size_t>(img.width)),
                        img.y_min + static_cast<int>(k / static_cast<std::size_t>(img.width))};
    };
    const PixelCoord raw_peak = argmax(raw);
    if (std::abs(raw_peak.x - r.x) <= 1 && std::abs(raw_peak.y - r.y) <= 1) ++contaminated;
    if (argmax(masked) == -r) ++clean_peaks;
  }
  const bool clean = !refs.empty() && clean_peaks == static_cast<int>(refs.size());
  const double secs = seconds_since(t0);
  return {hot.flagged_fraction() >= 0.018 && hot.flagged_fraction() <= 0.022 && hot_zero && confined && clean &&
              secs < 300.0,
          fmt("hot fraction %.4f; (a) %zu hot conditionals identically 0: %s; (b) min neighbour %.3e vs background "
              "std %.2e, max |outside 3x3| %.2e; (c) raw peak in crosstalk block %d/%zu, masked peak at -R %d/%zu; "
              "%.1fs",
              hot.flagged_fraction(), hot_refs.size(), hot_zero ? "yes" : "no", min_neighbour, ring_std, max_outside,
              contaminated, refs.size(), clean_peaks, refs.size(), secs)};
}

// 10. Static-pattern cancellation and the log-link agreement.
Outcome criterion10() {
  const auto t0 = Clock::now();
  const auto g = SensorGeometry::centered(16, 16);
  AccumulatorOptions full;
  full.mode = AccumulationMode::Full;

  // Noise only: uniform dark counts plus a fixed stray pattern.
  SceneConfig noise;
  noise.mean_pairs_per_frame = 1.0;
  noise.detection_efficiency = 0.0;
  noise.dark_count_prob = 0.005;
  noise.stray_light = make_rect_map(g, Roi{2, 3, 9, 7}, 0.02f);
  noise.bit_depth = 1;
  const Simulator noise_sim(noise, g, RngPolicy{1010});
  constexpr std::uint64_t kFrames = 200'000;
  JpdAccumulator acc(g, full);
  // Off-diagonal per-frame statistic z_l = sum_{i!=j} I_l(i) (I_l(j) - I_{l-1}(j)), batch means for the SE.
  constexpr int kBatches = 20;
  std::vector<double> batch(kBatches, 0.0);
  std::vector<std::uint8_t> prev;
  FrameBuffer f = noise_sim.make_frame();
  for (std::uint64_t l = 0; l < kFrames; ++l) {
    noise_sim.generate_frame(l, f);
    acc.accumulate(f);
    const auto bits = testing::roi_bits(f);
    if (l > 0) {
      double n_cur = 0;
      double n_prev = 0;
      double same = 0;
      for (std::size_t i = 0; i < bits.size(); ++i) {
        n_cur += bits[i];
        n_prev += prev[i];
        same += bits[i] * prev[i];
      }
      batch[l * kBatches / kFrames] += (n_cur * n_cur - n_cur) - (n_cur * n_prev - same);
    }
    prev = bits;
  }
  const std::size_t s = g.roi_size();
  const DenseJpd gm = gamma(acc);
  double off_sum = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      if (i != j) off_sum += gm.values[i * s + j];
    }
  }
  const double pairs = static_cast<double>(s * s - s);
  const double mean = off_sum / pairs;
  const double per_batch = static_cast<double>(kFrames) / kBatches;
  double bm = 0.0;
  for (double& b : batch) {
    b /= per_batch * pairs;
    bm += b;
  }
  bm /= kBatches;
  double bss = 0.0;
  for (double b : batch) bss += (b - bm) * (b - bm);
  const double se = std::sqrt(bss / (kBatches - 1) / kBatches);
  const bool cancels = std::abs(mean) < 3.0 * se;

  // Log link at low occupancy, with genuine pairs present.
  SceneConfig pairs_cfg;
  pairs_cfg.mean_pairs_per_frame = 0.3;
  pairs_cfg.detection_efficiency = 0.5;
  pairs_cfg.correlation_width = 0.5;
  pairs_cfg.illumination = DiskIllumination{6.0};
  pairs_cfg.dark_count_prob = 0.002;
  pairs_cfg.bit_depth = 1;
  const Simulator pair_sim(pairs_cfg, g, RngPolicy{1011});
  JpdAccumulator acc2(g, full);
  for (std::uint64_t l = 0; l < 100'000; ++l) {
    pair_sim.generate_frame(l, f);
    acc2.accumulate(f);
  }
  double max_occ = 0.0;
  for (auto v : acc2.singles()) max_occ = std::max(max_occ, static_cast<double>(v) / static_cast<double>(acc2.frames()));
  const DenseJpd g2 = gamma(acc2);
  const DenseJpd gl = gamma_log(acc2);
  double max_g = 0.0;
  double max_diff = 0.0;
  for (std::size_t k = 0; k < g2.values.size(); ++k) {
    max_g = std::max(max_g, std::abs(g2.values[k]));
    max_diff = std::max(max_diff, std::abs(gl.values[k] - g2.values[k]));
  }
  const double rel = max_diff / max_g;
  const double secs = seconds_since(t0);
  return {cancels && max_occ <= 0.01 && rel <= 0.02 && secs < 120.0,
          fmt("noise-only mean Gamma over %zu off-diagonal pairs %.2e +- %.2e (%.1f SE); gamma_log vs gamma max rel "
              "%.4f at max occupancy %.4f; %.1fs",
              s * s - s, mean, se, mean / se, rel, max_occ, secs)};
}

// 11. PROJECTION_ONLY throughput on 64x64 binary frames (benchmark).
Outcome criterion11() {
  const auto g = SensorGeometry::centered(64, 64);
  SceneConfig cfg;
  cfg.mean_pairs_per_frame = 2.0;
  cfg.detection_efficiency = 0.3;
  cfg.correlation_width = 1.1;
  cfg.illumination = DiskIllumination{24.0};
  cfg.dark_count_prob = 1e-3;
  cfg.bit_depth = 1;
  const Simulator sim(cfg, g, RngPolicy{1111});
  constexpr std::uint64_t kFrames = 200'000;
  const auto path = std::filesystem::temp_directory_path() / "spadcorr_acceptance_c11.spdf";
  {
    SpdfWriter writer(path, g.width(), g.height(), 1);
    StreamOptions so;
    so.workers = worker_count();
    generate_stream(sim, kFrames, [&](const FrameBuffer& fr) {
      writer.write(fr);
      return true;
    }, so);
    writer.close();
  }
  ReconstructOptions serial;
  const auto t1 = Clock::now();
  const JpdAccumulator one = reconstruct_file(path, serial);
  const double serial_rate = static_cast<double>(kFrames) / seconds_since(t1);

  ReconstructOptions parallel;
  parallel.workers = worker_count();
  const auto t2 = Clock::now();
  const JpdAccumulator many = reconstruct_file(path, parallel);
  const double parallel_rate = static_cast<double>(kFrames) / seconds_since(t2);
  std::filesystem::remove(path);

  double active = 0;
  for (auto v : one.singles()) active += static_cast<double>(v);
  const double best = std::max(serial_rate, parallel_rate);
  return {best >= 1e5 && many.same_counts(one),
          fmt("%.0f frames/s single worker, %.0f frames/s with %u workers (target 1e5, %u hardware threads); %.1f lit "
              "pixels/frame; parallel result identical: %s",
              serial_rate, parallel_rate, worker_count(), std::thread::hardware_concurrency(),
              active / static_cast<double>(kFrames), many.same_counts(one) ? "yes" : "no")};
}

const std::map<int, std::pair<const char*, Outcome (*)()>>& criteria() {
  static const std::map<int, std::pair<const char*, Outcome (*)()>> table{
      {1, {"oracle equivalence", criterion1}},
      {2, {"merge exactness", criterion2}},
      {3, {"anti-correlation imaging", criterion3}},
      {4, {"correlation width", criterion4}},
      {5, {"SNR sqrt(M) scaling", criterion5}},
      {6, {"SNR model consistency", criterion6}},
      {7, {"ideal-scheme constant", criterion7}},
      {8, {"stray-light robustness", criterion8}},
      {9, {"artifact removal", criterion9}},
      {10, {"static-pattern cancellation", criterion10}},
      {11, {"throughput", criterion11}},
  };
  return table;
}

bool run(int id) {
  const auto& [name, fn] = criteria().at(id);
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << id << " (" << name << "): " << o.detail << std::endl;
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  bool ok = true;
  if (which == "all") {
    for (const auto& [id, entry] : criteria()) ok = run(id) && ok;
  } else {
    const int id = std::stoi(which);
    if (!criteria().contains(id)) {
      std::cerr << "unknown criterion " << which << "\n";
      return 2;
    }
    ok = run(id);
  }
  return ok ? 0 : 1;
}
