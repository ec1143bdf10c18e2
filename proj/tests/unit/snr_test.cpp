#include <doctest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>

#include "../support/temp_dir.hpp"
#include "spadcorr/errors.hpp"
#include "spadcorr/simulator.hpp"
#include "spadcorr/snr.hpp"

using namespace spadcorr;

namespace {

ProjectionImage flat_image(int half, double value) {
  ProjectionImage img;
  img.width = img.height = 2 * half + 1;
  img.x_min = img.y_min = -half;
  img.values.assign(static_cast<std::size_t>(img.width * img.height), value);
  return img;
}

RegionMasks strips(int half) {
  RegionMasks m;
  for (int y = -half; y <= half; ++y) {
    for (int x = -half; x <= half; ++x) (x < 0 ? m.signal : m.noise).push_back({x, y});
  }
  return m;
}

}  // namespace

TEST_CASE("measured SNR is signal mean over noise std") {
  ProjectionImage img = flat_image(4, 0.0);
  RegionMasks m = strips(4);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto p : m.signal) img.at(p.x, p.y) = 5.0 + n(rng);
  for (auto p : m.noise) img.at(p.x, p.y) = 2.0 * n(rng);

  double ms = 0.0;
  for (auto p : m.signal) ms += img.at(p.x, p.y);
  ms /= static_cast<double>(m.signal.size());
  double mn = 0.0;
  for (auto p : m.noise) mn += img.at(p.x, p.y);
  mn /= static_cast<double>(m.noise.size());
  double ss = 0.0;
  for (auto p : m.noise) ss += (img.at(p.x, p.y) - mn) * (img.at(p.x, p.y) - mn);
  const double sd = std::sqrt(ss / static_cast<double>(m.noise.size() - 1));

  const SnrMeasurement r = measure_snr(img, m);
  CHECK(r.snr == doctest::Approx(ms / sd));
  CHECK(r.noise_std == doctest::Approx(sd));
  CHECK(r.signal_pixels == 36);
  CHECK(r.noise_pixels == 45);
  CHECK(r.snr_err > 0.0);
  CHECK(r.snr_err < r.snr);
}

TEST_CASE("SNR edge cases") {
  RegionMasks m = strips(4);
  ProjectionImage img = flat_image(4, 1.0);
  const SnrMeasurement inf = measure_snr(img, m);
  CHECK(inf.infinite);
  CHECK(std::isinf(inf.snr));

  for (auto p : m.noise) img.at(p.x, p.y) = (p.x + p.y) % 2 == 0 ? 1.0 : -1.0;
  for (auto p : m.signal) img.at(p.x, p.y) = -0.5 + 0.01 * p.y;
  const SnrMeasurement neg = measure_snr(img, m);
  CHECK(neg.snr == 0.0);
  CHECK(neg.snr_err > 0.0);

  RegionMasks tiny;
  for (int k = 0; k < 15; ++k) tiny.signal.push_back({-4, k % 9 - 4});
  tiny.noise = m.noise;
  CHECK_THROWS_AS(measure_snr(img, tiny), ConfigError);

  RegionMasks outside = m;
  outside.noise.push_back({9, 9});
  CHECK_THROWS_AS(measure_snr(img, outside), OutOfRangeError);

  const auto g = SensorGeometry::centered(9, 9);
  RegionMasks overlap = m;
  overlap.noise.push_back(m.signal.front());
  CHECK_THROWS_AS(validate_masks(overlap, g), ConfigError);
  CHECK_NOTHROW(validate_masks(m, g));
}

TEST_CASE("default and split masks") {
  const auto g = SensorGeometry::centered(64, 64);
  SceneConfig cfg;
  cfg.illumination = DiskIllumination{20.0};
  cfg.object_mask = make_half_plane_mask(g, 'x', 5);
  const RegionMasks d = default_masks(cfg, g);
  CHECK_NOTHROW(validate_masks(d, g));
  for (auto p : d.noise) CHECK(std::hypot(p.x, p.y) > 22.0);
  for (auto p : d.signal) {
    CHECK(std::hypot(p.x, p.y) <= 19.0);
    CHECK(std::abs(p.x) < 5);  // both r and -r transparent
    CHECK(std::max(std::abs(p.x), std::abs(p.y)) > 1);
  }
  const RegionMasks s = split_masks(cfg, g);
  CHECK_NOTHROW(validate_masks(s, g));
  CHECK(s.signal.size() == s.noise.size());
  for (auto p : s.signal) CHECK(std::find(s.noise.begin(), s.noise.end(), -p) != s.noise.end());

  const RegionMasks r = rect_masks(g, {{1, 1, 5, 5}}, {{40, 40, 4, 4}, {40, 40, 2, 2}});
  CHECK(r.signal.size() == 25);
  CHECK(r.noise.size() == 16);
  CHECK_THROWS_AS(rect_masks(g, {{1, 1, 5, 5}}, {{2, 2, 5, 5}}), ConfigError);
}

TEST_CASE("analytic model") {
  SnrParameters p;
  p.eta = 0.2;
  p.mean_pairs = 3.0;
  p.noise_events = 4.0;
  p.illuminated_pixels = 1000.0;
  const double ng = 2 * 0.04 * 3.0;
  const double na = std::pow(2 * 0.04 * 3.0 + 2 * 0.2 * 3.0 + 4.0, 2);
  CHECK(genuine_per_frame(p) == doctest::Approx(ng));
  CHECK(accidental_per_frame(p) == doctest::Approx(na));
  const double expect = std::sqrt(ng / 1000.0) / std::sqrt(1.0 + 2.0 * na / (1000.0 * ng)) * 100.0;
  CHECK(predict_snr(p, 1e4) == doctest::Approx(expect));
  // Ideal limit: no accidental term.
  CHECK(predict_ideal_snr(p, 1e4) == doctest::Approx(std::sqrt(ng / 1000.0) * 100.0));
  CHECK(ideal_coefficient(p) == doctest::Approx(0.2 * std::sqrt(6.0 / 1000.0)));
  CHECK(predict_snr(p, 4e4) == doctest::Approx(2.0 * predict_snr(p, 1e4)));

  p.eta = 0.0;
  CHECK_THROWS_AS(predict_snr(p, 1.0), ConfigError);
  p.eta = 0.2;
  p.illuminated_pixels = 0.0;
  CHECK_THROWS_AS(predict_snr(p, 1.0), ConfigError);
}

TEST_CASE("snr parameters from a scene") {
  const auto g = SensorGeometry::centered(64, 64);
  SceneConfig cfg;
  cfg.illumination = DiskIllumination{10.0};
  cfg.dark_count_prob = 0.01;
  cfg.stray_light = make_rect_map(g, Roi{32, 32, 2, 2}, 0.1f);       // inside the beam
  const PixelMap far = make_rect_map(g, Roi{0, 0, 2, 2}, 0.1f);      // far corner, ignored
  for (std::size_t k = 0; k < far.values().size(); ++k) cfg.stray_light.values()[k] += far.values()[k];
  const SnrParameters p = snr_parameters(cfg, g);
  CHECK(p.illuminated_pixels == doctest::Approx(M_PI * 100.0));
  CHECK(p.noise_events == doctest::Approx(0.01 * M_PI * 100.0 + 0.4).epsilon(1e-6));
}

TEST_CASE("sqrt scaling fit recovers exact data") {
  std::vector<ScalingPoint> pts;
  for (double m : {1e3, 1e4, 1e5, 1e6}) pts.push_back({m, 0.02 * std::sqrt(m), 0.05 * 0.02 * std::sqrt(m)});
  const ScalingFit f = fit_sqrt_scaling(pts);
  CHECK(f.a == doctest::Approx(0.02));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.exponent == doctest::Approx(0.5));
  CHECK(f.prefactor == doctest::Approx(0.02));
  CHECK(f.points == 4);

  // a_err = 1 / sqrt(sum w M).
  double swx = 0.0;
  for (const auto& p : pts) swx += p.frames / (p.snr_err * p.snr_err);
  CHECK(f.a_err == doctest::Approx(1.0 / std::sqrt(swx)));
}

TEST_CASE("scaling fit recovers a different exponent") {
  std::vector<ScalingPoint> pts;
  for (double m : {1e2, 1e3, 1e4}) pts.push_back({m, 3.0 * std::pow(m, 0.3), 0.1});
  const ScalingFit f = fit_sqrt_scaling(pts);
  CHECK(f.exponent == doctest::Approx(0.3));
  CHECK(f.prefactor == doctest::Approx(3.0));
  CHECK(f.r2 < 1.0);
}

TEST_CASE("scaling fit input errors") {
  CHECK_THROWS_AS(fit_sqrt_scaling({{1, 1, 1}, {2, 1, 1}}), ConfigError);
  CHECK_THROWS_AS(fit_sqrt_scaling({{1, 1, 1}, {2, 1, 0}, {3, 1, 1}}), ConfigError);
  CHECK_THROWS_AS(fit_sqrt_scaling({{5, 1, 1}, {5, 2, 1}, {5, 3, 1}}), DomainError);
  CHECK_THROWS_AS(fit_sqrt_scaling({{1, 1, 1}, {2, 0, 1}, {3, 1, 1}}), DomainError);
}

TEST_CASE("jackknife over blocks") {
  const auto g = SensorGeometry::centered(32, 32);
  SceneConfig cfg;
  cfg.mean_pairs_per_frame = 1.0;
  cfg.detection_efficiency = 0.4;
  cfg.correlation_width = 0.3;
  cfg.illumination = DiskIllumination{10.0};
  cfg.dark_count_prob = 1e-3;
  cfg.bit_depth = 1;
  const Simulator sim(cfg, g, RngPolicy{12});
  std::vector<JpdAccumulator> blocks;
  for (int b = 0; b < 5; ++b) {
    JpdAccumulator acc(g);
    for (std::uint64_t l = 0; l < 4000; ++l) acc.accumulate(sim.generate_frame(static_cast<std::uint64_t>(b) * 4000 + l));
    blocks.push_back(std::move(acc));
  }
  const RegionMasks m = default_masks(cfg, g);
  const SnrMeasurement j = jackknife_snr(blocks, m);
  CHECK(j.snr > 0.0);
  CHECK(j.snr_err > 0.0);
  CHECK(j.frames == 20000);
  CHECK_THROWS_AS(jackknife_snr({blocks.front()}, m), ConfigError);
}

TEST_CASE("report and sweep outputs") {
  SnrReport rep;
  rep.frames = 100;
  rep.masks = "split";
  rep.measured = SnrMeasurement{};
  rep.measured->infinite = true;
  rep.fit = ScalingFit{};
  const auto j = nlohmann::json::parse(to_json(rep));
  CHECK(j["measured"]["snr"] == "inf");
  CHECK(j["fit"].contains("exponent"));
  spadcorr::testing::TempDir dir;
  write_sweep_csv(dir / "s.csv", {{10, 1.0, 0.1, 1.1}});
  std::ifstream in(dir / "s.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "M,snr,snr_err,predicted");
}
