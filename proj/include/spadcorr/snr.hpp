#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spadcorr/accumulator.hpp"
#include "spadcorr/projections.hpp"
#include "spadcorr/scene.hpp"

namespace spadcorr {

/// Pixel sets used to measure SNR on a ROI image (centred coordinates).
struct RegionMasks {
  std::vector<PixelCoord> signal;
  std::vector<PixelCoord> noise;
  std::string description;
};

/// Throws ConfigError when a mask is empty, leaves the ROI or the two overlap.
void validate_masks(const RegionMasks& masks, const SensorGeometry& geometry);

/// Signal: illuminated pixels r where both r and -r are transparent, minus the
/// central 3x3 block. Noise: unilluminated pixels (|r| beyond the illumination
/// extent plus `margin`).
RegionMasks default_masks(const SceneConfig& config, const SensorGeometry& geometry, double margin = 2.0);

/// Both masks inside the transparent illuminated region: signal is the half
/// with x < 0 (or x = 0, y < 0), noise the mirrored half. The noise std then
/// includes the genuine-pair shot noise, as in the analytic SNR model.
RegionMasks split_masks(const SceneConfig& config, const SensorGeometry& geometry, double margin = 1.0);

/// Masks from explicit pixel lists / rectangles given in a config file.
RegionMasks rect_masks(const SensorGeometry& geometry, const std::vector<Roi>& signal_rects,
                       const std::vector<Roi>& noise_rects);

struct SnrMeasurement {
  double snr = 0.0;
  double snr_err = 0.0;
  double signal_mean = 0.0;
  double signal_sd = 0.0;
  double noise_std = 0.0;
  std::size_t signal_pixels = 0;
  std::size_t noise_pixels = 0;
  /// Noise std was zero; snr holds +inf.
  bool infinite = false;
  std::uint64_t frames = 0;
};

inline constexpr std::size_t kMinMaskPixels = 16;

/// mean(signal) / std(noise), clamped at 0. The uncertainty propagates the
/// standard error of the mean and of the std (sd / sqrt(2 (n - 1))).
SnrMeasurement measure_snr(const ProjectionImage& image, const RegionMasks& masks);

/// Delete-one jackknife over frame blocks: each block is a separate
/// accumulator; the SNR of the pooled anti-diagonal image is recomputed with
/// every block left out in turn.
SnrMeasurement jackknife_snr(const std::vector<JpdAccumulator>& blocks, const RegionMasks& masks);

/// Per-frame quantities entering the analytic SNR.
struct SnrParameters {
  double eta = 0.0;
  double mean_pairs = 0.0;   // <m>
  double noise_events = 0.0; // <n>
  double illuminated_pixels = 0.0;  // s
};

/// eta, <m> and s from the scene; <n> = dark counts plus stray light expected
/// inside the illuminated area.
SnrParameters snr_parameters(const SceneConfig& config, const SensorGeometry& geometry);

[[nodiscard]] double genuine_per_frame(const SnrParameters& p) noexcept;     // <N_g> = 2 eta^2 m
[[nodiscard]] double accidental_per_frame(const SnrParameters& p) noexcept;  // (2 eta^2 m + 2 eta m + n)^2
/// sqrt(N_g / s) / sqrt(1 + 2 N_a / (s N_g)) * sqrt(M); 0 when N_g = 0.
double predict_snr(const SnrParameters& p, double frames);
/// Same with N_a forced to 0.
double predict_ideal_snr(const SnrParameters& p, double frames);
/// a_t = eta sqrt(2 m / s).
double ideal_coefficient(const SnrParameters& p);

struct ScalingPoint {
  double frames = 0.0;
  double snr = 0.0;
  double snr_err = 0.0;
};

struct ScalingFit {
  double a = 0.0;        // SNR = a sqrt(M)
  double a_err = 0.0;
  double r2 = 0.0;       // weighted
  double exponent = 0.0; // SNR = c M^b, log-log fit
  double exponent_err = 0.0;
  double prefactor = 0.0;
  std::size_t points = 0;
};

/// Weighted least squares (w = 1/sigma^2) of SNR = a sqrt(M), plus the
/// free-exponent fit. Needs >= 3 points with positive uncertainties.
ScalingFit fit_sqrt_scaling(const std::vector<ScalingPoint>& points);

struct SnrReport {
  std::optional<SnrMeasurement> measured;
  double predicted_snr = 0.0;
  double ideal_snr = 0.0;
  double n_genuine = 0.0;
  double n_accidental = 0.0;
  double a_ideal = 0.0;
  std::optional<ScalingFit> fit;
  double frames = 0.0;
  SnrParameters parameters;
  std::string masks;
};

std::string to_json(const SnrReport& report);
void write_snr_report(const std::filesystem::path& path, const SnrReport& report);

struct SweepRow {
  double frames = 0.0;
  double snr = 0.0;
  double snr_err = 0.0;
  double predicted = 0.0;
};

/// Columns M,snr,snr_err,predicted.
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace spadcorr
