#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spadcorr/accumulator.hpp"

namespace spadcorr {

enum class ProjectionKind { Conditional, AntiDiagonal, Sum, Minus, ColumnPair, RowPair, Intensity };

std::string to_string(ProjectionKind kind);

/// Real-valued 2D image derived from the JPD. Pixel (col, row) sits at axis
/// position (x_min + col, y_min + row) in pixel offsets.
struct ProjectionImage {
  ProjectionKind kind = ProjectionKind::AntiDiagonal;
  int width = 0;
  int height = 0;
  int x_min = 0;
  int y_min = 0;
  std::string x_label = "x";
  std::string y_label = "y";
  std::vector<double> values;  // row-major
  std::optional<PixelCoord> reference;
  bool normalized = false;
  /// Normalisation was requested but the marginal was not positive.
  bool zero_marginal = false;
  bool crosstalk_masked = false;
  std::uint64_t frames = 0;

  [[nodiscard]] bool contains(int x, int y) const noexcept {
    return x >= x_min && y >= y_min && x < x_min + width && y < y_min + height;
  }
  [[nodiscard]] std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y - y_min) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x - x_min);
  }
  [[nodiscard]] double at(int x, int y) const { return values.at(index(x, y)); }
  [[nodiscard]] double& at(int x, int y) { return values.at(index(x, y)); }
  [[nodiscard]] double sum() const noexcept;
};

/// Dense s x s real matrix over the ROI, row-major [i * s + j].
struct DenseJpd {
  SensorGeometry geometry;
  std::uint64_t frames = 0;
  std::uint64_t cross_terms = 0;
  std::vector<double> values;

  [[nodiscard]] std::size_t size() const noexcept { return geometry.roi_size(); }
  [[nodiscard]] double at(PixelCoord ri, PixelCoord rj) const {
    return values[geometry.roi_index(ri) * size() + geometry.roi_index(rj)];
  }
};

/// C/frames (FULL mode).
DenseJpd total_coincidences(const JpdAccumulator& acc);
/// A/cross_terms (FULL mode).
DenseJpd accidental_coincidences(const JpdAccumulator& acc);
/// Gamma_M = C/frames - A/cross_terms. Throws UnsupportedOperation in
/// PROJECTION_ONLY mode and DomainError before the first cross term.
DenseJpd gamma(const JpdAccumulator& acc);
/// ln(1 + Gamma / ((1 - <I_i>)(1 - <I_j>))). Throws DomainError when some
/// occupancy reaches 1.
DenseJpd gamma_log(const JpdAccumulator& acc);

struct ConditionalOptions {
  bool normalize = false;
  bool mask_crosstalk = true;
};

/// Gamma(., R). Crosstalk masking happens before normalisation, so a
/// normalised image sums to 1. In PROJECTION_ONLY mode R must be a planned
/// reference pixel.
ProjectionImage conditional_image(const JpdAccumulator& acc, PixelCoord reference,
                                  const ConditionalOptions& options = {});
ProjectionImage conditional_image(const DenseJpd& jpd, PixelCoord reference,
                                  const ConditionalOptions& options = {});

/// Zeroes the 3x3 block around the reference (clipped to the image).
ProjectionImage mask_crosstalk(ProjectionImage image, PixelCoord reference);

/// r -> Gamma(r, -r). The origin entry is the self-product Gamma(0, 0) and is
/// zeroed unless `mask_origin` is false.
ProjectionImage antidiagonal_image(const JpdAccumulator& acc, bool mask_origin = true);
/// Sum-coordinate projection over d = r_i + r_j, pairs excluded per the plan's sum filter.
ProjectionImage sum_projection(const JpdAccumulator& acc);
/// Minus-coordinate projection over d = r_i - r_j, per the plan's minus filter.
ProjectionImage minus_projection(const JpdAccumulator& acc);
/// Gamma(x1, y1, x2, y2) over (y1, y2): rows are y1, columns y2.
ProjectionImage column_pair_projection(const JpdAccumulator& acc, int x1, int x2);
/// Gamma(x1, y1, x2, y2) over (x1, x2): rows are x1, columns x2.
ProjectionImage row_pair_projection(const JpdAccumulator& acc, int y1, int y2);
/// Mean per-frame intensity over the ROI.
ProjectionImage intensity_image(const JpdAccumulator& acc);

/// Linearly rescaled 8-bit PGM; the mapping is written to `<path>.txt`.
void write_projection_pgm(const std::filesystem::path& path, const ProjectionImage& image);
/// CSV with columns x,y,value (raw signed values).
void write_projection_csv(const std::filesystem::path& path, const ProjectionImage& image);

/// Dense Gamma tensor file. Layout (little-endian): magic "SPJG", u16 version,
/// u16 roi width, u16 roi height, u64 frames, u64 cross terms, then s*s f64
/// values row-major over (i, j), i and j row-major ROI indices.
void write_gamma_tensor(const std::filesystem::path& path, const DenseJpd& jpd);
DenseJpd read_gamma_tensor(const std::filesystem::path& path);

}  // namespace spadcorr
