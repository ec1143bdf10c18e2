#pragma once

#include "spadcorr/projections.hpp"

namespace spadcorr {

struct WidthOptions {
  /// Half-size of the fit window around the peak, pixels.
  int window = 6;
  /// Model each pixel as the integral of the Gaussian over its footprint
  /// (matches rounding to the pixel grid); otherwise sample at pixel centres.
  bool pixel_integrated = true;
  /// Peak must exceed the background median by this many background stds.
  double min_significance = 5.0;
};

struct CorrelationWidth {
  double sigma = 0.0;  // sqrt((sigma_x^2 + sigma_y^2) / 2)
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  double volume = 0.0;
  double background = 0.0;
  int iterations = 0;
};

/// Least-squares 2D Gaussian + constant fit around the image maximum.
/// Throws DomainError when there is no significant peak or the fit fails.
CorrelationWidth estimate_correlation_width(const ProjectionImage& image, const WidthOptions& options = {});

}  // namespace spadcorr
