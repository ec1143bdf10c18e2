#include <doctest.h>

#include <cmath>
#include <random>

#include "spadcorr/errors.hpp"
#include "spadcorr/width.hpp"

using namespace spadcorr;

namespace {

ProjectionImage offset_grid(int half) {
  ProjectionImage img;
  img.kind = ProjectionKind::Sum;
  img.width = img.height = 2 * half + 1;
  img.x_min = img.y_min = -half;
  img.values.assign(static_cast<std::size_t>(img.width * img.height), 0.0);
  return img;
}

double pixel_mass(int u, double c, double s) {
  return 0.5 * (std::erf((u + 0.5 - c) / (s * M_SQRT2)) - std::erf((u - 0.5 - c) / (s * M_SQRT2)));
}

}  // namespace

TEST_CASE("pixel-integrated Gaussian of sigma 2 is recovered exactly") {
  ProjectionImage img = offset_grid(20);
  for (int y = -20; y <= 20; ++y) {
    for (int x = -20; x <= 20; ++x) img.at(x, y) = 0.01 + 3.0 * pixel_mass(x, 0.3, 2.0) * pixel_mass(y, -0.2, 2.0);
  }
  const CorrelationWidth w = estimate_correlation_width(img, {.window = 10});
  CHECK(w.sigma == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(w.x0 == doctest::Approx(0.3).epsilon(1e-4));
  CHECK(w.y0 == doctest::Approx(-0.2).epsilon(1e-4));
  CHECK(w.volume == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(w.background == doctest::Approx(0.01).epsilon(1e-3));
}

TEST_CASE("point-sampled model on point-sampled data") {
  ProjectionImage img = offset_grid(15);
  const double sx = 1.2;
  const double sy = 1.6;
  for (int y = -15; y <= 15; ++y) {
    for (int x = -15; x <= 15; ++x) {
      img.at(x, y) = std::exp(-0.5 * (x * x / (sx * sx) + y * y / (sy * sy))) / (2 * M_PI * sx * sy);
    }
  }
  const CorrelationWidth w = estimate_correlation_width(img, {.window = 7, .pixel_integrated = false});
  CHECK(w.sigma_x == doctest::Approx(sx).epsilon(1e-4));
  CHECK(w.sigma_y == doctest::Approx(sy).epsilon(1e-4));
  CHECK(w.sigma == doctest::Approx(std::sqrt(0.5 * (sx * sx + sy * sy))).epsilon(1e-4));
}

TEST_CASE("noisy peak stays close") {
  ProjectionImage img = offset_grid(20);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.002);
  for (int y = -20; y <= 20; ++y) {
    for (int x = -20; x <= 20; ++x) img.at(x, y) = pixel_mass(x, 0, 1.1) * pixel_mass(y, 0, 1.1) + n(rng);
  }
  const CorrelationWidth w = estimate_correlation_width(img);
  CHECK(w.sigma == doctest::Approx(1.1).epsilon(0.05));
}

TEST_CASE("flat or noise-only input has no peak") {
  ProjectionImage flat = offset_grid(10);
  std::fill(flat.values.begin(), flat.values.end(), 1.0);
  CHECK_THROWS_AS(estimate_correlation_width(flat), DomainError);

  ProjectionImage noise = offset_grid(20);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& v : noise.values) v = n(rng);
  CHECK_THROWS_AS(estimate_correlation_width(noise, {.min_significance = 6.0}), DomainError);

  CHECK_THROWS_AS(estimate_correlation_width(ProjectionImage{}), DomainError);
}
