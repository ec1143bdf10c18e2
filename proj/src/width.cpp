#include "spadcorr/width.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "spadcorr/errors.hpp"

namespace spadcorr {

namespace {

struct Sample {
  double x;
  double y;
  double v;
};

// Parameters: background, volume, x0, y0, sigma_x, sigma_y.
struct GaussianResidual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::vector<Sample>* samples;
  bool integrated;

  [[nodiscard]] int inputs() const { return 6; }
  [[nodiscard]] int values() const { return static_cast<int>(samples->size()); }

  static double profile(double u, double centre, double sigma, bool integrated) {
    if (integrated) {
      const double k = 1.0 / (sigma * std::numbers::sqrt2);
      return 0.5 * (std::erf((u + 0.5 - centre) * k) - std::erf((u - 0.5 - centre) * k));
    }
    const double z = (u - centre) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    const double sx = std::abs(p[4]) + 1e-9;
    const double sy = std::abs(p[5]) + 1e-9;
    for (std::size_t k = 0; k < samples->size(); ++k) {
      const auto& s = (*samples)[k];
      const double model = p[0] + p[1] * profile(s.x, p[2], sx, integrated) * profile(s.y, p[3], sy, integrated);
      r[static_cast<Eigen::Index>(k)] = model - s.v;
    }
    return 0;
  }
};

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

CorrelationWidth estimate_correlation_width(const ProjectionImage& image, const WidthOptions& options) {
  if (image.values.empty()) throw DomainError("empty image");
  const auto peak_it = std::max_element(image.values.begin(), image.values.end());
  const auto peak_k = static_cast<std::size_t>(peak_it - image.values.begin());
  const int px = image.x_min + static_cast<int>(peak_k % static_cast<std::size_t>(image.width));
  const int py = image.y_min + static_cast<int>(peak_k / static_cast<std::size_t>(image.width));
  const int w = options.window;

  std::vector<Sample> inside;
  std::vector<double> outside;
  for (int row = 0; row < image.height; ++row) {
    for (int col = 0; col < image.width; ++col) {
      const int x = image.x_min + col;
      const int y = image.y_min + row;
      const double v = image.at(x, y);
      if (std::abs(x - px) <= w && std::abs(y - py) <= w) {
        inside.push_back({static_cast<double>(x), static_cast<double>(y), v});
      } else {
        outside.push_back(v);
      }
    }
  }
  if (outside.size() < 2) throw DomainError("image too small to estimate the background around the peak");
  const double bg = median(outside);
  double mean = 0.0;
  for (double v : outside) mean += v;
  mean /= static_cast<double>(outside.size());
  double ss = 0.0;
  for (double v : outside) ss += (v - mean) * (v - mean);
  const double bg_std = std::sqrt(ss / static_cast<double>(outside.size() - 1));
  if (!(*peak_it - bg > options.min_significance * bg_std)) {
    throw DomainError("no peak above " + std::to_string(options.min_significance) + " background std");
  }

  double volume = 0.0;
  double mx = 0.0;
  double my = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  for (const auto& s : inside) {
    const double v = std::max(s.v - bg, 0.0);
    volume += v;
    mx += v * s.x;
    my += v * s.y;
  }
  mx /= volume;
  my /= volume;
  for (const auto& s : inside) {
    const double v = std::max(s.v - bg, 0.0);
    vx += v * (s.x - mx) * (s.x - mx);
    vy += v * (s.y - my) * (s.y - my);
  }
  const double sx0 = std::clamp(std::sqrt(vx / volume), 0.3, static_cast<double>(w));
  const double sy0 = std::clamp(std::sqrt(vy / volume), 0.3, static_cast<double>(w));

  Eigen::VectorXd p(6);
  p << bg, volume, mx, my, sx0, sy0;
  GaussianResidual functor{&inside, options.pixel_integrated};
  Eigen::NumericalDiff<GaussianResidual> numdiff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<GaussianResidual>> lm(numdiff);
  lm.parameters.maxfev = 4000;
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-12;
  const auto status = lm.minimize(p);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters || !p.allFinite()) {
    throw DomainError("Gaussian fit did not converge");
  }

  CorrelationWidth out;
  out.background = p[0];
  out.volume = p[1];
  out.x0 = p[2];
  out.y0 = p[3];
  out.sigma_x = std::abs(p[4]);
  out.sigma_y = std::abs(p[5]);
  out.sigma = std::sqrt(0.5 * (out.sigma_x * out.sigma_x + out.sigma_y * out.sigma_y));
  out.iterations = static_cast<int>(lm.iter);
  if (out.sigma_x > 2.0 * w || out.sigma_y > 2.0 * w) throw DomainError("fitted width exceeds the fit window");
  return out;
}

}  // namespace spadcorr
