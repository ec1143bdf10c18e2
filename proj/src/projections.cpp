#include "spadcorr/projections.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "binary_io.hpp"
#include "spadcorr/errors.hpp"
#include "spadcorr/pgm.hpp"

namespace spadcorr {

namespace {

constexpr std::array<std::uint8_t, 4> kTensorMagic{'S', 'P', 'J', 'G'};
constexpr std::uint16_t kTensorVersion = 1;

void require_cross_terms(const JpdAccumulator& acc) {
  if (acc.cross_terms() == 0) {
    throw DomainError("Gamma needs at least one frame pair (frames=" + std::to_string(acc.frames()) + ")");
  }
}

struct Scale {
  double c;
  double a;
  [[nodiscard]] double operator()(std::uint64_t same, std::uint64_t previous) const noexcept {
    return static_cast<double>(same) * c - static_cast<double>(previous) * a;
  }
};

Scale gamma_scale(const JpdAccumulator& acc) {
  require_cross_terms(acc);
  return {1.0 / static_cast<double>(acc.frames()), 1.0 / static_cast<double>(acc.cross_terms())};
}

ProjectionImage make_image(ProjectionKind kind, int width, int height, int x_min, int y_min,
                           std::uint64_t frames) {
  ProjectionImage img;
  img.kind = kind;
  img.width = width;
  img.height = height;
  img.x_min = x_min;
  img.y_min = y_min;
  img.frames = frames;
  img.values.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0);
  return img;
}

ProjectionImage roi_image(ProjectionKind kind, const SensorGeometry& g, std::uint64_t frames) {
  return make_image(kind, g.roi().width, g.roi().height, -g.half_width(), -g.half_height(), frames);
}

ProjectionImage from_counts(ProjectionImage img, const CoincidenceCounts& counts, Scale scale) {
  for (std::size_t k = 0; k < img.values.size(); ++k) img.values[k] = scale(counts.same[k], counts.previous[k]);
  return img;
}

DenseJpd dense_from(const JpdAccumulator& acc, double c, double a) {
  const auto& d = acc.dense();
  DenseJpd out{acc.geometry(), acc.frames(), acc.cross_terms(), std::vector<double>(d.same.size())};
  for (std::size_t k = 0; k < d.same.size(); ++k) {
    out.values[k] = static_cast<double>(d.same[k]) * c - static_cast<double>(d.previous[k]) * a;
  }
  return out;
}

ProjectionImage finish_conditional(ProjectionImage img, PixelCoord reference, const ConditionalOptions& options) {
  img.reference = reference;
  img.x_label = "x";
  img.y_label = "y";
  if (options.mask_crosstalk) img = mask_crosstalk(std::move(img), reference);
  if (options.normalize) {
    const double marginal = img.sum();
    if (marginal > 0.0) {
      for (auto& v : img.values) v /= marginal;
      img.normalized = true;
    } else {
      img.zero_marginal = true;
    }
  }
  return img;
}

int find_pair(const std::vector<std::pair<int, int>>& pairs, int a, int b) {
  const auto it = std::find(pairs.begin(), pairs.end(), std::pair{a, b});
  return it == pairs.end() ? -1 : static_cast<int>(it - pairs.begin());
}

}  // namespace

std::string to_string(ProjectionKind kind) {
  switch (kind) {
    case ProjectionKind::Conditional:
      return "conditional";
    case ProjectionKind::AntiDiagonal:
      return "antidiag";
    case ProjectionKind::Sum:
      return "sum";
    case ProjectionKind::Minus:
      return "minus";
    case ProjectionKind::ColumnPair:
      return "colpair";
    case ProjectionKind::RowPair:
      return "rowpair";
    case ProjectionKind::Intensity:
      return "intensity";
  }
  return "unknown";
}

double ProjectionImage::sum() const noexcept { return std::accumulate(values.begin(), values.end(), 0.0); }

DenseJpd total_coincidences(const JpdAccumulator& acc) {
  if (acc.frames() == 0) throw DomainError("no frames accumulated");
  return dense_from(acc, 1.0 / static_cast<double>(acc.frames()), 0.0);
}

DenseJpd accidental_coincidences(const JpdAccumulator& acc) {
  static_cast<void>(acc.dense());  // throws outside FULL mode
  require_cross_terms(acc);
  return dense_from(acc, 0.0, -1.0 / static_cast<double>(acc.cross_terms()));
}

DenseJpd gamma(const JpdAccumulator& acc) {
  static_cast<void>(acc.dense());  // throws outside FULL mode
  const Scale s = gamma_scale(acc);
  return dense_from(acc, s.c, s.a);
}

DenseJpd gamma_log(const JpdAccumulator& acc) {
  DenseJpd g = gamma(acc);
  const std::size_t s = g.size();
  std::vector<double> keep(s);
  for (std::size_t i = 0; i < s; ++i) {
    const double occupancy = static_cast<double>(acc.singles()[i]) / static_cast<double>(acc.frames());
    if (occupancy >= 1.0) {
      throw DomainError("pixel " + to_string(acc.geometry().roi_coord(i)) + " has occupancy 1; gamma_log undefined");
    }
    keep[i] = 1.0 - occupancy;
  }
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      double& v = g.values[i * s + j];
      const double arg = 1.0 + v / (keep[i] * keep[j]);
      if (arg <= 0.0) throw DomainError("gamma_log argument not positive");
      v = std::log(arg);
    }
  }
  return g;
}

ProjectionImage conditional_image(const JpdAccumulator& acc, PixelCoord reference, const ConditionalOptions& options) {
  const auto& g = acc.geometry();
  if (!g.in_roi(reference)) throw OutOfRangeError("reference " + to_string(reference) + " outside the roi");
  const Scale scale = gamma_scale(acc);
  ProjectionImage img = roi_image(ProjectionKind::Conditional, g, acc.frames());
  if (acc.mode() == AccumulationMode::Full) {
    const auto& d = acc.dense();
    const std::size_t s = acc.roi_size();
    const std::size_t r = g.roi_index(reference);
    for (std::size_t i = 0; i < s; ++i) img.values[i] = scale(d.same[i * s + r], d.previous[i * s + r]);
  } else {
    const auto& refs = acc.options().plan.references;
    const auto it = std::find(refs.begin(), refs.end(), reference);
    if (it == refs.end()) {
      throw UnsupportedOperation("reference " + to_string(reference) +
                                 " was not planned; PROJECTION_ONLY conditionals need --ref at reconstruction");
    }
    img = from_counts(std::move(img), acc.conditional_counts(static_cast<std::size_t>(it - refs.begin())), scale);
  }
  return finish_conditional(std::move(img), reference, options);
}

ProjectionImage conditional_image(const DenseJpd& jpd, PixelCoord reference, const ConditionalOptions& options) {
  const auto& g = jpd.geometry;
  if (!g.in_roi(reference)) throw OutOfRangeError("reference " + to_string(reference) + " outside the roi");
  ProjectionImage img = roi_image(ProjectionKind::Conditional, g, jpd.frames);
  const std::size_t s = jpd.size();
  const std::size_t r = g.roi_index(reference);
  for (std::size_t i = 0; i < s; ++i) img.values[i] = jpd.values[i * s + r];
  return finish_conditional(std::move(img), reference, options);
}

ProjectionImage mask_crosstalk(ProjectionImage image, PixelCoord reference) {
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int x = reference.x + dx;
      const int y = reference.y + dy;
      if (image.contains(x, y)) image.at(x, y) = 0.0;
    }
  }
  image.crosstalk_masked = true;
  return image;
}

ProjectionImage antidiagonal_image(const JpdAccumulator& acc, bool mask_origin) {
  const auto& g = acc.geometry();
  const Scale scale = gamma_scale(acc);
  ProjectionImage img = roi_image(ProjectionKind::AntiDiagonal, g, acc.frames());
  const std::size_t s = acc.roi_size();
  if (acc.mode() == AccumulationMode::Full) {
    const auto& d = acc.dense();
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t k = i * s + (s - 1 - i);
      img.values[i] = scale(d.same[k], d.previous[k]);
    }
  } else {
    img = from_counts(std::move(img), acc.antidiagonal_counts(), scale);
  }
  if (mask_origin) {
    img.at(0, 0) = 0.0;
    img.crosstalk_masked = true;
  }
  return img;
}

namespace {

ProjectionImage offset_projection(const JpdAccumulator& acc, ProjectionKind kind) {
  const auto& g = acc.geometry();
  const Scale scale = gamma_scale(acc);
  const int hw = g.half_width();
  const int hh = g.half_height();
  ProjectionImage img =
      make_image(kind, acc.offset_grid_width(), acc.offset_grid_height(), -2 * hw, -2 * hh, acc.frames());
  if (kind == ProjectionKind::Sum) {
    img.x_label = "x1+x2";
    img.y_label = "y1+y2";
  } else {
    img.x_label = "x1-x2";
    img.y_label = "y1-y2";
  }
  if (acc.mode() == AccumulationMode::ProjectionOnly) {
    return from_counts(std::move(img), kind == ProjectionKind::Sum ? acc.sum_counts() : acc.minus_counts(), scale);
  }
  const auto filter = kind == ProjectionKind::Sum ? acc.options().plan.sum_filter : acc.options().plan.minus_filter;
  const auto& d = acc.dense();
  const std::size_t s = acc.roi_size();
  for (std::size_t i = 0; i < s; ++i) {
    const PixelCoord ri = g.roi_coord(i);
    for (std::size_t j = 0; j < s; ++j) {
      const PixelCoord rj = g.roi_coord(j);
      if (pair_excluded(filter, ri.x - rj.x, ri.y - rj.y)) continue;
      const std::size_t k = i * s + j;
      const PixelCoord o = kind == ProjectionKind::Sum ? ri + rj : ri - rj;
      img.values[acc.offset_index(o.x, o.y)] += scale(d.same[k], d.previous[k]);
    }
  }
  return img;
}

}  // namespace

ProjectionImage sum_projection(const JpdAccumulator& acc) { return offset_projection(acc, ProjectionKind::Sum); }

ProjectionImage minus_projection(const JpdAccumulator& acc) { return offset_projection(acc, ProjectionKind::Minus); }

ProjectionImage column_pair_projection(const JpdAccumulator& acc, int x1, int x2) {
  const auto& g = acc.geometry();
  const int hw = g.half_width();
  const int hh = g.half_height();
  if (std::abs(x1) > hw || std::abs(x2) > hw) {
    throw OutOfRangeError("column pair (" + std::to_string(x1) + "," + std::to_string(x2) + ") outside the roi");
  }
  const Scale scale = gamma_scale(acc);
  const int h = g.roi().height;
  ProjectionImage img = make_image(ProjectionKind::ColumnPair, h, h, -hh, -hh, acc.frames());
  img.x_label = "y2 (x=" + std::to_string(x2) + ")";
  img.y_label = "y1 (x=" + std::to_string(x1) + ")";
  if (acc.mode() == AccumulationMode::ProjectionOnly) {
    const int k = find_pair(acc.options().plan.column_pairs, x1, x2);
    if (k < 0) throw UnsupportedOperation("column pair was not planned; PROJECTION_ONLY needs it at reconstruction");
    return from_counts(std::move(img), acc.column_counts(static_cast<std::size_t>(k)), scale);
  }
  const auto& d = acc.dense();
  const std::size_t s = acc.roi_size();
  for (int y1 = -hh; y1 <= hh; ++y1) {
    const std::size_t i = g.roi_index({x1, y1});
    for (int y2 = -hh; y2 <= hh; ++y2) {
      const std::size_t k = i * s + g.roi_index({x2, y2});
      img.at(y2, y1) = scale(d.same[k], d.previous[k]);
    }
  }
  return img;
}

ProjectionImage row_pair_projection(const JpdAccumulator& acc, int y1, int y2) {
  const auto& g = acc.geometry();
  const int hw = g.half_width();
  const int hh = g.half_height();
  if (std::abs(y1) > hh || std::abs(y2) > hh) {
    throw OutOfRangeError("row pair (" + std::to_string(y1) + "," + std::to_string(y2) + ") outside the roi");
  }
  const Scale scale = gamma_scale(acc);
  const int w = g.roi().width;
  ProjectionImage img = make_image(ProjectionKind::RowPair, w, w, -hw, -hw, acc.frames());
  img.x_label = "x2 (y=" + std::to_string(y2) + ")";
  img.y_label = "x1 (y=" + std::to_string(y1) + ")";
  if (acc.mode() == AccumulationMode::ProjectionOnly) {
    const int k = find_pair(acc.options().plan.row_pairs, y1, y2);
    if (k < 0) throw UnsupportedOperation("row pair was not planned; PROJECTION_ONLY needs it at reconstruction");
    return from_counts(std::move(img), acc.row_counts(static_cast<std::size_t>(k)), scale);
  }
  const auto& d = acc.dense();
  const std::size_t s = acc.roi_size();
  for (int x1 = -hw; x1 <= hw; ++x1) {
    const std::size_t i = g.roi_index({x1, y1});
    for (int x2 = -hw; x2 <= hw; ++x2) {
      const std::size_t k = i * s + g.roi_index({x2, y2});
      img.at(x2, x1) = scale(d.same[k], d.previous[k]);
    }
  }
  return img;
}

ProjectionImage intensity_image(const JpdAccumulator& acc) {
  if (acc.frames() == 0) throw DomainError("no frames accumulated");
  ProjectionImage img = roi_image(ProjectionKind::Intensity, acc.geometry(), acc.frames());
  const double inv = 1.0 / static_cast<double>(acc.frames());
  for (std::size_t i = 0; i < img.values.size(); ++i) img.values[i] = static_cast<double>(acc.singles()[i]) * inv;
  return img;
}

void write_projection_pgm(const std::filesystem::path& path, const ProjectionImage& image) {
  const auto [lo_it, hi_it] = std::minmax_element(image.values.begin(), image.values.end());
  const double lo = image.values.empty() ? 0.0 : *lo_it;
  const double hi = image.values.empty() ? 0.0 : *hi_it;
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  std::vector<std::uint8_t> pixels(image.values.size());
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    pixels[k] = static_cast<std::uint8_t>(std::lround((image.values[k] - lo) * scale));
  }
  write_pgm(path, image.width, image.height, pixels);

  auto sidecar = path;
  sidecar += ".txt";
  std::ofstream out(sidecar);
  if (!out) throw IoError(IoError::Kind::Open, "cannot write " + sidecar.string());
  out.precision(17);
  out << "kind " << to_string(image.kind) << "\n"
      << "value = min + pixel / 255 * (max - min)\n"
      << "min " << lo << "\nmax " << hi << "\n"
      << "x_min " << image.x_min << "\ny_min " << image.y_min << "\n"
      << "x_label " << image.x_label << "\ny_label " << image.y_label << "\n"
      << "frames " << image.frames << "\n";
  if (image.reference) out << "reference " << image.reference->x << " " << image.reference->y << "\n";
  if (!out) throw IoError(IoError::Kind::Write, "failed writing " + sidecar.string());
}

void write_projection_csv(const std::filesystem::path& path, const ProjectionImage& image) {
  std::ofstream out(path);
  if (!out) throw IoError(IoError::Kind::Open, "cannot write " + path.string());
  out.precision(17);
  out << "x,y,value\n";
  for (int row = 0; row < image.height; ++row) {
    for (int col = 0; col < image.width; ++col) {
      const int x = image.x_min + col;
      const int y = image.y_min + row;
      out << x << ',' << y << ',' << image.at(x, y) << '\n';
    }
  }
  if (!out) throw IoError(IoError::Kind::Write, "failed writing " + path.string());
}

void write_gamma_tensor(const std::filesystem::path& path, const DenseJpd& jpd) {
  detail::ByteWriter w;
  w.put_bytes(kTensorMagic);
  w.put(kTensorVersion);
  w.put(static_cast<std::uint16_t>(jpd.geometry.roi().width));
  w.put(static_cast<std::uint16_t>(jpd.geometry.roi().height));
  w.put(jpd.frames);
  w.put(jpd.cross_terms);
  for (double v : jpd.values) w.put(v);
  detail::write_file(path.string(), w.bytes());
}

DenseJpd read_gamma_tensor(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  detail::ByteReader r(bytes);
  const auto magic = r.get_bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kTensorMagic.begin())) {
    throw IoError(IoError::Kind::MagicMismatch, path.string() + " is not a Gamma tensor");
  }
  if (r.get<std::uint16_t>() != kTensorVersion) throw IoError(IoError::Kind::Format, "unsupported tensor version");
  const int w = r.get<std::uint16_t>();
  const int h = r.get<std::uint16_t>();
  DenseJpd jpd{SensorGeometry::centered(w, h), 0, 0, {}};
  jpd.frames = r.get<std::uint64_t>();
  jpd.cross_terms = r.get<std::uint64_t>();
  const std::size_t s = jpd.size();
  jpd.values.resize(s * s);
  for (auto& v : jpd.values) v = r.get_double();
  if (!r.at_end()) throw IoError(IoError::Kind::Format, "trailing bytes in tensor file");
  return jpd;
}

}  // namespace spadcorr
