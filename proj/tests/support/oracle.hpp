#pragma once

// Independent reference implementations used by the tests.

#include <cstdint>
#include <vector>

#include "spadcorr/frame.hpp"

namespace spadcorr::testing {

/// Binary ROI vector of a frame, row-major over the ROI.
inline std::vector<std::uint8_t> roi_bits(const FrameBuffer& f) {
  const auto& g = f.geometry();
  std::vector<std::uint8_t> out(g.roi_size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.at(g.roi_coord(i)) != 0 ? 1 : 0;
  return out;
}

/// Direct double loop over the frame sequence:
/// C(i,j) = sum_l I_l(i) I_l(j), A(i,j) = sum_{l>=1} I_l(i) I_{l-1}(j).
struct BruteForceJpd {
  std::size_t s = 0;
  std::uint64_t frames = 0;
  std::vector<std::uint64_t> c;
  std::vector<std::uint64_t> a;

  explicit BruteForceJpd(std::size_t roi_size) : s(roi_size), c(s * s, 0), a(s * s, 0) {}

  void add(const std::vector<std::uint8_t>& bits) {
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        c[i * s + j] += static_cast<std::uint64_t>(bits[i] * bits[j]);
        if (frames > 0) a[i * s + j] += static_cast<std::uint64_t>(bits[i] * prev_[j]);
      }
    }
    prev_ = bits;
    ++frames;
  }

  [[nodiscard]] double gamma(std::size_t i, std::size_t j) const {
    return static_cast<double>(c[i * s + j]) / static_cast<double>(frames) -
           static_cast<double>(a[i * s + j]) / static_cast<double>(frames - 1);
  }

 private:
  std::vector<std::uint8_t> prev_;
};

}  // namespace spadcorr::testing
