#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "spadcorr/scene.hpp"

namespace spadcorr {

struct GrayImage {
  int width = 0;
  int height = 0;
  int max_value = 255;
  std::vector<std::uint8_t> pixels;
};

/// Binary "P5" portable graymap, 8-bit (maxval <= 255).
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, int width, int height,
               std::span<const std::uint8_t> pixels);

/// Loads a PGM as a per-pixel map with values rescaled to [0,1].
PixelMap read_pgm_map(const std::filesystem::path& path);

}  // namespace spadcorr
