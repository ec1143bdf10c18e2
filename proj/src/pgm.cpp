#include "spadcorr/pgm.hpp"

#include <cctype>
#include <fstream>

#include "spadcorr/errors.hpp"

namespace spadcorr {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int parse_int(const std::string& tok, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw IoError(IoError::Kind::Format, "malformed PGM header: " + path.string());
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::Open, "cannot open image " + path.string());
  if (next_token(in) != "P5") throw IoError(IoError::Kind::MagicMismatch, "not a binary PGM (P5): " + path.string());
  GrayImage img;
  img.width = parse_int(next_token(in), path);
  img.height = parse_int(next_token(in), path);
  img.max_value = parse_int(next_token(in), path);
  if (img.width <= 0 || img.height <= 0 || img.max_value <= 0 || img.max_value > 255) {
    throw IoError(IoError::Kind::Format, "unsupported PGM (8-bit only): " + path.string());
  }
  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw IoError(IoError::Kind::Truncated, "PGM pixel data truncated: " + path.string());
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, int width, int height,
               std::span<const std::uint8_t> pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw IoError(IoError::Kind::Format, "PGM pixel count does not match its dimensions");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoError::Kind::Open, "cannot create " + path.string());
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError(IoError::Kind::Write, "write failed: " + path.string());
}

PixelMap read_pgm_map(const std::filesystem::path& path) {
  const GrayImage img = read_pgm(path);
  PixelMap map(img.width, img.height, 0.0f);
  const float scale = 1.0f / static_cast<float>(img.max_value);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    map.values()[i] = std::min(1.0f, static_cast<float>(img.pixels[i]) * scale);
  }
  return map;
}

}  // namespace spadcorr
