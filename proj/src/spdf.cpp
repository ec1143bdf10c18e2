#include "spadcorr/spdf.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "binary_io.hpp"
#include "spadcorr/errors.hpp"

namespace spadcorr {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'S', 'P', 'D', 'F'};

}  // namespace

std::array<std::uint8_t, FrameFileHeader::kSize> encode_header(const FrameFileHeader& header) {
  std::array<std::uint8_t, FrameFileHeader::kSize> out{};
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  detail::put_le(out.data() + 4, header.format_version);
  detail::put_le(out.data() + 6, header.width);
  detail::put_le(out.data() + 8, header.height);
  detail::put_le(out.data() + 10, header.frame_count);
  out[18] = header.bit_depth;
  return out;
}

FrameFileHeader decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < FrameFileHeader::kSize) {
    throw IoError(IoError::Kind::Truncated, "SPDF header truncated");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw IoError(IoError::Kind::MagicMismatch, "not an SPDF file (bad magic)");
  }
  FrameFileHeader h;
  h.format_version = detail::get_le<std::uint16_t>(bytes.data() + 4);
  h.width = detail::get_le<std::uint16_t>(bytes.data() + 6);
  h.height = detail::get_le<std::uint16_t>(bytes.data() + 8);
  h.frame_count = detail::get_le<std::uint64_t>(bytes.data() + 10);
  h.bit_depth = bytes[18];
  if (h.format_version != FrameFileHeader::kVersion) {
    throw IoError(IoError::Kind::Format, "unsupported SPDF version " + std::to_string(h.format_version));
  }
  if (h.bit_depth != 1 && h.bit_depth != 8) {
    throw IoError(IoError::Kind::Format, "invalid SPDF bit depth " + std::to_string(h.bit_depth));
  }
  if (h.width < 2 || h.height < 2) throw IoError(IoError::Kind::Format, "invalid SPDF dimensions");
  return h;
}

void pack_frame(const FrameBuffer& frame, int bit_depth, std::span<std::uint8_t> out) {
  if (frame.bit_depth() != bit_depth) {
    throw IoError(IoError::Kind::BitDepthMismatch, "frame bit depth differs from the stream's");
  }
  const auto& g = frame.geometry();
  const auto w = static_cast<std::size_t>(g.width());
  const auto h = static_cast<std::size_t>(g.height());
  const auto values = frame.values();
  if (bit_depth == 8) {
    std::copy(values.begin(), values.end(), out.begin());
    return;
  }
  const std::size_t stride = (w + 7) / 8;
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(stride * h), std::uint8_t{0});
  for (std::size_t row = 0; row < h; ++row) {
    const std::uint8_t* src = values.data() + row * w;
    std::uint8_t* dst = out.data() + row * stride;
    for (std::size_t col = 0; col < w; ++col) {
      if (src[col] != 0) dst[col / 8] |= static_cast<std::uint8_t>(1u << (col % 8));
    }
  }
}

void unpack_frame(std::span<const std::uint8_t> in, FrameBuffer& frame) {
  const auto& g = frame.geometry();
  const auto w = static_cast<std::size_t>(g.width());
  const auto h = static_cast<std::size_t>(g.height());
  auto values = frame.mutable_values();
  if (frame.bit_depth() == 8) {
    std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(w * h), values.begin());
    return;
  }
  const std::size_t stride = (w + 7) / 8;
  for (std::size_t row = 0; row < h; ++row) {
    const std::uint8_t* src = in.data() + row * stride;
    std::uint8_t* dst = values.data() + row * w;
    for (std::size_t col = 0; col < w; ++col) dst[col] = (src[col / 8] >> (col % 8)) & 1u;
  }
}

void collect_active_roi_packed(std::span<const std::uint8_t> packed, const SensorGeometry& geometry,
                               std::vector<std::uint32_t>& out) {
  const Roi& roi = geometry.roi();
  const std::size_t stride = (static_cast<std::size_t>(geometry.width()) + 7) / 8;
  const int col_end = roi.col0 + roi.width;
  for (int row = 0; row < roi.height; ++row) {
    const std::uint8_t* line = packed.data() + static_cast<std::size_t>(roi.row0 + row) * stride;
    const auto base = static_cast<std::uint32_t>(row) * static_cast<std::uint32_t>(roi.width);
    for (int byte = roi.col0 / 8; byte * 8 < col_end; ++byte) {
      unsigned bits = line[byte];
      while (bits != 0) {
        const int col = byte * 8 + std::countr_zero(bits);
        bits &= bits - 1;
        if (col >= roi.col0 && col < col_end) {
          out.push_back(base + static_cast<std::uint32_t>(col - roi.col0));
        }
      }
    }
  }
}

SpdfWriter::SpdfWriter(const std::filesystem::path& path, int width, int height, int bit_depth)
    : path_(path) {
  if (bit_depth != 1 && bit_depth != 8) {
    throw IoError(IoError::Kind::BitDepthMismatch, "SPDF bit depth must be 1 or 8");
  }
  if (width < 2 || height < 2 || width > 65535 || height > 65535) {
    throw IoError(IoError::Kind::Format, "SPDF dimensions out of range");
  }
  header_.width = static_cast<std::uint16_t>(width);
  header_.height = static_cast<std::uint16_t>(height);
  header_.bit_depth = static_cast<std::uint8_t>(bit_depth);
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError(IoError::Kind::Open, "cannot create " + path.string());
  const auto bytes = encode_header(header_);
  out_.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  scratch_.resize(header_.frame_stride());
}

SpdfWriter::~SpdfWriter() {
  try {
    close();
  } catch (...) {
    // Destructors must not throw; call close() explicitly to observe errors.
  }
}

void SpdfWriter::write(const FrameBuffer& frame) {
  if (closed_) throw IoError(IoError::Kind::Write, "write to a closed SPDF writer");
  if (frame.geometry().width() != header_.width || frame.geometry().height() != header_.height) {
    throw IoError(IoError::Kind::Format, "frame dimensions differ from the stream's");
  }
  pack_frame(frame, header_.bit_depth, scratch_);
  out_.write(reinterpret_cast<const char*>(scratch_.data()), static_cast<std::streamsize>(scratch_.size()));
  if (!out_) throw IoError(IoError::Kind::Write, "write failed: " + path_.string());
  ++header_.frame_count;
}

void SpdfWriter::close() {
  if (closed_) return;
  closed_ = true;
  const auto bytes = encode_header(header_);
  out_.seekp(0);
  out_.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  out_.close();
  if (!out_) throw IoError(IoError::Kind::Write, "failed to finalise " + path_.string());
}

SpdfReader::SpdfReader(const std::filesystem::path& path)
    : SpdfReader(path, [&] {
        std::ifstream probe(path, std::ios::binary);
        if (!probe) throw IoError(IoError::Kind::Open, "cannot open " + path.string());
        std::array<std::uint8_t, FrameFileHeader::kSize> raw{};
        probe.read(reinterpret_cast<char*>(raw.data()), raw.size());
        if (probe.gcount() != static_cast<std::streamsize>(raw.size())) {
          throw IoError(IoError::Kind::Truncated, "SPDF header truncated: " + path.string());
        }
        const auto h = decode_header(raw);
        return SensorGeometry::centered(h.width, h.height);
      }()) {}

SpdfReader::SpdfReader(const std::filesystem::path& path, const SensorGeometry& geometry)
    : path_(path), geometry_(geometry) {
  in_.open(path, std::ios::binary);
  if (!in_) throw IoError(IoError::Kind::Open, "cannot open " + path.string());
  std::array<std::uint8_t, FrameFileHeader::kSize> raw{};
  in_.read(reinterpret_cast<char*>(raw.data()), raw.size());
  if (in_.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw IoError(IoError::Kind::Truncated, "SPDF header truncated: " + path.string());
  }
  header_ = decode_header(raw);
  if (geometry.width() != header_.width || geometry.height() != header_.height) {
    throw IoError(IoError::Kind::Format, "geometry does not match the SPDF dimensions");
  }
  const auto size = std::filesystem::file_size(path);
  const auto expected = FrameFileHeader::kSize + header_.payload_size();
  if (size < expected) {
    throw IoError(IoError::Kind::Truncated, "SPDF payload truncated: " + path.string());
  }
  if (size > expected) {
    throw IoError(IoError::Kind::Format, "SPDF file has trailing bytes: " + path.string());
  }
  scratch_.resize(header_.frame_stride());
}

void SpdfReader::seek(std::uint64_t frame_index) {
  if (frame_index > header_.frame_count) throw OutOfRangeError("seek past the end of the stream");
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(FrameFileHeader::kSize + frame_index * header_.frame_stride()));
  next_ = frame_index;
}

bool SpdfReader::next_raw(std::span<const std::uint8_t>& payload) {
  if (next_ >= header_.frame_count) return false;
  in_.read(reinterpret_cast<char*>(scratch_.data()), static_cast<std::streamsize>(scratch_.size()));
  if (in_.gcount() != static_cast<std::streamsize>(scratch_.size())) {
    throw IoError(IoError::Kind::Truncated, "SPDF payload truncated: " + path_.string());
  }
  payload = scratch_;
  ++next_;
  return true;
}

bool SpdfReader::next(FrameBuffer& frame) {
  if (frame.bit_depth() != header_.bit_depth) {
    throw IoError(IoError::Kind::BitDepthMismatch, "frame bit depth differs from the file's");
  }
  if (!(frame.geometry() == geometry_)) throw IoError(IoError::Kind::Format, "frame geometry differs from the reader's");
  const std::uint64_t index = next_;
  std::span<const std::uint8_t> payload;
  if (!next_raw(payload)) return false;
  unpack_frame(payload, frame);
  frame.set_frame_index(index);
  return true;
}

FrameBuffer SpdfReader::make_frame() const { return FrameBuffer(geometry_, header_.bit_depth); }

void write_stream(const std::filesystem::path& path, std::span<const FrameBuffer> frames, int width,
                  int height, int bit_depth) {
  SpdfWriter writer(path, width, height, bit_depth);
  for (const auto& f : frames) writer.write(f);
  writer.close();
}

std::vector<FrameBuffer> read_stream(const std::filesystem::path& path) {
  SpdfReader reader(path);
  std::vector<FrameBuffer> frames;
  frames.reserve(static_cast<std::size_t>(reader.header().frame_count));
  FrameBuffer frame = reader.make_frame();
  while (reader.next(frame)) frames.push_back(frame);
  return frames;
}

}  // namespace spadcorr
