#pragma once

// Gray-scale image container and netpbm (PGM P2/P5, PBM P1/P4) I/O.
//
// Pixels are stored row-major as intensities in [0, 1]: 0 is black, 1 is
// white. PGM samples are divided by the file's maxval; PBM bits map 1 (ink)
// to 0.0 and 0 to 1.0.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermoedge/errors.hpp"

namespace thermoedge {

class Image {
 public:
  Image() = default;

  Image(std::size_t width, std::size_t height, double fill = 0.0)
      : width_(width), height_(height), pixels_(width * height, fill) {
    check_value(fill);
  }

  Image(std::size_t width, std::size_t height, std::vector<double> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (pixels_.size() != width_ * height_) {
      throw ContractError("Image: pixel count " + std::to_string(pixels_.size()) +
                          " does not match " + std::to_string(width_) + "x" +
                          std::to_string(height_));
    }
    for (double v : pixels_) check_value(v);
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  double at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }

  void set(std::size_t row, std::size_t col, double value) {
    check_value(value);
    pixels_[row * width_ + col] = value;
  }

  std::span<const double> pixels() const noexcept { return pixels_; }

  // True when every pixel is exactly 0 or 1.
  bool is_binary() const noexcept {
    for (double v : pixels_) {
      if (v != 0.0 && v != 1.0) return false;
    }
    return true;
  }

  Image transposed() const {
    Image out(height_, width_);
    for (std::size_t r = 0; r < height_; ++r)
      for (std::size_t c = 0; c < width_; ++c) out.pixels_[c * height_ + r] = at(r, c);
    return out;
  }

  bool operator==(const Image&) const = default;

 private:
  static void check_value(double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ContractError("Image: pixel value " + std::to_string(v) + " outside [0, 1]");
    }
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> pixels_;
};

namespace detail {

class NetpbmReader {
 public:
  explicit NetpbmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  std::string magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P') throw ParseError("not a netpbm file: missing 'P' magic", 0);
    pos_ = 2;
    return std::string{static_cast<char>(bytes_[0]), static_cast<char>(bytes_[1])};
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (is_space(ch)) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::uint64_t header_integer(std::string_view what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::uint64_t value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 0xFFFFFFFFULL) throw ParseError(std::string(what) + " is too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      throw ParseError("expected " + std::string(what) +
                           (pos_ < bytes_.size() ? "" : " but reached end of file"),
                       start);
    }
    return value;
  }

  // The single whitespace byte that separates the header from a raw raster.
  void raster_separator() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
      throw ParseError("expected a single whitespace byte before raster data", pos_);
    }
    ++pos_;
  }

  // Next ASCII PBM bit; digits may be packed without separators.
  int ascii_bit() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) throw ParseError("truncated pixel payload: expected more bits", pos_);
    const auto ch = bytes_[pos_];
    if (ch != '0' && ch != '1') throw ParseError("invalid PBM bit '" + std::string(1, char(ch)) + "'", pos_);
    ++pos_;
    return ch - '0';
  }

  std::uint8_t byte() { return bytes_[pos_++]; }

 private:
  static bool is_space(std::uint8_t ch) {
    return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\v' || ch == '\f';
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline void require_payload(const NetpbmReader& in, std::size_t expected) {
  if (in.remaining() < expected) {
    throw ParseError("truncated pixel payload: expected " + std::to_string(expected) +
                         " bytes, got " + std::to_string(in.remaining()),
                     in.offset());
  }
}

}  // namespace detail

// Decodes a netpbm byte buffer. Supported: P1, P2, P4, P5 with maxval 1..65535.
inline Image parse_netpbm(std::span<const std::uint8_t> bytes) {
  detail::NetpbmReader in(bytes);
  const std::string magic = in.magic();
  if (magic != "P1" && magic != "P2" && magic != "P4" && magic != "P5") {
    throw ParseError("unsupported netpbm magic '" + magic + "' (expected P1, P2, P4 or P5)", 0);
  }
  const bool bitmap = magic == "P1" || magic == "P4";

  const std::size_t width_at = (in.skip_space_and_comments(), in.offset());
  const auto width = in.header_integer("width");
  const auto height = in.header_integer("height");
  if (width == 0 || height == 0) throw ParseError("image dimensions must be positive", width_at);

  std::uint64_t maxval = 1;
  if (!bitmap) {
    in.skip_space_and_comments();
    const std::size_t maxval_at = in.offset();
    maxval = in.header_integer("maxval");
    if (maxval == 0 || maxval > 65535) {
      throw ParseError("unsupported maxval " + std::to_string(maxval) + " (expected 1..65535)", maxval_at);
    }
  }

  const std::size_t count = width * height;
  std::vector<double> pixels(count);
  const double scale = static_cast<double>(maxval);

  if (magic == "P1") {
    for (auto& p : pixels) p = in.ascii_bit() ? 0.0 : 1.0;
  } else if (magic == "P2") {
    for (auto& p : pixels) {
      in.skip_space_and_comments();
      const std::size_t at = in.offset();
      if (in.remaining() == 0) {
        throw ParseError("truncated pixel payload: expected " + std::to_string(count) + " samples", at);
      }
      const auto v = in.header_integer("pixel value");
      if (v > maxval) {
        throw ParseError("pixel value " + std::to_string(v) + " exceeds maxval " + std::to_string(maxval), at);
      }
      p = static_cast<double>(v) / scale;
    }
  } else if (magic == "P4") {
    in.raster_separator();
    const std::size_t row_bytes = (width + 7) / 8;
    detail::require_payload(in, row_bytes * height);
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t b = 0; b < row_bytes; ++b) {
        const std::uint8_t packed = in.byte();
        for (std::size_t bit = 0; bit < 8; ++bit) {
          const std::size_t c = b * 8 + bit;
          if (c >= width) break;
          pixels[r * width + c] = ((packed >> (7 - bit)) & 1U) ? 0.0 : 1.0;
        }
      }
    }
  } else {
    in.raster_separator();
    const std::size_t sample_bytes = maxval < 256 ? 1 : 2;
    detail::require_payload(in, count * sample_bytes);
    for (auto& p : pixels) {
      std::uint32_t v = in.byte();
      if (sample_bytes == 2) v = (v << 8) | in.byte();
      if (v > maxval) {
        throw ParseError("pixel value " + std::to_string(v) + " exceeds maxval " + std::to_string(maxval),
                         in.offset() - sample_bytes);
      }
      p = static_cast<double>(v) / scale;
    }
  }
  return Image(width, height, std::move(pixels));
}

inline Image load_image(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open image '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  try {
    return parse_netpbm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

enum class NetpbmEncoding { Ascii, Raw };

// PGM with maxval 255; intensities are rounded to the nearest level.
inline std::string encode_pgm(const Image& image, NetpbmEncoding encoding = NetpbmEncoding::Raw) {
  std::string out = (encoding == NetpbmEncoding::Raw ? "P5\n" : "P2\n") + std::to_string(image.width()) +
                    " " + std::to_string(image.height()) + "\n255\n";
  for (std::size_t r = 0; r < image.height(); ++r) {
    for (std::size_t c = 0; c < image.width(); ++c) {
      const auto level = static_cast<unsigned>(std::lround(image.at(r, c) * 255.0));
      if (encoding == NetpbmEncoding::Raw) {
        out.push_back(static_cast<char>(level));
      } else {
        out += std::to_string(level);
        out.push_back(c + 1 == image.width() ? '\n' : ' ');
      }
    }
  }
  return out;
}

// PBM; pixels below 0.5 are written as ink (1).
inline std::string encode_pbm(const Image& image, NetpbmEncoding encoding = NetpbmEncoding::Raw) {
  std::string out = (encoding == NetpbmEncoding::Raw ? "P4\n" : "P1\n") + std::to_string(image.width()) +
                    " " + std::to_string(image.height()) + "\n";
  for (std::size_t r = 0; r < image.height(); ++r) {
    if (encoding == NetpbmEncoding::Raw) {
      for (std::size_t b = 0; b < (image.width() + 7) / 8; ++b) {
        std::uint8_t packed = 0;
        for (std::size_t bit = 0; bit < 8; ++bit) {
          const std::size_t c = b * 8 + bit;
          if (c < image.width() && image.at(r, c) < 0.5) packed |= static_cast<std::uint8_t>(1U << (7 - bit));
        }
        out.push_back(static_cast<char>(packed));
      }
    } else {
      for (std::size_t c = 0; c < image.width(); ++c) {
        out.push_back(image.at(r, c) < 0.5 ? '1' : '0');
        out.push_back(c + 1 == image.width() ? '\n' : ' ');
      }
    }
  }
  return out;
}

inline void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw DataError("cannot open '" + path.string() + "' for writing");
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw DataError("failed writing '" + path.string() + "'");
}

inline void save_pgm(const std::filesystem::path& path, const Image& image,
                     NetpbmEncoding encoding = NetpbmEncoding::Raw) {
  write_bytes(path, encode_pgm(image, encoding));
}

inline void save_pbm(const std::filesystem::path& path, const Image& image,
                     NetpbmEncoding encoding = NetpbmEncoding::Raw) {
  write_bytes(path, encode_pbm(image, encoding));
}

}  // namespace thermoedge
