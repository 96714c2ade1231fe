#include "agentvln/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <zlib.h>

#include "agentvln/errors.hpp"

namespace agentvln {

RgbImage::RgbImage(int width, int height, Rgb fill)
    : width_(width),
      height_(height),
      data_(static_cast<std::size_t>(width) * height * 3) {
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill[0];
    data_[i + 1] = fill[1];
    data_[i + 2] = fill[2];
  }
}

Rgb RgbImage::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void RgbImage::set(int x, int y, Rgb c) {
  if (!in_bounds(x, y)) return;
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  data_[i] = c[0];
  data_[i + 1] = c[1];
  data_[i + 2] = c[2];
}

void RgbImage::fill_disc(double cx, double cy, double radius, Rgb c) {
  const int x0 = static_cast<int>(std::floor(cx - radius));
  const int x1 = static_cast<int>(std::ceil(cx + radius));
  const int y0 = static_cast<int>(std::floor(cy - radius));
  const int y1 = static_cast<int>(std::ceil(cy + radius));
  const double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      if (dx * dx + dy * dy <= r2) set(x, y, c);
    }
  }
}

void RgbImage::draw_ring(double cx, double cy, double radius, double thickness,
                         Rgb c) {
  const double outer = radius + thickness / 2.0;
  const double inner = std::max(0.0, radius - thickness / 2.0);
  const int x0 = static_cast<int>(std::floor(cx - outer));
  const int x1 = static_cast<int>(std::ceil(cx + outer));
  const int y0 = static_cast<int>(std::floor(cy - outer));
  const int y1 = static_cast<int>(std::ceil(cy + outer));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      if (d <= outer && d >= inner) set(x, y, c);
    }
  }
}

void RgbImage::draw_line(double x0, double y0, double x1, double y1, Rgb c) {
  const double len = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
  const int n = std::max(1, static_cast<int>(std::ceil(len)));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    set(static_cast<int>(std::lround(x0 + t * (x1 - x0))),
        static_cast<int>(std::lround(y0 + t * (y1 - y0))), c);
  }
}

void RgbImage::fill_rect(double x0, double y0, double x1, double y1, Rgb c) {
  const int ax = static_cast<int>(std::lround(std::min(x0, x1)));
  const int bx = static_cast<int>(std::lround(std::max(x0, x1)));
  const int ay = static_cast<int>(std::lround(std::min(y0, y1)));
  const int by = static_cast<int>(std::lround(std::max(y0, y1)));
  for (int y = ay; y < by; ++y) {
    for (int x = ax; x < bx; ++x) set(x, y, c);
  }
}

namespace {

// 3x5 glyphs, one row per 3-bit group, MSB left.
constexpr std::array<std::array<std::uint8_t, 5>, 10> kDigits{{
    {7, 5, 5, 5, 7},  // 0
    {2, 6, 2, 2, 7},  // 1
    {7, 1, 7, 4, 7},  // 2
    {7, 1, 7, 1, 7},  // 3
    {5, 5, 7, 1, 1},  // 4
    {7, 4, 7, 1, 7},  // 5
    {7, 4, 7, 5, 7},  // 6
    {7, 1, 1, 1, 1},  // 7
    {7, 5, 7, 5, 7},  // 8
    {7, 5, 7, 1, 7},  // 9
}};

void append_chunk(std::vector<std::uint8_t>& out, const char* type,
                  const std::vector<std::uint8_t>& payload) {
  const auto put32 = [&](std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
  };
  put32(static_cast<std::uint32_t>(payload.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const uLong crc = crc32(0L, out.data() + type_at,
                          static_cast<uInt>(out.size() - type_at));
  put32(static_cast<std::uint32_t>(crc));
}

}  // namespace

void RgbImage::draw_number(int x, int y, int value, Rgb c) {
  const std::string text = std::to_string(value);
  constexpr int kScale = 2;
  int pen = x;
  for (char ch : text) {
    if (ch < '0' || ch > '9') continue;
    const auto& glyph = kDigits[static_cast<std::size_t>(ch - '0')];
    for (int row = 0; row < 5; ++row) {
      for (int col = 0; col < 3; ++col) {
        if ((glyph[static_cast<std::size_t>(row)] >> (2 - col)) & 1) {
          for (int sy = 0; sy < kScale; ++sy) {
            for (int sx = 0; sx < kScale; ++sx) {
              set(pen + col * kScale + sx, y + row * kScale + sy, c);
            }
          }
        }
      }
    }
    pen += 4 * kScale;
  }
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  const int w = image.width();
  const int h = image.height();
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(h) * (1 + 3 * w));
  const auto& data = image.data();
  for (int y = 0; y < h; ++y) {
    raw.push_back(0);  // filter: none
    const auto row = data.begin() + static_cast<std::ptrdiff_t>(y) * w * 3;
    raw.insert(raw.end(), row, row + static_cast<std::ptrdiff_t>(w) * 3);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw FormatError("zlib compression failed");
  }
  compressed.resize(bound);

  std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr(13, 0);
  const auto be32 = [&](std::size_t at, std::uint32_t v) {
    ihdr[at] = static_cast<std::uint8_t>(v >> 24);
    ihdr[at + 1] = static_cast<std::uint8_t>(v >> 16);
    ihdr[at + 2] = static_cast<std::uint8_t>(v >> 8);
    ihdr[at + 3] = static_cast<std::uint8_t>(v);
  };
  be32(0, static_cast<std::uint32_t>(w));
  be32(4, static_cast<std::uint32_t>(h));
  ihdr[8] = 8;  // bit depth
  ihdr[9] = 2;  // truecolor
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", compressed);
  append_chunk(out, "IEND", {});
  return out;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  const auto bytes = encode_png(image);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
}

void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& pixels) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  f << "P5\n" << width << " " << height << "\n255\n";
  f.write(reinterpret_cast<const char*>(pixels.data()),
          static_cast<std::streamsize>(pixels.size()));
}

namespace {
constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t n =
        (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t n = bytes[i] << 16;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::vector<std::uint8_t> out;
  std::uint32_t buf = 0;
  int bits = 0;
  for (char ch : text) {
    if (ch == '=') break;
    const auto pos = kAlphabet.find(ch);
    if (pos == std::string_view::npos) {
      throw FormatError("invalid base64 character");
    }
    buf = (buf << 6) | static_cast<std::uint32_t>(pos);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((buf >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace agentvln
