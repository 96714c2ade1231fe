#pragma once

// Small raster toolkit: RGB/gray buffers, lossless encoders, and the drawing
// primitives used for visual prompts and top-down renders.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace agentvln {

using Rgb = std::array<std::uint8_t, 3>;

namespace colors {
inline constexpr Rgb kGreen{0, 200, 0};
inline constexpr Rgb kRed{230, 0, 0};
inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kBlue{30, 80, 230};
}  // namespace colors

class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = colors::kBlack);

  int width() const { return width_; }
  int height() const { return height_; }
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  const std::vector<std::uint8_t>& data() const { return data_; }

  // Pixel-center convention: pixel (x, y) covers [x-0.5, x+0.5).
  void fill_disc(double cx, double cy, double radius, Rgb c);
  void draw_ring(double cx, double cy, double radius, double thickness, Rgb c);
  void draw_line(double x0, double y0, double x1, double y1, Rgb c);
  void fill_rect(double x0, double y0, double x1, double y1, Rgb c);
  // 3x5 bitmap digits, scale 2, top-left anchored.
  void draw_number(int x, int y, int value, Rgb c);

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

std::vector<std::uint8_t> encode_png(const RgbImage& image);
void write_png(const std::filesystem::path& path, const RgbImage& image);

// Binary PGM (P5), 8-bit.
void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& pixels);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace agentvln
