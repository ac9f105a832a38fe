#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lenspipe {

// Row-major RGB8 raster.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // width * height * 3

  static ImageBuffer solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  std::uint8_t* pixel(int x, int y) { return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* pixel(int x, int y) const {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
};

struct LabelStyle {
  int glyph_scale = 2;     // integer upscale of the 5x7 glyph raster
  int padding = 2;         // px around the digits inside the badge
  std::uint8_t fg[3] = {255, 255, 255};
  std::uint8_t bg[3] = {0, 0, 0};
};

struct GridSpec {
  int d = 8;   // grid side; d*d = w
  int h = 896; // output resolution (h x h x 3)
  LabelStyle label;

  int cell() const { return h / d; }
  // throws std::invalid_argument unless d > 0 and h divisible by d
  void validate() const;

  static GridSpec paligemma() { return GridSpec{8, 896, {}}; }
  static GridSpec minicpm() { return GridSpec{7, 980, {}}; }
};

// Badge rectangle (x, y, w, h) in cell-local coordinates for label `number`.
struct BadgeRect {
  int x = 0, y = 0, w = 0, h = 0;
  bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
};
BadgeRect badge_rect(const LabelStyle& style, int number);

struct GridImage {
  int d = 0;
  int h = 0;
  ImageBuffer pixels;  // exactly h x h x 3
  // cell index k (1-based, row-major) -> image_id; nullopt = PAD (all-zero cell)
  std::vector<std::optional<std::string>> cell_map;
};

struct SourceImage {
  std::string image_id;
  ImageBuffer buffer;
};

// Bilinear resample, aspect ratio not preserved. Deterministic.
ImageBuffer resize_bilinear(const ImageBuffer& src, int out_w, int out_h);

// Packs up to d*d images into one composite, row-major in input order.
// Each image is resized to cell x cell, a numeric badge "k" is drawn top-left,
// remaining cells are black PAD. Throws when |images| > d*d or an image has
// an empty raster (undecodable), naming the image_id.
GridImage gridify(std::span<const SourceImage> images, const GridSpec& spec);

// Pixel block of cell k (1-based). Throws std::out_of_range for bad k.
ImageBuffer extract_cell(const GridImage& grid, int k);

// PNG io (8-bit RGB).
void write_png(const std::string& path, const ImageBuffer& img);
ImageBuffer read_png(const std::string& path);
std::vector<std::uint8_t> encode_png(const ImageBuffer& img);

// Sidecar {query_id, d, h, cells:[{k, image_id|null}]}.
void write_cell_map_sidecar(const std::string& path, const std::string& query_id,
                            const GridImage& grid);

}  // namespace lenspipe
