#include "lenspipe/grid.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace lenspipe {

ImageBuffer ImageBuffer::solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  ImageBuffer img;
  img.width = w;
  img.height = h;
  img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = r;
    img.rgb[i + 1] = g;
    img.rgb[i + 2] = b;
  }
  return img;
}

void GridSpec::validate() const {
  if (d <= 0) throw std::invalid_argument("grid side d must be positive");
  if (h <= 0 || h % d != 0)
    throw std::invalid_argument("grid resolution h must be a positive multiple of d");
  if (label.glyph_scale <= 0) throw std::invalid_argument("glyph_scale must be positive");
}

namespace {

// 5x7 digit glyphs, row-major bitmask (LSB = leftmost column).
constexpr std::uint8_t kDigitGlyphs[10][7] = {
    {0x0E, 0x11, 0x19, 0x15, 0x13, 0x11, 0x0E},  // 0
    {0x04, 0x06, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x10, 0x08, 0x04, 0x02, 0x1F},  // 2
    {0x1F, 0x08, 0x04, 0x08, 0x10, 0x11, 0x0E},  // 3
    {0x08, 0x0C, 0x0A, 0x09, 0x1F, 0x08, 0x08},  // 4
    {0x1F, 0x01, 0x0F, 0x10, 0x10, 0x11, 0x0E},  // 5
    {0x0C, 0x02, 0x01, 0x0F, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x10, 0x08, 0x04, 0x02, 0x02, 0x02},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x1E, 0x10, 0x08, 0x06},  // 9
};
constexpr int kGlyphW = 5;
constexpr int kGlyphH = 7;

int digit_count(int n) {
  int c = 1;
  while (n >= 10) {
    n /= 10;
    ++c;
  }
  return c;
}

void draw_badge(ImageBuffer& cell, int number, const LabelStyle& style) {
  const BadgeRect rect = badge_rect(style, number);
  for (int y = rect.y; y < rect.y + rect.h && y < cell.height; ++y)
    for (int x = rect.x; x < rect.x + rect.w && x < cell.width; ++x) {
      auto* p = cell.pixel(x, y);
      p[0] = style.bg[0];
      p[1] = style.bg[1];
      p[2] = style.bg[2];
    }
  std::string digits = std::to_string(number);
  int pen_x = style.padding;
  const int pen_y = style.padding;
  const int s = style.glyph_scale;
  for (char ch : digits) {
    const auto& glyph = kDigitGlyphs[ch - '0'];
    for (int gy = 0; gy < kGlyphH; ++gy)
      for (int gx = 0; gx < kGlyphW; ++gx) {
        if (!(glyph[gy] >> gx & 1)) continue;
        for (int sy = 0; sy < s; ++sy)
          for (int sx = 0; sx < s; ++sx) {
            const int x = pen_x + gx * s + sx;
            const int y = pen_y + gy * s + sy;
            if (x >= cell.width || y >= cell.height) continue;
            auto* p = cell.pixel(x, y);
            p[0] = style.fg[0];
            p[1] = style.fg[1];
            p[2] = style.fg[2];
          }
      }
    pen_x += (kGlyphW + 1) * s;
  }
}

}  // namespace

BadgeRect badge_rect(const LabelStyle& style, int number) {
  const int nd = digit_count(number);
  BadgeRect r;
  r.x = 0;
  r.y = 0;
  r.w = 2 * style.padding + (nd * (kGlyphW + 1) - 1) * style.glyph_scale;
  r.h = 2 * style.padding + kGlyphH * style.glyph_scale;
  return r;
}

ImageBuffer resize_bilinear(const ImageBuffer& src, int out_w, int out_h) {
  if (src.width <= 0 || src.height <= 0 || src.rgb.empty())
    throw std::invalid_argument("cannot resize empty image");
  ImageBuffer out;
  out.width = out_w;
  out.height = out_h;
  out.rgb.resize(static_cast<std::size_t>(out_w) * out_h * 3);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, src.height - 1);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = std::clamp(fy - y0, 0.0, 1.0);
    for (int x = 0; x < out_w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, src.width - 1);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = std::clamp(fx - x0, 0.0, 1.0);
      auto* dst = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = src.pixel(x0, y0)[c] * (1 - wx) + src.pixel(x1, y0)[c] * wx;
        const double bot = src.pixel(x0, y1)[c] * (1 - wx) + src.pixel(x1, y1)[c] * wx;
        dst[c] = static_cast<std::uint8_t>(std::lround(top * (1 - wy) + bot * wy));
      }
    }
  }
  return out;
}

GridImage gridify(std::span<const SourceImage> images, const GridSpec& spec) {
  spec.validate();
  const std::size_t cells = static_cast<std::size_t>(spec.d) * spec.d;
  if (images.size() > cells)
    throw std::invalid_argument("too many images for grid: " + std::to_string(images.size()) +
                                " > " + std::to_string(cells));
  for (const auto& img : images)
    if (img.buffer.width <= 0 || img.buffer.height <= 0 || img.buffer.rgb.empty())
      throw std::invalid_argument("undecodable image '" + img.image_id + "'");

  GridImage grid;
  grid.d = spec.d;
  grid.h = spec.h;
  grid.pixels = ImageBuffer::solid(spec.h, spec.h, 0, 0, 0);
  grid.cell_map.assign(cells, std::nullopt);
  const int cell = spec.cell();

  // cells write disjoint regions
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t ki = 0; ki < static_cast<std::int64_t>(images.size()); ++ki) {
    const auto k = static_cast<std::size_t>(ki);
    ImageBuffer tile = resize_bilinear(images[k].buffer, cell, cell);
    draw_badge(tile, static_cast<int>(k) + 1, spec.label);
    const int row = static_cast<int>(k) / spec.d;
    const int col = static_cast<int>(k) % spec.d;
    for (int y = 0; y < cell; ++y) {
      auto* dst = grid.pixels.pixel(col * cell, row * cell + y);
      std::copy_n(tile.pixel(0, y), static_cast<std::size_t>(cell) * 3, dst);
    }
  }
  for (std::size_t k = 0; k < images.size(); ++k) grid.cell_map[k] = images[k].image_id;
  return grid;
}

ImageBuffer extract_cell(const GridImage& grid, int k) {
  const int cells = grid.d * grid.d;
  if (k < 1 || k > cells)
    throw std::out_of_range("cell index " + std::to_string(k) + " out of 1.." +
                            std::to_string(cells));
  const int cell = grid.h / grid.d;
  const int row = (k - 1) / grid.d;
  const int col = (k - 1) % grid.d;
  ImageBuffer out;
  out.width = cell;
  out.height = cell;
  out.rgb.resize(static_cast<std::size_t>(cell) * cell * 3);
  for (int y = 0; y < cell; ++y)
    std::copy_n(grid.pixels.pixel(col * cell, row * cell + y), static_cast<std::size_t>(cell) * 3,
                out.pixel(0, y));
  return out;
}

void write_png(const std::string& path, const ImageBuffer& img) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("libpng failure writing " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.pixel(0, y)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng failure encoding in-memory PNG");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        buf->insert(buf->end(), data, data + len);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.pixel(0, y)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

ImageBuffer read_png(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw std::runtime_error("undecodable PNG: " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  // normalize everything to 8-bit RGB
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  ImageBuffer img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  for (int y = 0; y < img.height; ++y) png_read_row(png, img.pixel(0, y), nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

void write_cell_map_sidecar(const std::string& path, const std::string& query_id,
                            const GridImage& grid) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t i = 0; i < grid.cell_map.size(); ++i) {
    nlohmann::json cell{{"k", i + 1}};
    if (grid.cell_map[i])
      cell["image_id"] = *grid.cell_map[i];
    else
      cell["image_id"] = nullptr;
    cells.push_back(std::move(cell));
  }
  nlohmann::json j{{"query_id", query_id}, {"d", grid.d}, {"h", grid.h}, {"cells", cells}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace lenspipe
