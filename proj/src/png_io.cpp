// Copyright 2026 The warpfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "warpfuse/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

#include "warpfuse/error.hpp"

namespace warpfuse {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

// Decodes an entire PNG into rows of `bit_depth`-bit samples with
// `channels` channels, converting palette/strip/alpha variants as needed.
void read_png(const std::filesystem::path& path, int want_channels,
              int want_bit_depth, int* out_width, int* out_height,
              std::vector<std::vector<png_byte>>* rows) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw FormatError("cannot open PNG: " + path.string());

  png_byte header[8] = {};
  if (std::fread(header, 1, 8, file.get()) != 8 ||
      png_sig_cmp(header, 0, 8) != 0)
    throw FormatError("not a PNG file: " + path.string());

  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
  if (!r.png) throw FormatError("png_create_read_struct failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw FormatError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(r.png)))
    throw FormatError("corrupt PNG: " + path.string());

  png_init_io(r.png, file.get());
  png_set_sig_bytes(r.png, 8);
  png_read_info(r.png, r.info);

  const int width = static_cast<int>(png_get_image_width(r.png, r.info));
  const int height = static_cast<int>(png_get_image_height(r.png, r.info));
  const int bit_depth = png_get_bit_depth(r.png, r.info);
  const int color_type = png_get_color_type(r.png, r.info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(r.png);
  if (png_get_valid(r.png, r.info, PNG_INFO_tRNS))
    png_set_tRNS_to_alpha(r.png);
  png_set_strip_alpha(r.png);

  if (want_bit_depth == 8 && bit_depth == 16) png_set_strip_16(r.png);
  if (want_bit_depth == 16 && bit_depth != 16)
    throw FormatError("expected 16-bit PNG: " + path.string());
  if (want_bit_depth == 16) png_set_swap(r.png);  // stored big-endian

  if (want_channels == 3 &&
      (color_type == PNG_COLOR_TYPE_GRAY ||
       color_type == PNG_COLOR_TYPE_GRAY_ALPHA))
    png_set_gray_to_rgb(r.png);
  if (want_channels == 1 &&
      (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGBA ||
       color_type == PNG_COLOR_TYPE_PALETTE))
    png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);

  png_read_update_info(r.png, r.info);
  const int row_channels = png_get_channels(r.png, r.info);
  if (row_channels != want_channels)
    throw FormatError("unexpected channel count in " + path.string());

  const std::size_t row_bytes = png_get_rowbytes(r.png, r.info);
  rows->assign(static_cast<std::size_t>(height),
               std::vector<png_byte>(row_bytes));
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) row_ptrs[y] = (*rows)[y].data();
  png_read_image(r.png, row_ptrs.data());
  png_read_end(r.png, nullptr);

  *out_width = width;
  *out_height = height;
}

void write_png(const std::filesystem::path& path, int width, int height,
               int channels, int bit_depth,
               const std::vector<png_bytep>& row_ptrs) {
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw FormatError("cannot create PNG: " + path.string());

  PngWriter w;
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                  nullptr);
  if (!w.png) throw FormatError("png_create_write_struct failed");
  w.info = png_create_info_struct(w.png);
  if (!w.info) throw FormatError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(w.png)))
    throw FormatError("PNG write failed: " + path.string());

  png_init_io(w.png, file.get());
  const int color_type =
      channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  if (bit_depth == 16) png_set_swap(w.png);
  png_write_image(w.png, const_cast<png_bytepp>(row_ptrs.data()));
  png_write_end(w.png, nullptr);
}

}  // namespace

Grid<std::uint8_t> read_png_gray8(const std::filesystem::path& path) {
  int width = 0, height = 0;
  std::vector<std::vector<png_byte>> rows;
  read_png(path, 1, 8, &width, &height, &rows);
  Grid<std::uint8_t> out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out.at(x, y) = rows[y][x];
  return out;
}

Grid<std::uint16_t> read_png_gray16(const std::filesystem::path& path) {
  int width = 0, height = 0;
  std::vector<std::vector<png_byte>> rows;
  read_png(path, 1, 16, &width, &height, &rows);
  Grid<std::uint16_t> out(width, height);
  for (int y = 0; y < height; ++y) {
    const auto* row = reinterpret_cast<const std::uint16_t*>(rows[y].data());
    for (int x = 0; x < width; ++x) out.at(x, y) = row[x];
  }
  return out;
}

Field<std::uint8_t> read_png_rgb8(const std::filesystem::path& path) {
  int width = 0, height = 0;
  std::vector<std::vector<png_byte>> rows;
  read_png(path, 3, 8, &width, &height, &rows);
  Field<std::uint8_t> out(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = rows[y][3 * x + c];
  return out;
}

void write_png_gray8(const Grid<std::uint8_t>& image,
                     const std::filesystem::path& path) {
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  auto* base = const_cast<std::uint8_t*>(image.data());
  for (int y = 0; y < image.height(); ++y)
    rows[y] = base + static_cast<std::size_t>(y) * image.width();
  write_png(path, image.width(), image.height(), 1, 8, rows);
}

void write_png_gray16(const Grid<std::uint16_t>& image,
                      const std::filesystem::path& path) {
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  auto* base = reinterpret_cast<png_bytep>(
      const_cast<std::uint16_t*>(image.data()));
  for (int y = 0; y < image.height(); ++y)
    rows[y] = base + static_cast<std::size_t>(y) * image.width() * 2;
  write_png(path, image.width(), image.height(), 1, 16, rows);
}

void write_png_rgb8(const Field<std::uint8_t>& image,
                    const std::filesystem::path& path) {
  if (image.channels() != 3)
    throw ContractError("write_png_rgb8: field must have 3 channels");
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  auto* base = const_cast<std::uint8_t*>(image.data());
  for (int y = 0; y < image.height(); ++y)
    rows[y] = base + static_cast<std::size_t>(y) * image.width() * 3;
  write_png(path, image.width(), image.height(), 3, 8, rows);
}

}  // namespace warpfuse
