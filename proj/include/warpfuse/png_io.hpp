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

#pragma once

#include <cstdint>
#include <filesystem>

#include "warpfuse/image.hpp"

namespace warpfuse {

// Lossless PNG access for the three raster formats the scene layout uses:
// 8-bit grayscale (labels, masks), 16-bit grayscale (depth in millimeters)
// and 8-bit RGB (color). All throw FormatError on unreadable or mismatching
// files.

Grid<std::uint8_t> read_png_gray8(const std::filesystem::path& path);
Grid<std::uint16_t> read_png_gray16(const std::filesystem::path& path);
Field<std::uint8_t> read_png_rgb8(const std::filesystem::path& path);

void write_png_gray8(const Grid<std::uint8_t>& image,
                     const std::filesystem::path& path);
void write_png_gray16(const Grid<std::uint16_t>& image,
                      const std::filesystem::path& path);
void write_png_rgb8(const Field<std::uint8_t>& image,
                    const std::filesystem::path& path);

}  // namespace warpfuse
