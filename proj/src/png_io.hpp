// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core_types.hpp"

namespace vcm {

// 8-bit PNG I/O. Written files are RGB (color type 2) or grayscale (color
// type 0), bit depth 8, non-interlaced, one zlib stream. Pixel encoding is
// byte = round(255 * value). Readers accept color types 0 and 2 with any of
// the five scanline filters.

std::vector<uint8_t> encode_image_png(const ImageTensor& img);
ImageTensor decode_image_png(const std::vector<uint8_t>& bytes);

void write_image_png(const ImageTensor& img, const std::string& path);
ImageTensor read_image_png(const std::string& path);

// Grayscale export for normalized score maps; values must lie in [0,1].
std::vector<uint8_t> encode_grayscale_png(const std::vector<double>& values, int height, int width);
void write_grayscale_png(const std::vector<double>& values, int height, int width,
                         const std::string& path);

// Grayscale export of a mask (e.g. a selected region).
void write_mask_png(const ImageMask& mask, const std::string& path);

}  // namespace vcm
