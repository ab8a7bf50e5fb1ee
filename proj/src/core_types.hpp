// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vcm {

// H x W x 3 RGB image, row major, origin top-left, values in [0, 1].
struct ImageTensor {
  int height = 0;
  int width = 0;
  std::vector<float> data;  // height * width * 3

  static ImageTensor filled(int height, int width, float r, float g, float b);

  float& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  float at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  size_t pixel_count() const { return static_cast<size_t>(height) * width; }
  bool same_shape(const ImageTensor& other) const {
    return height == other.height && width == other.width;
  }
};

// Ordered lowercase words, no whitespace inside a word. Empty prompts are
// permitted.
using TokenSequence = std::vector<std::string>;

// One bit per word of the target prompt; 1 keeps the word.
using BinaryWordMask = std::vector<uint8_t>;

// Per-pixel mask in [0, 1]. Binary at grid resolution, soft once a grid has
// been bilinearly upsampled.
struct ImageMask {
  int height = 0;
  int width = 0;
  std::vector<float> values;  // height * width

  static ImageMask filled(int height, int width, float value);

  float& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
  float at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
};

// Throw ContractViolation if the image breaks its invariants (dims >= 1,
// buffer sized H*W*3, every value in [0,1]).
void validate_image(const ImageTensor& img);

// Throw ContractViolation if any word is empty, contains whitespace, or
// contains an uppercase ASCII letter.
void validate_tokens(const TokenSequence& words);

// Lowercase, map every non-alphanumeric ASCII byte to a space, then split on
// whitespace. Bytes >= 0x80 are kept so UTF-8 words survive.
TokenSequence tokenize(const std::string& text);

std::string join_words(const TokenSequence& words);

// Delete the words whose mask bit is 0, preserving order.
TokenSequence apply_text_mask(const TokenSequence& words, const BinaryWordMask& mask);

// out[y,x,c] = img[y,x,c] * mask[y,x].
ImageTensor apply_image_mask(const ImageTensor& img, const ImageMask& mask);

// Min-max normalization to [0,1]. A constant map normalizes to all zeros so
// that downstream thresholding selects nothing.
std::vector<double> normalize_map(const std::vector<double>& values);

}  // namespace vcm
