// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#include "core_types.hpp"

#include <algorithm>
#include <cctype>

#include "errors.hpp"

namespace vcm {

ImageTensor ImageTensor::filled(int height, int width, float r, float g, float b) {
  ImageTensor img;
  img.height = height;
  img.width = width;
  img.data.resize(static_cast<size_t>(height) * width * 3);
  for (size_t p = 0; p < img.pixel_count(); ++p) {
    img.data[p * 3 + 0] = r;
    img.data[p * 3 + 1] = g;
    img.data[p * 3 + 2] = b;
  }
  return img;
}

ImageMask ImageMask::filled(int height, int width, float value) {
  ImageMask mask;
  mask.height = height;
  mask.width = width;
  mask.values.assign(static_cast<size_t>(height) * width, value);
  return mask;
}

void validate_image(const ImageTensor& img) {
  if (img.height < 1 || img.width < 1) {
    throw ContractViolation("image dimensions must be at least 1x1");
  }
  if (img.data.size() != static_cast<size_t>(img.height) * img.width * 3) {
    throw ContractViolation("image buffer size does not match height*width*3");
  }
  for (float v : img.data) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw ContractViolation("image values must lie in [0,1]");
    }
  }
}

void validate_tokens(const TokenSequence& words) {
  for (const auto& word : words) {
    if (word.empty()) throw ContractViolation("empty word in token sequence");
    for (unsigned char c : word) {
      if (std::isspace(c)) {
        throw ContractViolation("word contains whitespace: '" + word + "'");
      }
      if (c >= 'A' && c <= 'Z') {
        throw ContractViolation("word contains uppercase letter: '" + word + "'");
      }
    }
  }
}

TokenSequence tokenize(const std::string& text) {
  TokenSequence words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      words.push_back(current);
      current.clear();
    }
  };
  for (unsigned char c : text) {
    if (c >= 0x80) {
      current.push_back(static_cast<char>(c));
    } else if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return words;
}

std::string join_words(const TokenSequence& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += words[i];
  }
  return out;
}

TokenSequence apply_text_mask(const TokenSequence& words, const BinaryWordMask& mask) {
  if (words.size() != mask.size()) {
    throw ContractViolation("word mask length " + std::to_string(mask.size()) +
                            " does not match prompt length " + std::to_string(words.size()));
  }
  TokenSequence kept;
  kept.reserve(words.size());
  for (size_t i = 0; i < words.size(); ++i) {
    if (mask[i]) kept.push_back(words[i]);
  }
  return kept;
}

ImageTensor apply_image_mask(const ImageTensor& img, const ImageMask& mask) {
  if (img.height != mask.height || img.width != mask.width) {
    throw ContractViolation("image mask dimensions do not match image");
  }
  ImageTensor out = img;
  for (size_t p = 0; p < out.pixel_count(); ++p) {
    const float m = mask.values[p];
    out.data[p * 3 + 0] = img.data[p * 3 + 0] * m;
    out.data[p * 3 + 1] = img.data[p * 3 + 1] * m;
    out.data[p * 3 + 2] = img.data[p * 3 + 2] * m;
  }
  return out;
}

std::vector<double> normalize_map(const std::vector<double>& values) {
  if (values.empty()) throw ContractViolation("cannot normalize an empty map");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(values.size(), 0.0);
  if (hi > lo) {
    const double span = hi - lo;
    for (size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / span;
  }
  return out;
}

}  // namespace vcm
