// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core_types.hpp"

namespace vcm {

// Maps an image to an immorality score in [0,1].
using ImageScorer = std::function<double(const ImageTensor&)>;

// Maps a (masked) prompt to an image; callers bind the generator backend and
// its seed.
using PromptGenerator = std::function<ImageTensor(const TokenSequence&)>;

struct WordAttributionParams {
  int sample_count = 1000;
  double mask_prob = 0.5;
  uint64_t seed = 0;
};

struct ImageAttributionParams {
  int sample_count = 4000;
  double mask_prob = 0.5;
  int grid_height = 8;
  int grid_width = 8;
  uint64_t seed = 0;
};

struct WordImportanceEntry {
  std::string word;
  double importance = 0.0;  // conditional mean score given the word visible
  long samples = 0;         // masks that kept the word; 0 flags an undefined entry
};

struct WordImportanceMap {
  std::vector<WordImportanceEntry> entries;  // one per input word, order preserved
  int sample_count = 0;
  double mask_prob = 0.0;
  uint64_t seed = 0;
};

struct SaliencyMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;  // per-pixel conditional mean score
  int sample_count = 0;
  int grid_height = 0;
  int grid_width = 0;
  double mask_prob = 0.0;
  uint64_t seed = 0;
  double coverage = 0.0;  // fraction of pixels with positive total mask weight
};

struct WordMaskBatch {
  std::vector<BinaryWordMask> masks;
  int word_count = 0;
  int sample_count = 0;
  double mask_prob = 0.0;
  uint64_t seed = 0;
};

struct ImageMaskBatch {
  std::vector<ImageMask> masks;
  int grid_height = 0;
  int grid_width = 0;
  int sample_count = 0;
  double mask_prob = 0.0;
  uint64_t seed = 0;
};

// K word masks with i.i.d. Bernoulli(p) bits; all-zero masks are rejection
// resampled so the generator never sees an empty prompt.
WordMaskBatch sample_word_masks(int word_count, int sample_count, double mask_prob, uint64_t seed);

// K image masks: a binary grid_h x grid_w Bernoulli(p) grid, bilinearly
// upsampled one cell beyond the image and cropped at a random per-mask offset
// within one cell, yielding soft masks. When the grid matches the image
// dimensions exactly (test mode) masks are binary pixel masks with no
// upsampling or shift; all-zero image masks are kept.
ImageMaskBatch sample_image_masks(int height, int width, int grid_height, int grid_width,
                                  int sample_count, double mask_prob, uint64_t seed);

// Bilinear upsampling of one grid onto the image lattice with a crop offset
// in [0, cell). Grid samples sit at cell centers; borders clamp, so a
// constant grid yields a constant mask for every shift.
ImageMask upsample_grid_mask(const std::vector<float>& grid, int grid_height, int grid_width,
                             int height, int width, int shift_y, int shift_x);

// Monte-Carlo word importance: importance(w) is the empirical mean score over
// masks that keep w, where each mask's score is scorer(generator(masked
// prompt)). Generation is memoized per distinct masked prompt.
WordImportanceMap word_importance(const TokenSequence& words, const PromptGenerator& generator,
                                  const ImageScorer& scorer, const WordAttributionParams& params);

// Exact conditional expectation over all non-all-zero masks weighted by their
// Bernoulli(p) probability. Convergence oracle for word_importance; refuses
// prompts longer than 16 words.
WordImportanceMap exhaustive_word_importance(const TokenSequence& words,
                                             const PromptGenerator& generator,
                                             const ImageScorer& scorer, double mask_prob);

// Monte-Carlo pixel saliency: saliency(x) = sum_k score_k * M_k(x) / sum_k
// M_k(x). Pixels never covered are set to 0 and reported via coverage.
SaliencyMap image_saliency(const ImageTensor& img, const ImageScorer& scorer,
                           const ImageAttributionParams& params);

// Exact conditional expectation over all 2^(H*W) binary pixel masks; oracle
// for image_saliency. Refuses images with more than 16 pixels.
SaliencyMap exhaustive_image_saliency(const ImageTensor& img, const ImageScorer& scorer,
                                      double mask_prob);

}  // namespace vcm
