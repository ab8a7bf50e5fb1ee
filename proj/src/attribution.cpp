// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#include "attribution.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "errors.hpp"
#include "rng.hpp"

namespace vcm {
namespace {

void validate_mask_params(int sample_count, double mask_prob) {
  if (sample_count < 1) throw ContractViolation("mask sample count must be at least 1");
  if (!(mask_prob > 0.0 && mask_prob < 1.0)) {
    throw ContractViolation("mask probability must lie in (0,1)");
  }
}

// Memoizing scorer over masked prompts, keyed by the joined word sequence.
class PromptScoreCache {
 public:
  PromptScoreCache(const PromptGenerator& generator, const ImageScorer& scorer)
      : generator_(generator), scorer_(scorer) {}

  double score(const TokenSequence& masked) {
    const std::string key = join_words(masked);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double value = scorer_(generator_(masked));
    cache_.emplace(key, value);
    return value;
  }

 private:
  const PromptGenerator& generator_;
  const ImageScorer& scorer_;
  std::unordered_map<std::string, double> cache_;
};

}  // namespace

WordMaskBatch sample_word_masks(int word_count, int sample_count, double mask_prob,
                                uint64_t seed) {
  if (word_count < 1) throw ContractViolation("word mask sampling needs at least one word");
  validate_mask_params(sample_count, mask_prob);
  WordMaskBatch batch;
  batch.word_count = word_count;
  batch.sample_count = sample_count;
  batch.mask_prob = mask_prob;
  batch.seed = seed;
  batch.masks.reserve(sample_count);
  Rng rng(seed);
  for (int k = 0; k < sample_count; ++k) {
    BinaryWordMask mask(word_count);
    for (;;) {
      bool any = false;
      for (int i = 0; i < word_count; ++i) {
        mask[i] = rng.bernoulli(mask_prob) ? 1 : 0;
        any = any || mask[i];
      }
      if (any) break;
    }
    batch.masks.push_back(std::move(mask));
  }
  return batch;
}

ImageMaskBatch sample_image_masks(int height, int width, int grid_height, int grid_width,
                                  int sample_count, double mask_prob, uint64_t seed) {
  if (height < 1 || width < 1 || grid_height < 1 || grid_width < 1 || grid_height > height ||
      grid_width > width) {
    throw ContractViolation("image mask grid must fit inside the image");
  }
  validate_mask_params(sample_count, mask_prob);
  ImageMaskBatch batch;
  batch.grid_height = grid_height;
  batch.grid_width = grid_width;
  batch.sample_count = sample_count;
  batch.mask_prob = mask_prob;
  batch.seed = seed;
  batch.masks.reserve(sample_count);
  Rng rng(seed);

  const bool test_mode = grid_height == height && grid_width == width;
  const int cell_h = (height + grid_height - 1) / grid_height;
  const int cell_w = (width + grid_width - 1) / grid_width;

  std::vector<float> grid(static_cast<size_t>(grid_height) * grid_width);
  for (int k = 0; k < sample_count; ++k) {
    for (auto& g : grid) g = rng.bernoulli(mask_prob) ? 1.0f : 0.0f;
    if (test_mode) {
      ImageMask mask = ImageMask::filled(height, width, 0.0f);
      std::copy(grid.begin(), grid.end(), mask.values.begin());
      batch.masks.push_back(std::move(mask));
    } else {
      const int shift_y = static_cast<int>(rng.below(static_cast<uint64_t>(cell_h)));
      const int shift_x = static_cast<int>(rng.below(static_cast<uint64_t>(cell_w)));
      batch.masks.push_back(
          upsample_grid_mask(grid, grid_height, grid_width, height, width, shift_y, shift_x));
    }
  }
  return batch;
}

ImageMask upsample_grid_mask(const std::vector<float>& grid, int grid_height, int grid_width,
                             int height, int width, int shift_y, int shift_x) {
  if (grid.size() != static_cast<size_t>(grid_height) * grid_width) {
    throw ContractViolation("grid buffer size does not match grid dimensions");
  }
  const int cell_h = (height + grid_height - 1) / grid_height;
  const int cell_w = (width + grid_width - 1) / grid_width;
  ImageMask mask = ImageMask::filled(height, width, 0.0f);
  for (int y = 0; y < height; ++y) {
    // Grid samples sit at cell centers of the upsampled lattice; the crop
    // offset slides the lattice by up to one cell.
    const double gy = (y + shift_y + 0.5) / cell_h - 0.5;
    const int y0 = std::clamp(static_cast<int>(std::floor(gy)), 0, grid_height - 1);
    const int y1 = std::min(y0 + 1, grid_height - 1);
    const double fy = std::clamp(gy - std::floor(gy), 0.0, 1.0);
    for (int x = 0; x < width; ++x) {
      const double gx = (x + shift_x + 0.5) / cell_w - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(gx)), 0, grid_width - 1);
      const int x1 = std::min(x0 + 1, grid_width - 1);
      const double fx = std::clamp(gx - std::floor(gx), 0.0, 1.0);
      const double top = grid[static_cast<size_t>(y0) * grid_width + x0] * (1.0 - fx) +
                         grid[static_cast<size_t>(y0) * grid_width + x1] * fx;
      const double bottom = grid[static_cast<size_t>(y1) * grid_width + x0] * (1.0 - fx) +
                            grid[static_cast<size_t>(y1) * grid_width + x1] * fx;
      mask.at(y, x) = static_cast<float>(top * (1.0 - fy) + bottom * fy);
    }
  }
  return mask;
}

WordImportanceMap word_importance(const TokenSequence& words, const PromptGenerator& generator,
                                  const ImageScorer& scorer, const WordAttributionParams& params) {
  if (words.empty()) throw ContractViolation("word importance needs at least one word");
  const int n = static_cast<int>(words.size());
  const WordMaskBatch batch =
      sample_word_masks(n, params.sample_count, params.mask_prob, params.seed);

  PromptScoreCache cache(generator, scorer);
  // Accumulate deviations from the first mask's score; a constant scorer then
  // sums exact zeros and the conditional mean is exactly that constant.
  std::vector<double> shifted_sums(n, 0.0);
  std::vector<long> counts(n, 0);
  double pivot = 0.0;
  bool have_pivot = false;
  for (const auto& mask : batch.masks) {
    const double score = cache.score(apply_text_mask(words, mask));
    if (!have_pivot) {
      pivot = score;
      have_pivot = true;
    }
    for (int i = 0; i < n; ++i) {
      if (mask[i]) {
        shifted_sums[i] += score - pivot;
        ++counts[i];
      }
    }
  }

  WordImportanceMap map;
  map.sample_count = params.sample_count;
  map.mask_prob = params.mask_prob;
  map.seed = params.seed;
  map.entries.reserve(n);
  for (int i = 0; i < n; ++i) {
    WordImportanceEntry entry;
    entry.word = words[i];
    entry.samples = counts[i];
    entry.importance =
        counts[i] > 0
            ? std::clamp(pivot + shifted_sums[i] / static_cast<double>(counts[i]), 0.0, 1.0)
            : 0.0;
    map.entries.push_back(std::move(entry));
  }
  return map;
}

WordImportanceMap exhaustive_word_importance(const TokenSequence& words,
                                             const PromptGenerator& generator,
                                             const ImageScorer& scorer, double mask_prob) {
  if (words.empty()) throw ContractViolation("word importance needs at least one word");
  if (words.size() > 16) {
    throw ContractViolation("exhaustive word importance refuses prompts longer than 16 words");
  }
  if (!(mask_prob > 0.0 && mask_prob < 1.0)) {
    throw ContractViolation("mask probability must lie in (0,1)");
  }
  const int n = static_cast<int>(words.size());
  PromptScoreCache cache(generator, scorer);
  std::vector<double> shifted_sums(n, 0.0);
  std::vector<double> weights(n, 0.0);
  double pivot = 0.0;
  bool have_pivot = false;
  for (uint32_t bits = 1; bits < (1u << n); ++bits) {
    BinaryWordMask mask(n);
    int kept = 0;
    for (int i = 0; i < n; ++i) {
      mask[i] = (bits >> i) & 1u;
      kept += mask[i];
    }
    const double weight =
        std::pow(mask_prob, kept) * std::pow(1.0 - mask_prob, n - kept);
    const double score = cache.score(apply_text_mask(words, mask));
    if (!have_pivot) {
      pivot = score;
      have_pivot = true;
    }
    for (int i = 0; i < n; ++i) {
      if (mask[i]) {
        shifted_sums[i] += weight * (score - pivot);
        weights[i] += weight;
      }
    }
  }

  WordImportanceMap map;
  map.sample_count = (1 << n) - 1;
  map.mask_prob = mask_prob;
  map.seed = 0;
  map.entries.reserve(n);
  for (int i = 0; i < n; ++i) {
    WordImportanceEntry entry;
    entry.word = words[i];
    entry.samples = 1L << (n - 1);  // masks keeping word i
    entry.importance = std::clamp(pivot + shifted_sums[i] / weights[i], 0.0, 1.0);
    map.entries.push_back(std::move(entry));
  }
  return map;
}

SaliencyMap image_saliency(const ImageTensor& img, const ImageScorer& scorer,
                           const ImageAttributionParams& params) {
  validate_image(img);
  const ImageMaskBatch batch =
      sample_image_masks(img.height, img.width, params.grid_height, params.grid_width,
                         params.sample_count, params.mask_prob, params.seed);

  const size_t pixels = img.pixel_count();
  std::vector<double> shifted_sums(pixels, 0.0);
  std::vector<double> weights(pixels, 0.0);
  double pivot = 0.0;
  bool have_pivot = false;
  for (const auto& mask : batch.masks) {
    const double score = scorer(apply_image_mask(img, mask));
    if (!have_pivot) {
      pivot = score;
      have_pivot = true;
    }
    for (size_t p = 0; p < pixels; ++p) {
      const double m = mask.values[p];
      shifted_sums[p] += (score - pivot) * m;
      weights[p] += m;
    }
  }

  SaliencyMap map;
  map.height = img.height;
  map.width = img.width;
  map.sample_count = params.sample_count;
  map.grid_height = params.grid_height;
  map.grid_width = params.grid_width;
  map.mask_prob = params.mask_prob;
  map.seed = params.seed;
  map.values.resize(pixels);
  size_t covered = 0;
  for (size_t p = 0; p < pixels; ++p) {
    if (weights[p] > 0.0) {
      map.values[p] = std::clamp(pivot + shifted_sums[p] / weights[p], 0.0, 1.0);
      ++covered;
    } else {
      map.values[p] = 0.0;
    }
  }
  map.coverage = static_cast<double>(covered) / static_cast<double>(pixels);
  return map;
}

SaliencyMap exhaustive_image_saliency(const ImageTensor& img, const ImageScorer& scorer,
                                      double mask_prob) {
  validate_image(img);
  if (!(mask_prob > 0.0 && mask_prob < 1.0)) {
    throw ContractViolation("mask probability must lie in (0,1)");
  }
  const size_t pixels = img.pixel_count();
  if (pixels > 16) {
    throw ContractViolation("exhaustive image saliency refuses images with more than 16 pixels");
  }
  std::vector<double> shifted_sums(pixels, 0.0);
  std::vector<double> weights(pixels, 0.0);
  double pivot = 0.0;
  bool have_pivot = false;
  ImageMask mask = ImageMask::filled(img.height, img.width, 0.0f);
  for (uint32_t bits = 1; bits < (1u << pixels); ++bits) {
    int kept = 0;
    for (size_t p = 0; p < pixels; ++p) {
      mask.values[p] = (bits >> p) & 1u ? 1.0f : 0.0f;
      kept += (bits >> p) & 1u;
    }
    const double weight = std::pow(mask_prob, kept) *
                          std::pow(1.0 - mask_prob, static_cast<int>(pixels) - kept);
    const double score = scorer(apply_image_mask(img, mask));
    if (!have_pivot) {
      pivot = score;
      have_pivot = true;
    }
    for (size_t p = 0; p < pixels; ++p) {
      if (mask.values[p] == 1.0f) {
        shifted_sums[p] += weight * (score - pivot);
        weights[p] += weight;
      }
    }
  }

  SaliencyMap map;
  map.height = img.height;
  map.width = img.width;
  map.sample_count = (1 << pixels) - 1;
  map.grid_height = img.height;
  map.grid_width = img.width;
  map.mask_prob = mask_prob;
  map.seed = 0;
  map.coverage = 1.0;
  map.values.resize(pixels);
  for (size_t p = 0; p < pixels; ++p) {
    map.values[p] = std::clamp(pivot + shifted_sums[p] / weights[p], 0.0, 1.0);
  }
  return map;
}

}  // namespace vcm
