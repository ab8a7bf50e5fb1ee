// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "attribution.hpp"
#include "backends.hpp"
#include "core_types.hpp"

namespace vcm {

enum class Strategy {
  kBlur,
  kInpaint,
  kWordSwap,
  kCaptionRewrite,
  kAuto,
  kNoneNeeded,
};

const char* strategy_name(Strategy strategy);
std::optional<Strategy> parse_strategy(const std::string& name);

// The tau-superlevel set of the normalized saliency map.
struct RegionSelection {
  double threshold = 0.0;
  ImageMask mask;
  long pixel_count = 0;
};

RegionSelection select_region(const SaliencyMap& saliency, double threshold);

// Whole-image separable Gaussian blur, kernel radius ceil(3*sigma),
// clamp-to-edge borders.
ImageTensor gaussian_blur(const ImageTensor& img, double sigma);

// Blur the whole image, then composite: blurred inside the region, the input
// bit-identical outside.
ImageTensor blur_strategy(const ImageTensor& img, const RegionSelection& region, double sigma);

// Zero the region's pixels, delegate to the inpainter, and composite so that
// pixels outside the region stay bit-identical. Empty regions are a no-op.
ImageTensor inpaint_strategy(const ImageTensor& img, const RegionSelection& region,
                             const Inpainter& inpainter);

struct WordSwapOutcome {
  size_t swapped_index = 0;
  std::string swapped_word;
  TokenSequence replacement;  // chosen suggestion phrase
  TokenSequence rewritten;    // prompt with the phrase spliced in place
  ImageTensor image;
  double score = 0.0;
  bool improved = false;  // score beat the original prompt's score
};

// Replace the most important word with the suggestion phrase whose generated
// image scores lowest. Ties on importance go to the earliest word; ties on
// score go to the first suggestion. Returns the best candidate even when it
// does not improve on original_score (improved=false).
WordSwapOutcome word_swap_strategy(const TokenSequence& words, const WordImportanceMap& importance,
                                   const Suggester& suggester, const PromptGenerator& generator,
                                   const ImageScorer& scorer, double original_score);

struct CaptionOutcome {
  TokenSequence caption;
  ImageTensor image;
  double score = 0.0;
};

// Caption the image with the morally-curated captioner, then re-edit the
// image conditioned on that caption.
CaptionOutcome caption_strategy(const ImageTensor& img, const Captioner& captioner,
                                const Editor& editor, const ImageScorer& scorer, uint64_t seed);

struct ManipulationConfig {
  double judge_threshold = 0.5;
  double region_threshold = 0.6;
  double blur_sigma = 4.0;
  WordAttributionParams word_attribution;
  ImageAttributionParams image_attribution;
  uint64_t seed = 0;
};

struct ManipulationResult {
  Strategy strategy = Strategy::kNoneNeeded;
  ImageTensor output;
  double pre_score = 0.0;
  double post_score = 0.0;
  uint64_t seed = 0;
  bool improved = false;       // post_score < pre_score
  bool still_immoral = false;  // post_score >= judge threshold
  // Strategy-dependent provenance.
  std::optional<RegionSelection> region;            // blur, inpaint
  std::optional<std::string> swapped_word;          // word swap
  std::optional<TokenSequence> rewritten_prompt;    // word swap
  std::optional<TokenSequence> caption;             // caption rewrite
};

// Runs one strategy (or all four for kAuto) against an image judged immoral.
// Moral inputs short-circuit to a single none-needed result. Attribution is
// computed on demand: pixel saliency once for blur/inpaint, word importance
// for word swap. Auto results come back ordered by ascending post score
// (stable on ties).
std::vector<ManipulationResult> manipulate(const ImageTensor& img,
                                           const std::optional<TokenSequence>& prompt,
                                           Strategy strategy, const BackendSet& backends,
                                           const ImageScorer& scorer,
                                           const ManipulationConfig& cfg);

}  // namespace vcm
