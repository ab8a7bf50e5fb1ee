// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#include "manipulation.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace vcm {
namespace {

ManipulationResult base_result(Strategy strategy, double pre_score, uint64_t seed) {
  ManipulationResult result;
  result.strategy = strategy;
  result.pre_score = pre_score;
  result.seed = seed;
  return result;
}

void finalize(ManipulationResult& result, double post_score, double judge_threshold) {
  result.post_score = post_score;
  result.improved = post_score < result.pre_score;
  result.still_immoral = post_score >= judge_threshold;
}

}  // namespace

const char* strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::kBlur: return "blur";
    case Strategy::kInpaint: return "inpaint";
    case Strategy::kWordSwap: return "word_swap";
    case Strategy::kCaptionRewrite: return "caption_rewrite";
    case Strategy::kAuto: return "auto";
    case Strategy::kNoneNeeded: return "none-needed";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(const std::string& name) {
  if (name == "blur") return Strategy::kBlur;
  if (name == "inpaint") return Strategy::kInpaint;
  if (name == "word_swap") return Strategy::kWordSwap;
  if (name == "caption_rewrite") return Strategy::kCaptionRewrite;
  if (name == "auto") return Strategy::kAuto;
  return std::nullopt;
}

RegionSelection select_region(const SaliencyMap& saliency, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ContractViolation("region threshold must lie in (0,1)");
  }
  const std::vector<double> normalized = normalize_map(saliency.values);
  RegionSelection region;
  region.threshold = threshold;
  region.mask = ImageMask::filled(saliency.height, saliency.width, 0.0f);
  for (size_t p = 0; p < normalized.size(); ++p) {
    if (normalized[p] >= threshold) {
      region.mask.values[p] = 1.0f;
      ++region.pixel_count;
    }
  }
  return region;
}

ImageTensor gaussian_blur(const ImageTensor& img, double sigma) {
  if (!(sigma > 0.0)) throw ContractViolation("blur sigma must be positive");
  validate_image(img);
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double kernel_sum = 0.0;
  for (int d = -radius; d <= radius; ++d) {
    kernel[d + radius] = std::exp(-(static_cast<double>(d) * d) / (2.0 * sigma * sigma));
    kernel_sum += kernel[d + radius];
  }
  for (double& k : kernel) k /= kernel_sum;

  const int h = img.height;
  const int w = img.width;
  ImageTensor horizontal = img;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int d = -radius; d <= radius; ++d) {
          const int xs = std::clamp(x + d, 0, w - 1);
          acc += kernel[d + radius] * img.at(y, xs, c);
        }
        horizontal.at(y, x, c) = static_cast<float>(acc);
      }
    }
  }
  ImageTensor out = horizontal;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int d = -radius; d <= radius; ++d) {
          const int ys = std::clamp(y + d, 0, h - 1);
          acc += kernel[d + radius] * horizontal.at(ys, x, c);
        }
        out.at(y, x, c) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
      }
    }
  }
  return out;
}

ImageTensor blur_strategy(const ImageTensor& img, const RegionSelection& region, double sigma) {
  if (img.height != region.mask.height || img.width != region.mask.width) {
    throw ContractViolation("blur region dimensions do not match image");
  }
  if (region.pixel_count == 0) return img;
  const ImageTensor blurred = gaussian_blur(img, sigma);
  ImageTensor out = img;
  for (size_t p = 0; p < out.pixel_count(); ++p) {
    if (region.mask.values[p] == 1.0f) {
      out.data[p * 3 + 0] = blurred.data[p * 3 + 0];
      out.data[p * 3 + 1] = blurred.data[p * 3 + 1];
      out.data[p * 3 + 2] = blurred.data[p * 3 + 2];
    }
  }
  return out;
}

ImageTensor inpaint_strategy(const ImageTensor& img, const RegionSelection& region,
                             const Inpainter& inpainter) {
  if (img.height != region.mask.height || img.width != region.mask.width) {
    throw ContractViolation("inpaint region dimensions do not match image");
  }
  if (region.pixel_count == 0) return img;
  ImageTensor zeroed = img;
  for (size_t p = 0; p < zeroed.pixel_count(); ++p) {
    if (region.mask.values[p] == 1.0f) {
      zeroed.data[p * 3 + 0] = 0.0f;
      zeroed.data[p * 3 + 1] = 0.0f;
      zeroed.data[p * 3 + 2] = 0.0f;
    }
  }
  const ImageTensor filled = inpainter.inpaint(zeroed, region.mask);
  if (!filled.same_shape(img)) {
    throw BackendError("inpainter changed the image shape");
  }
  // Composite so the locality guarantee holds regardless of the backend.
  ImageTensor out = img;
  for (size_t p = 0; p < out.pixel_count(); ++p) {
    if (region.mask.values[p] == 1.0f) {
      out.data[p * 3 + 0] = filled.data[p * 3 + 0];
      out.data[p * 3 + 1] = filled.data[p * 3 + 1];
      out.data[p * 3 + 2] = filled.data[p * 3 + 2];
    }
  }
  return out;
}

WordSwapOutcome word_swap_strategy(const TokenSequence& words, const WordImportanceMap& importance,
                                   const Suggester& suggester, const PromptGenerator& generator,
                                   const ImageScorer& scorer, double original_score) {
  if (words.empty()) throw ContractViolation("word swap needs a non-empty prompt");
  if (importance.entries.size() != words.size()) {
    throw ContractViolation("word importance map does not match the prompt");
  }

  size_t target = 0;
  for (size_t i = 1; i < importance.entries.size(); ++i) {
    if (importance.entries[i].importance > importance.entries[target].importance) target = i;
  }

  const std::string& swapped = words[target];
  const std::vector<TokenSequence> candidates = suggester.suggest({swapped});
  if (candidates.empty()) {
    throw BackendError("suggester returned no candidates for '" + swapped + "'");
  }

  WordSwapOutcome outcome;
  outcome.swapped_index = target;
  outcome.swapped_word = swapped;
  bool first = true;
  for (const auto& phrase : candidates) {
    TokenSequence rewritten(words.begin(), words.begin() + target);
    rewritten.insert(rewritten.end(), phrase.begin(), phrase.end());
    rewritten.insert(rewritten.end(), words.begin() + target + 1, words.end());
    ImageTensor image = generator(rewritten);
    const double score = scorer(image);
    if (first || score < outcome.score) {
      outcome.replacement = phrase;
      outcome.rewritten = std::move(rewritten);
      outcome.image = std::move(image);
      outcome.score = score;
      first = false;
    }
  }
  outcome.improved = outcome.score < original_score;
  return outcome;
}

CaptionOutcome caption_strategy(const ImageTensor& img, const Captioner& captioner,
                                const Editor& editor, const ImageScorer& scorer, uint64_t seed) {
  CaptionOutcome outcome;
  outcome.caption = captioner.caption(img);
  outcome.image = editor.edit(img, outcome.caption, seed);
  outcome.score = scorer(outcome.image);
  return outcome;
}

std::vector<ManipulationResult> manipulate(const ImageTensor& img,
                                           const std::optional<TokenSequence>& prompt,
                                           Strategy strategy, const BackendSet& backends,
                                           const ImageScorer& scorer,
                                           const ManipulationConfig& cfg) {
  validate_image(img);
  if (strategy == Strategy::kNoneNeeded) {
    throw ContractViolation("none-needed is a result marker, not a runnable strategy");
  }
  if (strategy == Strategy::kWordSwap && (!prompt.has_value() || prompt->empty())) {
    throw ContractViolation("word swap requires a prompt");
  }

  const double pre_score = scorer(img);
  if (pre_score < cfg.judge_threshold) {
    ManipulationResult result = base_result(Strategy::kNoneNeeded, pre_score, cfg.seed);
    result.output = img;
    finalize(result, pre_score, cfg.judge_threshold);
    return {result};
  }

  std::vector<Strategy> plan;
  if (strategy == Strategy::kAuto) {
    plan = {Strategy::kBlur, Strategy::kInpaint};
    if (prompt.has_value() && !prompt->empty()) plan.push_back(Strategy::kWordSwap);
    plan.push_back(Strategy::kCaptionRewrite);
  } else {
    plan = {strategy};
  }

  const PromptGenerator generator = [&](const TokenSequence& words) {
    return backends.generator->generate(words, cfg.seed);
  };

  // Saliency and region are shared between blur and inpaint.
  std::optional<RegionSelection> region;
  auto region_for_image = [&]() -> const RegionSelection& {
    if (!region.has_value()) {
      const SaliencyMap saliency = image_saliency(img, scorer, cfg.image_attribution);
      region = select_region(saliency, cfg.region_threshold);
    }
    return *region;
  };

  std::vector<ManipulationResult> results;
  for (Strategy step : plan) {
    ManipulationResult result = base_result(step, pre_score, cfg.seed);
    switch (step) {
      case Strategy::kBlur: {
        const RegionSelection& selected = region_for_image();
        result.output = blur_strategy(img, selected, cfg.blur_sigma);
        result.region = selected;
        break;
      }
      case Strategy::kInpaint: {
        const RegionSelection& selected = region_for_image();
        result.output = inpaint_strategy(img, selected, *backends.inpainter);
        result.region = selected;
        break;
      }
      case Strategy::kWordSwap: {
        const WordImportanceMap importance =
            word_importance(*prompt, generator, scorer, cfg.word_attribution);
        WordSwapOutcome outcome = word_swap_strategy(*prompt, importance, *backends.suggester,
                                                     generator, scorer, pre_score);
        result.output = std::move(outcome.image);
        result.swapped_word = outcome.swapped_word;
        result.rewritten_prompt = std::move(outcome.rewritten);
        break;
      }
      case Strategy::kCaptionRewrite: {
        CaptionOutcome outcome =
            caption_strategy(img, *backends.captioner, *backends.editor, scorer, cfg.seed);
        result.output = std::move(outcome.image);
        result.caption = std::move(outcome.caption);
        break;
      }
      default:
        throw ContractViolation("unexpected strategy in plan");
    }
    finalize(result, scorer(result.output), cfg.judge_threshold);
    results.push_back(std::move(result));
  }

  if (strategy == Strategy::kAuto) {
    std::stable_sort(results.begin(), results.end(),
                     [](const ManipulationResult& a, const ManipulationResult& b) {
                       return a.post_score < b.post_score;
                     });
  }
  return results;
}

}  // namespace vcm
