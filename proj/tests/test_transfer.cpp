// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

// Zero-shot transfer invariants of a head trained on the shipped toy corpus
// (seed 0, 200 epochs). TOY_TRAIN_CSV is injected by the build.

#include <doctest.h>

#include "attribution.hpp"
#include "backends.hpp"
#include "evaluation.hpp"
#include "manipulation.hpp"
#include "recognizer.hpp"

using namespace vcm;

namespace {

const ClassifierHead& toy_head() {
  static const ClassifierHead head = [] {
    const LabeledTextSet data = load_labeled_text_csv(TOY_TRAIN_CSV);
    TrainingConfig cfg;
    cfg.epochs = 200;
    cfg.seed = 0;
    return train_classifier(data, StubTextEmbedder(8), cfg);
  }();
  return head;
}

}  // namespace

TEST_CASE("single lexicon words transfer with a consistent sign") {
  // sign(score_text - 0.5) matches sign(score_image on the generated image
  // - 0.5) for every one-word lexicon prompt.
  const StubTextEmbedder text(8);
  const StubImageEmbedder image(8);
  const StubGenerator generator;
  for (const char* word : {"gun", "blood", "knife", "sword", "cigarette", "kill", "shoot",
                           "shooting", "torture", "water", "flower", "smile", "toy", "helmet",
                           "camera", "blue", "calm"}) {
    CAPTURE(word);
    const double from_text = score_text(toy_head(), text, {word});
    const double from_image = score_image(toy_head(), image, generator.generate({word}, 0));
    CHECK((from_text >= 0.5) == (from_image >= 0.5));
    CHECK((from_text >= 0.5) == is_immoral_word(word));
  }
}

TEST_CASE("trained head separates the text prompts it saw") {
  const StubTextEmbedder text(8);
  CHECK(score_text(toy_head(), text, {"shooting", "a", "gun"}) > 0.5);
  CHECK(score_text(toy_head(), text, {"a", "flower"}) < 0.5);
  // The trained head drives e1 to a positive logit.
  EmbeddingVector e1(8, 0.0);
  e1[0] = 1.0;
  CHECK(head_forward(toy_head(), e1) > 0.0);
}

TEST_CASE("word importance ranks the immoral word above the moral one") {
  const StubImageEmbedder image(8);
  const PromptGenerator generator = [](const TokenSequence& words) {
    return StubGenerator().generate(words, 0);
  };
  const ImageScorer scorer = [&](const ImageTensor& img) {
    return score_image(toy_head(), image, img);
  };
  const WordImportanceMap map =
      word_importance({"a", "gun", "flower"}, generator, scorer, {1000, 0.5, 0});
  REQUIRE(map.entries.size() == 3);
  CHECK(map.entries[1].importance > map.entries[2].importance);  // gun > flower
  CHECK(map.entries[1].importance > map.entries[0].importance);  // gun > a
}

TEST_CASE("verdict agrees between a prompt and its generated image") {
  const StubTextEmbedder text(8);
  const StubImageEmbedder image(8);
  const StubGenerator generator;
  const TokenSequence prompt = {"shooting", "a", "gun"};
  const Verdict from_text = judge(score_text(toy_head(), text, prompt), 0.5);
  const Verdict from_image =
      judge(score_image(toy_head(), image, generator.generate(prompt, 0)), 0.5);
  CHECK(from_text.immoral == from_image.immoral);
  CHECK(from_text.immoral);
}

TEST_CASE("word swap rewrites a gun into a water gun under the trained head") {
  const StubImageEmbedder image(8);
  const StubSuggester suggester;
  const PromptGenerator generator = [](const TokenSequence& words) {
    return StubGenerator().generate(words, 0);
  };
  const ImageScorer scorer = [&](const ImageTensor& img) {
    return score_image(toy_head(), image, img);
  };
  const TokenSequence words = {"a", "gun"};
  const double original = scorer(generator(words));
  const WordImportanceMap importance = word_importance(words, generator, scorer, {1000, 0.5, 0});
  const WordSwapOutcome outcome =
      word_swap_strategy(words, importance, suggester, generator, scorer, original);
  CHECK(outcome.swapped_word == "gun");
  CHECK(outcome.rewritten == TokenSequence{"a", "water", "gun"});
  CHECK(outcome.score < original);
  CHECK(outcome.improved);
}
