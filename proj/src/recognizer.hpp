// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "backends.hpp"
#include "core_types.hpp"
#include "rng.hpp"

namespace vcm {

// Immorality scorer applied on top of the frozen joint embedding space.
// Architecture: dropout -> linear -> tanh -> dropout -> linear. Inference is
// always dropout-free and deterministic; the head outputs a logit and the
// immorality score is its sigmoid.
struct ClassifierHead {
  int input_dim = 0;
  int hidden_dim = 0;
  std::vector<double> w1;  // input_dim x hidden_dim, row major
  std::vector<double> b1;  // hidden_dim
  std::vector<double> w2;  // hidden_dim
  double b2 = 0.0;
  double dropout_prob = 0.0;  // training-time only

  bool trained() const { return input_dim > 0 && hidden_dim > 0; }
  size_t parameter_count() const {
    return w1.size() + b1.size() + w2.size() + 1;
  }
};

struct TrainingConfig {
  int epochs = 500;
  double learning_rate = 0.002;
  double weight_decay = 0.01;
  int batch_size = 128;
  double dropout_prob = 0.3;
  double adam_epsilon = 1e-8;
  int hidden_dim = 64;
  uint64_t seed = 0;
};

struct LabeledText {
  TokenSequence words;
  int label = 0;  // 1 = immoral
};
using LabeledTextSet = std::vector<LabeledText>;

struct TrainingLog {
  std::vector<double> epoch_loss;  // mean per-item loss, one entry per epoch
};

struct Verdict {
  double score = 0.0;
  double threshold = 0.5;
  bool immoral = false;

  const char* label() const { return immoral ? "immoral" : "moral"; }
};

double sigmoid(double x);

// Mean binary cross-entropy of sigmoid(logit) against {0,1} labels, in the
// numerically stable max(x,0) - x*y + log1p(exp(-|x|)) form.
double bce_loss(const std::vector<double>& logits, const std::vector<int>& labels);

// Inference forward pass; dropout layers are identity.
double head_forward(const ClassifierHead& head, const EmbeddingVector& embedding);

// Training forward pass; both dropout layers draw from rng (inverted dropout,
// kept activations scaled by 1/(1-p)).
double head_forward_train(const ClassifierHead& head, const EmbeddingVector& embedding, Rng& rng);

struct HeadGradients {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
};

// Analytic gradient of bce_loss(head(embedding), label) with respect to every
// head parameter, dropout disabled. Used by training (as the p=0 special
// case) and by the finite-difference check.
HeadGradients head_gradients(const ClassifierHead& head, const EmbeddingVector& embedding,
                             int label);

// Trains the head on frozen text embeddings with decoupled-weight-decay Adam.
// Embeddings are computed once; data order is reshuffled every epoch from
// cfg.seed; the last partial batch is kept. Fully deterministic.
ClassifierHead train_classifier(const LabeledTextSet& data, const TextEmbedder& embedder,
                                const TrainingConfig& cfg, TrainingLog* log = nullptr);

double score_text(const ClassifierHead& head, const TextEmbedder& embedder,
                  const TokenSequence& words);

// Zero-shot transfer path: the text-trained head applied to an image
// embedding from the shared space.
double score_image(const ClassifierHead& head, const ImageEmbedder& embedder,
                   const ImageTensor& img);

// Binarize a score; the boundary score == threshold counts as immoral.
Verdict judge(double score, double threshold);

// Flat little-endian serialization: 16-byte magic/version header, u32 dims
// (D, H), then parameters as 64-bit floats in layer order w1, b1, w2, b2.
void save_head(const ClassifierHead& head, const std::string& path);
ClassifierHead load_head(const std::string& path);

}  // namespace vcm
