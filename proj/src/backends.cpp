// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#include "backends.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "errors.hpp"

namespace vcm {
namespace {

const std::unordered_set<std::string>& immoral_lexicon() {
  static const std::unordered_set<std::string> kWords = {
      "gun", "blood", "knife", "sword", "cigarette", "kill", "shoot", "shooting", "torture"};
  return kWords;
}

const std::unordered_set<std::string>& moral_lexicon() {
  static const std::unordered_set<std::string> kWords = {
      "water", "flower", "smile", "toy", "helmet", "camera", "blue", "calm"};
  return kWords;
}

EmbeddingVector basis(int dim, int axis, double value = 1.0) {
  EmbeddingVector v(dim, 0.0);
  v[axis] = value;
  return v;
}

constexpr int kCanvasSize = 64;
constexpr int kCellSize = 16;
constexpr int kGridSide = 4;

void paint_cell(ImageTensor& img, int cell, float r, float g, float b) {
  const int cy = (cell / kGridSide) * kCellSize;
  const int cx = (cell % kGridSide) * kCellSize;
  for (int y = cy; y < cy + kCellSize; ++y) {
    for (int x = cx; x < cx + kCellSize; ++x) {
      img.at(y, x, 0) = r;
      img.at(y, x, 1) = g;
      img.at(y, x, 2) = b;
    }
  }
}

}  // namespace

bool is_immoral_word(const std::string& word) { return immoral_lexicon().count(word) > 0; }

bool is_moral_word(const std::string& word) { return moral_lexicon().count(word) > 0; }

uint32_t polyhash(const std::string& word) {
  uint32_t hash = 0;
  uint32_t power = 1;
  for (unsigned char byte : word) {
    hash += static_cast<uint32_t>(byte) * power;
    power *= 31u;
  }
  return hash;
}

bool bigram_neutralized(const TokenSequence& words, size_t i) {
  return is_immoral_word(words[i]) && i > 0 && is_moral_word(words[i - 1]);
}

double l2_norm(const EmbeddingVector& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.size() != b.size()) throw ContractViolation("cosine: dimension mismatch");
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (na * nb);
}

StubTextEmbedder::StubTextEmbedder(int dim) : dim_(dim) {
  if (dim < 3) throw ContractViolation("stub embedders need dimension >= 3");
}

EmbeddingVector StubTextEmbedder::embed_text(const TokenSequence& words) const {
  EmbeddingVector v(dim_, 0.0);
  for (size_t i = 0; i < words.size(); ++i) {
    if (is_immoral_word(words[i])) {
      v[bigram_neutralized(words, i) ? 1 : 0] += 1.0;
    } else if (is_moral_word(words[i])) {
      v[1] += 1.0;
    } else {
      v[2] += 0.1;
    }
  }
  const double norm = l2_norm(v);
  if (norm == 0.0) return basis(dim_, 2);
  for (double& x : v) x /= norm;
  return v;
}

double stub_redness(const ImageTensor& img) {
  double sum = 0.0;
  for (size_t p = 0; p < img.pixel_count(); ++p) {
    const double r = img.data[p * 3 + 0];
    const double g = img.data[p * 3 + 1];
    const double b = img.data[p * 3 + 2];
    sum += std::max(0.0, r - (g + b) / 2.0);
  }
  return sum / static_cast<double>(img.pixel_count());
}

double stub_blueness(const ImageTensor& img) {
  double sum = 0.0;
  for (size_t p = 0; p < img.pixel_count(); ++p) {
    const double r = img.data[p * 3 + 0];
    const double g = img.data[p * 3 + 1];
    const double b = img.data[p * 3 + 2];
    sum += std::max(0.0, b - (r + g) / 2.0);
  }
  return sum / static_cast<double>(img.pixel_count());
}

StubImageEmbedder::StubImageEmbedder(int dim) : dim_(dim) {
  if (dim < 3) throw ContractViolation("stub embedders need dimension >= 3");
}

EmbeddingVector StubImageEmbedder::embed_image(const ImageTensor& img) const {
  validate_image(img);
  EmbeddingVector v(dim_, 0.0);
  v[0] = stub_redness(img);
  v[1] = stub_blueness(img);
  v[2] = 0.1;
  const double norm = l2_norm(v);
  for (double& x : v) x /= norm;
  return v;
}

ImageTensor StubGenerator::generate(const TokenSequence& words, uint64_t /*seed*/) const {
  ImageTensor canvas = ImageTensor::filled(kCanvasSize, kCanvasSize, 1.0f, 1.0f, 1.0f);
  for (size_t i = 0; i < words.size(); ++i) {
    const int cell = static_cast<int>(polyhash(words[i]) % (kGridSide * kGridSide));
    if (is_immoral_word(words[i])) {
      if (bigram_neutralized(words, i)) {
        paint_cell(canvas, cell, 0.0f, 0.0f, 1.0f);
      } else {
        paint_cell(canvas, cell, 1.0f, 0.0f, 0.0f);
      }
    } else if (is_moral_word(words[i])) {
      paint_cell(canvas, cell, 0.0f, 0.0f, 1.0f);
    }
  }
  return canvas;
}

ImageTensor StubInpainter::inpaint(const ImageTensor& img, const ImageMask& region) const {
  if (img.height != region.height || img.width != region.width) {
    throw ContractViolation("inpaint: region dimensions do not match image");
  }
  ImageTensor out = img;
  for (size_t p = 0; p < out.pixel_count(); ++p) {
    const float m = region.values[p];
    if (m != 0.0f && m != 1.0f) {
      throw ContractViolation("inpaint: region mask must be binary");
    }
    if (m == 1.0f) {
      out.data[p * 3 + 0] = 1.0f;
      out.data[p * 3 + 1] = 1.0f;
      out.data[p * 3 + 2] = 1.0f;
    }
  }
  return out;
}

TokenSequence StubCaptioner::caption(const ImageTensor& img) const {
  if (stub_blueness(img) > stub_redness(img)) {
    return {"a", "calm", "blue", "scene"};
  }
  return {"a", "scene", "with", "shapes"};
}

std::vector<TokenSequence> StubSuggester::suggest(const TokenSequence& query) const {
  if (query.empty()) throw ContractViolation("suggest: query must be non-empty");
  static const std::unordered_map<std::string, std::vector<TokenSequence>> kTable = {
      {"gun", {{"water", "gun"}, {"toy", "gun"}}},
      {"sword", {{"toy", "sword"}}},
      {"knife", {{"butter", "knife"}}},
  };
  const std::string& head = query.front();
  const auto it = kTable.find(head);
  if (it != kTable.end()) return it->second;
  return {{head, "toy"}, {head, "water"}};
}

ImageTensor StubEditor::edit(const ImageTensor& /*img*/, const TokenSequence& condition,
                             uint64_t seed) const {
  return StubGenerator().generate(condition, seed);
}

BackendSet make_backends(const BackendConfig& text_embedder, const BackendConfig& image_embedder,
                         const BackendConfig& generator, const BackendConfig& inpainter,
                         const BackendConfig& captioner, const BackendConfig& suggester,
                         const BackendConfig& editor) {
  if (text_embedder.embedding_dim != image_embedder.embedding_dim) {
    throw ContractViolation("text and image embedders must share one embedding dimension");
  }
  BackendSet set;
  set.text_embedder = text_embedder.kind == BackendConfig::Kind::kStub
                          ? std::make_shared<StubTextEmbedder>(text_embedder.embedding_dim)
                          : make_http_text_embedder(text_embedder);
  set.image_embedder = image_embedder.kind == BackendConfig::Kind::kStub
                           ? std::make_shared<StubImageEmbedder>(image_embedder.embedding_dim)
                           : make_http_image_embedder(image_embedder);
  set.generator = generator.kind == BackendConfig::Kind::kStub
                      ? std::make_shared<StubGenerator>()
                      : make_http_generator(generator);
  set.inpainter = inpainter.kind == BackendConfig::Kind::kStub
                      ? std::make_shared<StubInpainter>()
                      : make_http_inpainter(inpainter);
  set.captioner = captioner.kind == BackendConfig::Kind::kStub
                      ? std::make_shared<StubCaptioner>()
                      : make_http_captioner(captioner);
  set.suggester = suggester.kind == BackendConfig::Kind::kStub
                      ? std::make_shared<StubSuggester>()
                      : make_http_suggester(suggester);
  set.editor = editor.kind == BackendConfig::Kind::kStub ? std::make_shared<StubEditor>()
                                                         : make_http_editor(editor);
  return set;
}

}  // namespace vcm
