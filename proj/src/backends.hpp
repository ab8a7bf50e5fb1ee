// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core_types.hpp"

namespace vcm {

// D-dimensional vector in the joint text-image space. Unit L2 norm except
// for the documented zero-input convention (empty text falls back to e3).
using EmbeddingVector = std::vector<double>;

struct BackendConfig {
  enum class Kind { kStub, kExternal };
  Kind kind = Kind::kStub;
  std::string endpoint;  // base URL for external backends
  int embedding_dim = 8;
  uint64_t seed = 0;
};

// Narrow interfaces for the heavy external models. The contracts bind every
// implementation; the stub semantics below are normative and fully
// deterministic so the whole pipeline is testable without model weights.

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual EmbeddingVector embed_text(const TokenSequence& words) const = 0;
  virtual int dim() const = 0;
};

class ImageEmbedder {
 public:
  virtual ~ImageEmbedder() = default;
  virtual EmbeddingVector embed_image(const ImageTensor& img) const = 0;
  virtual int dim() const = 0;
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual ImageTensor generate(const TokenSequence& words, uint64_t seed) const = 0;
};

class Inpainter {
 public:
  virtual ~Inpainter() = default;
  // region must be binary; pixels with region=0 come back bit-identical.
  virtual ImageTensor inpaint(const ImageTensor& img, const ImageMask& region) const = 0;
};

class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual TokenSequence caption(const ImageTensor& img) const = 0;
};

class Suggester {
 public:
  virtual ~Suggester() = default;
  // Returns at least one candidate phrase, each containing the query's head
  // word.
  virtual std::vector<TokenSequence> suggest(const TokenSequence& query) const = 0;
};

class Editor {
 public:
  virtual ~Editor() = default;
  virtual ImageTensor edit(const ImageTensor& img, const TokenSequence& condition,
                           uint64_t seed) const = 0;
};

// One handle per backend role.
struct BackendSet {
  std::shared_ptr<TextEmbedder> text_embedder;
  std::shared_ptr<ImageEmbedder> image_embedder;
  std::shared_ptr<Generator> generator;
  std::shared_ptr<Inpainter> inpainter;
  std::shared_ptr<Captioner> captioner;
  std::shared_ptr<Suggester> suggester;
  std::shared_ptr<Editor> editor;
};

// Fixed stub lexicons.
bool is_immoral_word(const std::string& word);
bool is_moral_word(const std::string& word);

// Sum of byte_i * 31^i mod 2^32; pins the stub generator's cell layout.
uint32_t polyhash(const std::string& word);

// True at position i when words[i] is an immoral word immediately preceded by
// a moral word ("water gun"); such words act as moral in every stub.
bool bigram_neutralized(const TokenSequence& words, size_t i);

double l2_norm(const EmbeddingVector& v);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class StubTextEmbedder : public TextEmbedder {
 public:
  explicit StubTextEmbedder(int dim = 8);
  EmbeddingVector embed_text(const TokenSequence& words) const override;
  int dim() const override { return dim_; }

 private:
  int dim_;
};

class StubImageEmbedder : public ImageEmbedder {
 public:
  explicit StubImageEmbedder(int dim = 8);
  EmbeddingVector embed_image(const ImageTensor& img) const override;
  int dim() const override { return dim_; }

 private:
  int dim_;
};

class StubGenerator : public Generator {
 public:
  ImageTensor generate(const TokenSequence& words, uint64_t seed) const override;
};

class StubInpainter : public Inpainter {
 public:
  ImageTensor inpaint(const ImageTensor& img, const ImageMask& region) const override;
};

class StubCaptioner : public Captioner {
 public:
  TokenSequence caption(const ImageTensor& img) const override;
};

class StubSuggester : public Suggester {
 public:
  std::vector<TokenSequence> suggest(const TokenSequence& query) const override;
};

class StubEditor : public Editor {
 public:
  ImageTensor edit(const ImageTensor& img, const TokenSequence& condition,
                   uint64_t seed) const override;
};

// Mean over pixels of max(0, r - (g+b)/2) and max(0, b - (r+g)/2). These two
// statistics drive the stub embedder and captioner.
double stub_redness(const ImageTensor& img);
double stub_blueness(const ImageTensor& img);

// Build one backend per role from its config. kStub roles never touch the
// network; kExternal roles speak the JSON-over-HTTP protocol in
// http_backends.cpp against config.endpoint.
BackendSet make_backends(const BackendConfig& text_embedder, const BackendConfig& image_embedder,
                         const BackendConfig& generator, const BackendConfig& inpainter,
                         const BackendConfig& captioner, const BackendConfig& suggester,
                         const BackendConfig& editor);

// External adapters, one per role, all against one base endpoint.
std::shared_ptr<TextEmbedder> make_http_text_embedder(const BackendConfig& config);
std::shared_ptr<ImageEmbedder> make_http_image_embedder(const BackendConfig& config);
std::shared_ptr<Generator> make_http_generator(const BackendConfig& config);
std::shared_ptr<Inpainter> make_http_inpainter(const BackendConfig& config);
std::shared_ptr<Captioner> make_http_captioner(const BackendConfig& config);
std::shared_ptr<Suggester> make_http_suggester(const BackendConfig& config);
std::shared_ptr<Editor> make_http_editor(const BackendConfig& config);

}  // namespace vcm
