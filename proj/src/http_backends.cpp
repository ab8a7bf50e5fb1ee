// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

// JSON-over-HTTP adapters for external model backends. One base endpoint
// serves all roles; each operation is a POST of a JSON body to its route,
// with images carried as base64-encoded PNG. The stub semantics do not apply
// here; only the operation contracts do.
//
//   POST /embed_text  {"words": [...]}                        -> {"embedding": [...]}
//   POST /embed_image {"image_png": "<base64>"}               -> {"embedding": [...]}
//   POST /generate    {"words": [...], "seed": N}             -> {"image_png": "<base64>"}
//   POST /inpaint     {"image_png": ..., "region_png": ...}   -> {"image_png": ...}
//   POST /caption     {"image_png": ...}                      -> {"words": [...]}
//   POST /suggest     {"words": [...]}                        -> {"candidates": [[...], ...]}
//   POST /edit        {"image_png": ..., "words": [...], "seed": N} -> {"image_png": ...}

#include <json.hpp>

#define CPPHTTPLIB_NO_EXCEPTIONS
#include <httplib.h>

#include <memory>
#include <string>

#include "backends.hpp"
#include "errors.hpp"
#include "png_io.hpp"

namespace vcm {
namespace {

using nlohmann::json;

const char kBase64Chars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (size_t i = 0; i < bytes.size(); i += 3) {
    uint32_t chunk = static_cast<uint32_t>(bytes[i]) << 16;
    if (i + 1 < bytes.size()) chunk |= static_cast<uint32_t>(bytes[i + 1]) << 8;
    if (i + 2 < bytes.size()) chunk |= static_cast<uint32_t>(bytes[i + 2]);
    out.push_back(kBase64Chars[(chunk >> 18) & 0x3F]);
    out.push_back(kBase64Chars[(chunk >> 12) & 0x3F]);
    out.push_back(i + 1 < bytes.size() ? kBase64Chars[(chunk >> 6) & 0x3F] : '=');
    out.push_back(i + 2 < bytes.size() ? kBase64Chars[chunk & 0x3F] : '=');
  }
  return out;
}

std::vector<uint8_t> base64_decode(const std::string& text) {
  int lookup[256];
  std::fill(std::begin(lookup), std::end(lookup), -1);
  for (int i = 0; i < 64; ++i) lookup[static_cast<unsigned char>(kBase64Chars[i])] = i;
  std::vector<uint8_t> out;
  uint32_t chunk = 0;
  int bits = 0;
  for (unsigned char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = lookup[c];
    if (v < 0) throw IoError("invalid base64 payload");
    chunk = (chunk << 6) | static_cast<uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<uint8_t>((chunk >> bits) & 0xFF));
    }
  }
  return out;
}

class HttpBackend {
 public:
  explicit HttpBackend(BackendConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) {
      throw ContractViolation("external backend requires an endpoint");
    }
  }

 protected:
  json post(const std::string& route, const json& body) const {
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(60, 0);
    const std::string payload =
        body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    auto result = client.Post(route, payload, "application/json");
    if (!result) {
      throw BackendError("backend at " + config_.endpoint + route +
                         " unreachable: " + httplib::to_string(result.error()));
    }
    if (result->status != 200) {
      throw BackendError("backend at " + config_.endpoint + route + " returned status " +
                         std::to_string(result->status));
    }
    json reply = json::parse(result->body, nullptr, false);
    if (reply.is_discarded()) {
      throw BackendError("backend at " + config_.endpoint + route + " returned malformed JSON");
    }
    return reply;
  }

  EmbeddingVector parse_embedding(const json& reply, const std::string& route) const {
    if (!reply.contains("embedding") || !reply["embedding"].is_array()) {
      throw BackendError("backend at " + config_.endpoint + route + ": missing embedding");
    }
    EmbeddingVector v = reply["embedding"].get<EmbeddingVector>();
    if (static_cast<int>(v.size()) != config_.embedding_dim) {
      throw BackendError("backend at " + config_.endpoint + route + ": embedding dimension " +
                         std::to_string(v.size()) + ", expected " +
                         std::to_string(config_.embedding_dim));
    }
    const double norm = l2_norm(v);
    if (norm <= 0.0) {
      throw BackendError("backend at " + config_.endpoint + route + ": zero-norm embedding");
    }
    for (double& x : v) x /= norm;
    return v;
  }

  ImageTensor parse_image(const json& reply, const std::string& route) const {
    if (!reply.contains("image_png") || !reply["image_png"].is_string()) {
      throw BackendError("backend at " + config_.endpoint + route + ": missing image_png");
    }
    try {
      return decode_image_png(base64_decode(reply["image_png"].get<std::string>()));
    } catch (const IoError& e) {
      throw BackendError("backend at " + config_.endpoint + route + ": " + e.what());
    }
  }

  static std::string image_field(const ImageTensor& img) {
    return base64_encode(encode_image_png(img));
  }

  static std::string mask_field(const ImageMask& mask) {
    std::vector<double> values(mask.values.begin(), mask.values.end());
    return base64_encode(encode_grayscale_png(values, mask.height, mask.width));
  }

  BackendConfig config_;
};

class HttpTextEmbedder : public HttpBackend, public TextEmbedder {
 public:
  using HttpBackend::HttpBackend;
  EmbeddingVector embed_text(const TokenSequence& words) const override {
    return parse_embedding(post("/embed_text", json{{"words", words}}), "/embed_text");
  }
  int dim() const override { return config_.embedding_dim; }
};

class HttpImageEmbedder : public HttpBackend, public ImageEmbedder {
 public:
  using HttpBackend::HttpBackend;
  EmbeddingVector embed_image(const ImageTensor& img) const override {
    return parse_embedding(post("/embed_image", json{{"image_png", image_field(img)}}),
                           "/embed_image");
  }
  int dim() const override { return config_.embedding_dim; }
};

class HttpGenerator : public HttpBackend, public Generator {
 public:
  using HttpBackend::HttpBackend;
  ImageTensor generate(const TokenSequence& words, uint64_t seed) const override {
    return parse_image(post("/generate", json{{"words", words}, {"seed", seed}}), "/generate");
  }
};

class HttpInpainter : public HttpBackend, public Inpainter {
 public:
  using HttpBackend::HttpBackend;
  ImageTensor inpaint(const ImageTensor& img, const ImageMask& region) const override {
    const ImageTensor out = parse_image(
        post("/inpaint", json{{"image_png", image_field(img)}, {"region_png", mask_field(region)}}),
        "/inpaint");
    if (!out.same_shape(img)) {
      throw BackendError("backend at " + config_.endpoint + "/inpaint changed image shape");
    }
    return out;
  }
};

class HttpCaptioner : public HttpBackend, public Captioner {
 public:
  using HttpBackend::HttpBackend;
  TokenSequence caption(const ImageTensor& img) const override {
    const json reply = post("/caption", json{{"image_png", image_field(img)}});
    if (!reply.contains("words") || !reply["words"].is_array() || reply["words"].empty()) {
      throw BackendError("backend at " + config_.endpoint + "/caption: missing caption words");
    }
    return reply["words"].get<TokenSequence>();
  }
};

class HttpSuggester : public HttpBackend, public Suggester {
 public:
  using HttpBackend::HttpBackend;
  std::vector<TokenSequence> suggest(const TokenSequence& query) const override {
    if (query.empty()) throw ContractViolation("suggest: query must be non-empty");
    const json reply = post("/suggest", json{{"words", query}});
    if (!reply.contains("candidates") || !reply["candidates"].is_array()) {
      throw BackendError("backend at " + config_.endpoint + "/suggest: missing candidates");
    }
    return reply["candidates"].get<std::vector<TokenSequence>>();
  }
};

class HttpEditor : public HttpBackend, public Editor {
 public:
  using HttpBackend::HttpBackend;
  ImageTensor edit(const ImageTensor& img, const TokenSequence& condition,
                   uint64_t seed) const override {
    return parse_image(post("/edit", json{{"image_png", image_field(img)},
                                          {"words", condition},
                                          {"seed", seed}}),
                       "/edit");
  }
};

}  // namespace

std::shared_ptr<TextEmbedder> make_http_text_embedder(const BackendConfig& config) {
  return std::make_shared<HttpTextEmbedder>(config);
}
std::shared_ptr<ImageEmbedder> make_http_image_embedder(const BackendConfig& config) {
  return std::make_shared<HttpImageEmbedder>(config);
}
std::shared_ptr<Generator> make_http_generator(const BackendConfig& config) {
  return std::make_shared<HttpGenerator>(config);
}
std::shared_ptr<Inpainter> make_http_inpainter(const BackendConfig& config) {
  return std::make_shared<HttpInpainter>(config);
}
std::shared_ptr<Captioner> make_http_captioner(const BackendConfig& config) {
  return std::make_shared<HttpCaptioner>(config);
}
std::shared_ptr<Suggester> make_http_suggester(const BackendConfig& config) {
  return std::make_shared<HttpSuggester>(config);
}
std::shared_ptr<Editor> make_http_editor(const BackendConfig& config) {
  return std::make_shared<HttpEditor>(config);
}

}  // namespace vcm
