// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#include "recognizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "errors.hpp"

namespace vcm {
namespace {

constexpr char kHeadMagic[8] = {'V', 'C', 'M', 'H', 'E', 'A', 'D', '\0'};
constexpr uint32_t kHeadVersion = 1;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;

struct ForwardTrace {
  std::vector<double> input_kept;   // embedding after input dropout
  std::vector<double> hidden_tanh;  // tanh activations before hidden dropout
  std::vector<double> hidden_kept;  // after hidden dropout
  double logit = 0.0;
};

// One forward pass with explicit dropout scale factors (1/(1-p) for kept
// units, 0 for dropped, all 1.0 when dropout is off).
ForwardTrace forward_trace(const ClassifierHead& head, const EmbeddingVector& embedding,
                           const std::vector<double>& input_scale,
                           const std::vector<double>& hidden_scale) {
  ForwardTrace trace;
  trace.input_kept.resize(head.input_dim);
  for (int i = 0; i < head.input_dim; ++i) trace.input_kept[i] = embedding[i] * input_scale[i];
  trace.hidden_tanh.resize(head.hidden_dim);
  trace.hidden_kept.resize(head.hidden_dim);
  double logit = head.b2;
  for (int j = 0; j < head.hidden_dim; ++j) {
    double z = head.b1[j];
    for (int i = 0; i < head.input_dim; ++i) {
      z += trace.input_kept[i] * head.w1[static_cast<size_t>(i) * head.hidden_dim + j];
    }
    const double a = std::tanh(z);
    trace.hidden_tanh[j] = a;
    trace.hidden_kept[j] = a * hidden_scale[j];
    logit += trace.hidden_kept[j] * head.w2[j];
  }
  trace.logit = logit;
  return trace;
}

// Gradient of the per-item BCE loss given a forward trace.
void accumulate_gradients(const ClassifierHead& head, const ForwardTrace& trace, int label,
                          const std::vector<double>& hidden_scale, HeadGradients& grads) {
  const double dlogit = sigmoid(trace.logit) - static_cast<double>(label);
  grads.b2 += dlogit;
  for (int j = 0; j < head.hidden_dim; ++j) {
    grads.w2[j] += dlogit * trace.hidden_kept[j];
    const double da = dlogit * head.w2[j] * hidden_scale[j];
    const double dz = da * (1.0 - trace.hidden_tanh[j] * trace.hidden_tanh[j]);
    grads.b1[j] += dz;
    for (int i = 0; i < head.input_dim; ++i) {
      grads.w1[static_cast<size_t>(i) * head.hidden_dim + j] += trace.input_kept[i] * dz;
    }
  }
}

void check_dims(const ClassifierHead& head, const EmbeddingVector& embedding) {
  if (!head.trained()) throw ContractViolation("classifier head is not initialized");
  if (static_cast<int>(embedding.size()) != head.input_dim) {
    throw ContractViolation("embedding dimension " + std::to_string(embedding.size()) +
                            " does not match head input dimension " +
                            std::to_string(head.input_dim));
  }
}

void validate_training_config(const TrainingConfig& cfg) {
  if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.hidden_dim < 1) {
    throw ContractViolation("training config: epochs, batch size and hidden dim must be positive");
  }
  if (!(cfg.learning_rate > 0.0) || !(cfg.weight_decay >= 0.0) || !(cfg.adam_epsilon > 0.0)) {
    throw ContractViolation("training config: learning rate and epsilon must be positive");
  }
  if (!(cfg.dropout_prob >= 0.0 && cfg.dropout_prob < 1.0)) {
    throw ContractViolation("training config: dropout probability must lie in [0,1)");
  }
}

void put_u32_le(std::ofstream& out, uint32_t v) {
  const uint8_t bytes[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                            static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

void put_f64_le(std::ofstream& out, double v) {
  const uint64_t u = std::bit_cast<uint64_t>(v);
  uint8_t bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<uint8_t>(u >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

uint32_t get_u32_le(std::ifstream& in) {
  uint8_t bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  return static_cast<uint32_t>(bytes[0]) | (static_cast<uint32_t>(bytes[1]) << 8) |
         (static_cast<uint32_t>(bytes[2]) << 16) | (static_cast<uint32_t>(bytes[3]) << 24);
}

double get_f64_le(std::ifstream& in) {
  uint8_t bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(u);
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bce_loss(const std::vector<double>& logits, const std::vector<int>& labels) {
  if (logits.empty()) throw ContractViolation("bce_loss: empty input");
  if (logits.size() != labels.size()) {
    throw ContractViolation("bce_loss: logits and labels have different lengths");
  }
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ContractViolation("bce_loss: labels must be 0 or 1");
    }
    const double x = logits[i];
    const double y = static_cast<double>(labels[i]);
    total += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
  }
  return total / static_cast<double>(logits.size());
}

double head_forward(const ClassifierHead& head, const EmbeddingVector& embedding) {
  check_dims(head, embedding);
  const std::vector<double> ones_in(head.input_dim, 1.0);
  const std::vector<double> ones_hidden(head.hidden_dim, 1.0);
  return forward_trace(head, embedding, ones_in, ones_hidden).logit;
}

double head_forward_train(const ClassifierHead& head, const EmbeddingVector& embedding, Rng& rng) {
  check_dims(head, embedding);
  const double keep_scale = 1.0 / (1.0 - head.dropout_prob);
  std::vector<double> input_scale(head.input_dim);
  for (auto& s : input_scale) s = rng.bernoulli(head.dropout_prob) ? 0.0 : keep_scale;
  std::vector<double> hidden_scale(head.hidden_dim);
  for (auto& s : hidden_scale) s = rng.bernoulli(head.dropout_prob) ? 0.0 : keep_scale;
  return forward_trace(head, embedding, input_scale, hidden_scale).logit;
}

HeadGradients head_gradients(const ClassifierHead& head, const EmbeddingVector& embedding,
                             int label) {
  check_dims(head, embedding);
  HeadGradients grads;
  grads.w1.assign(head.w1.size(), 0.0);
  grads.b1.assign(head.b1.size(), 0.0);
  grads.w2.assign(head.w2.size(), 0.0);
  const std::vector<double> ones_in(head.input_dim, 1.0);
  const std::vector<double> ones_hidden(head.hidden_dim, 1.0);
  const ForwardTrace trace = forward_trace(head, embedding, ones_in, ones_hidden);
  accumulate_gradients(head, trace, label, ones_hidden, grads);
  return grads;
}

ClassifierHead train_classifier(const LabeledTextSet& data, const TextEmbedder& embedder,
                                const TrainingConfig& cfg, TrainingLog* log) {
  validate_training_config(cfg);
  if (data.empty()) throw ContractViolation("training data is empty");
  const bool has_immoral = std::any_of(data.begin(), data.end(),
                                       [](const LabeledText& item) { return item.label == 1; });
  const bool has_moral = std::any_of(data.begin(), data.end(),
                                     [](const LabeledText& item) { return item.label == 0; });
  if (!has_immoral || !has_moral) {
    throw ContractViolation("training data must contain both classes");
  }
  for (const auto& item : data) {
    if (item.label != 0 && item.label != 1) {
      throw ContractViolation("training labels must be 0 or 1");
    }
  }

  // The joint space is frozen, so each sentence is embedded exactly once.
  const int dim = embedder.dim();
  std::vector<EmbeddingVector> embeddings;
  embeddings.reserve(data.size());
  for (const auto& item : data) embeddings.push_back(embedder.embed_text(item.words));

  ClassifierHead head;
  head.input_dim = dim;
  head.hidden_dim = cfg.hidden_dim;
  head.dropout_prob = cfg.dropout_prob;
  head.w1.resize(static_cast<size_t>(dim) * cfg.hidden_dim);
  head.b1.resize(cfg.hidden_dim);
  head.w2.resize(cfg.hidden_dim);

  Rng rng(cfg.seed);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(dim));
  for (auto& w : head.w1) w = (rng.uniform() * 2.0 - 1.0) * bound1;
  for (auto& b : head.b1) b = (rng.uniform() * 2.0 - 1.0) * bound1;
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
  for (auto& w : head.w2) w = (rng.uniform() * 2.0 - 1.0) * bound2;
  head.b2 = (rng.uniform() * 2.0 - 1.0) * bound2;

  const size_t param_count = head.parameter_count();
  std::vector<double> adam_m(param_count, 0.0);
  std::vector<double> adam_v(param_count, 0.0);
  long step = 0;

  // Parameters and their gradients share one flat indexing: w1, b1, w2, b2.
  auto for_each_param = [&](auto&& fn) {
    size_t k = 0;
    for (auto& w : head.w1) fn(k++, w);
    for (auto& b : head.b1) fn(k++, b);
    for (auto& w : head.w2) fn(k++, w);
    fn(k++, head.b2);
  };

  const double keep_scale = cfg.dropout_prob > 0.0 ? 1.0 / (1.0 - cfg.dropout_prob) : 1.0;
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  HeadGradients grads;
  std::vector<double> input_scale(dim);
  std::vector<double> hidden_scale(cfg.hidden_dim);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + cfg.batch_size);
      const double batch_n = static_cast<double>(end - start);
      grads.w1.assign(head.w1.size(), 0.0);
      grads.b1.assign(head.b1.size(), 0.0);
      grads.w2.assign(head.w2.size(), 0.0);
      grads.b2 = 0.0;
      for (size_t k = start; k < end; ++k) {
        const size_t idx = order[k];
        for (auto& s : input_scale) {
          s = cfg.dropout_prob > 0.0 && rng.bernoulli(cfg.dropout_prob) ? 0.0 : keep_scale;
        }
        for (auto& s : hidden_scale) {
          s = cfg.dropout_prob > 0.0 && rng.bernoulli(cfg.dropout_prob) ? 0.0 : keep_scale;
        }
        const ForwardTrace trace =
            forward_trace(head, embeddings[idx], input_scale, hidden_scale);
        accumulate_gradients(head, trace, data[idx].label, hidden_scale, grads);
        epoch_loss_sum += bce_loss({trace.logit}, {data[idx].label});
      }

      ++step;
      const double bias1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
      auto grad_at = [&](size_t k) -> double {
        if (k < grads.w1.size()) return grads.w1[k] / batch_n;
        k -= grads.w1.size();
        if (k < grads.b1.size()) return grads.b1[k] / batch_n;
        k -= grads.b1.size();
        if (k < grads.w2.size()) return grads.w2[k] / batch_n;
        return grads.b2 / batch_n;
      };
      for_each_param([&](size_t k, double& param) {
        const double g = grad_at(k);
        adam_m[k] = kAdamBeta1 * adam_m[k] + (1.0 - kAdamBeta1) * g;
        adam_v[k] = kAdamBeta2 * adam_v[k] + (1.0 - kAdamBeta2) * g * g;
        const double m_hat = adam_m[k] / bias1;
        const double v_hat = adam_v[k] / bias2;
        param -= cfg.learning_rate *
                 (m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon) + cfg.weight_decay * param);
      });
    }
    if (log != nullptr) {
      log->epoch_loss.push_back(epoch_loss_sum / static_cast<double>(data.size()));
    }
  }
  return head;
}

double score_text(const ClassifierHead& head, const TextEmbedder& embedder,
                  const TokenSequence& words) {
  return sigmoid(head_forward(head, embedder.embed_text(words)));
}

double score_image(const ClassifierHead& head, const ImageEmbedder& embedder,
                   const ImageTensor& img) {
  return sigmoid(head_forward(head, embedder.embed_image(img)));
}

Verdict judge(double score, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ContractViolation("judge threshold must lie in (0,1)");
  }
  Verdict verdict;
  verdict.score = score;
  verdict.threshold = threshold;
  verdict.immoral = score >= threshold;
  return verdict;
}

void save_head(const ClassifierHead& head, const std::string& path) {
  if (!head.trained()) throw ContractViolation("cannot save an uninitialized head");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kHeadMagic, 8);
  put_u32_le(out, kHeadVersion);
  put_u32_le(out, 0);  // reserved
  put_u32_le(out, static_cast<uint32_t>(head.input_dim));
  put_u32_le(out, static_cast<uint32_t>(head.hidden_dim));
  for (double w : head.w1) put_f64_le(out, w);
  for (double b : head.b1) put_f64_le(out, b);
  for (double w : head.w2) put_f64_le(out, w);
  put_f64_le(out, head.b2);
  if (!out) throw IoError("failed to write head file '" + path + "'");
}

ClassifierHead load_head(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open head file '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kHeadMagic, 8) != 0) {
    throw IoError("'" + path + "' is not a classifier head file");
  }
  const uint32_t version = get_u32_le(in);
  get_u32_le(in);  // reserved
  if (version != kHeadVersion) {
    throw IoError("head file '" + path + "' has unsupported version " + std::to_string(version));
  }
  ClassifierHead head;
  head.input_dim = static_cast<int>(get_u32_le(in));
  head.hidden_dim = static_cast<int>(get_u32_le(in));
  if (!in || head.input_dim < 1 || head.hidden_dim < 1 || head.input_dim > (1 << 20) ||
      head.hidden_dim > (1 << 20)) {
    throw IoError("head file '" + path + "' has corrupt dimensions");
  }
  head.w1.resize(static_cast<size_t>(head.input_dim) * head.hidden_dim);
  head.b1.resize(head.hidden_dim);
  head.w2.resize(head.hidden_dim);
  for (auto& w : head.w1) w = get_f64_le(in);
  for (auto& b : head.b1) b = get_f64_le(in);
  for (auto& w : head.w2) w = get_f64_le(in);
  head.b2 = get_f64_le(in);
  if (!in) throw IoError("head file '" + path + "' is truncated");
  return head;
}

}  // namespace vcm
