// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "attribution.hpp"
#include "backends.hpp"
#include "manipulation.hpp"
#include "recognizer.hpp"

namespace vcm {

inline constexpr const char kToolVersion[] = "0.1.0";
inline constexpr int kReportVersion = 1;

struct PipelineConfig {
  uint64_t seed = 0;
  std::string head_path = "head.vcm";  // relative paths resolve inside out_dir
  std::string out_dir = ".";
  double judge_threshold = 0.5;
  double region_threshold = 0.6;
  double blur_sigma = 4.0;
  WordAttributionParams word_attribution;    // 1000 samples, p 0.5
  ImageAttributionParams image_attribution;  // 4000 samples, p 0.5, 8x8 grid
  TrainingConfig training;
  BackendConfig text_embedder;
  BackendConfig image_embedder;
  BackendConfig generator;
  BackendConfig inpainter;
  BackendConfig captioner;
  BackendConfig suggester;
  BackendConfig editor;
};

// Parses a config JSON document over the defaults above. Unknown keys and
// out-of-range values raise ContractViolation. An empty string yields the
// defaults.
PipelineConfig parse_pipeline_config(const std::string& config_json);

// Applies one "dotted.path=value" override onto a config JSON document and
// returns the merged document; value strings that parse as JSON scalars keep
// their type. The synthetic key "backend_kind" fans out to every role.
std::string override_config_json(const std::string& config_json, const std::string& key,
                                 const std::string& value);

// One command = one job. Each command writes its artifacts under out_dir and
// returns a deterministic report (byte-identical for identical invocations
// with stub backends).
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }

  // Trains a head on a labeled sentence CSV; writes the head file, a per-epoch
  // loss log, and <out_dir>/train_report.json.
  std::string train(const std::string& csv_path);

  // Scores one prompt or one image PNG and renders a verdict.
  std::string judge(const std::optional<std::string>& prompt,
                    const std::optional<std::string>& image_path);

  // Word importance for the prompt and/or a pixel saliency heatmap for the
  // image. A prompt-only invocation explains the image generated from it.
  std::string explain(const std::optional<std::string>& prompt,
                      const std::optional<std::string>& image_path);

  // Runs one manipulation strategy (or auto for all four) and writes each
  // output image plus provenance.
  std::string manipulate_command(const std::optional<std::string>& prompt,
                                 const std::optional<std::string>& image_path,
                                 const std::string& strategy_name);

  struct EvalOutput {
    std::string report_json;
    std::string table_text;
  };

  // Evaluates the datasets listed in an eval-spec JSON file; failures of one
  // dataset are reported and do not stop the others.
  EvalOutput eval(const std::string& spec_path);

 private:
  std::string resolved_head_path() const;
  const ClassifierHead& head();
  ImageScorer scorer();
  PromptGenerator prompt_generator();
  ImageTensor load_or_generate(const std::optional<std::string>& prompt,
                               const std::optional<std::string>& image_path,
                               bool* generated) const;

  PipelineConfig config_;
  BackendSet backends_;
  std::optional<ClassifierHead> head_;
};

}  // namespace vcm
