// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "errors.hpp"
#include "evaluation.hpp"
#include "png_io.hpp"
#include "report.hpp"

namespace vcm {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void reject_unknown_keys(const json& object, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, _] : object.items()) {
    bool found = false;
    for (const char* name : known) {
      if (key == name) {
        found = true;
        break;
      }
    }
    if (!found) throw ContractViolation("config: unknown key '" + where + key + "'");
  }
}

double require_unit_interval(const json& v, const std::string& name) {
  if (!v.is_number()) throw ContractViolation("config: " + name + " must be a number");
  const double d = v.get<double>();
  if (!(d > 0.0 && d < 1.0)) {
    throw ContractViolation("config: " + name + " must lie in (0,1)");
  }
  return d;
}

int require_positive_int(const json& v, const std::string& name) {
  if (!v.is_number_integer()) throw ContractViolation("config: " + name + " must be an integer");
  const long i = v.get<long>();
  if (i < 1) throw ContractViolation("config: " + name + " must be positive");
  return static_cast<int>(i);
}

double require_positive(const json& v, const std::string& name) {
  if (!v.is_number()) throw ContractViolation("config: " + name + " must be a number");
  const double d = v.get<double>();
  if (!(d > 0.0)) throw ContractViolation("config: " + name + " must be positive");
  return d;
}

uint64_t require_seed(const json& v, const std::string& name) {
  if (!v.is_number_unsigned()) {
    throw ContractViolation("config: " + name + " must be a non-negative integer");
  }
  return v.get<uint64_t>();
}

BackendConfig parse_backend(const json& object, const std::string& role, uint64_t default_seed,
                            int default_dim) {
  reject_unknown_keys(object, {"kind", "endpoint", "embedding_dim", "seed"},
                      "backends." + role + ".");
  BackendConfig config;
  config.seed = default_seed;
  config.embedding_dim = default_dim;
  if (object.contains("kind")) {
    const std::string kind = object["kind"].get<std::string>();
    if (kind == "stub") {
      config.kind = BackendConfig::Kind::kStub;
    } else if (kind == "external") {
      config.kind = BackendConfig::Kind::kExternal;
    } else {
      throw ContractViolation("config: backends." + role + ".kind must be stub or external");
    }
  }
  if (object.contains("endpoint")) config.endpoint = object["endpoint"].get<std::string>();
  if (object.contains("embedding_dim")) {
    config.embedding_dim = require_positive_int(object["embedding_dim"],
                                                "backends." + role + ".embedding_dim");
  }
  if (object.contains("seed")) {
    config.seed = require_seed(object["seed"], "backends." + role + ".seed");
  }
  return config;
}

std::string backend_kind_name(BackendConfig::Kind kind) {
  return kind == BackendConfig::Kind::kStub ? "stub" : "external";
}

void write_backend_echo(JsonWriter& w, const char* role, const BackendConfig& config) {
  w.key(role).begin_object();
  w.key("kind").value(backend_kind_name(config.kind));
  w.key("endpoint").value(config.endpoint);
  w.key("embedding_dim").value(config.embedding_dim);
  w.end_object();
}

void write_config_echo(JsonWriter& w, const PipelineConfig& config) {
  w.key("config").begin_object();
  w.key("seed").value(config.seed);
  w.key("head_path").value(config.head_path);
  w.key("out_dir").value(config.out_dir);
  w.key("judge_threshold").value(config.judge_threshold);
  w.key("region_threshold").value(config.region_threshold);
  w.key("blur_sigma").value(config.blur_sigma);
  w.key("attribution").begin_object();
  w.key("word_samples").value(config.word_attribution.sample_count);
  w.key("image_samples").value(config.image_attribution.sample_count);
  w.key("mask_probability").value(config.word_attribution.mask_prob);
  w.key("grid_height").value(config.image_attribution.grid_height);
  w.key("grid_width").value(config.image_attribution.grid_width);
  w.end_object();
  w.key("training").begin_object();
  w.key("epochs").value(config.training.epochs);
  w.key("learning_rate").value(config.training.learning_rate);
  w.key("weight_decay").value(config.training.weight_decay);
  w.key("batch_size").value(config.training.batch_size);
  w.key("dropout").value(config.training.dropout_prob);
  w.key("hidden_dim").value(config.training.hidden_dim);
  w.end_object();
  w.key("backends").begin_object();
  write_backend_echo(w, "text_embedder", config.text_embedder);
  write_backend_echo(w, "image_embedder", config.image_embedder);
  write_backend_echo(w, "generator", config.generator);
  write_backend_echo(w, "inpainter", config.inpainter);
  write_backend_echo(w, "captioner", config.captioner);
  write_backend_echo(w, "suggester", config.suggester);
  write_backend_echo(w, "editor", config.editor);
  w.end_object();
  w.end_object();
}

void write_header(JsonWriter& w, const char* command, uint64_t seed) {
  w.key("report_version").value(kReportVersion);
  w.key("tool_version").value(kToolVersion);
  w.key("command").value(command);
  w.key("seed").value(seed);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("failed to write '" + path + "'");
}

void write_report_file(const fs::path& out_dir, const std::string& name,
                       const std::string& report_json) {
  write_text_file((out_dir / name).string(), report_json + "\n");
}

void write_word_importance(JsonWriter& w, const WordImportanceMap& map) {
  w.key("word_importance").begin_object();
  w.key("sample_count").value(map.sample_count);
  w.key("mask_probability").value(map.mask_prob);
  w.key("seed").value(map.seed);
  w.key("entries").begin_array();
  for (const auto& entry : map.entries) {
    w.begin_object();
    w.key("word").value(entry.word);
    w.key("importance").value(entry.importance);
    w.key("samples").value(entry.samples);
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw IoError("'" + path + "' is not valid JSON");
  return doc;
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& config_json) {
  json doc = json::object();
  if (!config_json.empty()) {
    doc = json::parse(config_json, nullptr, false);
    if (doc.is_discarded()) throw ContractViolation("config is not valid JSON");
    if (!doc.is_object()) throw ContractViolation("config must be a JSON object");
  }

  reject_unknown_keys(doc,
                      {"seed", "head_path", "out_dir", "judge_threshold", "region_threshold",
                       "blur_sigma", "attribution", "training", "backends"},
                      "");
  PipelineConfig config;
  if (doc.contains("seed")) config.seed = require_seed(doc["seed"], "seed");
  if (doc.contains("head_path")) config.head_path = doc["head_path"].get<std::string>();
  if (doc.contains("out_dir")) config.out_dir = doc["out_dir"].get<std::string>();
  if (doc.contains("judge_threshold")) {
    config.judge_threshold = require_unit_interval(doc["judge_threshold"], "judge_threshold");
  }
  if (doc.contains("region_threshold")) {
    config.region_threshold = require_unit_interval(doc["region_threshold"], "region_threshold");
  }
  if (doc.contains("blur_sigma")) {
    config.blur_sigma = require_positive(doc["blur_sigma"], "blur_sigma");
  }

  if (doc.contains("attribution")) {
    const json& a = doc["attribution"];
    reject_unknown_keys(
        a, {"word_samples", "image_samples", "mask_probability", "grid_height", "grid_width"},
        "attribution.");
    if (a.contains("word_samples")) {
      config.word_attribution.sample_count =
          require_positive_int(a["word_samples"], "attribution.word_samples");
    }
    if (a.contains("image_samples")) {
      config.image_attribution.sample_count =
          require_positive_int(a["image_samples"], "attribution.image_samples");
    }
    if (a.contains("mask_probability")) {
      const double p = require_unit_interval(a["mask_probability"], "attribution.mask_probability");
      config.word_attribution.mask_prob = p;
      config.image_attribution.mask_prob = p;
    }
    if (a.contains("grid_height")) {
      config.image_attribution.grid_height =
          require_positive_int(a["grid_height"], "attribution.grid_height");
    }
    if (a.contains("grid_width")) {
      config.image_attribution.grid_width =
          require_positive_int(a["grid_width"], "attribution.grid_width");
    }
  }

  if (doc.contains("training")) {
    const json& t = doc["training"];
    reject_unknown_keys(t,
                        {"epochs", "learning_rate", "weight_decay", "batch_size", "dropout",
                         "adam_epsilon", "hidden_dim"},
                        "training.");
    if (t.contains("epochs")) {
      config.training.epochs = require_positive_int(t["epochs"], "training.epochs");
    }
    if (t.contains("learning_rate")) {
      config.training.learning_rate = require_positive(t["learning_rate"], "training.learning_rate");
    }
    if (t.contains("weight_decay")) {
      config.training.weight_decay = require_positive(t["weight_decay"], "training.weight_decay");
    }
    if (t.contains("batch_size")) {
      config.training.batch_size = require_positive_int(t["batch_size"], "training.batch_size");
    }
    if (t.contains("dropout")) {
      if (!t["dropout"].is_number()) throw ContractViolation("config: training.dropout must be a number");
      const double p = t["dropout"].get<double>();
      if (!(p >= 0.0 && p < 1.0)) {
        throw ContractViolation("config: training.dropout must lie in [0,1)");
      }
      config.training.dropout_prob = p;
    }
    if (t.contains("adam_epsilon")) {
      config.training.adam_epsilon = require_positive(t["adam_epsilon"], "training.adam_epsilon");
    }
    if (t.contains("hidden_dim")) {
      config.training.hidden_dim = require_positive_int(t["hidden_dim"], "training.hidden_dim");
    }
  }

  // Per-role backend configs; seeds default to the pipeline seed.
  int default_dim = 8;
  json backends = doc.contains("backends") ? doc["backends"] : json::object();
  reject_unknown_keys(backends,
                      {"text_embedder", "image_embedder", "generator", "inpainter", "captioner",
                       "suggester", "editor"},
                      "backends.");
  auto role = [&](const char* name) {
    return backends.contains(name) ? backends[name] : json::object();
  };
  config.text_embedder = parse_backend(role("text_embedder"), "text_embedder", config.seed, default_dim);
  config.image_embedder =
      parse_backend(role("image_embedder"), "image_embedder", config.seed, default_dim);
  config.generator = parse_backend(role("generator"), "generator", config.seed, default_dim);
  config.inpainter = parse_backend(role("inpainter"), "inpainter", config.seed, default_dim);
  config.captioner = parse_backend(role("captioner"), "captioner", config.seed, default_dim);
  config.suggester = parse_backend(role("suggester"), "suggester", config.seed, default_dim);
  config.editor = parse_backend(role("editor"), "editor", config.seed, default_dim);
  if (config.text_embedder.embedding_dim != config.image_embedder.embedding_dim) {
    throw ContractViolation("config: text and image embedding dimensions must match");
  }

  // Attribution and training draw from the single pipeline seed.
  config.word_attribution.seed = config.seed;
  config.image_attribution.seed = config.seed;
  config.training.seed = config.seed;
  return config;
}

std::string override_config_json(const std::string& config_json, const std::string& key,
                                 const std::string& value) {
  json doc = json::object();
  if (!config_json.empty()) {
    doc = json::parse(config_json, nullptr, false);
    if (doc.is_discarded()) throw ContractViolation("config is not valid JSON");
  }
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded() || (!parsed.is_primitive())) parsed = value;

  if (key == "backend_kind") {
    const std::string kind = parsed.is_string() ? parsed.get<std::string>() : value;
    if (kind != "stub" && kind != "external") {
      throw ContractViolation("backend_kind must be stub or external");
    }
    for (const char* name :
         {"text_embedder", "image_embedder", "generator", "inpainter", "captioner", "suggester",
          "editor"}) {
      doc["backends"][name]["kind"] = kind;
    }
    return doc.dump();
  }

  json* node = &doc;
  size_t start = 0;
  for (;;) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ContractViolation("override key must not have empty segments");
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      break;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
  return doc.dump();
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
  backends_ = make_backends(config_.text_embedder, config_.image_embedder, config_.generator,
                            config_.inpainter, config_.captioner, config_.suggester,
                            config_.editor);
}

std::string Pipeline::resolved_head_path() const {
  const fs::path head(config_.head_path);
  if (head.is_absolute()) return head.string();
  return (fs::path(config_.out_dir) / head).string();
}

const ClassifierHead& Pipeline::head() {
  if (!head_.has_value()) head_ = load_head(resolved_head_path());
  return *head_;
}

ImageScorer Pipeline::scorer() {
  const ClassifierHead& trained = head();
  return [&trained, this](const ImageTensor& img) {
    return score_image(trained, *backends_.image_embedder, img);
  };
}

PromptGenerator Pipeline::prompt_generator() {
  return [this](const TokenSequence& words) {
    return backends_.generator->generate(words, config_.seed);
  };
}

ImageTensor Pipeline::load_or_generate(const std::optional<std::string>& prompt,
                                       const std::optional<std::string>& image_path,
                                       bool* generated) const {
  if (generated != nullptr) *generated = false;
  if (image_path.has_value()) return read_image_png(*image_path);
  if (!prompt.has_value()) {
    throw ContractViolation("either a prompt or an image is required");
  }
  if (generated != nullptr) *generated = true;
  return backends_.generator->generate(tokenize(*prompt), config_.seed);
}

std::string Pipeline::train(const std::string& csv_path) {
  const LabeledTextSet data = load_labeled_text_csv(csv_path);
  long immoral = 0;
  for (const auto& item : data) immoral += item.label;

  TrainingLog log;
  const ClassifierHead trained =
      train_classifier(data, *backends_.text_embedder, config_.training, &log);

  fs::create_directories(config_.out_dir);
  save_head(trained, resolved_head_path());
  head_ = trained;

  std::string log_text = "epoch,loss\n";
  for (size_t e = 0; e < log.epoch_loss.size(); ++e) {
    char line[64];
    std::snprintf(line, sizeof line, "%zu,%.9f\n", e + 1, log.epoch_loss[e]);
    log_text += line;
  }
  write_text_file((fs::path(config_.out_dir) / "training_log.csv").string(), log_text);

  JsonWriter w;
  w.begin_object();
  write_header(w, "train", config_.seed);
  w.key("data").value(csv_path);
  w.key("items").value(static_cast<long>(data.size()));
  w.key("immoral_items").value(immoral);
  w.key("moral_items").value(static_cast<long>(data.size()) - immoral);
  w.key("epochs").value(config_.training.epochs);
  w.key("first_epoch_loss").value(log.epoch_loss.front());
  w.key("final_epoch_loss").value(log.epoch_loss.back());
  w.key("artifacts").begin_object();
  w.key("head").value(config_.head_path);
  w.key("training_log").value("training_log.csv");
  w.end_object();
  write_config_echo(w, config_);
  w.end_object();

  write_report_file(config_.out_dir, "train_report.json", w.str());
  return w.str();
}

std::string Pipeline::judge(const std::optional<std::string>& prompt,
                            const std::optional<std::string>& image_path) {
  if (prompt.has_value() == image_path.has_value()) {
    throw ContractViolation("judge takes exactly one of a prompt or an image");
  }
  double score = 0.0;
  if (prompt.has_value()) {
    score = score_text(head(), *backends_.text_embedder, tokenize(*prompt));
  } else {
    score = score_image(head(), *backends_.image_embedder, read_image_png(*image_path));
  }
  const Verdict verdict = vcm::judge(score, config_.judge_threshold);

  JsonWriter w;
  w.begin_object();
  write_header(w, "judge", config_.seed);
  if (prompt.has_value()) w.key("prompt").value(*prompt);
  if (image_path.has_value()) w.key("image").value(*image_path);
  w.key("pre_score").value(verdict.score);
  w.key("threshold").value(verdict.threshold);
  w.key("verdict").value(verdict.label());
  write_config_echo(w, config_);
  w.end_object();

  fs::create_directories(config_.out_dir);
  write_report_file(config_.out_dir, "judge_report.json", w.str());
  return w.str();
}

std::string Pipeline::explain(const std::optional<std::string>& prompt,
                              const std::optional<std::string>& image_path) {
  bool generated = false;
  const ImageTensor image = load_or_generate(prompt, image_path, &generated);
  const ImageScorer score_fn = scorer();
  const Verdict verdict = vcm::judge(score_fn(image), config_.judge_threshold);

  std::optional<WordImportanceMap> words_map;
  if (prompt.has_value()) {
    const TokenSequence words = tokenize(*prompt);
    if (words.empty()) throw ContractViolation("prompt has no words");
    words_map = word_importance(words, prompt_generator(), score_fn, config_.word_attribution);
  }
  const SaliencyMap saliency = image_saliency(image, score_fn, config_.image_attribution);

  fs::create_directories(config_.out_dir);
  const std::string heatmap_name = "heatmap.png";
  write_grayscale_png(normalize_map(saliency.values), saliency.height, saliency.width,
                      (fs::path(config_.out_dir) / heatmap_name).string());
  if (generated) {
    write_image_png(image, (fs::path(config_.out_dir) / "generated.png").string());
  }

  JsonWriter w;
  w.begin_object();
  write_header(w, "explain", config_.seed);
  if (prompt.has_value()) w.key("prompt").value(*prompt);
  if (image_path.has_value()) w.key("image").value(*image_path);
  if (generated) w.key("generated_image").value("generated.png");
  w.key("pre_score").value(verdict.score);
  w.key("threshold").value(verdict.threshold);
  w.key("verdict").value(verdict.label());
  if (words_map.has_value()) write_word_importance(w, *words_map);
  w.key("saliency").begin_object();
  w.key("heatmap").value(heatmap_name);
  w.key("sample_count").value(saliency.sample_count);
  w.key("mask_probability").value(saliency.mask_prob);
  w.key("grid").begin_array().value(saliency.grid_height).value(saliency.grid_width).end_array();
  w.key("seed").value(saliency.seed);
  w.key("coverage").value(saliency.coverage);
  w.end_object();
  write_config_echo(w, config_);
  w.end_object();

  write_report_file(config_.out_dir, "explain_report.json", w.str());
  return w.str();
}

std::string Pipeline::manipulate_command(const std::optional<std::string>& prompt,
                                         const std::optional<std::string>& image_path,
                                         const std::string& strategy_text) {
  const std::optional<Strategy> strategy = parse_strategy(strategy_text);
  if (!strategy.has_value()) {
    throw ContractViolation("unknown strategy '" + strategy_text +
                            "' (expected blur, inpaint, word_swap, caption_rewrite or auto)");
  }
  std::optional<TokenSequence> words;
  if (prompt.has_value()) {
    words = tokenize(*prompt);
    if (words->empty()) throw ContractViolation("prompt has no words");
  }
  if (*strategy == Strategy::kWordSwap && !words.has_value()) {
    throw ContractViolation("word_swap requires a prompt");
  }

  bool generated = false;
  const ImageTensor image = load_or_generate(prompt, image_path, &generated);

  ManipulationConfig manipulation_config;
  manipulation_config.judge_threshold = config_.judge_threshold;
  manipulation_config.region_threshold = config_.region_threshold;
  manipulation_config.blur_sigma = config_.blur_sigma;
  manipulation_config.word_attribution = config_.word_attribution;
  manipulation_config.image_attribution = config_.image_attribution;
  manipulation_config.seed = config_.seed;

  const std::vector<ManipulationResult> results =
      manipulate(image, words, *strategy, backends_, scorer(), manipulation_config);

  fs::create_directories(config_.out_dir);
  if (generated) {
    write_image_png(image, (fs::path(config_.out_dir) / "generated.png").string());
  }

  bool region_written = false;
  bool all_still_immoral = true;
  for (const auto& result : results) {
    if (!result.still_immoral) all_still_immoral = false;
    if (result.region.has_value() && !region_written) {
      write_mask_png(result.region->mask, (fs::path(config_.out_dir) / "region.png").string());
      region_written = true;
    }
  }

  JsonWriter w;
  w.begin_object();
  write_header(w, "manipulate", config_.seed);
  if (prompt.has_value()) w.key("prompt").value(*prompt);
  if (image_path.has_value()) w.key("image").value(*image_path);
  if (generated) w.key("generated_image").value("generated.png");
  w.key("strategy_requested").value(strategy_text);
  w.key("pre_score").value(results.front().pre_score);
  w.key("threshold").value(config_.judge_threshold);
  w.key("verdict").value(vcm::judge(results.front().pre_score, config_.judge_threshold).label());
  w.key("still_immoral").value(all_still_immoral);
  w.key("results").begin_array();
  for (const auto& result : results) {
    const std::string name = strategy_name(result.strategy);
    std::string artifact = name + ".png";
    std::replace(artifact.begin(), artifact.end(), '-', '_');
    write_image_png(result.output, (fs::path(config_.out_dir) / artifact).string());
    w.begin_object();
    w.key("strategy").value(name);
    w.key("post_score").value(result.post_score);
    w.key("verdict").value(vcm::judge(result.post_score, config_.judge_threshold).label());
    w.key("improved").value(result.improved);
    w.key("still_immoral").value(result.still_immoral);
    w.key("artifact").value(artifact);
    w.key("seed").value(result.seed);
    if (result.region.has_value()) {
      w.key("region").begin_object();
      w.key("threshold").value(result.region->threshold);
      w.key("pixel_count").value(result.region->pixel_count);
      w.key("mask").value("region.png");
      w.end_object();
    }
    if (result.swapped_word.has_value()) w.key("swapped_word").value(*result.swapped_word);
    if (result.rewritten_prompt.has_value()) {
      w.key("rewritten_prompt").value(join_words(*result.rewritten_prompt));
    }
    if (result.caption.has_value()) w.key("caption").value(join_words(*result.caption));
    w.end_object();
  }
  w.end_array();
  write_config_echo(w, config_);
  w.end_object();

  write_report_file(config_.out_dir, "manipulate_report.json", w.str());
  return w.str();
}

Pipeline::EvalOutput Pipeline::eval(const std::string& spec_path) {
  const json spec = parse_json_file(spec_path);
  if (!spec.is_object()) throw IoError("'" + spec_path + "' must contain a JSON object");
  for (const auto& [key, _] : spec.items()) {
    if (key != "image_sets" && key != "likert_csvs") {
      throw IoError("'" + spec_path + "': unknown eval-spec key '" + key + "'");
    }
  }
  const fs::path spec_dir = fs::path(spec_path).parent_path();

  const json image_sets = spec.contains("image_sets") ? spec["image_sets"] : json::array();
  const json likert_csvs = spec.contains("likert_csvs") ? spec["likert_csvs"] : json::array();
  if (image_sets.empty() && likert_csvs.empty()) {
    throw ContractViolation("eval spec lists no datasets");
  }

  struct DatasetError {
    std::string dataset;
    std::string message;
  };
  std::vector<DatasetError> errors;
  std::vector<AccuracyRow> accuracy_rows;

  for (const auto& entry : image_sets) {
    const std::string name = entry.value("name", std::string("unnamed"));
    try {
      const std::string manifest = (spec_dir / entry.at("manifest").get<std::string>()).string();
      const CsvTable table = read_csv(manifest);
      const size_t label_col = csv_column(table, "label", manifest);
      const size_t path_col = csv_column(table, "path", manifest);
      const fs::path manifest_dir = fs::path(manifest).parent_path();
      std::vector<LabeledImage> items;
      for (const auto& row : table.rows) {
        if (row.fields.size() <= std::max(label_col, path_col)) {
          throw IoError("'" + manifest + "' line " + std::to_string(row.line) +
                        ": too few fields");
        }
        const std::string& label_text = row.fields[label_col];
        if (label_text != "0" && label_text != "1") {
          throw IoError("'" + manifest + "' line " + std::to_string(row.line) +
                        ": label must be 0 or 1, got '" + label_text + "'");
        }
        LabeledImage item;
        item.label = label_text == "1" ? 1 : 0;
        item.image = read_image_png((manifest_dir / row.fields[path_col]).string());
        items.push_back(std::move(item));
      }
      accuracy_rows.push_back(evaluate_zero_shot(name, head(), *backends_.image_embedder, items,
                                                 config_.judge_threshold));
    } catch (const std::exception& e) {
      errors.push_back({name, e.what()});
    }
  }

  struct LikertReport {
    std::string source;
    std::vector<ConditionSummary> conditions;
  };
  std::vector<LikertReport> likert_reports;
  for (const auto& entry : likert_csvs) {
    const std::string source = entry.get<std::string>();
    try {
      likert_reports.push_back({source, ingest_likert_csv((spec_dir / source).string())});
    } catch (const std::exception& e) {
      errors.push_back({source, e.what()});
    }
  }

  JsonWriter w;
  w.begin_object();
  write_header(w, "eval", config_.seed);
  w.key("spec").value(spec_path);
  w.key("accuracy").begin_array();
  for (const auto& row : accuracy_rows) {
    w.begin_object();
    w.key("dataset").value(row.dataset);
    w.key("items").value(row.item_count);
    w.key("accuracy").value(row.accuracy);
    w.key("threshold").value(row.threshold);
    w.end_object();
  }
  w.end_array();
  w.key("likert").begin_array();
  for (const auto& report : likert_reports) {
    w.begin_object();
    w.key("source").value(report.source);
    w.key("conditions").begin_array();
    for (const auto& summary : report.conditions) {
      w.begin_object();
      w.key("condition").value(summary.condition);
      w.key("mean").value(summary.mean);
      w.key("sd").value(summary.stddev);
      w.key("n").value(summary.n);
      w.end_object();
    }
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.key("errors").begin_array();
  for (const auto& error : errors) {
    w.begin_object();
    w.key("dataset").value(error.dataset);
    w.key("error").value(error.message);
    w.end_object();
  }
  w.end_array();
  write_config_echo(w, config_);
  w.end_object();

  std::string table;
  if (!accuracy_rows.empty()) table += render_accuracy_table(accuracy_rows);
  for (const auto& report : likert_reports) {
    if (!table.empty()) table += "\n";
    table += report.source + "\n" + render_summary_table(report.conditions);
  }
  for (const auto& error : errors) {
    if (!table.empty()) table += "\n";
    table += "error: " + error.dataset + ": " + error.message + "\n";
  }

  fs::create_directories(config_.out_dir);
  write_report_file(config_.out_dir, "eval_report.json", w.str());
  return {w.str(), table};
}

}  // namespace vcm
