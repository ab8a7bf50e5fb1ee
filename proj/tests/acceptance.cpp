// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Runs each criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion; the exit code is the number of failures.
//
//   usage: vcmoral_acceptance <path-to-cli> <path-to-toy-train-csv>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "attribution.hpp"
#include "backends.hpp"
#include "evaluation.hpp"
#include "manipulation.hpp"
#include "pipeline.hpp"
#include "recognizer.hpp"
#include "rng.hpp"

using namespace vcm;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& description, bool pass,
            const std::string& detail = "") {
  std::printf("%s  criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", criterion,
              description.c_str(), detail.empty() ? "" : " — ", detail.c_str());
  if (!pass) ++g_failures;
}

void run(int criterion, const std::string& description, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(criterion, description, pass, detail);
}

PromptGenerator stub_prompt_generator() {
  return [](const TokenSequence& words) { return StubGenerator().generate(words, 0); };
}

ImageScorer gun_cell_indicator() {
  const int cell = static_cast<int>(polyhash("gun") % 16);
  const int y = (cell / 4) * 16;
  const int x = (cell % 4) * 16;
  return [y, x](const ImageTensor& img) {
    return (img.at(y, x, 0) == 1.0f && img.at(y, x, 1) == 0.0f) ? 1.0 : 0.0;
  };
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<unreadable:" + path.string() + ">";
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct SharedState {
  ClassifierHead head;        // trained under criterion 4
  bool head_ready = false;
  std::string cli_path;
  std::string toy_csv_path;
  fs::path work_dir;
};

SharedState g_state;

ImageScorer head_image_scorer(const StubImageEmbedder& embedder) {
  return [&embedder](const ImageTensor& img) {
    return score_image(g_state.head, embedder, img);
  };
}

bool criterion1_word_oracle(std::string& detail) {
  const auto started = std::chrono::steady_clock::now();
  const TokenSequence prompt = {"a", "gun", "toy"};
  const WordImportanceMap exact =
      exhaustive_word_importance(prompt, stub_prompt_generator(), gun_cell_indicator(), 0.5);
  const double expected[3] = {0.5, 1.0, 0.5};
  for (int i = 0; i < 3; ++i) {
    if (std::abs(exact.entries[i].importance - expected[i]) > 1e-9) {
      detail = "exhaustive entry " + std::to_string(i) + " = " +
               std::to_string(exact.entries[i].importance);
      return false;
    }
  }
  const WordImportanceMap estimate = word_importance(
      prompt, stub_prompt_generator(), gun_cell_indicator(), {20000, 0.5, 2024});
  for (int i = 0; i < 3; ++i) {
    const double err = std::abs(estimate.entries[i].importance - expected[i]);
    if (err > 0.02) {
      detail = "monte carlo entry " + std::to_string(i) + " off by " + std::to_string(err);
      return false;
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (seconds >= 10.0) {
    detail = "took " + std::to_string(seconds) + " s";
    return false;
  }
  detail = "exact [0.5, 1.0, 0.5]; MC within 0.02 in " + std::to_string(seconds) + " s";
  return true;
}

bool criterion2_pixel_oracle(std::string& detail) {
  ImageTensor img = ImageTensor::filled(2, 2, 0.0f, 0.0f, 0.0f);
  img.at(0, 0, 0) = 1.0f;
  const ImageScorer readout = [](const ImageTensor& masked) {
    return static_cast<double>(masked.at(0, 0, 0));
  };
  const SaliencyMap exact = exhaustive_image_saliency(img, readout, 0.5);
  const double expected[4] = {1.0, 0.5, 0.5, 0.5};
  for (int p = 0; p < 4; ++p) {
    if (std::abs(exact.values[p] - expected[p]) > 1e-9) {
      detail = "exhaustive pixel " + std::to_string(p) + " = " + std::to_string(exact.values[p]);
      return false;
    }
  }
  ImageAttributionParams params;
  params.sample_count = 20000;
  params.mask_prob = 0.5;
  params.grid_height = 2;
  params.grid_width = 2;
  params.seed = 11;
  const SaliencyMap estimate = image_saliency(img, readout, params);
  for (int p = 0; p < 4; ++p) {
    if (std::abs(estimate.values[p] - expected[p]) > 0.02) {
      detail = "monte carlo pixel " + std::to_string(p) + " = " + std::to_string(estimate.values[p]);
      return false;
    }
  }
  // Constant scorer maps are exactly constant, zero tolerance.
  const SaliencyMap flat_exact =
      exhaustive_image_saliency(img, [](const ImageTensor&) { return 0.4; }, 0.5);
  ImageAttributionParams flat_params = params;
  flat_params.sample_count = 500;
  const SaliencyMap flat_mc =
      image_saliency(img, [](const ImageTensor&) { return 0.4; }, flat_params);
  for (int p = 0; p < 4; ++p) {
    if (std::abs(flat_exact.values[p] - 0.4) > 1e-12 || flat_mc.values[p] != 0.4) {
      detail = "constant-scorer map is not constant";
      return false;
    }
  }
  detail = "exact [1.0, 0.5, 0.5, 0.5]; MC within 0.02; constant map exact";
  return true;
}

bool criterion3_gradient_check(std::string& detail) {
  Rng rng(7);
  const double eps = 1e-4;
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    ClassifierHead head;
    head.input_dim = 6;
    head.hidden_dim = 5;
    head.w1.resize(30);
    head.b1.resize(5);
    head.w2.resize(5);
    for (auto& w : head.w1) w = rng.uniform() * 2.0 - 1.0;
    for (auto& b : head.b1) b = rng.uniform() * 2.0 - 1.0;
    for (auto& w : head.w2) w = rng.uniform() * 2.0 - 1.0;
    head.b2 = rng.uniform() * 2.0 - 1.0;
    EmbeddingVector e(6);
    for (auto& x : e) x = rng.uniform() * 2.0 - 1.0;
    const int label = rng.bernoulli(0.5) ? 1 : 0;
    const HeadGradients grads = head_gradients(head, e, label);

    auto probe = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + eps;
      const double up = bce_loss({head_forward(head, e)}, {label});
      param = saved - eps;
      const double down = bce_loss({head_forward(head, e)}, {label});
      param = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    };
    for (size_t i = 0; i < head.w1.size(); ++i) probe(head.w1[i], grads.w1[i]);
    for (size_t i = 0; i < head.b1.size(); ++i) probe(head.b1[i], grads.b1[i]);
    for (size_t i = 0; i < head.w2.size(); ++i) probe(head.w2[i], grads.w2[i]);
    probe(head.b2, grads.b2);
  }
  detail = "worst relative error " + std::to_string(worst) + " over 100 draws";
  return worst < 1e-3;
}

bool criterion4_zero_shot_transfer(std::string& detail) {
  const LabeledTextSet data = load_labeled_text_csv(g_state.toy_csv_path);
  if (data.size() != 64) {
    detail = "expected 64 toy sentences, got " + std::to_string(data.size());
    return false;
  }
  const StubTextEmbedder text(8);
  TrainingConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 0;
  TrainingLog log;
  g_state.head = train_classifier(data, text, cfg, &log);
  g_state.head_ready = true;

  long correct_text = 0;
  for (const auto& item : data) {
    const double s = score_text(g_state.head, text, item.words);
    correct_text += (s >= 0.5) == (item.label == 1);
  }
  if (correct_text < 61) {  // >= 0.95 of 64
    detail = "training accuracy " + std::to_string(correct_text) + "/64";
    return false;
  }
  if (!(log.epoch_loss.back() < log.epoch_loss.front())) {
    detail = "training loss did not decrease";
    return false;
  }

  const StubImageEmbedder image(8);
  std::vector<LabeledImage> items;
  for (int i = 0; i < 8; ++i) {
    const float shade = 0.65f + 0.05f * static_cast<float>(i);
    items.push_back({ImageTensor::filled(16, 16, shade, 0.0f, 0.0f), 1});
    items.push_back({ImageTensor::filled(16, 16, 0.0f, 0.0f, shade), 0});
  }
  const AccuracyRow row = evaluate_zero_shot("synthetic", g_state.head, image, items, 0.5);
  detail = "image accuracy " + std::to_string(row.accuracy) + ", train accuracy " +
           std::to_string(correct_text) + "/64";
  return row.accuracy == 1.0;
}

bool criterion5_end_to_end_manipulation(std::string& detail) {
  if (!g_state.head_ready) {
    detail = "criterion 4 training unavailable";
    return false;
  }
  const StubImageEmbedder image(8);
  const BackendSet backends = make_backends({}, {}, {}, {}, {}, {}, {});
  const TokenSequence prompt = {"a", "man", "shooting", "a", "gun"};
  const ImageTensor img = backends.generator->generate(prompt, 0);
  const ImageScorer scorer = head_image_scorer(image);

  ManipulationConfig cfg;
  cfg.seed = 0;
  // Desk-scale mapping of the attribution defaults: 2 px saliency cells on
  // the 64 px stub canvas, and the region threshold at the half-ramp of the
  // upsampled masks so the superlevel set covers whole stub cells.
  cfg.image_attribution.grid_height = 32;
  cfg.image_attribution.grid_width = 32;
  cfg.region_threshold = 0.5;

  const auto results = manipulate(img, prompt, Strategy::kAuto, backends, scorer, cfg);
  if (results.size() != 4) {
    detail = "expected 4 strategies, got " + std::to_string(results.size());
    return false;
  }
  const double pre = results.front().pre_score;
  if (!(pre > 0.5)) {
    detail = "pre-score " + std::to_string(pre);
    return false;
  }
  std::ostringstream order;
  bool all_below_pre = true;
  bool inpaint_moral = false;
  bool caption_moral = false;
  for (const auto& result : results) {
    all_below_pre = all_below_pre && result.post_score < pre;
    if (result.strategy == Strategy::kInpaint) inpaint_moral = result.post_score < 0.5;
    if (result.strategy == Strategy::kCaptionRewrite) caption_moral = result.post_score < 0.5;
    order << " " << strategy_name(result.strategy) << "=" << result.post_score;
  }
  detail = "pre=" + std::to_string(pre) + "; ascending post:" + order.str();
  return all_below_pre && inpaint_moral && caption_moral;
}

bool criterion6_locality(std::string& detail) {
  Rng rng(2026);
  const BackendSet backends = make_backends({}, {}, {}, {}, {}, {}, {});
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 6 + static_cast<int>(rng.below(20));
    const int w = 6 + static_cast<int>(rng.below(20));
    ImageTensor img = ImageTensor::filled(h, w, 0, 0, 0);
    for (auto& v : img.data) v = static_cast<float>(rng.uniform());
    SaliencyMap saliency;
    saliency.height = h;
    saliency.width = w;
    saliency.values.resize(static_cast<size_t>(h) * w);
    for (auto& v : saliency.values) v = rng.uniform();
    const double tau = 0.05 + 0.9 * rng.uniform();
    const RegionSelection region = select_region(saliency, tau);
    const ImageTensor blurred = blur_strategy(img, region, 0.5 + 5.0 * rng.uniform());
    const ImageTensor inpainted = inpaint_strategy(img, region, *backends.inpainter);
    for (size_t p = 0; p < img.pixel_count(); ++p) {
      if (region.mask.values[p] != 0.0f) continue;
      for (int c = 0; c < 3; ++c) {
        if (blurred.data[p * 3 + c] != img.data[p * 3 + c] ||
            inpainted.data[p * 3 + c] != img.data[p * 3 + c]) {
          detail = "trial " + std::to_string(trial) + " modified pixel " + std::to_string(p);
          return false;
        }
      }
    }
  }
  detail = "50 randomized (image, saliency, tau) cases bit-identical outside the region";
  return true;
}

bool criterion7_cli_determinism(std::string& detail) {
  const fs::path dir = g_state.work_dir / "cli";
  fs::create_directories(dir);
  const fs::path out = dir / "out";
  const fs::path config_path = dir / "config.json";
  {
    std::ofstream config(config_path);
    config << "{\n"
           << "  \"seed\": 0,\n"
           << "  \"out_dir\": \"" << out.string() << "\",\n"
           << "  \"region_threshold\": 0.5,\n"
           << "  \"attribution\": {\"grid_height\": 32, \"grid_width\": 32},\n"
           << "  \"training\": {\"epochs\": 200}\n"
           << "}\n";
  }
  const std::string base = "'" + g_state.cli_path + "' ";
  const std::string common = " --config '" + config_path.string() + "'";
  const std::vector<std::string> commands = {
      base + "train" + common + " --data '" + g_state.toy_csv_path + "'",
      base + "explain" + common + " --prompt 'a gun flower'",
      base + "manipulate" + common + " --prompt 'a man shooting a gun' --strategy auto",
  };
  const std::vector<std::string> artifacts = {
      "head.vcm",          "train_report.json",      "training_log.csv",
      "explain_report.json", "heatmap.png",          "generated.png",
      "manipulate_report.json", "blur.png",          "inpaint.png",
      "word_swap.png",     "caption_rewrite.png",    "region.png",
  };

  auto run_sequence = [&]() -> bool {
    for (const auto& command : commands) {
      const std::string silenced = command + " > /dev/null 2>&1";
      if (std::system(silenced.c_str()) != 0) {
        detail = "command failed: " + command;
        return false;
      }
    }
    return true;
  };

  fs::remove_all(out);
  if (!run_sequence()) return false;
  std::map<std::string, std::string> first_bytes;
  for (const auto& name : artifacts) {
    if (!fs::exists(out / name)) {
      detail = "missing artifact " + name;
      return false;
    }
    first_bytes[name] = slurp(out / name);
  }

  fs::remove_all(out);
  if (!run_sequence()) return false;
  for (const auto& name : artifacts) {
    if (slurp(out / name) != first_bytes[name]) {
      detail = "artifact differs between identical invocations: " + name;
      return false;
    }
  }
  detail = std::to_string(artifacts.size()) + " artifacts byte-identical across reruns";
  return true;
}

bool criterion8_bce_spot_value(std::string& detail) {
  const double loss = bce_loss({0.0}, {1});
  detail = "bce([0],[1]) = " + std::to_string(loss);
  return std::abs(loss - 0.693147) <= 1e-6;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <path-to-cli> <path-to-toy-train-csv>\n", argv[0]);
    return 64;
  }
  g_state.cli_path = argv[1];
  g_state.toy_csv_path = argv[2];
  g_state.work_dir = fs::temp_directory_path() / "vcm_acceptance";
  fs::remove_all(g_state.work_dir);
  fs::create_directories(g_state.work_dir);

  run(1, "word-importance oracle and Monte-Carlo convergence", criterion1_word_oracle);
  run(2, "pixel-saliency oracle and constant-scorer exactness", criterion2_pixel_oracle);
  run(3, "analytic gradients vs central finite differences", criterion3_gradient_check);
  run(4, "toy zero-shot text-to-image transfer at accuracy 1.0", criterion4_zero_shot_transfer);
  run(5, "end-to-end ethical manipulation on the canonical prompt",
      criterion5_end_to_end_manipulation);
  run(6, "blur/inpaint locality outside the selected region", criterion6_locality);
  run(7, "byte-identical CLI reruns (train, explain, manipulate)", criterion7_cli_determinism);
  run(8, "BCE spot value at the symmetric point", criterion8_bce_spot_value);
  std::printf("SKIP  criterion 9: optional integration — zero-shot accuracy of an "
              "ETHICS-style-trained head with a real ViT-B/32-class embedder on the SMID "
              "benchmark, target 0.697 +/- 0.05 (needs an external embedder endpoint and the "
              "dataset files; not gating)\n");

  fs::remove_all(g_state.work_dir);
  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  }
  return g_failures;
}
