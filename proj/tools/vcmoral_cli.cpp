// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the core exclusively through the C API in
// vcmoral.h. Exit codes: 0 success (including still-immoral manipulation
// results), 2 usage or input error, 3 backend failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vcmoral.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitBackend = 3;

int status_to_exit(vcm_status status) {
  switch (status) {
    case VCM_STATUS_OK: return 0;
    case VCM_STATUS_INVALID_ARGUMENT:
    case VCM_STATUS_IO_ERROR: return kExitUsage;
    case VCM_STATUS_BACKEND_ERROR:
    case VCM_STATUS_INTERNAL_ERROR: return kExitBackend;
  }
  return kExitBackend;
}

struct CommonOptions {
  std::string config_path;
  std::string seed;
  std::string out_dir;
  std::string backend;
  std::string threshold;
};

void add_common_options(CLI::App* cmd, CommonOptions& options) {
  cmd->add_option("--config", options.config_path, "Pipeline config JSON file");
  cmd->add_option("--seed", options.seed, "Pipeline seed (overrides config)");
  cmd->add_option("--out", options.out_dir, "Output directory for artifacts and reports");
  cmd->add_option("--backend", options.backend, "Backend kind for every role: stub or external")
      ->check(CLI::IsMember({"stub", "external"}));
  cmd->add_option("--threshold", options.threshold, "Judge threshold in (0,1)");
}

class PipelineHandle {
 public:
  ~PipelineHandle() { vcm_pipeline_destroy(pipeline_); }

  // Returns an exit code; 0 means the handle is ready.
  int open(const CommonOptions& options) {
    std::string config_json;
    if (!options.config_path.empty()) {
      std::ifstream in(options.config_path, std::ios::binary);
      if (!in) {
        std::cerr << "error: cannot open config file '" << options.config_path << "'\n";
        return kExitUsage;
      }
      std::ostringstream buffer;
      buffer << in.rdbuf();
      config_json = buffer.str();
    }
    const vcm_status created =
        vcm_pipeline_create(config_json.empty() ? nullptr : config_json.c_str(), &pipeline_);
    if (created != VCM_STATUS_OK) {
      std::cerr << "error: " << vcm_pipeline_last_error(nullptr) << "\n";
      return status_to_exit(created);
    }
    if (int code = apply("seed", options.seed)) return code;
    if (int code = apply("out_dir", options.out_dir)) return code;
    if (int code = apply("backend_kind", options.backend)) return code;
    if (int code = apply("judge_threshold", options.threshold)) return code;
    return 0;
  }

  int apply(const char* key, const std::string& value) {
    if (value.empty()) return 0;
    const vcm_status status = vcm_pipeline_override(pipeline_, key, value.c_str());
    if (status != VCM_STATUS_OK) {
      std::cerr << "error: " << vcm_pipeline_last_error(pipeline_) << "\n";
      return status_to_exit(status);
    }
    return 0;
  }

  vcm_pipeline* get() { return pipeline_; }

 private:
  vcm_pipeline* pipeline_ = nullptr;
};

int finish(vcm_pipeline* pipeline, vcm_status status, char* report, bool print_report = true) {
  if (status != VCM_STATUS_OK) {
    std::cerr << "error: " << vcm_pipeline_last_error(pipeline) << "\n";
    return status_to_exit(status);
  }
  if (print_report && report != nullptr) std::cout << report << "\n";
  vcm_string_free(report);
  return 0;
}

const char* opt(const std::string& value) { return value.empty() ? nullptr : value.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vcmoral: judge, explain, and ethically manipulate generated images"};
  app.require_subcommand(1);
  app.set_version_flag("--version", []() { return std::string(vcm_version()); });

  CommonOptions common;
  std::string data_csv;
  std::string prompt;
  std::string image;
  std::string strategy = "auto";
  std::string spec;

  CLI::App* train = app.add_subcommand("train", "Train the immorality classifier head on a CSV");
  add_common_options(train, common);
  train->add_option("--data", data_csv, "Labeled sentence CSV (columns: label,input)")
      ->required();

  CLI::App* judge = app.add_subcommand("judge", "Score one prompt or image and render a verdict");
  add_common_options(judge, common);
  judge->add_option("--prompt", prompt, "Prompt text");
  judge->add_option("--image", image, "Image PNG path");

  CLI::App* explain =
      app.add_subcommand("explain", "Attribute the immorality score to words and pixels");
  add_common_options(explain, common);
  explain->add_option("--prompt", prompt, "Prompt text");
  explain->add_option("--image", image, "Image PNG path");

  CLI::App* manipulate =
      app.add_subcommand("manipulate", "Manipulate an immoral image into a moral alternative");
  add_common_options(manipulate, common);
  manipulate->add_option("--prompt", prompt, "Prompt text");
  manipulate->add_option("--image", image, "Image PNG path");
  manipulate->add_option("--strategy", strategy,
                         "blur, inpaint, word_swap, caption_rewrite, or auto");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate datasets listed in an eval-spec JSON");
  add_common_options(eval, common);
  eval->add_option("--spec", spec, "Eval spec JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  PipelineHandle handle;
  if (int code = handle.open(common)) return code;

  char* report = nullptr;
  if (train->parsed()) {
    const vcm_status status = vcm_train(handle.get(), data_csv.c_str(), &report);
    return finish(handle.get(), status, report);
  }
  if (judge->parsed()) {
    const vcm_status status = vcm_judge(handle.get(), opt(prompt), opt(image), &report);
    return finish(handle.get(), status, report);
  }
  if (explain->parsed()) {
    const vcm_status status = vcm_explain(handle.get(), opt(prompt), opt(image), &report);
    return finish(handle.get(), status, report);
  }
  if (manipulate->parsed()) {
    const vcm_status status =
        vcm_manipulate(handle.get(), opt(prompt), opt(image), strategy.c_str(), &report);
    return finish(handle.get(), status, report);
  }
  if (eval->parsed()) {
    char* table = nullptr;
    const vcm_status status = vcm_eval(handle.get(), spec.c_str(), &report, &table);
    if (status == VCM_STATUS_OK && table != nullptr) std::cout << table;
    vcm_string_free(table);
    return finish(handle.get(), status, report, /*print_report=*/false);
  }
  return kExitUsage;
}
