// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#include "vcmoral.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "errors.hpp"
#include "pipeline.hpp"

struct vcm_pipeline {
  std::string config_json;  // merged config document, overrides applied
  std::string last_error;
};

namespace {

thread_local std::string g_create_error;

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) return nullptr;
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

vcm_status classify_exception(std::string& message) {
  try {
    throw;
  } catch (const vcm::ContractViolation& e) {
    message = e.what();
    return VCM_STATUS_INVALID_ARGUMENT;
  } catch (const vcm::IoError& e) {
    message = e.what();
    return VCM_STATUS_IO_ERROR;
  } catch (const vcm::BackendError& e) {
    message = e.what();
    return VCM_STATUS_BACKEND_ERROR;
  } catch (const std::exception& e) {
    message = e.what();
    return VCM_STATUS_INTERNAL_ERROR;
  } catch (...) {
    message = "unknown error";
    return VCM_STATUS_INTERNAL_ERROR;
  }
}

// Runs one pipeline command, routing exceptions into status codes and the
// handle's error slot.
template <typename Fn>
vcm_status run_command(vcm_pipeline* pipeline, char** out_report_json, Fn&& fn) {
  if (pipeline == nullptr || out_report_json == nullptr) return VCM_STATUS_INVALID_ARGUMENT;
  *out_report_json = nullptr;
  try {
    vcm::Pipeline instance(vcm::parse_pipeline_config(pipeline->config_json));
    const std::string report = fn(instance);
    *out_report_json = copy_string(report);
    if (*out_report_json == nullptr) {
      pipeline->last_error = "out of memory";
      return VCM_STATUS_INTERNAL_ERROR;
    }
    pipeline->last_error.clear();
    return VCM_STATUS_OK;
  } catch (...) {
    return classify_exception(pipeline->last_error);
  }
}

}  // namespace

extern "C" {

const char* vcm_version(void) { return vcm::kToolVersion; }

vcm_status vcm_pipeline_create(const char* config_json, vcm_pipeline** out_pipeline) {
  if (out_pipeline == nullptr) return VCM_STATUS_INVALID_ARGUMENT;
  *out_pipeline = nullptr;
  const std::string text = config_json != nullptr ? config_json : "";
  try {
    vcm::parse_pipeline_config(text);  // validate eagerly
    auto* handle = new (std::nothrow) vcm_pipeline{text, {}};
    if (handle == nullptr) {
      g_create_error = "out of memory";
      return VCM_STATUS_INTERNAL_ERROR;
    }
    *out_pipeline = handle;
    return VCM_STATUS_OK;
  } catch (...) {
    return classify_exception(g_create_error);
  }
}

void vcm_pipeline_destroy(vcm_pipeline* pipeline) { delete pipeline; }

vcm_status vcm_pipeline_override(vcm_pipeline* pipeline, const char* key, const char* value) {
  if (pipeline == nullptr || key == nullptr || value == nullptr) {
    return VCM_STATUS_INVALID_ARGUMENT;
  }
  try {
    const std::string merged = vcm::override_config_json(pipeline->config_json, key, value);
    vcm::parse_pipeline_config(merged);  // keep the stored document valid
    pipeline->config_json = merged;
    pipeline->last_error.clear();
    return VCM_STATUS_OK;
  } catch (...) {
    return classify_exception(pipeline->last_error);
  }
}

const char* vcm_pipeline_last_error(const vcm_pipeline* pipeline) {
  if (pipeline == nullptr) return g_create_error.c_str();
  return pipeline->last_error.c_str();
}

vcm_status vcm_train(vcm_pipeline* pipeline, const char* train_csv_path, char** out_report_json) {
  if (train_csv_path == nullptr) return VCM_STATUS_INVALID_ARGUMENT;
  return run_command(pipeline, out_report_json,
                     [&](vcm::Pipeline& p) { return p.train(train_csv_path); });
}

vcm_status vcm_judge(vcm_pipeline* pipeline, const char* prompt_or_null,
                     const char* image_path_or_null, char** out_report_json) {
  return run_command(pipeline, out_report_json, [&](vcm::Pipeline& p) {
    return p.judge(prompt_or_null != nullptr ? std::optional<std::string>(prompt_or_null)
                                             : std::nullopt,
                   image_path_or_null != nullptr ? std::optional<std::string>(image_path_or_null)
                                                 : std::nullopt);
  });
}

vcm_status vcm_explain(vcm_pipeline* pipeline, const char* prompt_or_null,
                       const char* image_path_or_null, char** out_report_json) {
  return run_command(pipeline, out_report_json, [&](vcm::Pipeline& p) {
    return p.explain(prompt_or_null != nullptr ? std::optional<std::string>(prompt_or_null)
                                               : std::nullopt,
                     image_path_or_null != nullptr ? std::optional<std::string>(image_path_or_null)
                                                   : std::nullopt);
  });
}

vcm_status vcm_manipulate(vcm_pipeline* pipeline, const char* prompt_or_null,
                          const char* image_path_or_null, const char* strategy,
                          char** out_report_json) {
  if (strategy == nullptr) return VCM_STATUS_INVALID_ARGUMENT;
  return run_command(pipeline, out_report_json, [&](vcm::Pipeline& p) {
    return p.manipulate_command(
        prompt_or_null != nullptr ? std::optional<std::string>(prompt_or_null) : std::nullopt,
        image_path_or_null != nullptr ? std::optional<std::string>(image_path_or_null)
                                      : std::nullopt,
        strategy);
  });
}

vcm_status vcm_eval(vcm_pipeline* pipeline, const char* eval_spec_path, char** out_report_json,
                    char** out_table_text) {
  if (eval_spec_path == nullptr) return VCM_STATUS_INVALID_ARGUMENT;
  if (out_table_text != nullptr) *out_table_text = nullptr;
  std::string table;
  const vcm_status status =
      run_command(pipeline, out_report_json, [&](vcm::Pipeline& p) {
        vcm::Pipeline::EvalOutput output = p.eval(eval_spec_path);
        table = std::move(output.table_text);
        return output.report_json;
      });
  if (status == VCM_STATUS_OK && out_table_text != nullptr) {
    *out_table_text = copy_string(table);
    if (*out_table_text == nullptr) {
      std::free(*out_report_json);
      *out_report_json = nullptr;
      pipeline->last_error = "out of memory";
      return VCM_STATUS_INTERNAL_ERROR;
    }
  }
  return status;
}

void vcm_string_free(char* text) { std::free(text); }

}  // extern "C"
