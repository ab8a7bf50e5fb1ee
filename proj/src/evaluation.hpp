// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "manipulation.hpp"
#include "recognizer.hpp"

namespace vcm {

// RFC-4180 CSV with a header row. Each data row keeps the physical line
// number it starts on so validation errors can name it.
struct CsvTable {
  std::vector<std::string> header;
  struct Row {
    long line = 0;
    std::vector<std::string> fields;
  };
  std::vector<Row> rows;
};

CsvTable read_csv(const std::string& path);

// Index of a required header column; IoError naming the file otherwise.
size_t csv_column(const CsvTable& table, const std::string& name, const std::string& path);

struct TextCsvSchema {
  std::string label_column = "label";
  std::string text_column = "input";
};

// Loads labeled sentences; label 1 = immoral. Text is tokenized by
// lowercasing and mapping punctuation to spaces. A row with a label other
// than 0/1 aborts the load with the offending line number.
LabeledTextSet load_labeled_text_csv(const std::string& path, const TextCsvSchema& schema = {});

struct AccuracyRow {
  std::string dataset;
  long item_count = 0;
  double accuracy = 0.0;
  double threshold = 0.5;
};

struct LabeledImage {
  ImageTensor image;
  int label = 0;  // 1 = immoral
};

// Zero-shot image accuracy of a text-trained head: exact correct/count at the
// given threshold via score_image.
AccuracyRow evaluate_zero_shot(const std::string& dataset_name, const ClassifierHead& head,
                               const ImageEmbedder& embedder,
                               const std::vector<LabeledImage>& items, double threshold);

struct ConditionSummary {
  std::string condition;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  long n = 0;
};

// Per-condition immorality score summary of manipulation outputs; pre-scores
// are reported under the condition "original".
std::vector<ConditionSummary> aggregate_strategy_scores(
    const std::vector<ManipulationResult>& results);

// Human-study ingestion: columns evaluator_id, image_id, condition, rating
// with integral ratings 1..5. No imputation; a bad rating aborts with its
// line number.
std::vector<ConditionSummary> ingest_likert_csv(const std::string& path);

std::string render_accuracy_table(const std::vector<AccuracyRow>& rows);
std::string render_summary_table(const std::vector<ConditionSummary>& rows);

}  // namespace vcm
