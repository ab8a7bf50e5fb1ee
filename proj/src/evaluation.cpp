// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#include "evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "errors.hpp"

namespace vcm {
namespace {

const std::string& field_at(const CsvTable::Row& row, size_t index, const std::string& path) {
  if (index >= row.fields.size()) {
    throw IoError("'" + path + "' line " + std::to_string(row.line) + ": too few fields");
  }
  return row.fields[index];
}

ConditionSummary summarize(const std::string& condition, const std::vector<double>& values) {
  ConditionSummary summary;
  summary.condition = condition;
  summary.n = static_cast<long>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  summary.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - summary.mean) * (v - summary.mean);
  summary.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return summary;
}

std::string format_fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

size_t csv_column(const CsvTable& table, const std::string& name, const std::string& path) {
  const auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) {
    throw IoError("'" + path + "' is missing required column '" + name + "'");
  }
  return static_cast<size_t>(it - table.header.begin());
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::vector<std::pair<long, std::vector<std::string>>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool record_has_content = false;
  long line = 1;
  long record_line = 1;

  auto end_field = [&] {
    fields.push_back(field);
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    records.emplace_back(record_line, std::move(fields));
    fields = {};
    record_has_content = false;
  };

  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        record_has_content = true;
        break;
      case ',':
        end_field();
        record_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (record_has_content || !field.empty() || !fields.empty()) end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(c);
        record_has_content = true;
        break;
    }
  }
  if (quoted) throw IoError("'" + path + "': unterminated quoted field");
  if (record_has_content || !field.empty() || !fields.empty()) end_record();

  if (records.empty()) throw IoError("'" + path + "' is empty");
  CsvTable table;
  table.header = records.front().second;
  for (size_t r = 1; r < records.size(); ++r) {
    table.rows.push_back({records[r].first, std::move(records[r].second)});
  }
  return table;
}

LabeledTextSet load_labeled_text_csv(const std::string& path, const TextCsvSchema& schema) {
  const CsvTable table = read_csv(path);
  const size_t label_col = csv_column(table, schema.label_column, path);
  const size_t text_col = csv_column(table, schema.text_column, path);
  if (table.rows.empty()) throw IoError("'" + path + "' has no data rows");

  LabeledTextSet data;
  data.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    const std::string& label_text = field_at(row, label_col, path);
    int label = 0;
    if (label_text == "0") {
      label = 0;
    } else if (label_text == "1") {
      label = 1;
    } else {
      throw IoError("'" + path + "' line " + std::to_string(row.line) +
                    ": label must be 0 or 1, got '" + label_text + "'");
    }
    data.push_back({tokenize(field_at(row, text_col, path)), label});
  }
  return data;
}

AccuracyRow evaluate_zero_shot(const std::string& dataset_name, const ClassifierHead& head,
                               const ImageEmbedder& embedder,
                               const std::vector<LabeledImage>& items, double threshold) {
  if (items.empty()) throw ContractViolation("zero-shot evaluation needs at least one item");
  long correct = 0;
  for (const auto& item : items) {
    const Verdict verdict = judge(score_image(head, embedder, item.image), threshold);
    if (static_cast<int>(verdict.immoral) == item.label) ++correct;
  }
  AccuracyRow row;
  row.dataset = dataset_name;
  row.item_count = static_cast<long>(items.size());
  row.accuracy = static_cast<double>(correct) / static_cast<double>(items.size());
  row.threshold = threshold;
  return row;
}

std::vector<ConditionSummary> aggregate_strategy_scores(
    const std::vector<ManipulationResult>& results) {
  if (results.empty()) throw ContractViolation("cannot aggregate an empty result list");
  std::vector<double> originals;
  std::map<std::string, std::vector<double>> by_condition;
  for (const auto& result : results) {
    originals.push_back(result.pre_score);
    by_condition[strategy_name(result.strategy)].push_back(result.post_score);
  }
  std::vector<ConditionSummary> summaries;
  summaries.push_back(summarize("original", originals));
  for (Strategy strategy : {Strategy::kBlur, Strategy::kInpaint, Strategy::kWordSwap,
                            Strategy::kCaptionRewrite, Strategy::kNoneNeeded}) {
    const auto it = by_condition.find(strategy_name(strategy));
    if (it != by_condition.end()) summaries.push_back(summarize(it->first, it->second));
  }
  return summaries;
}

std::vector<ConditionSummary> ingest_likert_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  csv_column(table, "evaluator_id", path);
  csv_column(table, "image_id", path);
  const size_t condition_col = csv_column(table, "condition", path);
  const size_t rating_col = csv_column(table, "rating", path);
  if (table.rows.empty()) throw IoError("'" + path + "' has no data rows");

  std::map<std::string, std::vector<double>> by_condition;
  std::vector<std::string> condition_order;
  for (const auto& row : table.rows) {
    const std::string& rating_text = field_at(row, rating_col, path);
    long rating = 0;
    size_t consumed = 0;
    bool ok = !rating_text.empty();
    if (ok) {
      try {
        rating = std::stol(rating_text, &consumed);
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok || consumed != rating_text.size() || rating < 1 || rating > 5) {
      throw IoError("'" + path + "' line " + std::to_string(row.line) +
                    ": rating must be an integer in [1,5], got '" + rating_text + "'");
    }
    const std::string& condition = field_at(row, condition_col, path);
    if (by_condition.find(condition) == by_condition.end()) condition_order.push_back(condition);
    by_condition[condition].push_back(static_cast<double>(rating));
  }

  std::vector<ConditionSummary> summaries;
  summaries.reserve(condition_order.size());
  for (const auto& condition : condition_order) {
    summaries.push_back(summarize(condition, by_condition[condition]));
  }
  return summaries;
}

std::string render_accuracy_table(const std::vector<AccuracyRow>& rows) {
  size_t name_width = std::string("dataset").size();
  for (const auto& row : rows) name_width = std::max(name_width, row.dataset.size());
  std::ostringstream out;
  out << std::left;
  out.width(static_cast<std::streamsize>(name_width));
  out << "dataset";
  out << "  items  accuracy  threshold\n";
  for (const auto& row : rows) {
    out.width(static_cast<std::streamsize>(name_width));
    out << row.dataset;
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %5ld  %s  %s\n", row.item_count,
                  format_fixed(row.accuracy).c_str(), format_fixed(row.threshold).c_str());
    out << buf;
  }
  return out.str();
}

std::string render_summary_table(const std::vector<ConditionSummary>& rows) {
  size_t name_width = std::string("condition").size();
  for (const auto& row : rows) name_width = std::max(name_width, row.condition.size());
  std::ostringstream out;
  out << std::left;
  out.width(static_cast<std::streamsize>(name_width));
  out << "condition";
  out << "      mean        sd      n\n";
  for (const auto& row : rows) {
    out.width(static_cast<std::streamsize>(name_width));
    out << row.condition;
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %s  %s  %5ld\n", format_fixed(row.mean).c_str(),
                  format_fixed(row.stddev).c_str(), row.n);
    out << buf;
  }
  return out.str();
}

}  // namespace vcm
