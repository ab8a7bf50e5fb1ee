// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <json.hpp>

#define CPPHTTPLIB_NO_EXCEPTIONS
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "backends.hpp"
#include "errors.hpp"
#include "pipeline.hpp"
#include "png_io.hpp"

using namespace vcm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

const char kTinyTrainCsv[] =
    "label,input\n"
    "1,a gun\n1,the blood\n1,his knife\n1,a sword\n1,they kill\n1,i shoot\n1,the torture\n"
    "1,a cigarette\n"
    "0,the water\n0,a flower\n0,her smile\n0,a toy\n0,his helmet\n0,a camera\n0,blue paint\n"
    "0,a calm morning\n";

std::string config_for(const TempDir& dir, const std::string& extra = "") {
  std::string config = "{\"out_dir\": \"" + dir.str() + "\", \"training\": {\"epochs\": 120}";
  if (!extra.empty()) config += ", " + extra;
  config += "}";
  return config;
}

}  // namespace

TEST_CASE("config parsing applies defaults and validates") {
  const PipelineConfig defaults = parse_pipeline_config("");
  CHECK(defaults.seed == 0);
  CHECK(defaults.judge_threshold == 0.5);
  CHECK(defaults.region_threshold == 0.6);
  CHECK(defaults.blur_sigma == 4.0);
  CHECK(defaults.word_attribution.sample_count == 1000);
  CHECK(defaults.image_attribution.sample_count == 4000);
  CHECK(defaults.image_attribution.grid_height == 8);
  CHECK(defaults.training.epochs == 500);
  CHECK(defaults.training.learning_rate == 0.002);
  CHECK(defaults.training.weight_decay == 0.01);
  CHECK(defaults.training.batch_size == 128);
  CHECK(defaults.training.dropout_prob == 0.3);
  CHECK(defaults.training.adam_epsilon == 1e-8);
  CHECK(defaults.training.hidden_dim == 64);
  CHECK(defaults.text_embedder.kind == BackendConfig::Kind::kStub);
  CHECK(defaults.text_embedder.embedding_dim == 8);

  CHECK_THROWS_AS(parse_pipeline_config("{\"judge_threshold\": 1.5}"), ContractViolation);
  CHECK_THROWS_AS(parse_pipeline_config("{\"blur_sigma\": -1}"), ContractViolation);
  CHECK_THROWS_AS(parse_pipeline_config("{\"unknown_key\": 1}"), ContractViolation);
  CHECK_THROWS_AS(parse_pipeline_config("{\"training\": {\"epochz\": 3}}"), ContractViolation);
  CHECK_THROWS_AS(parse_pipeline_config("not json"), ContractViolation);
  CHECK_THROWS_AS(parse_pipeline_config("{\"backends\": {\"text_embedder\": "
                                        "{\"embedding_dim\": 8}, \"image_embedder\": "
                                        "{\"embedding_dim\": 16}}}"),
                  ContractViolation);
}

TEST_CASE("config overrides merge by dotted path") {
  std::string doc = override_config_json("", "seed", "42");
  doc = override_config_json(doc, "training.epochs", "7");
  doc = override_config_json(doc, "head_path", "my_head.vcm");
  const PipelineConfig config = parse_pipeline_config(doc);
  CHECK(config.seed == 42);
  CHECK(config.training.epochs == 7);
  CHECK(config.head_path == "my_head.vcm");
  // Seeds follow the pipeline seed.
  CHECK(config.word_attribution.seed == 42);
  CHECK(config.training.seed == 42);

  const std::string all_external = override_config_json("", "backend_kind", "external");
  const PipelineConfig external = parse_pipeline_config(all_external);
  CHECK(external.generator.kind == BackendConfig::Kind::kExternal);
  CHECK(external.captioner.kind == BackendConfig::Kind::kExternal);
  CHECK_THROWS_AS(override_config_json("", "backend_kind", "quantum"), ContractViolation);
}

TEST_CASE("train, judge, explain, manipulate produce deterministic reports and artifacts") {
  TempDir dir("vcm_pipe_flow");
  const std::string csv = dir.file("train.csv");
  write_file(csv, kTinyTrainCsv);

  const PipelineConfig config = parse_pipeline_config(config_for(dir));
  Pipeline pipeline(config);

  const std::string train_report = pipeline.train(csv);
  const json train_doc = json::parse(train_report);
  CHECK(train_doc["report_version"] == 1);
  CHECK(train_doc["command"] == "train");
  CHECK(train_doc["items"] == 16);
  CHECK(train_doc["immoral_items"] == 8);
  CHECK(fs::exists(dir.path / "head.vcm"));
  CHECK(fs::exists(dir.path / "training_log.csv"));
  CHECK(fs::exists(dir.path / "train_report.json"));

  // Judge a prompt and an image.
  const std::string judge_prompt = pipeline.judge("a gun", std::nullopt);
  const json judge_doc = json::parse(judge_prompt);
  CHECK(judge_doc["verdict"] == "immoral");
  CHECK(judge_doc["pre_score"].get<double>() > 0.5);

  const std::string red_png = dir.file("red.png");
  write_image_png(ImageTensor::filled(16, 16, 1.0f, 0.0f, 0.0f), red_png);
  const json judge_img = json::parse(pipeline.judge(std::nullopt, red_png));
  CHECK(judge_img["verdict"] == "immoral");

  CHECK_THROWS_AS(pipeline.judge(std::nullopt, std::nullopt), ContractViolation);
  CHECK_THROWS_AS(pipeline.judge("a gun", red_png), ContractViolation);

  // Explain a prompt: word importance present, heatmap + generated image on disk.
  const std::string explain_report = pipeline.explain("a gun flower", std::nullopt);
  const json explain_doc = json::parse(explain_report);
  REQUIRE(explain_doc.contains("word_importance"));
  const auto& entries = explain_doc["word_importance"]["entries"];
  REQUIRE(entries.size() == 3);
  CHECK(entries[1]["word"] == "gun");
  double best = -1.0;
  std::string best_word;
  for (const auto& entry : entries) {
    if (entry["importance"].get<double>() > best) {
      best = entry["importance"].get<double>();
      best_word = entry["word"].get<std::string>();
    }
  }
  CHECK(best_word == "gun");
  CHECK(fs::exists(dir.path / "heatmap.png"));
  CHECK(fs::exists(dir.path / "generated.png"));
  CHECK(explain_doc["saliency"]["coverage"].get<double>() > 0.99);

  // Image-only explain omits word importance.
  const json explain_img = json::parse(pipeline.explain(std::nullopt, red_png));
  CHECK_FALSE(explain_img.contains("word_importance"));

  // Manipulate with auto: sorted results, artifacts exist, exit-0 semantics.
  const std::string manipulate_report =
      pipeline.manipulate_command("a man shooting a gun", std::nullopt, "auto");
  const json manipulate_doc = json::parse(manipulate_report);
  const auto& results = manipulate_doc["results"];
  REQUIRE(results.size() == 4);
  double previous = -1.0;
  for (const auto& result : results) {
    const double post = result["post_score"].get<double>();
    CHECK(post >= previous);
    previous = post;
    CHECK(fs::exists(dir.path / result["artifact"].get<std::string>()));
  }
  CHECK(fs::exists(dir.path / "region.png"));

  // Identical invocations byte-identical (stub backends, fixed seed).
  Pipeline again(config);
  CHECK(again.train(csv) == train_report);
  CHECK(again.explain("a gun flower", std::nullopt) == explain_report);
  CHECK(again.manipulate_command("a man shooting a gun", std::nullopt, "auto") ==
        manipulate_report);
}

TEST_CASE("moral inputs short-circuit manipulation") {
  TempDir dir("vcm_pipe_moral");
  write_file(dir.file("train.csv"), kTinyTrainCsv);
  Pipeline pipeline(parse_pipeline_config(config_for(dir)));
  pipeline.train(dir.file("train.csv"));

  const json doc = json::parse(pipeline.manipulate_command("a calm flower", std::nullopt, "auto"));
  REQUIRE(doc["results"].size() == 1);
  CHECK(doc["results"][0]["strategy"] == "none-needed");
  CHECK(doc["still_immoral"] == false);
}

TEST_CASE("manipulate validates strategy and inputs") {
  TempDir dir("vcm_pipe_validate");
  write_file(dir.file("train.csv"), kTinyTrainCsv);
  Pipeline pipeline(parse_pipeline_config(config_for(dir)));
  pipeline.train(dir.file("train.csv"));
  CHECK_THROWS_AS(pipeline.manipulate_command("a gun", std::nullopt, "sharpen"),
                  ContractViolation);
  const std::string red_png = dir.file("red.png");
  write_image_png(ImageTensor::filled(16, 16, 1.0f, 0.0f, 0.0f), red_png);
  CHECK_THROWS_AS(pipeline.manipulate_command(std::nullopt, red_png, "word_swap"),
                  ContractViolation);
}

TEST_CASE("judge requires a trained head on disk") {
  TempDir dir("vcm_pipe_nohead");
  Pipeline pipeline(parse_pipeline_config(config_for(dir)));
  CHECK_THROWS_AS(pipeline.judge("a gun", std::nullopt), IoError);
}

TEST_CASE("train reports missing csv with the path") {
  TempDir dir("vcm_pipe_missing");
  Pipeline pipeline(parse_pipeline_config(config_for(dir)));
  try {
    pipeline.train(dir.file("nope.csv"));
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("nope.csv") != std::string::npos);
  }
}

TEST_CASE("eval runs image sets and likert files, continuing past failures") {
  TempDir dir("vcm_pipe_eval");
  write_file(dir.file("train.csv"), kTinyTrainCsv);
  Pipeline pipeline(parse_pipeline_config(config_for(dir)));
  pipeline.train(dir.file("train.csv"));

  // Synthetic manifest: 2 red immoral + 2 blue moral.
  std::string manifest = "label,path\n";
  for (int i = 0; i < 2; ++i) {
    const std::string red_name = "red" + std::to_string(i) + ".png";
    const std::string blue_name = "blue" + std::to_string(i) + ".png";
    write_image_png(ImageTensor::filled(8, 8, 1.0f, 0.0f, 0.0f), dir.file(red_name));
    write_image_png(ImageTensor::filled(8, 8, 0.0f, 0.0f, 1.0f), dir.file(blue_name));
    manifest += "1," + red_name + "\n0," + blue_name + "\n";
  }
  write_file(dir.file("images.csv"), manifest);
  write_file(dir.file("study.csv"),
             "evaluator_id,image_id,condition,rating\n"
             "e1,i1,original,5\ne2,i1,original,4\ne1,i1,inpaint,1\n");
  write_file(dir.file("spec.json"),
             "{\"image_sets\": [{\"name\": \"synthetic\", \"manifest\": \"images.csv\"},"
             " {\"name\": \"broken\", \"manifest\": \"missing.csv\"}],"
             " \"likert_csvs\": [\"study.csv\"]}");

  const Pipeline::EvalOutput output = pipeline.eval(dir.file("spec.json"));
  const json doc = json::parse(output.report_json);
  REQUIRE(doc["accuracy"].size() == 1);
  CHECK(doc["accuracy"][0]["dataset"] == "synthetic");
  CHECK(doc["accuracy"][0]["accuracy"].get<double>() == 1.0);
  REQUIRE(doc["likert"].size() == 1);
  CHECK(doc["likert"][0]["conditions"][0]["condition"] == "original");
  CHECK(doc["likert"][0]["conditions"][0]["mean"].get<double>() == doctest::Approx(4.5));
  REQUIRE(doc["errors"].size() == 1);
  CHECK(doc["errors"][0]["dataset"] == "broken");
  CHECK(output.table_text.find("synthetic") != std::string::npos);
  CHECK(output.table_text.find("original") != std::string::npos);
  CHECK(fs::exists(dir.path / "eval_report.json"));

  // An empty spec is a usage error.
  write_file(dir.file("empty.json"), "{}");
  CHECK_THROWS_AS(pipeline.eval(dir.file("empty.json")), ContractViolation);
}

TEST_CASE("reports quote scores with six decimals") {
  TempDir dir("vcm_pipe_decimals");
  write_file(dir.file("train.csv"), kTinyTrainCsv);
  Pipeline pipeline(parse_pipeline_config(config_for(dir)));
  pipeline.train(dir.file("train.csv"));
  const std::string report = pipeline.judge("a gun", std::nullopt);
  const size_t at = report.find("\"pre_score\":");
  REQUIRE(at != std::string::npos);
  const std::string tail = report.substr(at + 12, 9);
  // 0.xxxxxx followed by a separator: exactly six fractional digits.
  CHECK(tail[0] == '0');
  CHECK(tail[1] == '.');
  for (int i = 2; i < 8; ++i) CHECK((tail[i] >= '0' && tail[i] <= '9'));
  const bool ninth_is_digit = tail[8] >= '0' && tail[8] <= '9';
  CHECK_FALSE(ninth_is_digit);
}

TEST_CASE("report files match the returned documents") {
  TempDir dir("vcm_pipe_files");
  write_file(dir.file("train.csv"), kTinyTrainCsv);
  Pipeline pipeline(parse_pipeline_config(config_for(dir)));
  const std::string report = pipeline.train(dir.file("train.csv"));
  CHECK(slurp(dir.file("train_report.json")) == report + "\n");
}

TEST_CASE("external text embedder round-trips through a local HTTP server") {
  httplib::Server server;
  server.Post("/embed_text", [](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    // Echo a deterministic embedding: e1 if any request word is "gun".
    std::vector<double> embedding(8, 0.0);
    bool has_gun = false;
    for (const auto& word : body["words"]) has_gun = has_gun || word == "gun";
    embedding[has_gun ? 0 : 1] = 2.0;  // non-unit on purpose; adapter normalizes
    res.set_content(json{{"embedding", embedding}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  BackendConfig config;
  config.kind = BackendConfig::Kind::kExternal;
  config.endpoint = "http://127.0.0.1:" + std::to_string(port);
  const auto embedder = make_http_text_embedder(config);
  const EmbeddingVector e = embedder->embed_text({"a", "gun"});
  CHECK(e[0] == doctest::Approx(1.0));
  CHECK(l2_norm(e) == doctest::Approx(1.0));
  const EmbeddingVector other = embedder->embed_text({"calm"});
  CHECK(other[1] == doctest::Approx(1.0));

  server.stop();
  server_thread.join();
}

TEST_CASE("a constant-score head normalizes its heatmap to black") {
  TempDir dir("vcm_pipe_flat");
  // Zero weights: every logit is 0, every score 0.5, saliency constant.
  ClassifierHead zero;
  zero.input_dim = 8;
  zero.hidden_dim = 4;
  zero.w1.assign(32, 0.0);
  zero.b1.assign(4, 0.0);
  zero.w2.assign(4, 0.0);
  save_head(zero, dir.file("head.vcm"));

  Pipeline pipeline(parse_pipeline_config(config_for(dir)));
  const std::string red_png = dir.file("red.png");
  write_image_png(ImageTensor::filled(16, 16, 1.0f, 0.0f, 0.0f), red_png);
  pipeline.explain(std::nullopt, red_png);
  const ImageTensor heatmap = read_image_png(dir.file("heatmap.png"));
  for (float v : heatmap.data) CHECK(v == 0.0f);
}
